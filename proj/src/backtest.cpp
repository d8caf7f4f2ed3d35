#include "fundtrack/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fundtrack {

void BacktestConfig::validate() const {
  if (initial_cash < 0 || commission_buy < 0 || commission_sell < 0 ||
      slippage < 0 || min_listing_age_days < 0) {
    throw std::invalid_argument("BacktestConfig: negative cost parameter");
  }
  if (lot_size < 1) {
    throw std::invalid_argument("BacktestConfig: lot_size must be >= 1");
  }
}

std::string to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }

Tradability tradability(const PriceBar* bar, const InstrumentMeta* meta,
                        Date as_of, Side side, int min_age_days) {
  if (bar == nullptr) return {false, "no_data"};
  if (meta != nullptr && meta->listing_date + min_age_days > as_of) {
    return {false, "recently_listed"};
  }
  if (bar->is_suspended) return {false, "suspended"};
  if (side == Side::Buy && bar->close >= bar->limit_up) {
    return {false, "limit_up"};
  }
  if (side == Side::Sell && bar->close <= bar->limit_down) {
    return {false, "limit_down"};
  }
  return {true, ""};
}

namespace {

const PriceBar* find_bar(const DaySnapshot& day, const std::string& ticker) {
  const auto it = day.bars.find(ticker);
  return it == day.bars.end() ? nullptr : it->second;
}

const InstrumentMeta* find_meta(const DaySnapshot& day, const std::string& ticker) {
  const auto it = day.metas.find(ticker);
  return it == day.metas.end() ? nullptr : it->second;
}

// Valuation price: today's close when a bar exists, else the last known one.
double mark_price(const DaySnapshot& day, const std::string& ticker) {
  const PriceBar* bar = find_bar(day, ticker);
  if (bar != nullptr) return bar->close;
  const auto it = day.last_close.find(ticker);
  if (it == day.last_close.end()) {
    throw std::runtime_error("rebalance: no price ever seen for held ticker " +
                             ticker);
  }
  return it->second;
}

}  // namespace

RebalanceOutcome rebalance(const PortfolioState& state, const WeightVector& target,
                           const DaySnapshot& day, const BacktestConfig& config) {
  config.validate();
  for (const auto& [ticker, w] : target.entries) {
    if (w < -1e-12) {
      throw std::invalid_argument("rebalance: negative target weight for " +
                                  ticker);
    }
  }

  RebalanceOutcome out;
  out.state = state;
  out.state.date = day.date;
  PortfolioState& next = out.state;

  double equity = next.cash;
  for (const auto& [ticker, shares] : next.positions) {
    equity += static_cast<double>(shares) * mark_price(day, ticker);
  }
  if (equity <= 0.0) {
    throw std::logic_error("rebalance: nonpositive pre-trade equity");
  }

  // Desired share counts over target ∪ held. Names that cannot trade keep
  // their current position and land in the skip log once.
  const double lot = static_cast<double>(config.lot_size);
  std::map<std::string, std::int64_t> desired;
  for (const auto& [ticker, w] : target.entries) {
    if (w <= 0.0) continue;
    const PriceBar* bar = find_bar(day, ticker);
    if (bar == nullptr || bar->is_suspended) {
      // Carrying the current position; valuation uses last known close.
      out.skips.push_back({day.date, ticker, bar == nullptr ? "no_data" : "suspended"});
      const auto held = next.positions.find(ticker);
      desired[ticker] = held == next.positions.end() ? 0 : held->second;
      continue;
    }
    const double shares_exact = w * equity / bar->close / lot;
    desired[ticker] =
        static_cast<std::int64_t>(std::floor(shares_exact + 1e-9)) *
        config.lot_size;
  }
  for (const auto& [ticker, shares] : next.positions) {
    (void)shares;
    desired.emplace(ticker, 0);  // liquidate names outside the target
  }

  // Sells first, ticker-ascending: proceeds fund the buys.
  struct Leg {
    std::string ticker;
    std::int64_t shares;
    double close;
  };
  std::vector<Leg> buys;
  for (const auto& [ticker, want] : desired) {
    const auto held_it = next.positions.find(ticker);
    const std::int64_t have = held_it == next.positions.end() ? 0 : held_it->second;
    if (want == have) continue;
    const PriceBar* bar = find_bar(day, ticker);
    const InstrumentMeta* meta = find_meta(day, ticker);
    const Side side = want > have ? Side::Buy : Side::Sell;
    const Tradability gate =
        tradability(bar, meta, day.date, side, config.min_listing_age_days);
    if (!gate.ok) {
      out.skips.push_back({day.date, ticker, gate.reason});
      continue;
    }
    if (side == Side::Sell) {
      const std::int64_t qty = have - want;
      const double exec = bar->close - config.slippage;
      if (exec <= 0.0) {
        out.skips.push_back({day.date, ticker, "price_below_slippage"});
        continue;
      }
      const double commission =
          config.commission_sell * static_cast<double>(qty) * exec;
      next.cash += static_cast<double>(qty) * exec - commission;
      if (want == 0) {
        next.positions.erase(ticker);
      } else {
        next.positions[ticker] = want;
      }
      out.fills.push_back(
          {day.date, ticker, Side::Sell, qty, bar->close, exec, commission});
    } else {
      buys.push_back({ticker, want - have, bar->close});
    }
  }

  // Total buy cost at exec prices including commission; scale down and
  // re-floor once if it exceeds cash. Flooring after scaling only shrinks
  // each leg, so the scaled total always fits.
  double total_cost = 0.0;
  for (const Leg& b : buys) {
    const double exec = b.close + config.slippage;
    total_cost +=
        static_cast<double>(b.shares) * exec * (1.0 + config.commission_buy);
  }
  if (total_cost > next.cash && total_cost > 0.0) {
    const double f = next.cash / total_cost;
    for (Leg& b : buys) {
      b.shares = static_cast<std::int64_t>(
                     std::floor(f * static_cast<double>(b.shares) / lot)) *
                 config.lot_size;
    }
  }
  for (const Leg& b : buys) {
    if (b.shares <= 0) continue;
    const double exec = b.close + config.slippage;
    const double commission =
        config.commission_buy * static_cast<double>(b.shares) * exec;
    next.cash -= static_cast<double>(b.shares) * exec + commission;
    next.positions[b.ticker] += b.shares;
    out.fills.push_back(
        {day.date, b.ticker, Side::Buy, b.shares, b.close, exec, commission});
  }
  if (next.cash < -1e-9) {
    throw std::logic_error("rebalance: cash went negative");
  }
  if (next.cash < 0.0) next.cash = 0.0;
  return out;
}

BacktestResult run_backtest(const MarketTables& tables,
                            const std::vector<Date>& schedule,
                            const WeightsProvider& provider,
                            const BacktestConfig& config, Date start, Date end) {
  config.validate();
  const auto& days = tables.prices.calendar().days();
  if (days.empty()) {
    throw std::invalid_argument("run_backtest: empty price calendar");
  }
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) {
      throw std::invalid_argument("run_backtest: schedule not increasing");
    }
  }
  const Date lo = start != 0 ? start : (schedule.empty() ? days.front() : schedule.front());
  const Date hi = end != 0 ? end : days.back();

  std::map<std::string, const InstrumentMeta*> metas;
  for (const InstrumentMeta& m : tables.instruments) metas.emplace(m.ticker, &m);

  BacktestResult out;
  PortfolioState state;
  state.cash = config.initial_cash;
  std::size_t next_rebalance = 0;
  while (next_rebalance < schedule.size() && schedule[next_rebalance] < lo) {
    ++next_rebalance;
  }

  for (Date d : days) {
    if (d < lo) continue;
    if (d > hi) break;

    if (next_rebalance < schedule.size() && d == schedule[next_rebalance]) {
      std::optional<WeightVector> maybe_target;
      try {
        DataView view(tables, d);
        maybe_target = provider(view, d);
      } catch (const std::exception& e) {
        throw std::runtime_error("run_backtest: provider failed on " +
                                 format_date(d) + ": " + e.what());
      }
      ++next_rebalance;
      if (!maybe_target) {
        double equity = state.cash;
        for (const auto& [ticker, shares] : state.positions) {
          equity += static_cast<double>(shares) *
                    tables.prices.close_on_or_before(ticker, d).value();
        }
        out.curve.push_back({d, equity, state.cash});
        continue;
      }
      const WeightVector target = *maybe_target;

      DaySnapshot snap;
      snap.date = d;
      auto add_ticker = [&](const std::string& ticker) {
        if (snap.bars.count(ticker)) return;
        snap.bars[ticker] = tables.prices.bar(ticker, d);
        const auto m = metas.find(ticker);
        snap.metas[ticker] = m == metas.end() ? nullptr : m->second;
        const auto px = tables.prices.close_on_or_before(ticker, d);
        if (px) snap.last_close[ticker] = *px;
      };
      for (const auto& [ticker, w] : target.entries) {
        (void)w;
        add_ticker(ticker);
      }
      for (const auto& [ticker, shares] : state.positions) {
        (void)shares;
        add_ticker(ticker);
      }

      RebalanceOutcome result = rebalance(state, target, snap, config);
      state = result.state;
      out.fills.insert(out.fills.end(), result.fills.begin(), result.fills.end());
      out.skips.insert(out.skips.end(), result.skips.begin(), result.skips.end());

      double equity = state.cash;
      std::map<std::string, double> values;
      for (const auto& [ticker, shares] : state.positions) {
        const double px = tables.prices.close_on_or_before(ticker, d).value();
        values[ticker] = static_cast<double>(shares) * px;
        equity += values[ticker];
      }
      for (const auto& [ticker, shares] : state.positions) {
        out.holdings.push_back(
            {d, ticker, shares, values.at(ticker) / equity});
      }
    }

    double equity = state.cash;
    for (const auto& [ticker, shares] : state.positions) {
      const auto px = tables.prices.close_on_or_before(ticker, d);
      if (!px) {
        throw std::runtime_error("run_backtest: no price for held ticker " +
                                 ticker + " by " + format_date(d));
      }
      equity += static_cast<double>(shares) * *px;
    }
    out.curve.push_back({d, equity, state.cash});
  }
  return out;
}

}  // namespace fundtrack
