#include "fundtrack/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fundtrack {

std::string to_string(Board b) {
  return b == Board::AShare ? "A" : "other";
}

Board board_from_string(const std::string& s) {
  if (s == "A") return Board::AShare;
  if (s == "other") return Board::Other;
  throw std::invalid_argument("board_from_string: unknown board \"" + s + "\"");
}

std::string to_string(FundCategory c) {
  switch (c) {
    case FundCategory::Equity: return "Equity";
    case FundCategory::Hybrid: return "Hybrid";
    default: return "other";
  }
}

FundCategory fund_category_from_string(const std::string& s) {
  if (s == "Equity") return FundCategory::Equity;
  if (s == "Hybrid") return FundCategory::Hybrid;
  if (s == "other") return FundCategory::Other;
  throw std::invalid_argument("fund_category_from_string: unknown category \"" +
                              s + "\"");
}

void FundReport::validate() const {
  if (holdings.size() > 10) {
    throw std::invalid_argument("FundReport: fund " + fund_id + " quarter " +
                                format_date(quarter_end) + " has " +
                                std::to_string(holdings.size()) +
                                " holdings, limit is 10");
  }
  if (publish_date < quarter_end) {
    throw std::invalid_argument("FundReport: fund " + fund_id +
                                " publish_date " + format_date(publish_date) +
                                " precedes quarter_end " +
                                format_date(quarter_end));
  }
  for (const Holding& h : holdings) {
    if (h.weight_in_fund < 0.0 || h.weight_in_fund > 1.0) {
      throw std::invalid_argument("FundReport: fund " + fund_id + " holding " +
                                  h.ticker + " weight_in_fund " +
                                  std::to_string(h.weight_in_fund) +
                                  " outside [0,1]");
    }
    if (h.market_value < 0.0) {
      throw std::invalid_argument("FundReport: fund " + fund_id + " holding " +
                                  h.ticker + " has negative market_value");
    }
  }
}

IndexSeries::IndexSeries(std::vector<IndexPoint> points)
    : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].level <= 0.0) {
      throw std::invalid_argument("IndexSeries: nonpositive level on " +
                                  format_date(points_[i].date));
    }
    if (i > 0 && points_[i].date <= points_[i - 1].date) {
      throw std::invalid_argument("IndexSeries: dates not strictly increasing at " +
                                  format_date(points_[i].date));
    }
  }
}

namespace {
struct PointDateLess {
  bool operator()(const IndexPoint& p, Date d) const { return p.date < d; }
  bool operator()(Date d, const IndexPoint& p) const { return d < p.date; }
};
}  // namespace

std::optional<double> IndexSeries::level_on(Date d) const {
  const auto it = std::lower_bound(points_.begin(), points_.end(), d, PointDateLess{});
  if (it == points_.end() || it->date != d) return std::nullopt;
  return it->level;
}

std::optional<double> IndexSeries::level_on_or_before(Date d) const {
  const auto it = std::upper_bound(points_.begin(), points_.end(), d, PointDateLess{});
  if (it == points_.begin()) return std::nullopt;
  return std::prev(it)->level;
}

TradingCalendar::TradingCalendar(std::vector<Date> days) : days_(std::move(days)) {
  for (std::size_t i = 1; i < days_.size(); ++i) {
    if (days_[i] <= days_[i - 1]) {
      throw std::invalid_argument(
          "TradingCalendar: days not strictly increasing at " +
          format_date(days_[i]));
    }
  }
}

bool TradingCalendar::contains(Date d) const {
  return std::binary_search(days_.begin(), days_.end(), d);
}

std::optional<Date> TradingCalendar::next_on_or_after(Date d) const {
  const auto it = std::lower_bound(days_.begin(), days_.end(), d);
  if (it == days_.end()) return std::nullopt;
  return *it;
}

std::size_t TradingCalendar::index_of(Date d) const {
  const auto it = std::lower_bound(days_.begin(), days_.end(), d);
  if (it == days_.end() || *it != d) {
    throw std::invalid_argument("TradingCalendar: " + format_date(d) +
                                " is not a trading day");
  }
  return static_cast<std::size_t>(it - days_.begin());
}

std::vector<Date> rebalance_schedule(const TradingCalendar& calendar,
                                     const std::vector<Date>& quarter_ends,
                                     int offset_days) {
  std::vector<Date> out;
  out.reserve(quarter_ends.size());
  for (Date q : quarter_ends) {
    const auto day = calendar.next_on_or_after(q + offset_days);
    if (!day) {
      throw std::invalid_argument(
          "rebalance_schedule: calendar ends before " +
          format_date(q + offset_days) + " (quarter end " + format_date(q) + ")");
    }
    out.push_back(*day);
  }
  return out;
}

PriceTable PriceTable::from_bars(std::vector<PriceBar> bars) {
  std::sort(bars.begin(), bars.end(), [](const PriceBar& a, const PriceBar& b) {
    return a.ticker != b.ticker ? a.ticker < b.ticker : a.date < b.date;
  });
  PriceTable table;
  std::vector<Date> all_dates;
  all_dates.reserve(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const PriceBar& bar = bars[i];
    if (i > 0 && bars[i - 1].ticker == bar.ticker && bars[i - 1].date == bar.date) {
      throw std::invalid_argument("PriceTable: duplicate bar for " + bar.ticker +
                                  " on " + format_date(bar.date));
    }
    if (!bar.is_suspended) {
      if (bar.close <= 0.0 || bar.prev_close <= 0.0) {
        throw std::invalid_argument("PriceTable: nonpositive price for " +
                                    bar.ticker + " on " + format_date(bar.date));
      }
      if (bar.close < bar.limit_down - 1e-9 || bar.close > bar.limit_up + 1e-9) {
        throw std::invalid_argument("PriceTable: close outside limit band for " +
                                    bar.ticker + " on " + format_date(bar.date));
      }
    }
    all_dates.push_back(bar.date);
    table.by_ticker_[bar.ticker].push_back(bar);
  }
  table.n_bars_ = bars.size();
  table.tickers_.reserve(table.by_ticker_.size());
  for (const auto& [ticker, series] : table.by_ticker_) {
    table.tickers_.push_back(ticker);
    (void)series;
  }
  std::sort(all_dates.begin(), all_dates.end());
  all_dates.erase(std::unique(all_dates.begin(), all_dates.end()), all_dates.end());
  table.calendar_ = TradingCalendar(std::move(all_dates));
  return table;
}

bool PriceTable::has_ticker(const std::string& ticker) const {
  return by_ticker_.count(ticker) != 0;
}

const std::vector<PriceBar>& PriceTable::series(const std::string& ticker) const {
  const auto it = by_ticker_.find(ticker);
  if (it == by_ticker_.end()) {
    throw std::invalid_argument("PriceTable: unknown ticker \"" + ticker + "\"");
  }
  return it->second;
}

namespace {
struct BarDateLess {
  bool operator()(const PriceBar& b, Date d) const { return b.date < d; }
  bool operator()(Date d, const PriceBar& b) const { return d < b.date; }
};
}  // namespace

const PriceBar* PriceTable::bar(const std::string& ticker, Date d) const {
  const auto it = by_ticker_.find(ticker);
  if (it == by_ticker_.end()) return nullptr;
  const auto& series = it->second;
  const auto pos = std::lower_bound(series.begin(), series.end(), d, BarDateLess{});
  if (pos == series.end() || pos->date != d) return nullptr;
  return &*pos;
}

std::optional<double> PriceTable::close_on_or_before(const std::string& ticker,
                                                     Date d) const {
  const auto it = by_ticker_.find(ticker);
  if (it == by_ticker_.end()) return std::nullopt;
  const auto& series = it->second;
  const auto pos = std::upper_bound(series.begin(), series.end(), d, BarDateLess{});
  if (pos == series.begin()) return std::nullopt;
  return std::prev(pos)->close;
}

std::vector<PriceBar> PriceTable::all_bars() const {
  std::vector<PriceBar> out;
  out.reserve(n_bars_);
  for (const auto& [ticker, series] : by_ticker_) {
    (void)ticker;
    out.insert(out.end(), series.begin(), series.end());
  }
  return out;
}

ReturnMatrix log_returns(const PriceTable& prices,
                         const std::vector<std::string>& tickers,
                         Date first, Date last) {
  if (first > last) {
    throw std::invalid_argument("log_returns: window start after end");
  }
  const auto& all_days = prices.calendar().days();
  std::vector<Date> window;
  for (Date d : all_days) {
    if (d >= first && d <= last) window.push_back(d);
  }
  if (window.size() < 2) {
    throw std::invalid_argument("log_returns: window [" + format_date(first) +
                                ", " + format_date(last) +
                                "] holds fewer than 2 trading days");
  }

  ReturnMatrix out;
  out.tickers = tickers;
  out.dates.assign(window.begin() + 1, window.end());
  const Eigen::Index n = static_cast<Eigen::Index>(tickers.size());
  const Eigen::Index t = static_cast<Eigen::Index>(out.dates.size());
  out.values = Eigen::MatrixXd::Zero(n, t);
  out.carried.setZero(n, t);

  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string& ticker = tickers[static_cast<std::size_t>(i)];
    int observed = 0;
    double prev_close = 0.0;
    bool have_prev = false;
    {
      const PriceBar* b0 = prices.bar(ticker, window.front());
      if (b0 != nullptr) {
        if (b0->close <= 0.0) {
          throw std::invalid_argument("log_returns: nonpositive close for " +
                                      ticker + " on " + format_date(b0->date));
        }
        prev_close = b0->close;
        have_prev = true;
        ++observed;
      }
    }
    for (Eigen::Index j = 0; j < t; ++j) {
      const Date d = out.dates[static_cast<std::size_t>(j)];
      const PriceBar* b = prices.bar(ticker, d);
      if (b == nullptr || b->is_suspended || !have_prev) {
        out.carried(i, j) = 1;  // value stays 0
        if (b != nullptr && !have_prev && !b->is_suspended) {
          if (b->close <= 0.0) {
            throw std::invalid_argument("log_returns: nonpositive close for " +
                                        ticker + " on " + format_date(d));
          }
          prev_close = b->close;
          have_prev = true;
        }
        if (b != nullptr) ++observed;
        continue;
      }
      if (b->close <= 0.0) {
        throw std::invalid_argument("log_returns: nonpositive close for " +
                                    ticker + " on " + format_date(d));
      }
      out.values(i, j) = std::log(b->close / prev_close);
      prev_close = b->close;
      ++observed;
    }
    if (observed < 2) {
      throw std::invalid_argument("log_returns: ticker " + ticker +
                                  " has fewer than 2 observations in window");
    }
  }
  return out;
}

const InstrumentMeta* MarketTables::instrument(const std::string& ticker) const {
  for (const InstrumentMeta& m : instruments) {
    if (m.ticker == ticker) return &m;
  }
  return nullptr;
}

DataView::DataView(const MarketTables& tables, Date cutoff)
    : tables_(&tables), cutoff_(cutoff) {}

const std::vector<InstrumentMeta>& DataView::instruments() const {
  return tables_->instruments;
}

const InstrumentMeta* DataView::instrument(const std::string& ticker) const {
  return tables_->instrument(ticker);
}

const std::vector<FundMeta>& DataView::funds() const { return tables_->funds; }

std::vector<const FundReport*> DataView::latest_reports(int max_staleness_days) const {
  std::map<std::string, const FundReport*> best;
  for (const FundReport& r : tables_->reports) {
    if (r.publish_date > cutoff_) continue;
    if (cutoff_ - r.quarter_end > max_staleness_days) continue;
    auto [it, inserted] = best.emplace(r.fund_id, &r);
    if (!inserted && r.quarter_end > it->second->quarter_end) it->second = &r;
  }
  std::vector<const FundReport*> out;
  out.reserve(best.size());
  for (const auto& [id, r] : best) {
    (void)id;
    out.push_back(r);
  }
  return out;
}

std::vector<Date> DataView::trading_days() const {
  std::vector<Date> out;
  for (Date d : tables_->prices.calendar().days()) {
    if (d <= cutoff_) out.push_back(d);
  }
  return out;
}

const PriceBar* DataView::bar(const std::string& ticker, Date d) const {
  if (d > cutoff_) return nullptr;
  return tables_->prices.bar(ticker, d);
}

std::optional<double> DataView::close_on_or_before(const std::string& ticker,
                                                   Date d) const {
  return tables_->prices.close_on_or_before(ticker, std::min(d, cutoff_));
}

ReturnMatrix DataView::returns(const std::vector<std::string>& tickers,
                               Date first, Date last) const {
  if (last > cutoff_) {
    throw std::invalid_argument("DataView::returns: window end " +
                                format_date(last) + " is after cutoff " +
                                format_date(cutoff_));
  }
  return log_returns(tables_->prices, tickers, first, last);
}

std::vector<IndexPoint> DataView::index_points() const {
  std::vector<IndexPoint> out;
  for (const IndexPoint& p : tables_->index.points()) {
    if (p.date <= cutoff_) out.push_back(p);
  }
  return out;
}

}  // namespace fundtrack
