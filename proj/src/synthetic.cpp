#include "fundtrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>

#include "fundtrack/csv.hpp"
#include "fundtrack/table_io.hpp"

namespace fundtrack {

namespace {

// mt19937_64 has a standardized sequence; pairing it with a hand-rolled
// Box-Muller keeps generated tables bit-identical across standard libraries
// (std::normal_distribution sequences are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t integer(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::string stock_ticker(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", 600000 + i);
  return buf;
}

std::string sector_code(int k) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "S%02d", k);
  return buf;
}

std::string fund_id_for(int i) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "F%04d", i + 1);
  return buf;
}

std::string fund_name_for(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "Fund_%04d", i + 1);
  return buf;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (stocks <= 0) throw std::invalid_argument("GeneratorSpec: stocks must be > 0");
  if (funds <= 0) throw std::invalid_argument("GeneratorSpec: funds must be > 0");
  if (decoy_funds < 0) throw std::invalid_argument("GeneratorSpec: decoy_funds < 0");
  if (sectors <= 0 || sectors > stocks) {
    throw std::invalid_argument("GeneratorSpec: sectors must be in [1, stocks]");
  }
  if (years <= 0) throw std::invalid_argument("GeneratorSpec: years must be > 0");
  if (market_vol < 0 || sector_vol < 0 || idio_vol < 0 || index_noise < 0) {
    throw std::invalid_argument("GeneratorSpec: volatilities must be >= 0");
  }
  if (index_members <= 0 || index_members > stocks) {
    throw std::invalid_argument("GeneratorSpec: index_members must be in [1, stocks]");
  }
  if (young_listing_fraction < 0 || young_listing_fraction > 0.5 ||
      other_board_fraction < 0 || other_board_fraction > 0.5) {
    throw std::invalid_argument("GeneratorSpec: decoy fractions must be in [0, 0.5]");
  }
  if (index_members + static_cast<int>(std::lround(
          (young_listing_fraction + other_board_fraction) * stocks)) > stocks) {
    throw std::invalid_argument(
        "GeneratorSpec: index members plus decoy stocks exceed stock count");
  }
  if (suspend_start_prob < 0 || suspend_start_prob > 0.5 ||
      suspend_stay_prob < 0 || suspend_stay_prob >= 1.0) {
    throw std::invalid_argument("GeneratorSpec: suspension probabilities out of range");
  }
}

GeneratorSpec load_generator_spec(const std::filesystem::path& path) {
  const KeyValueFile kv = KeyValueFile::parse(path);
  GeneratorSpec s;
  s.stocks = static_cast<int>(kv.get_int("stocks", s.stocks));
  s.funds = static_cast<int>(kv.get_int("funds", s.funds));
  s.decoy_funds = static_cast<int>(kv.get_int("decoy_funds", s.decoy_funds));
  s.sectors = static_cast<int>(kv.get_int("sectors", s.sectors));
  s.years = static_cast<int>(kv.get_int("years", s.years));
  s.start = kv.get_date("start", s.start);
  s.market_vol = kv.get_number("market_vol", s.market_vol);
  s.sector_vol = kv.get_number("sector_vol", s.sector_vol);
  s.idio_vol = kv.get_number("idio_vol", s.idio_vol);
  s.drift = kv.get_number("drift", s.drift);
  s.index_members = static_cast<int>(kv.get_int("index_members", s.index_members));
  s.index_noise = kv.get_number("index_noise", s.index_noise);
  s.suspend_start_prob = kv.get_number("suspend_start_prob", s.suspend_start_prob);
  s.suspend_stay_prob = kv.get_number("suspend_stay_prob", s.suspend_stay_prob);
  s.young_listing_fraction =
      kv.get_number("young_listing_fraction", s.young_listing_fraction);
  s.other_board_fraction =
      kv.get_number("other_board_fraction", s.other_board_fraction);
  const auto unknown = kv.unused_keys();
  if (!unknown.empty()) {
    throw ParseError(kv.origin() + ": unknown key \"" + unknown.front() + "\"");
  }
  s.validate();
  return s;
}

SyntheticMarket generate_synthetic_market(const GeneratorSpec& spec,
                                          std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);

  const Date start = spec.start != 0 ? spec.start : make_date(2015, 1, 5);
  const Date end = start + static_cast<int>(std::lround(spec.years * 365.2425));
  std::vector<Date> days;
  for (Date d = start; d < end; ++d) {
    if (!is_weekend(d)) days.push_back(d);
  }
  if (days.size() < 2) {
    throw std::invalid_argument("generate_synthetic_market: window too short");
  }
  const int n_days = static_cast<int>(days.size());
  const int n = spec.stocks;

  // Stock roles. Index members come first so they are always old A-share
  // names; the board and listing-age decoys live in the tail.
  const int n_other = static_cast<int>(std::lround(spec.other_board_fraction * n));
  const int n_young = static_cast<int>(std::lround(spec.young_listing_fraction * n));
  std::vector<InstrumentMeta> instruments(static_cast<std::size_t>(n));
  std::vector<Date> listing(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    InstrumentMeta& m = instruments[static_cast<std::size_t>(i)];
    m.ticker = stock_ticker(i);
    m.industry_code = sector_code(i % spec.sectors);
    m.board = Board::AShare;
    m.listing_date = start - 400 - static_cast<int>(rng.integer(2600));
    listing[static_cast<std::size_t>(i)] = m.listing_date;
  }
  for (int k = 0; k < n_other; ++k) {
    instruments[static_cast<std::size_t>(n - 1 - k)].board = Board::Other;
  }
  for (int k = 0; k < n_young; ++k) {
    const int i = n - 1 - n_other - k;
    // Young names list inside the first 70% of the window, so several quarters
    // still see them as too recent while later quarters admit them.
    const int offset = 20 + static_cast<int>(rng.integer(
        static_cast<std::uint64_t>(std::max(1, n_days * 7 / 10))));
    InstrumentMeta& m = instruments[static_cast<std::size_t>(i)];
    m.listing_date = days[static_cast<std::size_t>(std::min(offset, n_days - 40))];
    listing[static_cast<std::size_t>(i)] = m.listing_date;
  }

  // Disclosed index weights over the first index_members stocks, decaying so
  // a moderately sized replication universe captures most of the mass.
  std::vector<double> index_w(static_cast<std::size_t>(n), 0.0);
  {
    double total = 0.0;
    for (int i = 0; i < spec.index_members; ++i) {
      const double w = std::exp(-2.5 * i / spec.index_members) *
                       (0.8 + 0.4 * rng.uniform());
      index_w[static_cast<std::size_t>(i)] = w;
      total += w;
    }
    for (int i = 0; i < spec.index_members; ++i) {
      index_w[static_cast<std::size_t>(i)] /= total;
    }
  }

  // Per-stock drift, initial price, suspension state.
  std::vector<double> mu(static_cast<std::size_t>(n));
  std::vector<double> price(static_cast<std::size_t>(n));
  std::vector<char> suspended(static_cast<std::size_t>(n), 0);
  std::vector<char> listed_seen(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    mu[static_cast<std::size_t>(i)] = spec.drift + 0.00015 * rng.normal();
    price[static_cast<std::size_t>(i)] = snap_decimal(15.0 + 65.0 * rng.uniform(), 2);
  }

  std::vector<PriceBar> bars;
  bars.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n_days));
  std::vector<IndexPoint> index_points;
  index_points.reserve(static_cast<std::size_t>(n_days));
  double index_level = 1000.0;
  index_points.push_back({days[0], index_level});
  std::vector<double> prev_close(static_cast<std::size_t>(n), 0.0);

  std::vector<double> sector_shock(static_cast<std::size_t>(spec.sectors));
  for (int t = 0; t < n_days; ++t) {
    const Date d = days[static_cast<std::size_t>(t)];
    const double market_shock = spec.market_vol * rng.normal();
    for (int k = 0; k < spec.sectors; ++k) {
      sector_shock[static_cast<std::size_t>(k)] = spec.sector_vol * rng.normal();
    }
    double index_return = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const double u_susp = rng.uniform();
      const double shock = rng.normal();
      if (listing[si] > d) continue;  // not yet listed, draws stay aligned

      const bool first_bar = !listed_seen[si];
      listed_seen[si] = 1;
      const double prev = first_bar ? price[si] : prev_close[si];
      const double limit_up = snap_decimal(prev * 1.10, 2);
      const double limit_down = snap_decimal(prev * 0.90, 2);

      if (!first_bar) {
        if (suspended[si]) {
          if (u_susp >= spec.suspend_stay_prob) suspended[si] = 0;
        } else if (u_susp < spec.suspend_start_prob) {
          suspended[si] = 1;
        }
      }

      double close;
      if (suspended[si]) {
        close = prev;
      } else {
        const double r = mu[si] + market_shock +
                         sector_shock[static_cast<std::size_t>(i % spec.sectors)] +
                         spec.idio_vol * shock;
        close = snap_decimal(prev * std::exp(r), 2);
        close = std::min(std::max(close, limit_down), limit_up);
        close = std::max(close, 0.10);
      }

      PriceBar bar;
      bar.ticker = instruments[si].ticker;
      bar.date = d;
      bar.close = close;
      bar.prev_close = prev;
      bar.is_suspended = suspended[si] != 0;
      bar.limit_up = limit_up;
      bar.limit_down = limit_down;
      bars.push_back(std::move(bar));

      if (index_w[si] > 0.0 && t > 0) {
        index_return += index_w[si] * (close / prev - 1.0);
      }
      prev_close[si] = close;
    }
    if (t > 0) {
      const double noise =
          spec.index_noise > 0.0 ? spec.index_noise * rng.normal() : 0.0;
      index_level *= 1.0 + index_return + noise;
      index_points.push_back({d, snap_decimal(index_level, 4)});
    }
  }

  // Funds: `funds` eligible ones (the last one carries share class A and has
  // a class-C twin among the decoys), then decoys failing one rule each.
  std::vector<FundMeta> funds;
  for (int i = 0; i < spec.funds; ++i) {
    FundMeta f;
    f.fund_id = fund_id_for(i);
    f.name = fund_name_for(i);
    f.category = i % 2 == 0 ? FundCategory::Equity : FundCategory::Hybrid;
    f.is_open_ended = true;
    f.list_date = start - 200 - static_cast<int>(rng.integer(2000));
    if (i == spec.funds - 1) {
      f.name += "_A";
      f.share_class_suffix = "A";
    }
    funds.push_back(std::move(f));
  }
  for (int k = 0; k < spec.decoy_funds; ++k) {
    FundMeta f;
    f.fund_id = fund_id_for(spec.funds + k);
    f.name = "Decoy_" + std::to_string(k + 1);
    f.category = FundCategory::Equity;
    f.is_open_ended = true;
    f.list_date = start - 200 - static_cast<int>(rng.integer(2000));
    switch (k % 6) {
      case 0: f.is_open_ended = false; break;
      case 1: f.category = FundCategory::Other; break;
      case 2: f.is_etf_like = true; break;
      case 3: f.is_excluded_type = true; break;
      case 4:  // young fund, becomes eligible partway through the window
        f.list_date = days[static_cast<std::size_t>(
            std::min(n_days / 3, n_days - 1))];
        break;
      case 5:  // class-C twin of the last eligible fund
        f.name = fund_name_for(spec.funds - 1) + "_C";
        f.share_class_suffix = "C";
        break;
    }
    funds.push_back(std::move(f));
  }

  // Quarterly top-10 reports. Preference mixes disclosed index weight with a
  // uniform component so fund portfolios overlap the index but not exactly.
  std::vector<FundReport> reports;
  const std::vector<Date> quarters = quarter_ends_between(start, end - 1);
  for (Date q : quarters) {
    // Stocks with at least one bar by the quarter end are drawable.
    std::vector<int> avail;
    std::vector<double> pref;
    double pref_total = 0.0;
    for (int i = 0; i < n; ++i) {
      if (listing[static_cast<std::size_t>(i)] <= q) {
        avail.push_back(i);
        const double p = 0.6 * index_w[static_cast<std::size_t>(i)] +
                         0.4 / static_cast<double>(n);
        pref.push_back(p);
        pref_total += p;
      }
    }
    if (avail.size() < 10) continue;

    for (const FundMeta& f : funds) {
      FundReport r;
      r.fund_id = f.fund_id;
      r.quarter_end = q;
      r.publish_date = q + 12 + static_cast<int>(rng.integer(4));

      std::vector<int> picked;
      int guard = 0;
      while (picked.size() < 10 && guard < 10000) {
        ++guard;
        double target = rng.uniform() * pref_total;
        std::size_t idx = 0;
        for (; idx + 1 < avail.size(); ++idx) {
          target -= pref[idx];
          if (target <= 0.0) break;
        }
        const int stock = avail[idx];
        if (std::find(picked.begin(), picked.end(), stock) == picked.end()) {
          picked.push_back(stock);
        }
      }

      // First pass records target value per pick; shares, restated value and
      // weight are resolved against quarter-end closes once the price table
      // exists, below.
      const double nav = 3.0e8 + 3.0e9 * rng.uniform();
      for (std::size_t k = 0; k < picked.size(); ++k) {
        const int i = picked[k];
        const double target_w = 0.08 * std::exp(-0.12 * static_cast<double>(k)) *
                                (0.9 + 0.2 * rng.uniform());
        Holding h;
        h.ticker = instruments[static_cast<std::size_t>(i)].ticker;
        h.market_value = nav * target_w;
        r.holdings.push_back(std::move(h));
      }
      reports.push_back(std::move(r));
    }
  }

  SyntheticMarket out;
  out.tables.instruments = std::move(instruments);
  out.tables.prices = PriceTable::from_bars(std::move(bars));
  out.tables.funds = std::move(funds);
  out.tables.index = IndexSeries(std::move(index_points));

  // Resolve share counts now that the price table exists: round market value
  // to whole lots at the quarter-end close and restate value and weight.
  for (FundReport& r : reports) {
    double nav_estimate = 0.0;
    for (const Holding& h : r.holdings) nav_estimate += h.market_value;
    nav_estimate /= 0.45;  // top-10 block is roughly 45% of NAV
    for (Holding& h : r.holdings) {
      const auto close = out.tables.prices.close_on_or_before(h.ticker, r.quarter_end);
      const double px = close.value_or(10.0);
      std::int64_t shares =
          static_cast<std::int64_t>(std::floor(h.market_value / px / 100.0)) * 100;
      if (shares < 100) shares = 100;
      h.shares = shares;
      h.market_value = snap_decimal(static_cast<double>(shares) * px, 2);
      h.weight_in_fund = snap_decimal(h.market_value / nav_estimate, 6);
    }
    std::sort(r.holdings.begin(), r.holdings.end(),
              [](const Holding& a, const Holding& b) {
                return a.market_value != b.market_value
                           ? a.market_value > b.market_value
                           : a.ticker < b.ticker;
              });
    r.validate();
  }
  out.tables.reports = std::move(reports);

  for (int i = 0; i < spec.index_members; ++i) {
    out.index_weights.emplace_back(stock_ticker(i),
                                   index_w[static_cast<std::size_t>(i)]);
  }
  return out;
}

void write_synthetic_market(const std::filesystem::path& dir,
                            const SyntheticMarket& market) {
  std::filesystem::create_directories(dir);
  write_instruments(dir / "instruments.csv", market.tables.instruments);
  write_price_table(dir / "prices.csv", market.tables.prices);
  write_funds(dir / "funds.csv", market.tables.funds);
  write_fund_reports(dir / "fund_reports.csv", market.tables.reports);
  write_index(dir / "index.csv", market.tables.index);

  AtomicFileWriter w(dir / "index_weights.csv");
  w.write_line("ticker,weight");
  for (const auto& [ticker, weight] : market.index_weights) {
    w.write_line(ticker + "," + format_fixed(weight, 10));
  }
  w.commit();
}

}  // namespace fundtrack
