#include "fundtrack/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace fundtrack {

Series to_series(const std::vector<EquityPoint>& curve) {
  Series s;
  s.dates.reserve(curve.size());
  s.values.reserve(curve.size());
  for (const EquityPoint& p : curve) {
    s.dates.push_back(p.date);
    s.values.push_back(p.equity);
  }
  return s;
}

Series to_series(const IndexSeries& index) {
  Series s;
  s.dates.reserve(index.points().size());
  s.values.reserve(index.points().size());
  for (const IndexPoint& p : index.points()) {
    s.dates.push_back(p.date);
    s.values.push_back(p.level);
  }
  return s;
}

Series simple_returns(const Series& levels) {
  if (levels.values.size() < 2) {
    throw std::invalid_argument("simple_returns: need at least 2 points");
  }
  Series out;
  out.dates.assign(levels.dates.begin() + 1, levels.dates.end());
  out.values.reserve(levels.values.size() - 1);
  for (std::size_t i = 1; i < levels.values.size(); ++i) {
    if (levels.values[i - 1] <= 0.0) {
      throw std::invalid_argument("simple_returns: nonpositive level at " +
                                  format_date(levels.dates[i - 1]));
    }
    out.values.push_back(levels.values[i] / levels.values[i - 1] - 1.0);
  }
  return out;
}

PerformanceReport performance(const Series& curve) {
  const std::size_t n = curve.values.size();
  if (n < 2) {
    throw std::invalid_argument("performance: need at least 2 points");
  }
  PerformanceReport out;
  out.start = curve.dates.front();
  out.end = curve.dates.back();
  out.total_return_pct =
      (curve.values.back() / curve.values.front() - 1.0) * 100.0;

  std::vector<double> logret;
  logret.reserve(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (curve.values[i] <= 0.0 || curve.values[i - 1] <= 0.0) {
      throw std::invalid_argument("performance: nonpositive equity at " +
                                  format_date(curve.dates[i]));
    }
    logret.push_back(std::log(curve.values[i] / curve.values[i - 1]));
  }
  double mean = 0.0;
  for (double r : logret) mean += r;
  mean /= static_cast<double>(logret.size());
  double ss = 0.0;
  for (double r : logret) ss += (r - mean) * (r - mean);
  const double sd = logret.size() > 1
                        ? std::sqrt(ss / static_cast<double>(logret.size() - 1))
                        : 0.0;
  out.annualized_vol_pct = sd * std::sqrt(252.0) * 100.0;
  if (sd > 0.0) {
    out.sharpe = mean / sd * std::sqrt(252.0);
  }

  double peak = curve.values.front();
  double worst = 0.0;
  for (double v : curve.values) {
    peak = std::max(peak, v);
    worst = std::max(worst, (peak - v) / peak);
  }
  out.max_drawdown_pct = worst * 100.0;
  return out;
}

RollingCorrelation rolling_correlation(const Series& a, const Series& b,
                                       int window) {
  if (window < 2) {
    throw std::invalid_argument("rolling_correlation: window must be >= 2");
  }
  if (a.values.size() != b.values.size() || a.dates != b.dates) {
    throw std::invalid_argument("rolling_correlation: series are not aligned");
  }
  const std::size_t n = a.values.size();
  const std::size_t w = static_cast<std::size_t>(window);
  if (n < w) {
    throw std::invalid_argument("rolling_correlation: series shorter than window");
  }

  RollingCorrelation out;
  std::vector<double> present;
  for (std::size_t end = w; end <= n; ++end) {
    const std::size_t begin = end - w;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      ma += a.values[i];
      mb += b.values[i];
    }
    ma /= static_cast<double>(w);
    mb /= static_cast<double>(w);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double da = a.values[i] - ma;
      const double db = b.values[i] - mb;
      saa += da * da;
      sbb += db * db;
      sab += da * db;
    }
    out.dates.push_back(a.dates[end - 1]);
    if (saa <= 0.0 || sbb <= 0.0) {
      out.values.push_back(std::nullopt);
    } else {
      const double c =
          std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
      out.values.push_back(c);
      present.push_back(c);
    }
  }
  if (!present.empty()) {
    std::sort(present.begin(), present.end());
    const std::size_t m = present.size();
    out.median = m % 2 == 1 ? present[m / 2]
                            : 0.5 * (present[m / 2 - 1] + present[m / 2]);
  }
  return out;
}

std::vector<ExposureRow> industry_exposure_series(
    const std::vector<HoldingsRecord>& holdings, const IndustryMatrix& industry,
    const PriceTable& prices) {
  std::map<std::string, Eigen::Index> sector_of;
  for (std::size_t i = 0; i < industry.tickers.size(); ++i) {
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < industry.A.cols(); ++j) {
      if (industry.A(static_cast<Eigen::Index>(i), j) == 1.0) {
        col = j;
        break;
      }
    }
    sector_of[industry.tickers[i]] = col;
  }

  std::map<Date, std::vector<const HoldingsRecord*>> by_date;
  for (const HoldingsRecord& h : holdings) by_date[h.date].push_back(&h);

  std::vector<ExposureRow> out;
  for (const auto& [date, records] : by_date) {
    ExposureRow row;
    row.date = date;
    row.fractions.assign(static_cast<std::size_t>(industry.A.cols()), 0.0);
    double total = 0.0;
    for (const HoldingsRecord* h : records) {
      if (h->shares == 0) continue;
      const auto it = sector_of.find(h->ticker);
      if (it == sector_of.end() || it->second < 0) {
        throw std::invalid_argument(
            "industry_exposure_series: no sector for held ticker " + h->ticker);
      }
      const auto px = prices.close_on_or_before(h->ticker, date);
      if (!px) {
        throw std::invalid_argument("industry_exposure_series: no price for " +
                                    h->ticker + " by " + format_date(date));
      }
      const double value = static_cast<double>(h->shares) * *px;
      row.fractions[static_cast<std::size_t>(it->second)] += value;
      total += value;
      ++row.holdings_count;
    }
    if (total > 0.0) {
      for (double& f : row.fractions) f /= total;
    }
    out.push_back(std::move(row));
  }
  return out;
}

Series excess_curve(const Series& portfolio, const Series& benchmark) {
  std::map<Date, double> bench;
  for (std::size_t i = 0; i < benchmark.dates.size(); ++i) {
    bench.emplace(benchmark.dates[i], benchmark.values[i]);
  }
  std::vector<Date> common;
  std::vector<double> pv, bv;
  for (std::size_t i = 0; i < portfolio.dates.size(); ++i) {
    const auto it = bench.find(portfolio.dates[i]);
    if (it == bench.end()) continue;
    common.push_back(portfolio.dates[i]);
    pv.push_back(portfolio.values[i]);
    bv.push_back(it->second);
  }
  if (common.size() < 2) {
    throw std::invalid_argument(
        "excess_curve: fewer than 2 overlapping dates");
  }
  Series out;
  out.dates = common;
  out.values.resize(common.size());
  out.values[0] = 0.0;
  double cum = 0.0;
  for (std::size_t i = 1; i < common.size(); ++i) {
    const double rp = pv[i] / pv[i - 1] - 1.0;
    const double rb = bv[i] / bv[i - 1] - 1.0;
    cum += rp - rb;
    out.values[i] = cum;
  }
  return out;
}

}  // namespace fundtrack
