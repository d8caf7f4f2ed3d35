#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fundtrack/backtest.hpp"
#include "fundtrack/construction.hpp"
#include "fundtrack/market_data.hpp"

namespace fundtrack {

// A date-aligned numeric series (equity levels, index levels, returns).
struct Series {
  std::vector<Date> dates;
  std::vector<double> values;
};

Series to_series(const std::vector<EquityPoint>& curve);
Series to_series(const IndexSeries& index);
// Daily simple returns between consecutive points; one element shorter.
Series simple_returns(const Series& levels);

struct PerformanceReport {
  double total_return_pct = 0.0;
  double annualized_vol_pct = 0.0;     // sample std of daily log returns, √252
  std::optional<double> sharpe;        // absent when return variance is 0
  double max_drawdown_pct = 0.0;       // peak-to-trough, in [0, 100]
  Date start = 0;
  Date end = 0;
};

// Levels in, percentages out. Log returns drive vol and Sharpe (zero
// risk-free, sample standard deviation, 252-day annualization).
PerformanceReport performance(const Series& curve);

struct RollingCorrelation {
  std::vector<Date> dates;  // window end dates
  std::vector<std::optional<double>> values;  // absent on zero-variance windows
  std::optional<double> median;  // over present values
};

// Pearson correlation of the two return series on each trailing window of
// `window` observations. Inputs must be date-aligned and at least one window
// long.
RollingCorrelation rolling_correlation(const Series& a, const Series& b,
                                       int window = 63);

struct ExposureRow {
  Date date = 0;
  std::vector<double> fractions;  // per sector, invested-value weighted
  int holdings_count = 0;
};

// Sector fractions of each holdings snapshot, valued at that date's last
// known closes; rows sum to 1 on invested dates and to 0 on empty ones.
// Sector order follows `industry.sectors`. Throws when a held ticker has no
// row in the industry matrix.
std::vector<ExposureRow> industry_exposure_series(
    const std::vector<HoldingsRecord>& holdings, const IndustryMatrix& industry,
    const PriceTable& prices);

// Cumulative sum of (portfolio simple return − benchmark simple return) over
// the common dates; starts at 0 on the first common date. Throws when fewer
// than 2 common dates exist.
Series excess_curve(const Series& portfolio, const Series& benchmark);

}  // namespace fundtrack
