#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fundtrack/market_data.hpp"

namespace fundtrack {

struct ScreenConfig {
  int min_fund_age_days = 90;   // "listed more than 3 months", month = 30 days
  int min_stock_age_days = 90;
};

// (id, first rule that rejected it)
struct Exclusion {
  std::string id;
  std::string rule;
};

struct FundScreenResult {
  Date as_of = 0;
  std::vector<std::string> fund_ids;  // sorted
  std::vector<Exclusion> excluded;
};

struct StockScreenResult {
  Date as_of = 0;
  std::set<std::string> tickers;
  std::vector<Exclusion> excluded;
};

// Retains open-ended Equity/Hybrid funds that are not ETF-like, not of an
// excluded type (QDII/FoF/structured/guarantee), listed at least
// min_fund_age_days before as_of, deduplicated across share classes (the
// lexicographically smallest suffix of each normalized name survives).
// Rules are applied in that order; the exclusion log records the first hit.
FundScreenResult screen_funds(const std::vector<FundMeta>& funds, Date as_of,
                              const ScreenConfig& config = {});

// Union of the reports' holdings, restricted to A-share instruments listed
// at least min_stock_age_days before as_of and not suspended at as_of (a
// missing bar at as_of counts as suspended). ST names pass through; no name
// rule exists here. Throws std::invalid_argument when a held ticker is
// absent from `instruments`.
StockScreenResult screen_stocks(const std::vector<const FundReport*>& reports,
                                const std::vector<InstrumentMeta>& instruments,
                                const std::map<std::string, const PriceBar*>& day_bars,
                                Date as_of, const ScreenConfig& config = {});

// Share-class normalization used for dedup: strips the fund's class suffix
// (with an optional '_' or ' ' separator) from the end of the name.
std::string normalized_fund_name(const FundMeta& fund);

}  // namespace fundtrack
