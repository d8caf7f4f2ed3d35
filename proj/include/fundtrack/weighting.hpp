#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fundtrack/market_data.hpp"

namespace fundtrack {

// Nonnegative weights over tickers summing to 1.
struct WeightVector {
  Date as_of = 0;
  std::map<std::string, double> entries;
};

// Standardized cross-sectional scores clipped to [-3, 3].
struct AlphaVector {
  Date as_of = 0;
  std::map<std::string, double> entries;
};

// w_i ∝ Σ_funds holding market value of i, restricted to `universe` and
// renormalized. Throws when the restricted total is 0.
WeightVector weight_by_holding_mcap(const std::vector<const FundReport*>& reports,
                                    const std::set<std::string>& universe);

// w_i ∝ number of funds holding i.
WeightVector weight_by_holding_count(const std::vector<const FundReport*>& reports,
                                     const std::set<std::string>& universe);

// w_i ∝ Σ_funds in-fund weight of i.
WeightVector weight_by_weight_sum(const std::vector<const FundReport*>& reports,
                                  const std::set<std::string>& universe);

// The ⌈fraction·n⌉ largest-weight tickers; ties fall to the lexicographically
// smaller ticker. fraction ∈ (0, 1].
std::set<std::string> select_top_fraction(const WeightVector& weights,
                                          double fraction);

// The k largest-weight tickers (all of them when k ≥ n), same tie-break.
std::set<std::string> select_top_count(const WeightVector& weights,
                                       std::size_t k);

// Subtract mean, divide by sample (n−1) standard deviation, clip to ±3.
// Throws when fewer than 2 entries or the deviation is 0.
AlphaVector alpha_from_weights(const WeightVector& weights);

}  // namespace fundtrack
