#include "fundtrack/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fundtrack {

namespace {

WeightVector normalize_scores(std::map<std::string, double> scores,
                              const char* op_name) {
  double total = 0.0;
  for (const auto& [ticker, s] : scores) {
    (void)ticker;
    total += s;
  }
  if (total <= 0.0) {
    throw std::invalid_argument(std::string(op_name) +
                                ": no positive holding mass in universe");
  }
  WeightVector out;
  for (auto& [ticker, s] : scores) {
    (void)ticker;
    s /= total;
  }
  out.entries = std::move(scores);
  return out;
}

}  // namespace

WeightVector weight_by_holding_mcap(const std::vector<const FundReport*>& reports,
                                    const std::set<std::string>& universe) {
  if (universe.empty()) {
    throw std::invalid_argument("weight_by_holding_mcap: empty universe");
  }
  std::map<std::string, double> mass;
  for (const FundReport* r : reports) {
    for (const Holding& h : r->holdings) {
      if (universe.count(h.ticker)) mass[h.ticker] += h.market_value;
    }
  }
  return normalize_scores(std::move(mass), "weight_by_holding_mcap");
}

WeightVector weight_by_holding_count(const std::vector<const FundReport*>& reports,
                                     const std::set<std::string>& universe) {
  if (universe.empty()) {
    throw std::invalid_argument("weight_by_holding_count: empty universe");
  }
  std::map<std::string, double> mass;
  for (const FundReport* r : reports) {
    for (const Holding& h : r->holdings) {
      if (universe.count(h.ticker)) mass[h.ticker] += 1.0;
    }
  }
  return normalize_scores(std::move(mass), "weight_by_holding_count");
}

WeightVector weight_by_weight_sum(const std::vector<const FundReport*>& reports,
                                  const std::set<std::string>& universe) {
  if (universe.empty()) {
    throw std::invalid_argument("weight_by_weight_sum: empty universe");
  }
  std::map<std::string, double> mass;
  for (const FundReport* r : reports) {
    for (const Holding& h : r->holdings) {
      if (universe.count(h.ticker)) mass[h.ticker] += h.weight_in_fund;
    }
  }
  return normalize_scores(std::move(mass), "weight_by_weight_sum");
}

std::set<std::string> select_top_count(const WeightVector& weights,
                                       std::size_t k) {
  if (weights.entries.empty()) {
    throw std::invalid_argument("select_top_count: empty weight vector");
  }
  std::vector<std::pair<std::string, double>> order(weights.entries.begin(),
                                                    weights.entries.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::set<std::string> out;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    out.insert(order[i].first);
  }
  return out;
}

std::set<std::string> select_top_fraction(const WeightVector& weights,
                                          double fraction) {
  if (weights.entries.empty()) {
    throw std::invalid_argument("select_top_fraction: empty weight vector");
  }
  if (fraction <= 0.0 || fraction > 1.0) {
    throw std::invalid_argument("select_top_fraction: fraction must be in (0,1]");
  }
  const std::size_t n = weights.entries.size();
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n) - 1e-12));
  return select_top_count(weights, std::max<std::size_t>(k, 1));
}

AlphaVector alpha_from_weights(const WeightVector& weights) {
  const std::size_t n = weights.entries.size();
  if (n < 2) {
    throw std::invalid_argument("alpha_from_weights: need at least 2 tickers");
  }
  double mean = 0.0;
  for (const auto& [ticker, w] : weights.entries) {
    (void)ticker;
    mean += w;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const auto& [ticker, w] : weights.entries) {
    (void)ticker;
    ss += (w - mean) * (w - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd <= 0.0) {
    throw std::invalid_argument(
        "alpha_from_weights: zero dispersion, scores undefined");
  }
  AlphaVector out;
  out.as_of = weights.as_of;
  for (const auto& [ticker, w] : weights.entries) {
    out.entries[ticker] = std::clamp((w - mean) / sd, -3.0, 3.0);
  }
  return out;
}

}  // namespace fundtrack
