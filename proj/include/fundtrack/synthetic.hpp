#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fundtrack/market_data.hpp"

namespace fundtrack {

// Shape and scale of a generated market. Daily log returns follow a
// three-part factor model (market + sector + idiosyncratic); the index is a
// disclosed fixed-weight combination of member-stock simple returns plus
// optional noise, so tests can reconstruct it from the written tables.
struct GeneratorSpec {
  int stocks = 200;
  int funds = 40;        // always-eligible funds
  int decoy_funds = 12;  // each fails exactly one screening rule
  int sectors = 10;
  int years = 5;
  Date start = 0;  // 0 → 2015-01-05

  double market_vol = 0.012;
  double sector_vol = 0.004;
  double idio_vol = 0.010;
  double drift = 0.0001;

  int index_members = 120;      // heaviest-listed stocks form the index
  double index_noise = 0.0005;  // daily stdev of extra index return, 0 = exact

  double suspend_start_prob = 0.002;
  double suspend_stay_prob = 0.80;
  double young_listing_fraction = 0.05;  // listed inside the window
  double other_board_fraction = 0.02;    // non-A-share decoys

  void validate() const;  // throws std::invalid_argument
};

GeneratorSpec load_generator_spec(const std::filesystem::path& path);

struct SyntheticMarket {
  MarketTables tables;
  // Disclosed index composition, ticker → weight, weights sum to 1.
  std::vector<std::pair<std::string, double>> index_weights;
};

// Pure function of (spec, seed).
SyntheticMarket generate_synthetic_market(const GeneratorSpec& spec,
                                          std::uint64_t seed);

// Writes instruments.csv, prices.csv, funds.csv, fund_reports.csv, index.csv
// and index_weights.csv into dir.
void write_synthetic_market(const std::filesystem::path& dir,
                            const SyntheticMarket& market);

}  // namespace fundtrack
