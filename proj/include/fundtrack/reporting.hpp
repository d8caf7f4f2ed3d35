#pragma once

#include <filesystem>
#include <optional>

#include "fundtrack/analytics.hpp"
#include "fundtrack/pipeline.hpp"

namespace fundtrack {

// Writes every artifact of a strategy run into `dir` (created if absent):
//   equity.csv       date,equity,cash
//   fills.csv        date,ticker,side,shares,ref_price,exec_price,commission
//   holdings.csv     date,ticker,shares,weight
//   correlation.csv  date,correlation   (63-day rolling, defined windows)
//   exposure.csv     date,sector,exposure
//   excess.csv       date,cumulative_excess_return
//   report.json      headline metrics + per-rebalance diagnostics
// All writes are atomic (temp file + rename).
void write_run_outputs(const std::filesystem::path& dir,
                       const MarketTables& tables, const StrategyConfig& config,
                       const PipelineResult& result);

// Dumps one assembled problem for offline inspection: P.csv, q.csv, C.csv,
// lower.csv, upper.csv as bare numeric tables at full double precision,
// tickers.csv for the variable order, and weights.csv when a solve
// succeeded. Existing files are overwritten.
void write_problem_dump(const std::filesystem::path& dir,
                        const AssembledProblem& problem,
                        const std::optional<WeightVector>& weights);

}  // namespace fundtrack
