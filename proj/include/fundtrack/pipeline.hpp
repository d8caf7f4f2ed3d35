#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fundtrack/backtest.hpp"
#include "fundtrack/construction.hpp"
#include "fundtrack/qp.hpp"
#include "fundtrack/risk.hpp"
#include "fundtrack/screener.hpp"

namespace fundtrack {

// Everything one strategy run needs, with mode-sensible defaults from
// track_defaults()/beat_defaults().
struct StrategyConfig {
  Date start = 0;  // 0 = derived from data
  Date end = 0;

  double top_fraction = 0.5;
  // Universe floor applied after top_fraction; 0 = automatic: small enough
  // per-stock caps force a floor of ceil(1.3/gamma) so the budget constraint
  // keeps slack even after tradability drops.
  int min_universe = 0;
  int low_vol_count = 100;  // beat mode sub-selection

  int rebalance_offset_days = 16;
  int report_staleness_days = 200;  // reject reports older than this at t
  ScreenConfig screen;

  int cov_window_days = 504;
  int cov_min_days = 126;
  VolatilityKernel vol_kernel;

  ProblemSpec problem;
  BacktestConfig backtest;
  qp::SolverSettings solver;

  static StrategyConfig track_defaults();
  static StrategyConfig beat_defaults();
  void validate() const;

  int effective_min_universe() const;
};

// Per-rebalance audit trail.
struct RebalanceDiagnostics {
  Date date = 0;
  int candidate_count = 0;  // screened stocks with enough history
  int universe_size = 0;
  std::string solver_status;
  int solver_iterations = 0;
  int names_emitted = 0;     // strictly positive target weights
  double max_weight = 0.0;
  double max_sector_exposure = 0.0;
  bool bands_relaxed = false;
  std::string skip_reason;   // nonempty when the date produced no trades
};

struct PipelineResult {
  BacktestResult backtest;
  std::vector<Date> schedule;
  std::vector<RebalanceDiagnostics> diagnostics;
};

// One rebalance date's fully assembled problem, for audits and QP dumps.
// Constraint row layout: row 0 budget, rows 1..n per-name box, last
// |sectors| rows the sector block.
struct AssembledProblem {
  Date date = 0;
  std::vector<std::string> tickers;  // variable order
  std::vector<std::string> sectors;  // sector row order
  Eigen::VectorXd sector_exposure;   // track: benchmark exposure per sector
  double band_width = 0.0;           // track: half-width actually applied
  int candidate_count = 0;           // screened names with enough history
  qp::QuadraticProgram qp;
  bool bands_relaxed = false;
};

// Builds the problem the strategy would solve at t using only data ≤ t.
// nullopt when the date would be skipped; `why` then names the stage.
std::optional<AssembledProblem> assemble_problem_at(const MarketTables& tables,
                                                    const StrategyConfig& config,
                                                    Date t,
                                                    std::string* why = nullptr);

// Solve + exact projection onto {0 ≤ w ≤ γ, Σw = 1}: the portfolio emitted
// for an assembled problem. A tracking problem reported infeasible is
// retried once with doubled exposure bands (mutating `problem` so dumps show
// what was actually solved). nullopt when no attempt reaches optimality or
// residuals small enough to accept.
std::optional<WeightVector> solve_assembled(AssembledProblem& problem,
                                            const StrategyConfig& config,
                                            RebalanceDiagnostics* diag = nullptr);

// Full strategy runs: quarterly schedule → per-date screen/weight/risk/QP →
// friction-aware backtest. Mode comes from config.problem.mode.
PipelineResult run_strategy(const MarketTables& tables,
                            const StrategyConfig& config);
PipelineResult run_track_strategy(const MarketTables& tables,
                                  const StrategyConfig& config);
PipelineResult run_beat_strategy(const MarketTables& tables,
                                 const StrategyConfig& config);

}  // namespace fundtrack
