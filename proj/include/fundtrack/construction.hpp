#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "fundtrack/market_data.hpp"
#include "fundtrack/qp.hpp"

namespace fundtrack {

// 0/1 membership of each ticker (row) in each sector (column); every row
// sums to exactly 1.
struct IndustryMatrix {
  std::vector<std::string> tickers;
  std::vector<std::string> sectors;  // sorted, unique
  Eigen::MatrixXd A;                 // |tickers| × |sectors|
};

// Builds the membership matrix for `tickers` from instrument metadata.
// Sector set = the sectors that appear among these tickers, sorted. Throws
// when a ticker is missing from the instruments table.
IndustryMatrix industry_matrix(const std::vector<std::string>& tickers,
                               const std::vector<InstrumentMeta>& instruments);

struct ExposureBand {
  Eigen::VectorXd lower;  // per sector, in [0,1]
  Eigen::VectorXd upper;
};

enum class ProblemMode { Track, Beat };

struct ProblemSpec {
  ProblemMode mode = ProblemMode::Track;
  double beta = 1.0;    // risk weight
  double kappa = 10.0;  // tracking weight (track mode)
  double gamma = 0.01;  // per-stock cap
  double band_width = 0.02;   // track: benchmark exposure ± this, clipped
  double sector_cap = 0.10;   // beat: per-sector upper bound
  int return_window_days = 63;

  void validate() const;  // throws std::invalid_argument
};

// Holding-value-weighted sector exposure of the reports' aggregate
// portfolio, over all held tickers found in `instruments`; sums to 1.
// Sector keys follow the instruments' industry codes.
std::map<std::string, double> benchmark_industry_exposure(
    const std::vector<const FundReport*>& reports,
    const std::vector<InstrumentMeta>& instruments);

// min −αᵀw + β·wᵀΣw + κ·‖Rᵀw − r‖²  s.t.  Σw = 1, 0 ≤ w ≤ γ, φ₁ ≤ Aw ≤ φ₂,
// expanded to P = 2βΣ + 2κRRᵀ, q = −α − 2κRr. The ‖w‖₁ sparsity term is a
// constant 1 under the long-only budget and is omitted. R is tickers × days,
// bench_returns one entry per day. Throws when shapes disagree or the band
// lower bounds already exceed the budget.
qp::QuadraticProgram build_tracking_problem(
    const Eigen::VectorXd& alpha, const Eigen::MatrixXd& sigma,
    const Eigen::MatrixXd& stock_returns, const Eigen::VectorXd& bench_returns,
    const IndustryMatrix& industry, const ExposureBand& bands,
    const ProblemSpec& spec);

// min −αᵀw + β·wᵀΣw  s.t.  Σw = 1, 0 ≤ w ≤ γ, Aw ≤ sector_cap.
// Throws when the represented sectors cannot cover the budget
// (|sectors|·sector_cap < 1).
qp::QuadraticProgram build_beat_problem(const Eigen::VectorXd& alpha,
                                        const Eigen::MatrixXd& sigma,
                                        const IndustryMatrix& industry,
                                        const ProblemSpec& spec);

}  // namespace fundtrack
