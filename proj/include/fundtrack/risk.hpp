#pragma once

#include <Eigen/Dense>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fundtrack/dates.hpp"

namespace fundtrack {

struct CovarianceEstimate {
  Date as_of = 0;
  std::vector<std::string> tickers;
  Eigen::MatrixXd matrix;      // symmetric p×p, daily log-return units²
  double shrinkage_rho = 0.0;  // in [0, 1]
  int n_obs = 0;
};

// Unbiased (n−1) sample covariance of the day-column vectors of a
// tickers × days return matrix. Throws when days < 2.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& returns);

// Oracle-approximating shrinkage toward the scaled identity μI, μ = tr(S)/p:
//   ρ = min(1, [(1 − 2/p)·tr(S²) + tr(S)²]
//              / [(n_obs + 1 − 2/p)·(tr(S²) − tr(S)²/p)])
// Output is (1−ρ)·S + ρ·μ·I. A zero denominator means S is already spherical
// and maps to ρ = 1 (output S itself); p = 1 lands in the same convention.
// Throws when S is not square-symmetric within 1e-9 or n_obs < 2.
CovarianceEstimate oas_shrink(const Eigen::MatrixXd& S, int n_obs,
                              std::vector<std::string> tickers = {},
                              Date as_of = 0);

// Weight profile for maxflat_volatility: weight 1 over the most recent
// flat_days, then (flat_days + decay_days − p)/decay_days at age p counted
// from the newest observation, reaching ~0 at the oldest covered day.
struct VolatilityKernel {
  int flat_days = 63;
  int decay_days = 189;
};

// Weighted population standard deviation of a daily return series (oldest
// first, most recent last) under the kernel above; kernel truncated and
// renormalized when the series is shorter than flat+decay. Throws when the
// series is shorter than flat_days.
double maxflat_volatility(const Eigen::VectorXd& returns,
                          const VolatilityKernel& kernel = {});

// The k lowest-score tickers of `universe` (everything when k ≥ size);
// lexicographic tie-break. Throws when a universe member has no score.
std::set<std::string> select_low_vol(const std::set<std::string>& universe,
                                     const std::map<std::string, double>& scores,
                                     int k);

}  // namespace fundtrack
