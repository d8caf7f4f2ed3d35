#include "fundtrack/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fundtrack {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& returns) {
  const Eigen::Index n = returns.cols();
  if (n < 2) {
    throw std::invalid_argument("sample_covariance: need >= 2 days, got " +
                                std::to_string(n));
  }
  const Eigen::VectorXd mean = returns.rowwise().mean();
  const Eigen::MatrixXd centered = returns.colwise() - mean;
  return (centered * centered.transpose()) / static_cast<double>(n - 1);
}

CovarianceEstimate oas_shrink(const Eigen::MatrixXd& S, int n_obs,
                              std::vector<std::string> tickers, Date as_of) {
  const Eigen::Index p = S.rows();
  if (p == 0 || S.cols() != p) {
    throw std::invalid_argument("oas_shrink: S must be square and nonempty");
  }
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("oas_shrink: S is not symmetric");
  }
  if (n_obs < 2) {
    throw std::invalid_argument("oas_shrink: need n_obs >= 2, got " +
                                std::to_string(n_obs));
  }

  const double pd = static_cast<double>(p);
  const double tr = S.trace();
  const double tr2 = (S * S).trace();
  const double mu = tr / pd;

  const double denom =
      (static_cast<double>(n_obs) + 1.0 - 2.0 / pd) * (tr2 - tr * tr / pd);
  double rho;
  if (denom <= 0.0) {
    rho = 1.0;  // S already spherical (tr2 == tr²/p), includes p = 1
  } else {
    const double numer = (1.0 - 2.0 / pd) * tr2 + tr * tr;
    rho = std::clamp(numer / denom, 0.0, 1.0);
  }

  CovarianceEstimate out;
  out.as_of = as_of;
  out.tickers = std::move(tickers);
  out.matrix = (1.0 - rho) * S +
               rho * mu * Eigen::MatrixXd::Identity(p, p);
  out.shrinkage_rho = rho;
  out.n_obs = n_obs;
  return out;
}

double maxflat_volatility(const Eigen::VectorXd& returns,
                          const VolatilityKernel& kernel) {
  if (kernel.flat_days <= 0 || kernel.decay_days < 0) {
    throw std::invalid_argument("maxflat_volatility: kernel spans must be positive");
  }
  const Eigen::Index n = returns.size();
  if (n < kernel.flat_days) {
    throw std::invalid_argument("maxflat_volatility: series length " +
                                std::to_string(n) + " below kernel minimum " +
                                std::to_string(kernel.flat_days));
  }
  const Eigen::Index span =
      std::min<Eigen::Index>(n, kernel.flat_days + kernel.decay_days);
  // Age 0 = most recent observation = last element of the series.
  Eigen::VectorXd w(span);
  for (Eigen::Index age = 0; age < span; ++age) {
    w(age) = age < kernel.flat_days
                 ? 1.0
                 : static_cast<double>(kernel.flat_days + kernel.decay_days - age) /
                       static_cast<double>(kernel.decay_days);
  }
  w /= w.sum();

  double mean = 0.0;
  for (Eigen::Index age = 0; age < span; ++age) {
    mean += w(age) * returns(n - 1 - age);
  }
  double var = 0.0;
  for (Eigen::Index age = 0; age < span; ++age) {
    const double d = returns(n - 1 - age) - mean;
    var += w(age) * d * d;
  }
  return std::sqrt(std::max(var, 0.0));
}

std::set<std::string> select_low_vol(const std::set<std::string>& universe,
                                     const std::map<std::string, double>& scores,
                                     int k) {
  if (k <= 0) {
    throw std::invalid_argument("select_low_vol: k must be positive");
  }
  std::vector<std::pair<std::string, double>> order;
  order.reserve(universe.size());
  for (const std::string& ticker : universe) {
    const auto it = scores.find(ticker);
    if (it == scores.end()) {
      throw std::invalid_argument("select_low_vol: no score for " + ticker);
    }
    order.emplace_back(ticker, it->second);
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  std::set<std::string> out;
  for (std::size_t i = 0; i < order.size() && i < static_cast<std::size_t>(k); ++i) {
    out.insert(order[i].first);
  }
  return out;
}

}  // namespace fundtrack
