#include "fundtrack/construction.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace fundtrack {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ProblemSpec::validate() const {
  if (beta < 0.0 || kappa < 0.0) {
    throw std::invalid_argument("ProblemSpec: beta and kappa must be >= 0");
  }
  if (gamma <= 0.0 || gamma > 1.0) {
    throw std::invalid_argument("ProblemSpec: gamma must be in (0, 1]");
  }
  if (band_width < 0.0 || sector_cap <= 0.0 || sector_cap > 1.0) {
    throw std::invalid_argument("ProblemSpec: bad band_width or sector_cap");
  }
  if (return_window_days < 2) {
    throw std::invalid_argument("ProblemSpec: return_window_days must be >= 2");
  }
}

IndustryMatrix industry_matrix(const std::vector<std::string>& tickers,
                               const std::vector<InstrumentMeta>& instruments) {
  std::map<std::string, const InstrumentMeta*> meta;
  for (const InstrumentMeta& m : instruments) meta.emplace(m.ticker, &m);

  std::set<std::string> sector_set;
  std::vector<const InstrumentMeta*> rows;
  rows.reserve(tickers.size());
  for (const std::string& t : tickers) {
    const auto it = meta.find(t);
    if (it == meta.end()) {
      throw std::invalid_argument("industry_matrix: ticker " + t +
                                  " missing from instruments table");
    }
    rows.push_back(it->second);
    sector_set.insert(it->second->industry_code);
  }

  IndustryMatrix out;
  out.tickers = tickers;
  out.sectors.assign(sector_set.begin(), sector_set.end());
  out.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tickers.size()),
                                static_cast<Eigen::Index>(out.sectors.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto pos = std::lower_bound(out.sectors.begin(), out.sectors.end(),
                                      rows[i]->industry_code);
    out.A(static_cast<Eigen::Index>(i),
          static_cast<Eigen::Index>(pos - out.sectors.begin())) = 1.0;
  }
  return out;
}

std::map<std::string, double> benchmark_industry_exposure(
    const std::vector<const FundReport*>& reports,
    const std::vector<InstrumentMeta>& instruments) {
  std::map<std::string, const InstrumentMeta*> meta;
  for (const InstrumentMeta& m : instruments) meta.emplace(m.ticker, &m);

  std::map<std::string, double> sector_mass;
  double total = 0.0;
  for (const FundReport* r : reports) {
    for (const Holding& h : r->holdings) {
      const auto it = meta.find(h.ticker);
      if (it == meta.end()) continue;  // unknowable sector, skip the holding
      sector_mass[it->second->industry_code] += h.market_value;
      total += h.market_value;
    }
  }
  if (total <= 0.0) {
    throw std::invalid_argument(
        "benchmark_industry_exposure: no holding value over known instruments");
  }
  for (auto& [sector, mass] : sector_mass) {
    (void)sector;
    mass /= total;
  }
  return sector_mass;
}

namespace {

// Shared constraint block: budget row, per-stock box, then sector rows.
qp::QuadraticProgram assemble(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                              const IndustryMatrix& industry,
                              const Eigen::VectorXd& sector_lower,
                              const Eigen::VectorXd& sector_upper, double gamma) {
  const Eigen::Index n = q.size();
  const Eigen::Index s = industry.A.cols();
  qp::QuadraticProgram out;
  out.P = P;
  out.q = q;
  out.C = Eigen::MatrixXd::Zero(1 + n + s, n);
  out.lower = Eigen::VectorXd::Zero(1 + n + s);
  out.upper = Eigen::VectorXd::Zero(1 + n + s);

  out.C.row(0).setOnes();
  out.lower(0) = 1.0;
  out.upper(0) = 1.0;

  out.C.block(1, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
  out.lower.segment(1, n).setZero();
  out.upper.segment(1, n).setConstant(gamma);

  if (s > 0) {
    out.C.bottomRows(s) = industry.A.transpose();
    out.lower.tail(s) = sector_lower;
    out.upper.tail(s) = sector_upper;
  }
  return out;
}

}  // namespace

qp::QuadraticProgram build_tracking_problem(
    const Eigen::VectorXd& alpha, const Eigen::MatrixXd& sigma,
    const Eigen::MatrixXd& stock_returns, const Eigen::VectorXd& bench_returns,
    const IndustryMatrix& industry, const ExposureBand& bands,
    const ProblemSpec& spec) {
  spec.validate();
  const Eigen::Index n = alpha.size();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw std::invalid_argument("build_tracking_problem: sigma shape mismatch");
  }
  if (stock_returns.rows() != n ||
      stock_returns.cols() != bench_returns.size()) {
    throw std::invalid_argument(
        "build_tracking_problem: return window shape mismatch");
  }
  if (industry.A.rows() != n) {
    throw std::invalid_argument(
        "build_tracking_problem: industry matrix row mismatch");
  }
  const Eigen::Index s = industry.A.cols();
  if (bands.lower.size() != s || bands.upper.size() != s) {
    throw std::invalid_argument("build_tracking_problem: band size mismatch");
  }
  for (Eigen::Index j = 0; j < s; ++j) {
    if (bands.lower(j) < 0.0 || bands.lower(j) > bands.upper(j) ||
        bands.upper(j) > 1.0) {
      throw std::invalid_argument("build_tracking_problem: malformed band at " +
                                  industry.sectors[static_cast<std::size_t>(j)]);
    }
  }
  if (bands.lower.sum() > 1.0 + 1e-12) {
    throw std::invalid_argument(
        "build_tracking_problem: sector lower bounds exceed the budget");
  }
  if (static_cast<double>(n) * spec.gamma < 1.0 - 1e-12) {
    throw std::invalid_argument(
        "build_tracking_problem: n*gamma < 1, budget unreachable");
  }

  const Eigen::MatrixXd P =
      2.0 * spec.beta * sigma +
      2.0 * spec.kappa * (stock_returns * stock_returns.transpose());
  const Eigen::VectorXd q = -alpha - 2.0 * spec.kappa * (stock_returns * bench_returns);
  return assemble(0.5 * (P + P.transpose()), q, industry, bands.lower,
                  bands.upper, spec.gamma);
}

qp::QuadraticProgram build_beat_problem(const Eigen::VectorXd& alpha,
                                        const Eigen::MatrixXd& sigma,
                                        const IndustryMatrix& industry,
                                        const ProblemSpec& spec) {
  spec.validate();
  const Eigen::Index n = alpha.size();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw std::invalid_argument("build_beat_problem: sigma shape mismatch");
  }
  if (industry.A.rows() != n) {
    throw std::invalid_argument("build_beat_problem: industry matrix row mismatch");
  }
  const Eigen::Index s = industry.A.cols();
  if (static_cast<double>(s) * spec.sector_cap < 1.0 - 1e-12) {
    throw std::invalid_argument(
        "build_beat_problem: " + std::to_string(s) + " sectors at cap " +
        std::to_string(spec.sector_cap) + " cannot cover the budget");
  }
  if (static_cast<double>(n) * spec.gamma < 1.0 - 1e-12) {
    throw std::invalid_argument(
        "build_beat_problem: n*gamma < 1, budget unreachable");
  }

  const Eigen::MatrixXd P = 2.0 * spec.beta * sigma;
  const Eigen::VectorXd lower = Eigen::VectorXd::Constant(s, -kInf);
  const Eigen::VectorXd upper = Eigen::VectorXd::Constant(s, spec.sector_cap);
  return assemble(0.5 * (P + P.transpose()), -alpha, industry, lower, upper,
                  spec.gamma);
}

}  // namespace fundtrack
