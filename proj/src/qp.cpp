#include "fundtrack/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fundtrack::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoEqualityFactor = 1e3;  // stiffer step on equality rows
constexpr double kRhoFreeValue = 1e-6;      // loose step on unbounded rows
constexpr double kMinScaling = 1e-4;
constexpr double kMaxScaling = 1e4;

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Per-row step parameters: equality rows get a stiff value, free rows a
// loose one, so the projection step enforces equalities quickly without
// dragging inactive rows.
Eigen::VectorXd row_rho(const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper, double base) {
  Eigen::VectorXd rho(lower.size());
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower(i)) && !std::isfinite(upper(i))) {
      rho(i) = kRhoFreeValue;
    } else if (upper(i) - lower(i) < 1e-12) {
      rho(i) = base * kRhoEqualityFactor;
    } else {
      rho(i) = base;
    }
  }
  return rho;
}

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double sigma_used = 0.0;
};

// Factor P + σI + Cᵀdiag(ρ)C, growing σ by 10× up to a bound when the
// Cholesky fails; failure past the bound means P is not PSD.
Factorization factor_reduced_system(const Eigen::MatrixXd& P,
                                    const Eigen::MatrixXd& C,
                                    const Eigen::VectorXd& rho, double sigma) {
  const Eigen::Index n = P.rows();
  const Eigen::MatrixXd base = P + C.transpose() * rho.asDiagonal() * C;
  double s = sigma;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Factorization f;
    f.llt.compute(base + s * Eigen::MatrixXd::Identity(n, n));
    if (f.llt.info() == Eigen::Success) {
      f.sigma_used = s;
      return f;
    }
    s *= 10.0;
  }
  throw std::invalid_argument(
      "solve: P is not positive semidefinite (Cholesky failed beyond "
      "regularization bound)");
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

void QuadraticProgram::validate() const {
  const Eigen::Index n = q.size();
  const Eigen::Index m = lower.size();
  if (P.rows() != n || P.cols() != n) {
    throw std::invalid_argument("QuadraticProgram: P must be n×n with n = |q|");
  }
  if (C.rows() != m || (m > 0 && C.cols() != n)) {
    throw std::invalid_argument("QuadraticProgram: C must be m×n with m = |lower|");
  }
  if (upper.size() != m) {
    throw std::invalid_argument("QuadraticProgram: |upper| must equal |lower|");
  }
  if (n == 0) throw std::invalid_argument("QuadraticProgram: empty problem");
  if (!P.allFinite() || !q.allFinite() || (m > 0 && !C.allFinite())) {
    throw std::invalid_argument("QuadraticProgram: non-finite P, q or C entry");
  }
  if (P.size() > 0 && (P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("QuadraticProgram: P is not symmetric");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i) ||
        lower(i) == kInf || upper(i) == -kInf) {
      throw std::invalid_argument("QuadraticProgram: bad bounds at row " +
                                  std::to_string(i));
    }
  }
}

Solution solve(const QuadraticProgram& qp, const SolverSettings& settings) {
  qp.validate();
  const Eigen::Index n = qp.num_vars();
  const Eigen::Index m = qp.num_constraints();

  // Scaled working copies; the unscaled originals serve residual checks.
  Eigen::MatrixXd P = 0.5 * (qp.P + qp.P.transpose());
  Eigen::VectorXd q = qp.q;
  Eigen::MatrixXd C = qp.C;
  Eigen::VectorXd lower = qp.lower;
  Eigen::VectorXd upper = qp.upper;

  // Modified Ruiz equilibration of [[P, Cᵀ],[C, 0]] plus cost normalization.
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);   // variable scaling
  Eigen::VectorXd e = Eigen::VectorXd::Ones(m);   // constraint scaling
  double cost_scale = 1.0;
  for (int it = 0; it < settings.scaling_iterations; ++it) {
    Eigen::VectorXd dx(n), de(m);
    for (Eigen::Index j = 0; j < n; ++j) {
      double norm = P.col(j).cwiseAbs().maxCoeff();
      if (m > 0) norm = std::max(norm, C.col(j).cwiseAbs().maxCoeff());
      dx(j) = norm > 0.0 ? 1.0 / std::sqrt(norm) : 1.0;
      dx(j) = std::clamp(dx(j), kMinScaling, kMaxScaling);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const double norm = C.row(i).cwiseAbs().maxCoeff();
      de(i) = norm > 0.0 ? 1.0 / std::sqrt(norm) : 1.0;
      de(i) = std::clamp(de(i), kMinScaling, kMaxScaling);
    }
    P = dx.asDiagonal() * P * dx.asDiagonal();
    q = dx.asDiagonal() * q;
    if (m > 0) {
      C = de.asDiagonal() * C * dx.asDiagonal();
      lower = de.asDiagonal() * lower;  // ±inf rows stay ±inf
      upper = de.asDiagonal() * upper;
    }
    d = d.cwiseProduct(dx);
    e = e.cwiseProduct(de);

    double col_mean = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) col_mean += P.col(j).cwiseAbs().maxCoeff();
    col_mean /= static_cast<double>(n);
    double g = std::max(col_mean, inf_norm(q));
    g = g > 0.0 ? std::clamp(1.0 / g, kMinScaling, kMaxScaling) : 1.0;
    P *= g;
    q *= g;
    cost_scale *= g;
  }

  double rho_base = settings.rho;
  Eigen::VectorXd rho = row_rho(lower, upper, rho_base);
  Factorization fac = factor_reduced_system(P, C, rho, settings.sigma);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = m > 0 ? lower.cwiseMax(Eigen::VectorXd::Zero(m)).cwiseMin(upper)
                            : Eigen::VectorXd();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd y_prev = y;

  Solution sol;
  sol.w = Eigen::VectorXd::Zero(n);

  const auto unscaled_x = [&](const Eigen::VectorXd& xs) {
    return (d.asDiagonal() * xs).eval();
  };

  int iter = 0;
  for (; iter < settings.max_iterations; ++iter) {
    // Regularized quadratic step, reduced to the variable block.
    Eigen::VectorXd rhs = fac.sigma_used * x - q;
    if (m > 0) rhs += C.transpose() * (rho.cwiseProduct(z) - y);
    const Eigen::VectorXd x_tilde = fac.llt.solve(rhs);

    const Eigen::VectorXd x_next =
        settings.alpha * x_tilde + (1.0 - settings.alpha) * x;
    if (m > 0) {
      const Eigen::VectorXd z_tilde = C * x_tilde;
      const Eigen::VectorXd z_relaxed =
          settings.alpha * z_tilde + (1.0 - settings.alpha) * z;
      const Eigen::VectorXd z_cand = z_relaxed + y.cwiseQuotient(rho);
      y_prev = y;
      const Eigen::VectorXd z_next = z_cand.cwiseMax(lower).cwiseMin(upper);
      // z_cand already carries y/ρ, so this is y + ρ(z_relaxed − z_next).
      y = rho.cwiseProduct(z_cand - z_next);
      z = z_next;
    }
    x = x_next;

    if ((iter + 1) % settings.check_interval != 0) continue;

    // Residuals in unscaled units.
    const Eigen::VectorXd xu = unscaled_x(x);
    Eigen::VectorXd zu, yu;
    double r_prim = 0.0, eps_prim = settings.eps_abs;
    if (m > 0) {
      zu = z.cwiseQuotient(e);
      yu = e.asDiagonal() * y / cost_scale;
      const Eigen::VectorXd cx = qp.C * xu;
      r_prim = inf_norm(cx - zu);
      eps_prim = settings.eps_abs +
                 settings.eps_rel * std::max(inf_norm(cx), inf_norm(zu));
    }
    const Eigen::VectorXd px = qp.P * xu;
    Eigen::VectorXd dual = px + qp.q;
    double dual_scale = std::max(inf_norm(px), inf_norm(qp.q));
    if (m > 0) {
      const Eigen::VectorXd cty = qp.C.transpose() * yu;
      dual += cty;
      dual_scale = std::max(dual_scale, inf_norm(cty));
    }
    const double r_dual = inf_norm(dual);
    const double eps_dual = settings.eps_abs + settings.eps_rel * dual_scale;

    if (r_prim <= eps_prim && r_dual <= eps_dual) {
      sol.status = SolveStatus::Optimal;
      sol.w = xu;
      sol.iterations = iter + 1;
      sol.primal_residual = r_prim;
      sol.dual_residual = r_dual;
      sol.objective = 0.5 * xu.dot(qp.P * xu) + qp.q.dot(xu);
      return sol;
    }

    // Primal infeasibility certificate on the dual increment.
    if (m > 0) {
      const Eigen::VectorXd dy = (e.asDiagonal() * (y - y_prev)) / cost_scale;
      const double dy_norm = inf_norm(dy);
      if (dy_norm > settings.eps_infeasible) {
        double support = 0.0;
        bool certifiable = true;
        for (Eigen::Index i = 0; i < m; ++i) {
          const double pos = std::max(dy(i), 0.0);
          const double neg = std::min(dy(i), 0.0);
          if (pos > 0.0) {
            if (!std::isfinite(qp.upper(i))) {
              if (pos > settings.eps_infeasible * dy_norm) certifiable = false;
            } else {
              support += qp.upper(i) * pos;
            }
          }
          if (neg < 0.0) {
            if (!std::isfinite(qp.lower(i))) {
              if (-neg > settings.eps_infeasible * dy_norm) certifiable = false;
            } else {
              support += qp.lower(i) * neg;
            }
          }
        }
        if (certifiable && support <= -settings.eps_infeasible * dy_norm &&
            inf_norm(qp.C.transpose() * dy) <=
                settings.eps_infeasible * dy_norm) {
          sol.status = SolveStatus::Infeasible;
          sol.w = unscaled_x(x);
          sol.iterations = iter + 1;
          sol.primal_residual = r_prim;
          sol.dual_residual = r_dual;
          sol.objective = std::numeric_limits<double>::quiet_NaN();
          return sol;
        }
      }
    }

    // Step-size adaptation keyed to the residual balance; refactor only on a
    // material change so the Cholesky cost stays bounded.
    if (settings.adaptive_rho && m > 0 && r_dual > 0.0 && eps_prim > 0.0) {
      const double ratio = (r_prim / std::max(eps_prim, 1e-30)) /
                           std::max(r_dual / std::max(eps_dual, 1e-30), 1e-30);
      const double target = std::clamp(rho_base * std::sqrt(ratio), 1e-6, 1e6);
      if (target > 5.0 * rho_base || target < rho_base / 5.0) {
        rho_base = target;
        rho = row_rho(lower, upper, rho_base);
        fac = factor_reduced_system(P, C, rho, settings.sigma);
      }
    }
  }

  const Eigen::VectorXd xu = unscaled_x(x);
  sol.status = SolveStatus::MaxIterations;
  sol.w = xu;
  sol.iterations = iter;
  if (m > 0) {
    const Eigen::VectorXd zu = z.cwiseQuotient(e);
    sol.primal_residual = inf_norm(qp.C * xu - zu);
  }
  Eigen::VectorXd dual = qp.P * xu + qp.q;
  if (m > 0) dual += qp.C.transpose() * (e.asDiagonal() * y / cost_scale);
  sol.dual_residual = inf_norm(dual);
  sol.objective = 0.5 * xu.dot(qp.P * xu) + qp.q.dot(xu);
  return sol;
}

QuadraticProgram l1_to_qp(const L1Problem& problem) {
  if (problem.lambda < 0.0) {
    throw std::invalid_argument("l1_to_qp: lambda must be >= 0");
  }
  const Eigen::Index n = problem.q.size();
  const Eigen::Index m = problem.lower.size();
  if (problem.P.rows() != n || problem.P.cols() != n || problem.C.rows() != m ||
      (m > 0 && problem.C.cols() != n) || problem.upper.size() != m) {
    throw std::invalid_argument("l1_to_qp: inconsistent problem shapes");
  }

  QuadraticProgram out;
  out.P = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  out.P.topLeftCorner(n, n) = problem.P;
  out.q = Eigen::VectorXd::Zero(2 * n);
  out.q.head(n) = problem.q;
  out.q.tail(n).setConstant(problem.lambda);

  // Rows: original constraints on w, then w − v ≤ 0 and w + v ≥ 0.
  out.C = Eigen::MatrixXd::Zero(m + 2 * n, 2 * n);
  out.lower = Eigen::VectorXd::Zero(m + 2 * n);
  out.upper = Eigen::VectorXd::Zero(m + 2 * n);
  if (m > 0) {
    out.C.topLeftCorner(m, n) = problem.C;
    out.lower.head(m) = problem.lower;
    out.upper.head(m) = problem.upper;
  }
  out.C.block(m, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
  out.C.block(m, n, n, n) = -Eigen::MatrixXd::Identity(n, n);
  out.lower.segment(m, n).setConstant(-kInf);
  out.upper.segment(m, n).setZero();
  out.C.block(m + n, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
  out.C.block(m + n, n, n, n) = Eigen::MatrixXd::Identity(n, n);
  out.lower.tail(n).setZero();
  out.upper.tail(n).setConstant(kInf);
  return out;
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double cap) {
  const Eigen::Index n = v.size();
  if (n == 0 || cap <= 0.0) {
    throw std::invalid_argument("project_capped_simplex: empty input or cap <= 0");
  }
  if (static_cast<double>(n) * cap < 1.0 - 1e-12) {
    throw std::invalid_argument(
        "project_capped_simplex: n*cap < 1, target set empty");
  }

  const auto mass = [&](double theta) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      s += std::clamp(v(i) - theta, 0.0, cap);
    }
    return s;
  };

  double lo = v.minCoeff() - cap - 1.0;  // mass(lo) = n·cap ≥ 1
  double hi = v.maxCoeff();              // mass(hi) = 0
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double theta = lo;
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w(i) = std::clamp(v(i) - theta, 0.0, cap);
  }
  // One exact correction spread over interior coordinates removes the last
  // few ulps of sum error without touching the cap or the floor.
  const double gap = 1.0 - w.sum();
  if (gap != 0.0) {
    std::vector<Eigen::Index> interior;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w(i) > 0.0 && w(i) < cap) interior.push_back(i);
    }
    if (!interior.empty()) {
      const double bump = gap / static_cast<double>(interior.size());
      for (Eigen::Index i : interior) {
        w(i) = std::clamp(w(i) + bump, 0.0, cap);
      }
    }
  }
  return w;
}

}  // namespace fundtrack::qp
