#pragma once

#include <Eigen/Dense>
#include <string>

namespace fundtrack::qp {

// min ½wᵀPw + qᵀw  subject to  lower ≤ Cw ≤ upper.
// Equality rows are encoded lower = upper; ±infinity entries mark one-sided
// or free rows.
struct QuadraticProgram {
  Eigen::MatrixXd P;  // n×n, symmetric PSD
  Eigen::VectorXd q;  // n
  Eigen::MatrixXd C;  // m×n
  Eigen::VectorXd lower;  // m, −inf allowed
  Eigen::VectorXd upper;  // m, +inf allowed

  Eigen::Index num_vars() const { return q.size(); }
  Eigen::Index num_constraints() const { return lower.size(); }
  // Throws std::invalid_argument on shape mismatch, asymmetry beyond 1e-10,
  // lower > upper, or non-finite P/q/C entries.
  void validate() const;
};

enum class SolveStatus { Optimal, MaxIterations, Infeasible };

std::string to_string(SolveStatus s);

struct Solution {
  Eigen::VectorXd w;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
};

struct SolverSettings {
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  double eps_infeasible = 1e-8;
  int max_iterations = 100000;
  double rho = 0.1;      // base step parameter; equality rows get 1e3×
  double sigma = 1e-6;   // linear-system regularization
  double alpha = 1.6;    // relaxation
  int check_interval = 25;
  int scaling_iterations = 10;  // 0 disables diagonal equilibration
  bool adaptive_rho = true;
};

// Operator-splitting solve: alternates a regularized equality-constrained
// quadratic step (via a Cholesky factor of P + σI + CᵀρC) with projection of
// the constraint values onto [lower, upper] and a dual ascent update.
// Deterministic for fixed inputs. Throws std::invalid_argument when P fails
// Cholesky even after bounded extra regularization (not PSD).
Solution solve(const QuadraticProgram& qp, const SolverSettings& settings = {});

// min ½wᵀPw + qᵀw + λ‖w‖₁  subject to  lower ≤ Cw ≤ upper, sign-free w.
struct L1Problem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double lambda = 0.0;
  Eigen::MatrixXd C;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Doubles the variables to [w; v]: adds λ·1ᵀv to the linear term and rows
// w − v ≤ 0, w + v ≥ 0, so v ≥ |w| at any optimum and the w block solves the
// L1 problem. Throws when λ < 0.
QuadraticProgram l1_to_qp(const L1Problem& problem);

// Euclidean projection onto {0 ≤ w ≤ cap, Σw = 1} by bisection on the
// simplex multiplier. Requires n·cap ≥ 1. The result satisfies the cap
// exactly and the sum to within a few ulps.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, double cap);

}  // namespace fundtrack::qp
