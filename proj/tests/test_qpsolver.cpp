#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "fundtrack/qp.hpp"

using namespace fundtrack;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double objective(const qp::QuadraticProgram& p, const Eigen::VectorXd& w) {
  return 0.5 * w.dot(p.P * w) + p.q.dot(w);
}

Eigen::MatrixXd random_psd(int n, std::mt19937& rng, double ridge = 0.1) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::MatrixXd p = a * a.transpose() / n;
  p += ridge * Eigen::MatrixXd::Identity(n, n);
  return (p + p.transpose()) / 2.0;
}

// Budget-and-box problem: min ½wᵀPw + qᵀw with Σw = 1, 0 ≤ w ≤ cap.
qp::QuadraticProgram capped_simplex_qp(const Eigen::MatrixXd& p,
                                       const Eigen::VectorXd& q, double cap) {
  const int n = static_cast<int>(q.size());
  qp::QuadraticProgram out;
  out.P = p;
  out.q = q;
  out.C = Eigen::MatrixXd(n + 1, n);
  out.C.row(0).setOnes();
  out.C.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
  out.lower = Eigen::VectorXd::Zero(n + 1);
  out.lower(0) = 1.0;
  out.upper = Eigen::VectorXd::Constant(n + 1, cap);
  out.upper(0) = 1.0;
  return out;
}

// Independent check: projected gradient with a conservative step, run long
// enough that its objective is trustworthy to ~1e-8 on these tiny problems.
Eigen::VectorXd projected_gradient(const Eigen::MatrixXd& p,
                                   const Eigen::VectorXd& q, double cap,
                                   int iters = 200000) {
  const int n = static_cast<int>(q.size());
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
  w = qp::project_capped_simplex(w, cap);
  const double lipschitz =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p).eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(lipschitz, 1e-8);
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd grad = p * w + q;
    w = qp::project_capped_simplex(w - step * grad, cap);
  }
  return w;
}

}  // namespace

TEST_CASE("separable box problem solves to the clipped unconstrained optimum") {
  // P diagonal, box only: each coordinate minimizes independently to
  // clip(-q_i / P_ii, lo, hi).
  const int n = 8;
  std::mt19937 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  qp::QuadraticProgram p;
  p.P = Eigen::MatrixXd::Zero(n, n);
  p.q = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) {
    p.P(i, i) = 0.5 + std::abs(g(rng));
    p.q(i) = g(rng);
  }
  p.C = Eigen::MatrixXd::Identity(n, n);
  p.lower = Eigen::VectorXd::Constant(n, -0.4);
  p.upper = Eigen::VectorXd::Constant(n, 0.4);

  const qp::Solution s = qp::solve(p);
  REQUIRE(s.status == qp::SolveStatus::Optimal);
  for (int i = 0; i < n; ++i) {
    const double want = std::clamp(-p.q(i) / p.P(i, i), -0.4, 0.4);
    CHECK(s.w(i) == doctest::Approx(want).epsilon(1e-6));
  }
  CHECK(s.objective == doctest::Approx(objective(p, s.w)).epsilon(1e-9));
}

TEST_CASE("equality-constrained problem matches the closed-form multiplier") {
  // min ½wᵀPw + qᵀw s.t. 1ᵀw = 1 has w* = P⁻¹(ν·1 − q) with ν chosen so the
  // budget holds; assemble that directly and compare.
  std::mt19937 rng(4);
  const int n = 6;
  const Eigen::MatrixXd p = random_psd(n, rng, 0.3);
  Eigen::VectorXd q(n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i) q(i) = g(rng);

  qp::QuadraticProgram prob;
  prob.P = p;
  prob.q = q;
  prob.C = Eigen::MatrixXd::Ones(1, n);
  prob.lower = Eigen::VectorXd::Ones(1);
  prob.upper = Eigen::VectorXd::Ones(1);

  const Eigen::VectorXd pinv_one = p.ldlt().solve(Eigen::VectorXd::Ones(n));
  const Eigen::VectorXd pinv_q = p.ldlt().solve(q);
  const double nu = (1.0 + Eigen::VectorXd::Ones(n).dot(pinv_q)) /
                    Eigen::VectorXd::Ones(n).dot(pinv_one);
  const Eigen::VectorXd want = nu * pinv_one - pinv_q;

  qp::SolverSettings settings;
  settings.eps_abs = 1e-9;
  settings.eps_rel = 1e-9;
  settings.max_iterations = 200000;
  const qp::Solution s = qp::solve(prob, settings);
  REQUIRE(s.status == qp::SolveStatus::Optimal);
  CHECK((s.w - want).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(s.w.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("random capped-simplex problems agree with projected gradient") {
  std::mt19937 rng(2718);
  std::normal_distribution<double> g(0.0, 1.0);
  qp::SolverSettings settings;
  settings.eps_abs = 1e-8;
  settings.eps_rel = 1e-8;
  settings.max_iterations = 200000;

  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);  // 2..5
    const double cap = std::min(1.0, 2.0 / n + 0.1);
    const Eigen::MatrixXd p = random_psd(n, rng, 0.05);
    Eigen::VectorXd q(n);
    for (int i = 0; i < n; ++i) q(i) = 0.3 * g(rng);

    const qp::QuadraticProgram prob = capped_simplex_qp(p, q, cap);
    const qp::Solution s = qp::solve(prob, settings);
    REQUIRE(s.status == qp::SolveStatus::Optimal);
    const Eigen::VectorXd w = qp::project_capped_simplex(s.w, cap);
    CHECK((w - s.w).cwiseAbs().maxCoeff() < 1e-6);

    const Eigen::VectorXd ref = projected_gradient(p, q, cap, 50000);
    const double fw = 0.5 * w.dot(p * w) + q.dot(w);
    const double fr = 0.5 * ref.dot(p * ref) + q.dot(ref);
    CAPTURE(trial);
    CAPTURE(n);
    CHECK(fw <= fr + 1e-6);  // never worse than the independent method
    CHECK(std::abs(fw - fr) < 1e-5);
  }
}

TEST_CASE("l1 penalty shifts the objective without moving nonnegative weights") {
  // On the simplex every w ≥ 0 and Σw = 1, so ‖w‖₁ ≡ 1: adding λ to the
  // objective must not move the solution.
  std::mt19937 rng(5);
  const int n = 4;
  const Eigen::MatrixXd p = random_psd(n, rng, 0.2);
  Eigen::VectorXd q(n);
  std::normal_distribution<double> g(0.0, 0.5);
  for (int i = 0; i < n; ++i) q(i) = g(rng);
  const double cap = 0.6;

  const qp::QuadraticProgram plain = capped_simplex_qp(p, q, cap);
  qp::L1Problem l1;
  l1.P = p;
  l1.q = q;
  l1.lambda = 0.37;
  l1.C = plain.C;
  l1.lower = plain.lower;
  l1.upper = plain.upper;
  const qp::QuadraticProgram lifted = qp::l1_to_qp(l1);
  CHECK(lifted.num_vars() == 2 * n);
  CHECK_NOTHROW(lifted.validate());

  qp::SolverSettings settings;
  settings.eps_abs = 1e-9;
  settings.eps_rel = 1e-9;
  settings.max_iterations = 400000;
  const qp::Solution base = qp::solve(plain, settings);
  const qp::Solution shifted = qp::solve(lifted, settings);
  REQUIRE(base.status == qp::SolveStatus::Optimal);
  REQUIRE(shifted.status == qp::SolveStatus::Optimal);

  const Eigen::VectorXd wb = qp::project_capped_simplex(base.w, cap);
  const Eigen::VectorXd ws =
      qp::project_capped_simplex(shifted.w.head(n), cap);
  CHECK((wb - ws).cwiseAbs().maxCoeff() < 1e-6);

  const double fb = 0.5 * wb.dot(p * wb) + q.dot(wb);
  const double fs =
      0.5 * ws.dot(p * ws) + q.dot(ws) + l1.lambda * ws.lpNorm<1>();
  CHECK(fs - fb == doctest::Approx(l1.lambda).epsilon(1e-9));

  // Scalar shrinkage: min ½(w-a)² + λ|w| has the soft-threshold solution.
  for (double a : {1.3, -0.8, 0.2}) {
    qp::L1Problem scalar;
    scalar.P = Eigen::MatrixXd::Identity(1, 1);
    scalar.q = Eigen::VectorXd::Constant(1, -a);
    scalar.lambda = 0.5;
    scalar.C = Eigen::MatrixXd::Identity(1, 1);
    scalar.lower = Eigen::VectorXd::Constant(1, -kInf);
    scalar.upper = Eigen::VectorXd::Constant(1, kInf);
    const qp::Solution s = qp::solve(qp::l1_to_qp(scalar), settings);
    REQUIRE(s.status == qp::SolveStatus::Optimal);
    const double want =
        std::copysign(std::max(std::abs(a) - 0.5, 0.0), a);
    CHECK(s.w(0) == doctest::Approx(want).epsilon(1e-6));
  }
  qp::L1Problem neg;
  neg.P = Eigen::MatrixXd::Identity(1, 1);
  neg.q = Eigen::VectorXd::Zero(1);
  neg.lambda = -1.0;
  neg.C = Eigen::MatrixXd::Identity(1, 1);
  neg.lower = Eigen::VectorXd::Zero(1);
  neg.upper = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(qp::l1_to_qp(neg), std::invalid_argument);
}

TEST_CASE("contradictory equality rows are reported infeasible") {
  qp::QuadraticProgram p;
  p.P = Eigen::MatrixXd::Identity(2, 2);
  p.q = Eigen::VectorXd::Zero(2);
  p.C = Eigen::MatrixXd(2, 2);
  p.C << 1, 1, 1, 1;
  p.lower = Eigen::VectorXd(2);
  p.upper = Eigen::VectorXd(2);
  p.lower << 1.0, 2.0;  // w1+w2 = 1 and = 2 simultaneously
  p.upper << 1.0, 2.0;
  const qp::Solution s = qp::solve(p);
  CHECK(s.status == qp::SolveStatus::Infeasible);

  // Box that cannot reach the budget row.
  qp::QuadraticProgram box;
  box.P = Eigen::MatrixXd::Identity(3, 3);
  box.q = Eigen::VectorXd::Zero(3);
  box.C = Eigen::MatrixXd(4, 3);
  box.C.row(0).setOnes();
  box.C.bottomRows(3) = Eigen::MatrixXd::Identity(3, 3);
  box.lower = Eigen::VectorXd::Zero(4);
  box.lower(0) = 1.0;
  box.upper = Eigen::VectorXd::Constant(4, 0.2);  // 3 × 0.2 < 1
  box.upper(0) = 1.0;
  const qp::Solution s2 = qp::solve(box);
  CHECK(s2.status == qp::SolveStatus::Infeasible);
}

TEST_CASE("capped-simplex projection is feasible, exact and idempotent") {
  std::mt19937 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    const double cap =
        std::max(1.0 / n, std::min(1.0, 1.0 / n + 0.3 * std::abs(g(rng))));
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = g(rng);

    const Eigen::VectorXd w = qp::project_capped_simplex(v, cap);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.maxCoeff() <= cap);
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);

    // Idempotence and the variational characterization: for every pair with
    // w_i interior and w_j interior, the gradient components must tie.
    const Eigen::VectorXd w2 = qp::project_capped_simplex(w, cap);
    CHECK((w2 - w).cwiseAbs().maxCoeff() < 1e-12);
    double interior_shift = std::numeric_limits<double>::quiet_NaN();
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      if (w(i) > 1e-9 && w(i) < cap - 1e-9) {
        const double shift = v(i) - w(i);
        if (std::isnan(interior_shift)) {
          interior_shift = shift;
        } else if (std::abs(shift - interior_shift) > 1e-9) {
          ok = false;
        }
      }
    }
    CHECK(ok);
  }
  CHECK_THROWS_AS(qp::project_capped_simplex(Eigen::VectorXd::Zero(3), 0.2),
                  std::invalid_argument);
}

TEST_CASE("solves are bitwise deterministic") {
  std::mt19937 rng(77);
  const Eigen::MatrixXd p = random_psd(5, rng, 0.05);
  Eigen::VectorXd q(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 5; ++i) q(i) = g(rng);
  const qp::QuadraticProgram prob = capped_simplex_qp(p, q, 0.5);
  const qp::Solution a = qp::solve(prob);
  const qp::Solution b = qp::solve(prob);
  REQUIRE(a.w.size() == b.w.size());
  for (int i = 0; i < a.w.size(); ++i) CHECK(a.w(i) == b.w(i));
  CHECK(a.iterations == b.iterations);
  CHECK(a.objective == b.objective);
}

TEST_CASE("malformed problems are rejected up front") {
  qp::QuadraticProgram p;
  p.P = Eigen::MatrixXd::Identity(2, 2);
  p.q = Eigen::VectorXd::Zero(2);
  p.C = Eigen::MatrixXd::Identity(2, 2);
  p.lower = Eigen::VectorXd::Zero(2);
  p.upper = Eigen::VectorXd::Ones(2);
  CHECK_NOTHROW(p.validate());

  qp::QuadraticProgram bad = p;
  bad.q = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.P(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.lower(0) = 2.0;  // crosses upper
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.q(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.C = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  // Strongly indefinite P fails the internal factorization even after the
  // solver's bounded extra regularization (equilibration off so the raw
  // matrix reaches the factor step).
  qp::QuadraticProgram indef = p;
  indef.P << 1.0, 0.0, 0.0, -1e6;
  qp::SolverSettings raw;
  raw.scaling_iterations = 0;
  CHECK_THROWS_AS(qp::solve(indef, raw), std::invalid_argument);
}
