#include "sps/outer_ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace sps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double PerturbationQuadratic::constraint(const Vector& z) const {
  return z.dot(a_mat * z) + 2.0 * z.dot(b_vec) + c_scalar;
}

PerturbationQuadratic build_quadratic(const SpsSetup& setup, const RegressionSummary& summary,
                                      const Dataset& data, int i) {
  if (i < 1 || i >= setup.m()) throw BadConfig("build_quadratic: need 1 <= i <= m-1");
  if (setup.samples() != data.samples()) throw BadConfig("setup was drawn for a different sample size");
  const auto d = data.dimension();
  const auto n = static_cast<double>(data.samples());

  PerturbationQuadratic pq;
  pq.q_mat = Matrix::Zero(d, d);
  pq.psi = Vector::Zero(d);
  for (Eigen::Index t = 0; t < data.samples(); ++t) {
    const auto phi = data.regressors.row(t).transpose();
    const double a = setup.sign(i, t);
    pq.q_mat.noalias() += a * (phi * phi.transpose());
    pq.psi += (a * data.outputs(t)) * phi;
  }
  pq.q_mat /= n;
  pq.psi /= n;

  // With L = R_n^{1/2}: M = L^{-1} Q L^{-T}, w = L^{-1}(psi - Q theta_hat).
  // Then ||S_i||^2 = ||w - M z||^2 and ||S_0||^2 = ||z||^2, giving
  // A = I - M^2, b = M w, c = -||w||^2.
  const auto l = summary.r_n_half.triangularView<Eigen::Lower>();
  const Matrix left = l.solve(pq.q_mat);                                // L^{-1} Q
  Matrix m_mat = l.solve(left.transpose());                             // L^{-1} Q^T L^{-T} = M^T = M
  m_mat = 0.5 * (m_mat + m_mat.transpose());
  const Vector w = l.solve(pq.psi - pq.q_mat * summary.theta_hat);

  pq.a_mat = Matrix::Identity(d, d) - m_mat * m_mat;
  pq.a_mat = 0.5 * (pq.a_mat + pq.a_mat.transpose());
  pq.b_vec = m_mat * w;
  pq.c_scalar = -w.squaredNorm();
  return pq;
}

double solve_dual(const PerturbationQuadratic& pq, const DualOptions& options) {
  const auto d = pq.a_mat.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(pq.a_mat);
  if (eig.info() != Eigen::Success) throw NumericalFailure("solve_dual: eigendecomposition failed");
  const Vector a = eig.eigenvalues();  // ascending
  const Vector bt = eig.eigenvectors().transpose() * pq.b_vec;
  const double c = pq.c_scalar;

  const double a_min = a(0);
  const double tol_eig = 1e-9 * std::max(1.0, a(d - 1));
  if (a_min <= tol_eig) return kInf;

  // lambda = 1/a_min + s; the pole offsets (a_j - a_min)/a_min are exact-ish
  // and keep lambda a_j - 1 accurate close to the pole.
  const double lo = 1.0 / a_min;
  Vector gap(d);
  for (Eigen::Index j = 0; j < d; ++j) gap(j) = (a(j) - a_min) / a_min;

  const auto gamma = [&](double s) {
    const double lambda = lo + s;
    double value = -lambda * c;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double num = bt(j) * bt(j);
      if (num == 0.0) continue;
      const double den = s * a(j) + gap(j);
      if (den <= 0.0) return kInf;
      value += lambda * lambda * num / den;
    }
    return value;
  };

  // Bracket the minimizer of the convex function on s >= 0 by doubling.
  double left = 0.0;
  double right = 0.0;
  const double f0 = gamma(0.0);
  double prev_s = 0.0;
  double prev_f = f0;
  double prev_prev_s = 0.0;
  double s = 1e-14 * std::max(1.0, lo);
  bool bracketed = false;
  for (int k = 0; k < options.max_bracket_steps; ++k) {
    const double f = gamma(s);
    if (f >= prev_f) {
      left = prev_prev_s;
      right = s;
      bracketed = true;
      break;
    }
    prev_prev_s = prev_s;
    prev_s = s;
    prev_f = f;
    s *= 2.0;
    if (!std::isfinite(s)) break;
  }
  if (!bracketed) throw NumericalFailure("solve_dual: could not bracket the dual minimizer");

  constexpr double inv_phi = 0.6180339887498948482;
  double x1 = right - inv_phi * (right - left);
  double x2 = left + inv_phi * (right - left);
  double f1 = gamma(x1);
  double f2 = gamma(x2);
  for (int it = 0; it < 400; ++it) {
    if (right - left <= 1e-3 * options.tol * std::max(right, 1e-300)) break;
    if (f1 <= f2) {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - inv_phi * (right - left);
      f1 = gamma(x1);
    } else {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + inv_phi * (right - left);
      f2 = gamma(x2);
    }
  }
  const double best = std::min({f1, f2, gamma(left), gamma(right)});
  return std::max(best, 0.0);
}

std::vector<double> dual_values(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                                const DualOptions& options) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(setup.m() - 1));
  for (int i = 1; i < setup.m(); ++i) out.push_back(solve_dual(build_quadratic(setup, summary, data, i), options));
  return out;
}

Ellipsoid outer_approximation(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                              const DualOptions& options) {
  if (setup.norm() != Norm::L2) {
    throw NormUnsupported("the ellipsoidal over-bound is only defined for the 2-norm");
  }
  std::vector<double> gammas = dual_values(setup, summary, data, options);
  std::sort(gammas.begin(), gammas.end(), std::greater<>());
  Ellipsoid e;
  e.center = summary.theta_hat;
  e.shape = summary.r_n;
  e.radius = gammas[static_cast<std::size_t>(setup.q() - 1)];
  return e;
}

}  // namespace sps
