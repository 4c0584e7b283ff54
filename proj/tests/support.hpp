// Test-side helpers and brute-force oracles. Nothing here calls into the
// library's solvers; they are re-derived from definitions.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sps/outer_ellipsoid.hpp"
#include "sps/regression.hpp"
#include "sps/sps.hpp"

namespace sps::testing {

inline Dataset random_dataset(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng, double noise = 0.3) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix phi(n, d);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index j = 0; j < d; ++j) phi(t, j) = g(rng);
  Vector theta(d);
  for (Eigen::Index j = 0; j < d; ++j) theta(j) = g(rng);
  Vector y = phi * theta;
  for (Eigen::Index t = 0; t < n; ++t) y(t) += noise * g(rng);
  return {phi, y};
}

/// R_n by an explicit loop over samples.
inline Matrix loop_rn(const Dataset& data) {
  const auto d = data.dimension();
  Matrix r = Matrix::Zero(d, d);
  for (Eigen::Index t = 0; t < data.samples(); ++t)
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) r(a, b) += data.regressors(t, a) * data.regressors(t, b);
  return r / static_cast<double>(data.samples());
}

/// ||S_i(theta)||^2 with the explicit inverse of R_n:
/// v^T R_n^{-1} v, v = (1/n) sum alpha phi eps.
inline double inverse_oracle_norm2(const SpsSetup& setup, const Dataset& data, const Vector& theta, int i) {
  const Matrix rinv = loop_rn(data).inverse();
  Vector v = Vector::Zero(data.dimension());
  for (Eigen::Index t = 0; t < data.samples(); ++t) {
    const double eps = data.outputs(t) - data.regressors.row(t).dot(theta);
    v += setup.sign(i, t) * eps * data.regressors.row(t).transpose();
  }
  v /= static_cast<double>(data.samples());
  return v.dot(rinv * v);
}

/// max ||z||^2 subject to z^T A z + 2 z^T b + c <= 0 for A positive definite,
/// by sampling the boundary z = zc + E u (||u|| = 1) and refining with the
/// ascent step u <- normalize(E^T (zc + E u)) (monotone for a convex objective).
inline double primal_oracle(const Matrix& a, const Vector& b, double c, int samples = 4000) {
  const auto d = a.rows();
  const Vector zc = -a.ldlt().solve(b);
  const double rho = b.dot(-zc) - c;
  if (rho <= 0.0) return rho == 0.0 ? zc.squaredNorm() : -1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Matrix e = std::sqrt(rho) * es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                   es.eigenvectors().transpose();
  auto value = [&](const Vector& u) { return (zc + e * u).squaredNorm(); };
  auto refine = [&](Vector u) {
    for (int it = 0; it < 20000; ++it) {
      Vector next = e.transpose() * (zc + e * u);
      const double nn = next.norm();
      if (nn == 0.0) break;
      next /= nn;
      const double step = (next - u).norm();
      u = next;
      if (step < 1e-15) break;
    }
    return value(u);
  };
  if (d == 1) {
    Vector u(1);
    u << 1.0;
    const double hi = value(u);
    u << -1.0;
    return std::max(hi, value(u));
  }
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::pair<double, Vector>> cands;
  for (int k = 0; k < samples; ++k) {
    Vector u(d);
    if (d == 2) {
      const double ang = 2.0 * M_PI * k / samples;
      u << std::cos(ang), std::sin(ang);
    } else {
      for (Eigen::Index j = 0; j < d; ++j) u(j) = g(rng);
      u.normalize();
    }
    cands.emplace_back(value(u), u);
  }
  std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  double best = cands.front().first;
  for (std::size_t k = 0; k < std::min<std::size_t>(8, cands.size()); ++k) best = std::max(best, refine(cands[k].second));
  return best;
}

/// Rank counts of the reference sum over every outcome of n = 2 two-point
/// (+-1) noise, both sign rows of m = 3 and all 6 tie-break permutations.
/// phi * theta_star must be exact so that residuals are exactly +-1.
inline std::vector<long> enumerate_rank_counts(const Matrix& phi, const Vector& theta_star) {
  std::vector<long> counts(3, 0);
  for (int noise = 0; noise < 4; ++noise) {
    Vector y = phi * theta_star;
    y(0) += (noise & 1) ? 1.0 : -1.0;
    y(1) += (noise & 2) ? 1.0 : -1.0;
    const Dataset data(phi, y);
    const RegressionSummary summary = summarize(data);
    for (int bits = 0; bits < 16; ++bits) {
      auto sg = [&](int k) { return (bits >> k) & 1 ? 1 : -1; };
      const std::vector<std::vector<int>> signs = {{sg(0), sg(1)}, {sg(2), sg(3)}};
      std::vector<int> perm = {0, 1, 2};
      do {
        SpsSetup setup(SpsConfig{3, 1, 0, 1, Norm::L2}, 2);
        setup.assign(signs, perm);
        const SpsVerdict v = rank_of_reference(setup, summary, data, theta_star);
        ++counts[static_cast<std::size_t>(v.rank - 1)];
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
  }
  return counts;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sps_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace sps::testing
