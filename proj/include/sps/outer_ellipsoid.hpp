#pragma once

#include <vector>

#include "sps/ellipsoid.hpp"
#include "sps/regression.hpp"
#include "sps/sps.hpp"

namespace sps {

/// Quadratic description of {theta : ||S_0||^2 <= ||S_i||^2} in the whitened
/// coordinate z = R_n^{T/2} (theta - theta_hat):  z^T A z + 2 z^T b + c <= 0.
struct PerturbationQuadratic {
  Matrix q_mat;  // (1/n) sum alpha_{i,t} phi_t phi_t^T
  Vector psi;    // (1/n) sum alpha_{i,t} phi_t Y_t
  Matrix a_mat;
  Vector b_vec;
  double c_scalar = 0.0;

  /// z^T A z + 2 z^T b + c.
  [[nodiscard]] double constraint(const Vector& z) const;
};

/// Quadratic data for perturbation i (1 <= i <= m-1).
PerturbationQuadratic build_quadratic(const SpsSetup& setup, const RegressionSummary& summary,
                                      const Dataset& data, int i);

struct DualOptions {
  double tol = 1e-9;           // relative accuracy of gamma
  int max_bracket_steps = 2200;
};

/// Value of
///   minimize gamma  s.t.  lambda >= 0,  [[-I + lambda A, lambda b], [lambda b^T, lambda c + gamma]] >= 0,
/// which equals max ||z||^2 subject to the quadratic constraint. The matrix
/// condition reduces, in the eigenbasis of A, to lambda > 1/lambda_min(A) and
///   gamma >= gamma(lambda) = sum_j lambda^2 bt_j^2 / (lambda a_j - 1) - lambda c,
/// a convex function minimized by golden-section search. Returns +infinity
/// when A is singular (the feasible set then contains a line).
/// Throws NumericalFailure if no minimizer can be bracketed.
double solve_dual(const PerturbationQuadratic& pq, const DualOptions& options = {});

/// gamma*_1 .. gamma*_{m-1}, in index order.
std::vector<double> dual_values(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                                const DualOptions& options = {});

/// Ellipsoid {(theta - theta_hat)^T R_n (theta - theta_hat) <= r} with r the
/// q-th largest gamma*_i; contains the SPS region. 2-norm only.
Ellipsoid outer_approximation(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                              const DualOptions& options = {});

}  // namespace sps
