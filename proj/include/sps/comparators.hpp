#pragma once

#include "sps/ellipsoid.hpp"
#include "sps/regression.hpp"

namespace sps {

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double regularized_beta(double x, double a, double b);

double chi_squared_cdf(double x, double dof);
double fisher_f_cdf(double x, double dof1, double dof2);

struct QuantileSpec {
  enum class Family { ChiSquared, FisherF };
  Family family = Family::ChiSquared;
  double dof1 = 1.0;
  double dof2 = 1.0;  // FisherF only
  double level = 0.95;

  static QuantileSpec chi_squared(double dof, double level) { return {Family::ChiSquared, dof, 1.0, level}; }
  static QuantileSpec fisher_f(double dof1, double dof2, double level) {
    return {Family::FisherF, dof1, dof2, level};
  }
};

double cdf(const QuantileSpec& spec, double x);

/// x with cdf(spec, x) == spec.level, found by bracketed bisection.
double quantile(const QuantileSpec& spec);

/// Asymptotic region: radius mu * sigma2_hat / n with mu the chi^2(d) quantile.
Ellipsoid asymptotic_ellipsoid(const RegressionSummary& summary, double level);

/// Exact region under i.i.d. Gaussian noise: radius mu * d * sigma2_hat / n
/// with mu the F(d, n-d) quantile.
Ellipsoid f_ellipsoid(const RegressionSummary& summary, double level);

}  // namespace sps
