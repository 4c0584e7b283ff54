#include "sps/comparators.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace sps {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 10000;

// Series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < kMaxTerms; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x); used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Lentz evaluation of the incomplete-beta continued fraction.
double beta_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxTerms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw BadConfig("quantile level must lie in (0, 1)");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw BadConfig("incomplete gamma: a must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_fraction(a, x);
}

double regularized_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw BadConfig("incomplete beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  // The fraction converges fast for x < (a+1)/(a+b+2); use symmetry beyond.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(x, a, b) / a;
  return 1.0 - front * beta_fraction(1.0 - x, b, a) / b;
}

double chi_squared_cdf(double x, double dof) { return regularized_gamma_p(0.5 * dof, 0.5 * x); }

double fisher_f_cdf(double x, double dof1, double dof2) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double u = dof1 * x;
  return regularized_beta(u / (u + dof2), 0.5 * dof1, 0.5 * dof2);
}

double cdf(const QuantileSpec& spec, double x) {
  if (spec.family == QuantileSpec::Family::ChiSquared) return chi_squared_cdf(x, spec.dof1);
  return fisher_f_cdf(x, spec.dof1, spec.dof2);
}

double quantile(const QuantileSpec& spec) {
  check_level(spec.level);
  if (!(spec.dof1 >= 1.0) || (spec.family == QuantileSpec::Family::FisherF && !(spec.dof2 >= 1.0))) {
    throw BadConfig("degrees of freedom must be >= 1");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (cdf(spec, hi) < spec.level) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalFailure("quantile: could not bracket");
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = cdf(spec, mid);
    if (f == spec.level) return mid;
    if (f < spec.level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double f_lo = cdf(spec, lo);
  const double f_hi = cdf(spec, hi);
  return std::fabs(f_lo - spec.level) <= std::fabs(f_hi - spec.level) ? lo : hi;
}

namespace {

Ellipsoid plug_in(const RegressionSummary& summary, double radius) {
  Ellipsoid e;
  e.center = summary.theta_hat;
  e.shape = summary.r_n;
  e.radius = radius;
  return e;
}

void check_sample(const RegressionSummary& summary) {
  const auto d = summary.theta_hat.size();
  if (summary.samples <= d || !std::isfinite(summary.sigma2_hat)) {
    throw DegenerateSample("comparator ellipsoid needs n > d (n = " + std::to_string(summary.samples) + ")");
  }
}

}  // namespace

Ellipsoid asymptotic_ellipsoid(const RegressionSummary& summary, double level) {
  check_sample(summary);
  const auto d = static_cast<double>(summary.theta_hat.size());
  const double mu = quantile(QuantileSpec::chi_squared(d, level));
  return plug_in(summary, mu * summary.sigma2_hat / static_cast<double>(summary.samples));
}

Ellipsoid f_ellipsoid(const RegressionSummary& summary, double level) {
  check_sample(summary);
  const auto d = static_cast<double>(summary.theta_hat.size());
  const auto n = static_cast<double>(summary.samples);
  const double mu = quantile(QuantileSpec::fisher_f(d, n - d, level));
  return plug_in(summary, mu * d * summary.sigma2_hat / n);
}

}  // namespace sps
