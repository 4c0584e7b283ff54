#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sps/comparators.hpp"

using namespace sps;

namespace {

RegressionSummary fake_summary(Eigen::Index d, Eigen::Index n, double sigma2) {
  RegressionSummary s;
  s.r_n = Matrix::Identity(d, d);
  s.r_n_half = Matrix::Identity(d, d);
  s.theta_hat = Vector::Zero(d);
  s.sigma2_hat = sigma2;
  s.samples = n;
  return s;
}

}  // namespace

TEST_SUITE("comparators") {

TEST_CASE("closed forms") {
  CHECK(std::abs(quantile(QuantileSpec::chi_squared(2, 0.95)) + 2.0 * std::log(0.05)) < 1e-9);
  CHECK(quantile(QuantileSpec::chi_squared(1, 0.5)) == doctest::Approx(0.45494).epsilon(1e-5));
  CHECK(chi_squared_cdf(3.0, 2) == doctest::Approx(1.0 - std::exp(-1.5)).epsilon(1e-14));
  // I_x(1, b) = 1 - (1 - x)^b
  CHECK(regularized_beta(0.3, 1.0, 11.5) == doctest::Approx(1.0 - std::pow(0.7, 11.5)).epsilon(1e-13));
  const double v = quantile(QuantileSpec::fisher_f(2, 23, 0.95));
  CHECK(regularized_beta(2 * v / (2 * v + 23), 1.0, 11.5) == doctest::Approx(0.95).epsilon(1e-12));
  CHECK(regularized_gamma_p(1.0, 0.0) == 0.0);
  CHECK(regularized_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(regularized_beta(1.0, 2.0, 3.0) == 1.0);
}

TEST_CASE("special functions against Boost") {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> shape(0.2, 60.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double a = shape(rng);
    const double x = a * 3.0 * unit(rng);
    CHECK(regularized_gamma_p(a, x) == doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-12));
    const double b = shape(rng);
    const double u = unit(rng);
    CHECK(regularized_beta(u, a, b) == doctest::Approx(boost::math::ibeta(a, b, u)).epsilon(1e-11));
  }
}

TEST_CASE("quantiles against Boost and round trip") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> dof(1, 40);
  std::uniform_int_distribution<int> dof2(1, 400);
  std::uniform_real_distribution<double> level(0.01, 0.999);
  for (int k = 0; k < 200; ++k) {
    const double p = level(rng);
    const auto c = QuantileSpec::chi_squared(dof(rng), p);
    const double qc = quantile(c);
    CHECK(std::abs(cdf(c, qc) - p) < 1e-9);
    CHECK(qc == doctest::Approx(boost::math::quantile(boost::math::chi_squared(c.dof1), p)).epsilon(1e-9));

    const auto f = QuantileSpec::fisher_f(dof(rng), dof2(rng), p);
    const double qf = quantile(f);
    CHECK(std::abs(cdf(f, qf) - p) < 1e-9);
    CHECK(qf == doctest::Approx(boost::math::quantile(boost::math::fisher_f(f.dof1, f.dof2), p)).epsilon(1e-8));
  }
  CHECK_THROWS_AS(quantile(QuantileSpec::chi_squared(2, 1.0)), BadConfig);
  CHECK_THROWS_AS(quantile(QuantileSpec::chi_squared(0, 0.5)), BadConfig);
}

TEST_CASE("comparator ellipsoids") {
  const Ellipsoid asym = asymptotic_ellipsoid(fake_summary(2, 25, 0.1), 0.95);
  CHECK(asym.radius == doctest::Approx(5.991464547 * 0.1 / 25).epsilon(1e-9));
  CHECK(asymptotic_ellipsoid(fake_summary(2, 25, 0.0), 0.95).radius == 0.0);

  const Ellipsoid f = f_ellipsoid(fake_summary(2, 25, 0.1), 0.95);
  const double mu = boost::math::quantile(boost::math::fisher_f(2, 23), 0.95);
  CHECK(f.radius == doctest::Approx(mu * 2 * 0.1 / 25).epsilon(1e-9));
  CHECK(f.radius > asym.radius);

  // d F(d, n - d) -> chi^2(d)
  const Ellipsoid big_f = f_ellipsoid(fake_summary(3, 100000, 0.1), 0.95);
  const Ellipsoid big_c = asymptotic_ellipsoid(fake_summary(3, 100000, 0.1), 0.95);
  CHECK(big_f.radius == doctest::Approx(big_c.radius).epsilon(0.01));

  CHECK_THROWS_AS(f_ellipsoid(fake_summary(2, 2, 0.1), 0.95), DegenerateSample);
}

}
