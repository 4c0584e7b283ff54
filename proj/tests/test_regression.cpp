#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sps/experiments.hpp"
#include "sps/regression.hpp"
#include "support.hpp"

using namespace sps;

TEST_SUITE("regression") {

TEST_CASE("outer product matrix") {
  SUBCASE("orthonormal rows") {
    Matrix phi(2, 2);
    phi << 1, 0, 0, 1;
    const Matrix r = outer_product_matrix(Dataset(phi, Vector::Zero(2)));
    CHECK((r - 0.5 * Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0));
  }
  SUBCASE("constant scalar regressor") {
    const Matrix r = outer_product_matrix(Dataset(Matrix::Ones(7, 1), Vector::Zero(7)));
    CHECK(r(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("matches an explicit loop") {
    std::mt19937_64 rng(1);
    const Dataset data = testing::random_dataset(25, 2, rng);
    CHECK((outer_product_matrix(data) - testing::loop_rn(data)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("cholesky factor") {
  CHECK((factor_rn(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-15);
  Matrix diag(2, 2);
  diag << 4, 0, 0, 9;
  Matrix expect(2, 2);
  expect << 2, 0, 0, 3;
  CHECK((factor_rn(diag) - expect).norm() < 1e-15);

  Matrix r(2, 2);
  r << 2, 1, 1, 2;
  const Matrix l = factor_rn(r);
  CHECK(l(0, 1) == 0.0);
  CHECK((l * l.transpose() - r).cwiseAbs().maxCoeff() < 1e-12);

  Matrix singular(2, 2);
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(factor_rn(singular), SingularDesign);
}

TEST_CASE("least squares") {
  SUBCASE("noiseless data recovers theta") {
    std::mt19937_64 rng(2);
    Dataset data = testing::random_dataset(30, 3, rng, 0.0);
    const Vector truth = data.regressors.colPivHouseholderQr().solve(data.outputs);
    CHECK((least_squares(data) - truth).norm() < 1e-10);
    CHECK(residuals(data, least_squares(data)).norm() < 1e-10);
    CHECK(noise_variance_estimate(data, least_squares(data)) < 1e-20);
  }
  SUBCASE("sample mean") {
    Vector y(2);
    y << 1, 3;
    CHECK(least_squares(Dataset(Matrix::Ones(2, 1), y))(0) == doctest::Approx(2.0));
  }
  SUBCASE("FIR dataset against an explicit 2x2 inverse") {
    const Dataset data = simulate_dataset(fir2_system(NoiseModel::laplacian(0.1)), 25, 11);
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    for (Eigen::Index t = 0; t < 25; ++t) {
      const double a = data.regressors(t, 0), b = data.regressors(t, 1), y = data.outputs(t);
      s11 += a * a;
      s12 += a * b;
      s22 += b * b;
      r1 += a * y;
      r2 += b * y;
    }
    const double det = s11 * s22 - s12 * s12;
    const double t1 = (s22 * r1 - s12 * r2) / det;
    const double t2 = (-s12 * r1 + s11 * r2) / det;
    const Vector est = least_squares(data);
    CHECK(est(0) == doctest::Approx(t1).epsilon(1e-10));
    CHECK(est(1) == doctest::Approx(t2).epsilon(1e-10));
  }
  SUBCASE("singular design") {
    Matrix phi(4, 2);
    phi << 1, 2, 2, 4, 3, 6, -1, -2;
    CHECK_THROWS_AS(least_squares(Dataset(phi, Vector::Ones(4))), SingularDesign);
  }
}

TEST_CASE("residuals") {
  std::mt19937_64 rng(3);
  const Dataset data = testing::random_dataset(40, 2, rng);
  CHECK((residuals(data, Vector::Zero(2)) - data.outputs).norm() == 0.0);
  const Vector e = residuals(data, least_squares(data));
  CHECK((data.regressors.transpose() * e).norm() < 1e-8);
}

TEST_CASE("noise variance") {
  Vector y(3);
  y << 0, 0, 3;
  const Dataset data(Matrix::Ones(3, 1), y);
  const RegressionSummary s = summarize(data);
  CHECK(s.theta_hat(0) == doctest::Approx(1.0));
  CHECK(s.sigma2_hat == doctest::Approx(3.0));
  CHECK_THROWS_AS(noise_variance_estimate(Dataset(Matrix::Ones(1, 1), Vector::Ones(1)), Vector::Ones(1)),
                  DegenerateSample);
  CHECK(std::isnan(summarize(Dataset(Matrix::Identity(2, 2), Vector::Ones(2))).sigma2_hat));

  const Dataset big = simulate_dataset(fir2_system(NoiseModel::gaussian(0.1)), 200, 5);
  const double v = summarize(big).sigma2_hat;
  CHECK(v > 0.07);
  CHECK(v < 0.13);
}

TEST_CASE("properties over random datasets") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> extra(0, 30);
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const int d = dim(rng);
    const Dataset data = testing::random_dataset(d + 1 + extra(rng), d, rng);
    const RegressionSummary s = summarize(data);
    const double scale = s.r_n.cwiseAbs().maxCoeff();
    CHECK((s.r_n - s.r_n.transpose()).norm() == 0.0);
    CHECK((s.r_n_half * s.r_n_half.transpose() - s.r_n).cwiseAbs().maxCoeff() < 1e-12 * scale);
    const Vector grad = data.regressors.transpose() * residuals(data, s.theta_hat);
    CHECK(grad.norm() < 1e-8 * (1.0 + data.outputs.norm() * data.regressors.norm()));
    CHECK(s.sigma2_hat >= 0.0);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("dataset files") {
  SUBCASE("csv round trip") {
    std::mt19937_64 rng(6);
    const Dataset data = testing::random_dataset(12, 3, rng);
    std::stringstream ss;
    write_dataset_csv(ss, data);
    const Dataset back = read_dataset_csv(ss);
    CHECK(back.samples() == 12);
    CHECK((back.regressors - data.regressors).norm() == 0.0);
    CHECK((back.outputs - data.outputs).norm() == 0.0);
  }
  SUBCASE("json") {
    std::stringstream ss(R"({"regressors": [[1, 0], [0, 1], [1, 1]], "outputs": [1, 2, 3]})");
    const Dataset data = read_dataset_json(ss);
    CHECK(data.dimension() == 2);
    CHECK(data.outputs(2) == 3.0);
  }
  SUBCASE("malformed csv names the line") {
    std::stringstream ss("phi_1,phi_2,y\n1,2,3\n4,x,6\n");
    try {
      read_dataset_csv(ss);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::stringstream ragged("phi_1,y\n1,2\n3\n");
    CHECK_THROWS_AS(read_dataset_csv(ragged), ParseError);
    std::stringstream header("a,b\n1,2\n");
    CHECK_THROWS_AS(read_dataset_csv(header), ParseError);
  }
  SUBCASE("invalid datasets") {
    CHECK_THROWS_AS(Dataset(Matrix::Ones(3, 2), Vector::Ones(2)), BadConfig);
    CHECK_THROWS_AS(Dataset(Matrix::Ones(1, 2), Vector::Ones(1)), BadConfig);
    Vector y = Vector::Ones(3);
    y(1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Dataset(Matrix::Ones(3, 1), y), BadConfig);
  }
}

}
