#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sps/experiments.hpp"

using namespace sps;

namespace {

Vector noise_of(const SystemSpec& spec, const Dataset& data) {
  return data.outputs - data.regressors * spec.true_params.head(data.dimension());
}

double variance(const Vector& v) { return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1); }

double lag1(const Vector& v) {
  const Eigen::Index n = v.size();
  const Vector c = v.array() - v.mean();
  return c.head(n - 1).dot(c.tail(n - 1)) / c.squaredNorm();
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("data generation") {
  SUBCASE("zero noise") {
    const SystemSpec spec = fir2_system(NoiseModel::gaussian(0.0));
    const Dataset data = simulate_dataset(spec, 50, 1);
    CHECK(noise_of(spec, data).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("fir columns are delayed inputs") {
    SystemSpec spec = fir2_system(NoiseModel::gaussian(0.1));
    spec.basis = RegressorBasis::fir(3);
    spec.true_params = Vector::Ones(3);
    const Dataset data = simulate_dataset(spec, 40, 2);
    for (Eigen::Index t = 1; t < 40; ++t) {
      CHECK(data.regressors(t, 1) == data.regressors(t - 1, 0));
      CHECK(data.regressors(t, 2) == data.regressors(t - 1, 1));
    }
    SystemSpec lag = spec;
    lag.basis = RegressorBasis::laguerre(3, 0.0);
    const Dataset same = simulate_dataset(lag, 40, 2);
    CHECK((same.regressors - data.regressors).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("laguerre filters") {
    SystemSpec spec = fir2_system(NoiseModel::gaussian(0.1));
    spec.basis = RegressorBasis::laguerre(2, 0.5);
    const Dataset data = simulate_dataset(spec, 200, 3);
    // (z - a) x2 = (1 - a z) x1
    for (Eigen::Index t = 1; t < 200; ++t) {
      const double lhs = data.regressors(t, 1) - 0.5 * data.regressors(t - 1, 1);
      const double rhs = data.regressors(t - 1, 0) - 0.5 * data.regressors(t, 0);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10).scale(1.0));
    }
  }
  SUBCASE("input process") {
    const Dataset data = simulate_dataset(fir2_system(NoiseModel::gaussian(0.1)), 100000, 4);
    const Vector u = data.regressors.col(0);
    CHECK(variance(u) == doctest::Approx(1.0 / (1.0 - 0.75 * 0.75)).epsilon(0.05));
    CHECK(lag1(u) == doctest::Approx(0.75).epsilon(0.02));
  }
  SUBCASE("noise moments") {
    for (const NoiseModel& model : {NoiseModel::laplacian(0.1), NoiseModel::gaussian(0.1), NoiseModel::uniform(0.1)}) {
      const SystemSpec spec = fir2_system(model);
      const Vector e = noise_of(spec, simulate_dataset(spec, 100000, 5));
      CHECK(std::abs(variance(e) - 0.1) < 0.005);
      CHECK(std::abs(e.mean()) < 0.005);
      CHECK(std::abs(lag1(e)) < 0.02);
      if (model.kind == NoiseModel::Kind::Uniform) CHECK(e.cwiseAbs().maxCoeff() <= std::sqrt(0.3));
      if (model.kind == NoiseModel::Kind::Laplacian) {
        // excess kurtosis 3
        const Vector c = e.array() - e.mean();
        const double kurt = c.array().pow(4).mean() / std::pow(c.squaredNorm() / c.size(), 2);
        CHECK(kurt == doctest::Approx(6.0).epsilon(0.1));
      }
    }
  }
  SUBCASE("AR noise") {
    const SystemSpec spec = fir2_system(NoiseModel::ar1(0.3, 0.1));
    const Vector e = noise_of(spec, simulate_dataset(spec, 100000, 6));
    CHECK(std::abs(lag1(e) - 0.3) < 0.02);
    CHECK(std::abs(variance(e) - 0.1) < 0.005);
  }
  SUBCASE("reproducible") {
    const SystemSpec spec = fir2_system(NoiseModel::laplacian(0.1));
    const Dataset a = simulate_dataset(spec, 25, 7);
    const Dataset b = simulate_dataset(spec, 25, 7);
    const Dataset c = simulate_dataset(spec, 25, 8);
    CHECK((a.outputs - b.outputs).norm() == 0.0);
    CHECK((a.outputs - c.outputs).norm() > 0.0);
  }
}

TEST_CASE("asymptotic least-squares target") {
  SystemSpec spec = fir2_system(NoiseModel::laplacian(0.1));
  spec.true_params = Vector(3);
  spec.true_params << 0.7, 0.3, 0.21;
  const Vector target = asymptotic_ls_target(spec);
  REQUIRE(target.size() == 2);
  CHECK(target(0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(target(1) == doctest::Approx(0.4575).epsilon(1e-12));
  const Vector exact = asymptotic_ls_target(fir2_system(NoiseModel::laplacian(0.1)));
  CHECK((exact - Vector::Map(std::vector<double>{0.7, 0.3}.data(), 2)).norm() < 1e-12);
}

TEST_CASE("wilson interval") {
  const Proportion p = binomial_proportion(95, 100);
  const double z = 1.959963984540054, n = 100, ph = 0.95;
  const double centre = (ph + z * z / (2 * n)) / (1 + z * z / n);
  const double half = z / (1 + z * z / n) * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n));
  CHECK(p.estimate == 0.95);
  CHECK(p.ci_low == doctest::Approx(centre - half));
  CHECK(p.ci_high == doctest::Approx(centre + half));
  const Proportion none = binomial_proportion(0, 0);
  CHECK(none.trials == 0);
}

TEST_CASE("system json round trip") {
  SystemSpec spec = fir2_system(NoiseModel::ar1(0.3, 0.1));
  spec.basis = RegressorBasis::laguerre(3, 0.4);
  spec.true_params = Vector::Ones(3);
  const nlohmann::json j = spec;
  const SystemSpec back = j.get<SystemSpec>();
  CHECK(back.noise.kind == NoiseModel::Kind::AR1);
  CHECK(back.noise.ar_coeff == 0.3);
  CHECK(back.basis.kind == RegressorBasis::Kind::Laguerre);
  CHECK(back.basis.alpha == 0.4);
  CHECK((back.true_params - spec.true_params).norm() == 0.0);
  nlohmann::json bad = j;
  bad["noise"]["kind"] = "cauchy";
  CHECK_THROWS_AS(bad.get<SystemSpec>(), BadConfig);
}

TEST_CASE("studies are reproducible and thread independent") {
  const SystemSpec spec = fir2_system(NoiseModel::gaussian(0.1));
  StudyOptions opt;
  opt.asymptotic = true;
  opt.f_ellipsoid = true;
  opt.areas = true;
  opt.resolution = 60;
  const ExperimentReport a = area_study(spec, 25, opt, 40, 3);
  opt.threads = 3;
  const ExperimentReport b = area_study(spec, 25, opt, 40, 3);
  REQUIRE(a.trials.size() == 40);
  for (std::size_t k = 0; k < 40; ++k) {
    CHECK(*a.trials[k].area_sps == *b.trials[k].area_sps);
    CHECK(*a.trials[k].area_f == *b.trials[k].area_f);
  }
  std::stringstream csv;
  a.write_csv(csv);
  std::string first;
  std::getline(csv, first);
  CHECK(first.rfind("# {", 0) == 0);
  CHECK(a.to_json().at("aggregates").contains("area_sps"));
}

TEST_CASE("coverage for other noise shapes") {
  StudyOptions opt;
  opt.f_ellipsoid = true;
  for (const NoiseModel& model : {NoiseModel::gaussian(0.1), NoiseModel::uniform(0.1)}) {
    const auto agg = coverage_study(fir2_system(model), 25, opt, 2000, 17).aggregates();
    CHECK(agg.at("coverage_sps").at("estimate").get<double>() == doctest::Approx(0.95).epsilon(0.025));
    if (model.kind == NoiseModel::Kind::Gaussian) {
      CHECK(agg.at("coverage_f").at("estimate").get<double>() == doctest::Approx(0.95).epsilon(0.025));
    }
  }
}

TEST_CASE("named experiments") {
  CHECK(experiment_names().size() == 7);
  CHECK_THROWS_AS(run_named_experiment("nope", {}), BadConfig);
  NamedExperimentOptions o;
  o.trials = 20;
  o.resolution = 60;
  const auto r = run_named_experiment("undermodel", o);
  CHECK(r.summary.at("experiment") == "undermodel");
  CHECK(r.summary.at("overrides").at("trials") == 20);
  CHECK(r.reports.front().second.trials.size() == 20);
}

}
