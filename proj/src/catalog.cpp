// Named benchmark studies: second-order FIR with AR(1) input, its norm and
// (m, q) variants, the F-distribution comparison, undermodelling, AR noise
// with Block SPS, and the eighth-order over-bound volumes.

#include <algorithm>

#include "sps/experiments.hpp"

namespace sps {

namespace {

SystemSpec fir8_system() {
  SystemSpec s = fir2_system(NoiseModel::laplacian(0.1));
  s.true_params = Vector(8);
  s.true_params << 0.7, 0.3, 0.21, 0.2, 0.15, 0.25, 0.1, 0.05;
  s.basis = RegressorBasis::fir(8);
  return s;
}

SystemSpec undermodel_system() {
  SystemSpec s = fir2_system(NoiseModel::laplacian(0.1));
  s.true_params = Vector(3);
  s.true_params << 0.7, 0.3, 0.21;
  s.basis = RegressorBasis::fir(2);
  return s;
}

StudyOptions base_options(const NamedExperimentOptions& o) {
  StudyOptions s;
  s.sps.m = 100;
  s.sps.q = 5;
  s.threads = o.threads;
  s.resolution = o.resolution;
  return s;
}

nlohmann::json overrides_json(const NamedExperimentOptions& o) {
  nlohmann::json j = nlohmann::json::object();
  if (o.trials) j["trials"] = *o.trials;
  if (o.seed) j["seed"] = *o.seed;
  if (o.n) j["n"] = *o.n;
  j["threads"] = o.threads;
  j["resolution"] = o.resolution;
  return j;
}

double agg(const ExperimentReport& r, const char* key, const char* field) {
  const auto a = r.aggregates();
  if (!a.contains(key)) return std::numeric_limits<double>::quiet_NaN();
  return a.at(key).at(field).get<double>();
}

NamedExperimentResult fir2_basic(const NamedExperimentOptions& o) {
  const auto n = o.n.value_or(25);
  const auto trials = o.trials.value_or(1000);
  const auto seed = o.seed.value_or(1);
  const SystemSpec spec = fir2_system(NoiseModel::laplacian(0.1));

  StudyOptions cov = base_options(o);
  cov.asymptotic = true;
  cov.over_bound = true;
  StudyOptions area = base_options(o);
  area.areas = true;
  area.asymptotic = true;
  area.over_bound = true;

  NamedExperimentResult r;
  r.reports.emplace_back("coverage", coverage_study(spec, n, cov, trials, seed));
  r.reports.emplace_back("area", area_study(spec, n, area, trials, seed));
  const auto& c = r.reports[0].second;
  const auto& a = r.reports[1].second;
  r.summary["table"] = {{"coverage_sps", agg(c, "coverage_sps", "estimate")},
                        {"coverage_asym", agg(c, "coverage_asym", "estimate")},
                        {"coverage_overbound", agg(c, "coverage_overbound", "estimate")},
                        {"mean_area_sps", agg(a, "area_sps", "mean")},
                        {"mean_area_asym", agg(a, "area_asym", "mean")}};
  return r;
}

NamedExperimentResult fir2_norms(const NamedExperimentOptions& o) {
  const auto n = o.n.value_or(25);
  const auto trials = o.trials.value_or(5000);
  const auto seed = o.seed.value_or(2);
  const SystemSpec spec = fir2_system(NoiseModel::laplacian(0.1));
  NamedExperimentResult r;
  nlohmann::json table = nlohmann::json::array();
  for (const Norm norm : {Norm::L1, Norm::L2, Norm::Linf}) {
    StudyOptions opt = base_options(o);
    opt.sps.norm = norm;
    auto report = coverage_study(spec, n, opt, trials, seed);
    table.push_back({{"norm", to_string(norm)}, {"coverage_sps", agg(report, "coverage_sps", "estimate")}});
    r.reports.emplace_back("norm_" + to_string(norm), std::move(report));
  }
  r.summary["table"] = table;
  return r;
}

NamedExperimentResult m_sweep(const NamedExperimentOptions& o) {
  const auto n = o.n.value_or(25);
  const auto trials = o.trials.value_or(500);
  const auto seed = o.seed.value_or(3);
  const SystemSpec spec = fir2_system(NoiseModel::laplacian(0.1));
  NamedExperimentResult r;
  nlohmann::json table = nlohmann::json::array();
  std::uint64_t stream = 0;
  for (const int m : {20, 60, 100, 200, 400, 600}) {
    StudyOptions opt = base_options(o);
    opt.sps.m = m;
    opt.sps.q = m / 20;
    opt.areas = true;
    // same datasets for every m, independent signs
    opt.stream = stream++;
    auto report = area_study(spec, n, opt, trials, seed);
    table.push_back({{"m", m}, {"q", m / 20}, {"mean_area_sps", agg(report, "area_sps", "mean")}});
    r.reports.emplace_back("m" + std::to_string(m), std::move(report));
  }
  r.summary["table"] = table;
  return r;
}

NamedExperimentResult f_compare(const NamedExperimentOptions& o) {
  const auto trials = o.trials.value_or(1000);
  const auto seed = o.seed.value_or(4);
  const SystemSpec spec = fir2_system(NoiseModel::gaussian(0.1));
  std::vector<Eigen::Index> sizes = {25, 200};
  if (o.n) sizes = {*o.n};
  NamedExperimentResult r;
  nlohmann::json table = nlohmann::json::array();
  for (const auto n : sizes) {
    StudyOptions area = base_options(o);
    area.areas = true;
    area.f_ellipsoid = true;
    StudyOptions cov = base_options(o);
    cov.f_ellipsoid = true;
    auto a = area_study(spec, n, area, trials, seed);
    auto c = coverage_study(spec, n, cov, trials, seed);
    const double sps_area = agg(a, "area_sps", "mean");
    const double f_area = agg(a, "area_f", "mean");
    table.push_back({{"n", n},
                     {"mean_area_sps", sps_area},
                     {"mean_area_f", f_area},
                     {"area_ratio", sps_area / f_area},
                     {"coverage_sps", agg(c, "coverage_sps", "estimate")},
                     {"coverage_f", agg(c, "coverage_f", "estimate")}});
    r.reports.emplace_back("area_n" + std::to_string(n), std::move(a));
    r.reports.emplace_back("coverage_n" + std::to_string(n), std::move(c));
  }
  r.summary["table"] = table;
  return r;
}

NamedExperimentResult undermodel(const NamedExperimentOptions& o) {
  const auto n = o.n.value_or(25);
  const auto trials = o.trials.value_or(20000);
  const auto seed = o.seed.value_or(5);
  const SystemSpec spec = undermodel_system();
  StudyOptions opt = base_options(o);
  opt.asymptotic = true;
  NamedExperimentResult r;
  auto report = coverage_study(spec, n, opt, trials, seed);
  const Vector target = asymptotic_ls_target(spec);
  r.summary["table"] = {{"target", {target(0), target(1)}},
                        {"coverage_sps", agg(report, "coverage_sps", "estimate")},
                        {"coverage_asym", agg(report, "coverage_asym", "estimate")}};
  r.reports.emplace_back("coverage", std::move(report));
  return r;
}

NamedExperimentResult ar_noise_block(const NamedExperimentOptions& o) {
  const auto n = o.n.value_or(200);
  const auto trials = o.trials.value_or(20000);
  const auto seed = o.seed.value_or(6);
  StudyOptions cov = base_options(o);
  cov.block_variant = true;
  cov.block_length = 10;
  cov.asymptotic = true;
  auto coverage = coverage_study(fir2_system(NoiseModel::ar1(0.3, 0.1)), n, cov, trials, seed);

  // Price of blocking when the noise is in fact independent.
  StudyOptions area = base_options(o);
  area.areas = true;
  area.block_variant = true;
  area.block_length = 10;
  auto areas = area_study(fir2_system(NoiseModel::gaussian(0.1)), n, area, std::min<std::size_t>(trials, 1000), seed);

  NamedExperimentResult r;
  const double a_sps = agg(areas, "area_sps", "mean");
  const double a_block = agg(areas, "area_block", "mean");
  r.summary["table"] = {{"coverage_sps", agg(coverage, "coverage_sps", "estimate")},
                        {"coverage_block", agg(coverage, "coverage_block", "estimate")},
                        {"coverage_asym", agg(coverage, "coverage_asym", "estimate")},
                        {"iid_mean_area_sps", a_sps},
                        {"iid_mean_area_block", a_block},
                        {"iid_area_ratio", a_block / a_sps}};
  r.reports.emplace_back("coverage_ar_noise", std::move(coverage));
  r.reports.emplace_back("area_iid", std::move(areas));
  return r;
}

NamedExperimentResult fir8_volumes(const NamedExperimentOptions& o) {
  const auto n = o.n.value_or(200);
  const auto trials = o.trials.value_or(1000);
  const auto seed = o.seed.value_or(7);
  StudyOptions opt = base_options(o);
  opt.volume_increase = true;
  auto report = area_study(fir8_system(), n, opt, trials, seed);
  NamedExperimentResult r;
  r.summary["table"] = {{"n", n}, {"mean_relative_increase_per_dimension", agg(report, "volume_increase", "mean")}};
  r.reports.emplace_back("volumes", std::move(report));
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"fir2-basic", "fir2-norms",     "m-sweep",     "f-compare",
                                                 "undermodel", "ar-noise-block", "fir8-volumes"};
  return names;
}

NamedExperimentResult run_named_experiment(const std::string& name, const NamedExperimentOptions& options) {
  NamedExperimentResult r;
  if (name == "fir2-basic") {
    r = fir2_basic(options);
  } else if (name == "fir2-norms") {
    r = fir2_norms(options);
  } else if (name == "m-sweep") {
    r = m_sweep(options);
  } else if (name == "f-compare") {
    r = f_compare(options);
  } else if (name == "undermodel") {
    r = undermodel(options);
  } else if (name == "ar-noise-block") {
    r = ar_noise_block(options);
  } else if (name == "fir8-volumes") {
    r = fir8_volumes(options);
  } else {
    std::string valid;
    for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw BadConfig("unknown experiment '" + name + "' (valid: " + valid + ")");
  }
  r.summary["experiment"] = name;
  r.summary["overrides"] = overrides_json(options);
  nlohmann::json studies = nlohmann::json::array();
  for (const auto& [label, report] : r.reports) {
    studies.push_back({{"label", label}, {"config", report.config}, {"aggregates", report.aggregates()}});
  }
  r.summary["studies"] = studies;
  return r;
}

}  // namespace sps
