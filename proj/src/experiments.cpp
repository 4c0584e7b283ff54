#include "sps/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "sps/comparators.hpp"
#include "sps/geometry.hpp"
#include "sps/outer_ellipsoid.hpp"
#include "sps/rng.hpp"

namespace sps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string noise_name(NoiseModel::Kind k) {
  switch (k) {
    case NoiseModel::Kind::Gaussian:
      return "gaussian";
    case NoiseModel::Kind::Laplacian:
      return "laplacian";
    case NoiseModel::Kind::Uniform:
      return "uniform";
    case NoiseModel::Kind::AR1:
      return "ar1";
  }
  return "gaussian";
}

NoiseModel::Kind parse_noise(const std::string& s) {
  if (s == "gaussian") return NoiseModel::Kind::Gaussian;
  if (s == "laplacian") return NoiseModel::Kind::Laplacian;
  if (s == "uniform") return NoiseModel::Kind::Uniform;
  if (s == "ar1") return NoiseModel::Kind::AR1;
  throw BadConfig("unknown noise model '" + s + "'");
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void SystemSpec::validate() const {
  if (true_params.size() < 1) throw BadConfig("system: need at least one true parameter");
  if (!(std::fabs(input_ar_coeff) < 1.0)) throw BadConfig("system: |input AR coefficient| must be < 1");
  if (!(input_noise_variance > 0.0)) throw BadConfig("system: input noise variance must be positive");
  if (!(noise.variance >= 0.0)) throw BadConfig("system: noise variance must be nonnegative");
  if (noise.kind == NoiseModel::Kind::AR1 && !(std::fabs(noise.ar_coeff) < 1.0)) {
    throw BadConfig("system: |noise AR coefficient| must be < 1");
  }
  if (basis.order < 1) throw BadConfig("system: model order must be >= 1");
  if (basis.kind == RegressorBasis::Kind::Laguerre && !(std::fabs(basis.alpha) < 1.0)) {
    throw BadConfig("system: Laguerre pole must satisfy |alpha| < 1");
  }
  if (burn_in < 0) throw BadConfig("system: burn-in must be nonnegative");
}

SystemSpec fir2_system(const NoiseModel& noise) {
  SystemSpec s;
  s.true_params = Vector(2);
  s.true_params << 0.7, 0.3;
  s.input_ar_coeff = 0.75;
  s.input_noise_variance = 1.0;
  s.noise = noise;
  s.basis = RegressorBasis::fir(2);
  return s;
}

void to_json(nlohmann::json& j, const SystemSpec& s) {
  j = nlohmann::json{
      {"true_params", to_std(s.true_params)},
      {"input_ar_coeff", s.input_ar_coeff},
      {"input_noise_variance", s.input_noise_variance},
      {"noise", {{"kind", noise_name(s.noise.kind)}, {"variance", s.noise.variance}, {"ar_coeff", s.noise.ar_coeff}}},
      {"basis",
       {{"kind", s.basis.kind == RegressorBasis::Kind::FIR ? "fir" : "laguerre"},
        {"order", s.basis.order},
        {"alpha", s.basis.alpha}}},
      {"burn_in", s.burn_in}};
}

void from_json(const nlohmann::json& j, SystemSpec& s) {
  const auto theta = j.at("true_params").get<std::vector<double>>();
  s.true_params = Eigen::Map<const Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  s.input_ar_coeff = j.value("input_ar_coeff", 0.75);
  s.input_noise_variance = j.value("input_noise_variance", 1.0);
  if (j.contains("noise")) {
    const auto& nz = j.at("noise");
    s.noise.kind = parse_noise(nz.value("kind", std::string("gaussian")));
    s.noise.variance = nz.value("variance", 0.1);
    s.noise.ar_coeff = nz.value("ar_coeff", 0.0);
  }
  if (j.contains("basis")) {
    const auto& b = j.at("basis");
    const auto kind = b.value("kind", std::string("fir"));
    if (kind == "fir") {
      s.basis.kind = RegressorBasis::Kind::FIR;
    } else if (kind == "laguerre") {
      s.basis.kind = RegressorBasis::Kind::Laguerre;
    } else {
      throw BadConfig("unknown basis '" + kind + "'");
    }
    s.basis.order = b.value("order", static_cast<int>(theta.size()));
    s.basis.alpha = b.value("alpha", 0.0);
  } else {
    s.basis = RegressorBasis::fir(static_cast<int>(theta.size()));
  }
  s.burn_in = j.value("burn_in", 100);
  s.validate();
}

namespace {

double draw_noise(const NoiseModel& model, Engine& rng) {
  const double var = model.variance;
  if (var == 0.0) return 0.0;
  switch (model.kind) {
    case NoiseModel::Kind::Gaussian:
    case NoiseModel::Kind::AR1:
      return std::normal_distribution<double>(0.0, std::sqrt(var))(rng);
    case NoiseModel::Kind::Laplacian: {
      // inverse CDF; scale b has variance 2 b^2
      const double b = std::sqrt(0.5 * var);
      double u = 0.0;
      do {
        u = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
      } while (std::fabs(u) >= 0.5);
      return -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::fabs(u));
    }
    case NoiseModel::Kind::Uniform: {
      const double half = std::sqrt(3.0 * var);
      return std::uniform_real_distribution<double>(-half, half)(rng);
    }
  }
  return 0.0;
}

/// Columns (L_k u)_t, k = 1..order, over the whole input record with zero
/// initial conditions. Row t uses inputs up to t-1 only.
Matrix filter_input(const std::vector<double>& u, int order, double alpha) {
  const auto len = static_cast<Eigen::Index>(u.size());
  Matrix x = Matrix::Zero(len, order);
  for (Eigen::Index t = 1; t < len; ++t) {
    x(t, 0) = alpha * x(t - 1, 0) + u[static_cast<std::size_t>(t - 1)];
    for (int k = 1; k < order; ++k) {
      // all-pass section (z^{-1} - alpha)/(1 - alpha z^{-1})
      x(t, k) = alpha * x(t - 1, k) + x(t - 1, k - 1) - alpha * x(t, k - 1);
    }
  }
  return x;
}

}  // namespace

Dataset simulate_dataset(const SystemSpec& spec, Eigen::Index n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw BadConfig("simulate_dataset: n must be >= 1");
  Engine rng = make_engine(seed);

  const int model_order = spec.basis.order;
  const int true_order = static_cast<int>(spec.true_params.size());
  const int columns = std::max(model_order, true_order);
  const double alpha = spec.basis.kind == RegressorBasis::Kind::Laguerre ? spec.basis.alpha : 0.0;

  const auto burn = static_cast<std::size_t>(spec.burn_in);
  const std::size_t total = burn + static_cast<std::size_t>(n);
  std::vector<double> u(total);
  std::normal_distribution<double> v_dist(0.0, std::sqrt(spec.input_noise_variance));
  double prev = 0.0;
  for (auto& ut : u) {
    ut = spec.input_ar_coeff * prev + v_dist(rng);
    prev = ut;
  }
  const Matrix x = filter_input(u, columns, alpha);

  Vector noise(n);
  if (spec.noise.kind == NoiseModel::Kind::AR1) {
    const double c = spec.noise.ar_coeff;
    const double gain = std::sqrt(1.0 - c * c);
    double state = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
      state = c * state + gain * draw_noise(spec.noise, rng);
      if (t >= burn) noise(static_cast<Eigen::Index>(t - burn)) = state;
    }
  } else {
    for (Eigen::Index t = 0; t < n; ++t) noise(t) = draw_noise(spec.noise, rng);
  }

  const auto rows = x.bottomRows(n);
  Vector y = rows.leftCols(true_order) * spec.true_params + noise;
  return Dataset(rows.leftCols(model_order), std::move(y));
}

Vector asymptotic_ls_target(const SystemSpec& spec) {
  spec.validate();
  const int d = spec.basis.order;
  const int dstar = static_cast<int>(spec.true_params.size());
  if (spec.basis.kind != RegressorBasis::Kind::FIR) {
    if (d >= dstar) {
      Vector out = Vector::Zero(d);
      out.head(dstar) = spec.true_params;
      return out;
    }
    throw BadConfig("asymptotic LS target under undermodelling is only available for the FIR basis");
  }
  // Stationary AR(1) input: E[U_t U_{t-k}] = s2 a^|k| / (1 - a^2).
  const double a = spec.input_ar_coeff;
  const double var = spec.input_noise_variance / (1.0 - a * a);
  const auto cov = [&](int i, int j) { return var * std::pow(a, std::abs(i - j)); };
  Matrix gram(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) gram(i, j) = cov(i, j);
  }
  Matrix cross(d, dstar);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < dstar; ++j) cross(i, j) = cov(i, j);
  }
  return gram.ldlt().solve(cross * spec.true_params);
}

Proportion binomial_proportion(std::size_t successes, std::size_t trials, double z) {
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  if (trials == 0) return p;
  const double nn = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (ph + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  p.estimate = ph;
  p.ci_low = std::max(0.0, centre - half);
  p.ci_high = std::min(1.0, centre + half);
  return p;
}

void to_json(nlohmann::json& j, const StudyOptions& o) {
  j = nlohmann::json{{"sps", o.sps},
                     {"block_length", o.block_length},
                     {"level", o.level},
                     {"block_variant", o.block_variant},
                     {"asymptotic", o.asymptotic},
                     {"f_ellipsoid", o.f_ellipsoid},
                     {"over_bound", o.over_bound},
                     {"areas", o.areas},
                     {"volume_increase", o.volume_increase},
                     {"resolution", o.resolution},
                     {"stream", o.stream}};
  j["sps"].erase("seed");
}

namespace {

template <typename Get>
nlohmann::json proportion_of(const std::vector<TrialRecord>& trials, Get get) {
  std::size_t hits = 0;
  std::size_t count = 0;
  for (const auto& t : trials) {
    const std::optional<bool> v = get(t);
    if (!v) continue;
    ++count;
    if (*v) ++hits;
  }
  if (count == 0) return nullptr;
  const auto p = binomial_proportion(hits, count);
  return {{"covered", p.successes}, {"trials", p.trials}, {"estimate", p.estimate},
          {"ci95", {p.ci_low, p.ci_high}}};
}

template <typename Get>
nlohmann::json mean_of(const std::vector<TrialRecord>& trials, Get get) {
  double sum = 0.0;
  std::size_t count = 0;
  std::size_t infinite = 0;
  for (const auto& t : trials) {
    const std::optional<double> v = get(t);
    if (!v) continue;
    if (!std::isfinite(*v)) {
      ++infinite;
      continue;
    }
    sum += *v;
    ++count;
  }
  if (count == 0 && infinite == 0) return nullptr;
  return {{"mean", count > 0 ? sum / static_cast<double>(count) : kInf}, {"count", count}, {"infinite", infinite}};
}

std::string csv_bool(const std::optional<bool>& v) { return v ? (*v ? "1" : "0") : ""; }

std::string csv_num(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return "inf";
  std::ostringstream s;
  s.precision(12);
  s << *v;
  return s.str();
}

}  // namespace

nlohmann::json ExperimentReport::aggregates() const {
  nlohmann::json a;
  a["coverage_sps"] = proportion_of(trials, [](const TrialRecord& t) { return t.covered_sps; });
  a["coverage_block"] = proportion_of(trials, [](const TrialRecord& t) { return t.covered_block; });
  a["coverage_asym"] = proportion_of(trials, [](const TrialRecord& t) { return t.covered_asym; });
  a["coverage_f"] = proportion_of(trials, [](const TrialRecord& t) { return t.covered_f; });
  a["coverage_overbound"] = proportion_of(trials, [](const TrialRecord& t) { return t.covered_overbound; });
  a["area_sps"] = mean_of(trials, [](const TrialRecord& t) { return t.area_sps; });
  a["area_block"] = mean_of(trials, [](const TrialRecord& t) { return t.area_block; });
  a["area_f"] = mean_of(trials, [](const TrialRecord& t) { return t.area_f; });
  a["area_asym"] = mean_of(trials, [](const TrialRecord& t) { return t.area_asym; });
  a["radius_overbound"] = mean_of(trials, [](const TrialRecord& t) { return t.radius_overbound; });
  a["volume_increase"] = mean_of(trials, [](const TrialRecord& t) { return t.volume_increase; });
  for (auto it = a.begin(); it != a.end();) {
    if (it->is_null()) {
      it = a.erase(it);
    } else {
      ++it;
    }
  }
  return a;
}

nlohmann::json ExperimentReport::to_json(bool include_trials) const {
  nlohmann::json j{{"config", config}, {"aggregates", aggregates()}};
  if (include_trials) {
    auto rows = nlohmann::json::array();
    for (const auto& t : trials) {
      nlohmann::json r{{"trial", t.trial}};
      const auto put_b = [&](const char* key, const std::optional<bool>& v) {
        if (v) r[key] = *v;
      };
      const auto put_d = [&](const char* key, const std::optional<double>& v) {
        if (!v) return;
        if (std::isfinite(*v)) {
          r[key] = *v;
        } else {
          r[key] = "inf";
        }
      };
      put_b("covered_sps", t.covered_sps);
      put_b("covered_block", t.covered_block);
      put_b("covered_asym", t.covered_asym);
      put_b("covered_f", t.covered_f);
      put_b("covered_overbound", t.covered_overbound);
      put_d("area_sps", t.area_sps);
      put_d("area_block", t.area_block);
      put_d("area_f", t.area_f);
      put_d("area_asym", t.area_asym);
      put_d("radius_overbound", t.radius_overbound);
      put_d("volume_increase", t.volume_increase);
      rows.push_back(std::move(r));
    }
    j["trials"] = std::move(rows);
  }
  return j;
}

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "# " << config.dump() << '\n';
  out << "trial,covered_sps,covered_block,covered_asym,area_sps,area_f,radius_overbound,"
         "covered_f,covered_overbound,area_block,area_asym,volume_increase\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << csv_bool(t.covered_sps) << ',' << csv_bool(t.covered_block) << ','
        << csv_bool(t.covered_asym) << ',' << csv_num(t.area_sps) << ',' << csv_num(t.area_f) << ','
        << csv_num(t.radius_overbound) << ',' << csv_bool(t.covered_f) << ',' << csv_bool(t.covered_overbound)
        << ',' << csv_num(t.area_block) << ',' << csv_num(t.area_asym) << ',' << csv_num(t.volume_increase)
        << '\n';
  }
}

void parallel_trials(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += workers) body(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

constexpr std::uint64_t kDataLane = 0;
constexpr std::uint64_t kSignLane = 1;
constexpr std::uint64_t kBlockLane = 2;

nlohmann::json study_config(const char* kind, const SystemSpec& spec, Eigen::Index n, const StudyOptions& options,
                            std::size_t trials, std::uint64_t master_seed) {
  return {{"study", kind},        {"system", spec},        {"n", n},
          {"options", options},  {"trials", trials},      {"master_seed", master_seed}};
}

SpsSetup trial_setup(const StudyOptions& options, Eigen::Index n, std::uint64_t master, std::size_t trial,
                     bool block) {
  SpsConfig c = options.sps;
  if (block) c.block_length = options.block_length;
  c.seed = derive_seed(master, trial, (block ? kBlockLane : kSignLane) + 16 * options.stream);
  return SpsSetup(c, n);
}

bool has_interior_border(const RegionRaster& r) {
  for (int ix = 0; ix < r.nx; ++ix) {
    if (r.at(ix, 0) || r.at(ix, r.ny - 1)) return true;
  }
  for (int iy = 0; iy < r.ny; ++iy) {
    if (r.at(0, iy) || r.at(r.nx - 1, iy)) return true;
  }
  return false;
}

}  // namespace

double sps_region_area(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                       int resolution) {
  const SpsRegion region(setup, summary, data);
  const Ellipsoid over = outer_approximation(setup, summary, data);
  if (over.bounded() && over.radius > 0.0) {
    return raster_area(rasterize_sps(region, bounding_box(over, 1.02), resolution, resolution));
  }
  // Unbounded over-bound: grow a box until the raster border is clear.
  Ellipsoid guess;
  guess.center = summary.theta_hat;
  guess.shape = summary.r_n;
  guess.radius = over.bounded() ? 1e-12 : std::max(summary.sigma2_hat, 1e-12) * 10.0 / summary.samples;
  for (int k = 0; k < 60; ++k) {
    const auto raster = rasterize_sps(region, bounding_box(guess, 1.0), resolution, resolution);
    if (!has_interior_border(raster)) return raster_area(raster);
    guess.radius *= 4.0;
  }
  return kInf;
}

ExperimentReport coverage_study(const SystemSpec& spec, Eigen::Index n, const StudyOptions& options,
                                std::size_t trials, std::uint64_t master_seed) {
  if (options.over_bound && options.sps.norm != Norm::L2) {
    throw BadConfig("over-bound coverage requires the 2-norm");
  }
  const Vector target = asymptotic_ls_target(spec);
  ExperimentReport report;
  report.config = study_config("coverage", spec, n, options, trials, master_seed);
  report.config["target"] = to_std(target);
  report.trials.resize(trials);

  parallel_trials(trials, options.threads, [&](std::size_t k) {
    TrialRecord rec;
    rec.trial = k;
    const Dataset data = simulate_dataset(spec, n, derive_seed(master_seed, k, kDataLane));
    const RegressionSummary summary = summarize(data);
    const SpsSetup setup = trial_setup(options, n, master_seed, k, false);
    rec.covered_sps = sps_indicator(setup, summary, data, target);
    if (options.block_variant) {
      const SpsSetup block = trial_setup(options, n, master_seed, k, true);
      rec.covered_block = sps_indicator(block, summary, data, target);
    }
    if (options.asymptotic) rec.covered_asym = asymptotic_ellipsoid(summary, options.level).contains(target);
    if (options.f_ellipsoid) rec.covered_f = f_ellipsoid(summary, options.level).contains(target);
    if (options.over_bound) {
      const Ellipsoid over = outer_approximation(setup, summary, data);
      rec.covered_overbound = over.contains(target);
      rec.radius_overbound = over.radius;
    }
    report.trials[k] = rec;
  });
  return report;
}

ExperimentReport area_study(const SystemSpec& spec, Eigen::Index n, const StudyOptions& options,
                            std::size_t trials, std::uint64_t master_seed) {
  if (options.areas && spec.basis.order != 2) throw BadConfig("raster areas need a two-parameter model");
  if ((options.areas || options.over_bound || options.volume_increase) && options.sps.norm != Norm::L2) {
    throw BadConfig("area study uses the 2-norm over-bound");
  }
  ExperimentReport report;
  report.config = study_config("area", spec, n, options, trials, master_seed);
  report.trials.resize(trials);

  parallel_trials(trials, options.threads, [&](std::size_t k) {
    TrialRecord rec;
    rec.trial = k;
    const Dataset data = simulate_dataset(spec, n, derive_seed(master_seed, k, kDataLane));
    const RegressionSummary summary = summarize(data);
    const SpsSetup setup = trial_setup(options, n, master_seed, k, false);
    if (options.areas) {
      rec.area_sps = sps_region_area(setup, summary, data, options.resolution);
      if (options.block_variant) {
        const SpsSetup block = trial_setup(options, n, master_seed, k, true);
        rec.area_block = sps_region_area(block, summary, data, options.resolution);
      }
      if (options.f_ellipsoid) rec.area_f = ellipsoid_volume(f_ellipsoid(summary, options.level));
      if (options.asymptotic) rec.area_asym = ellipsoid_volume(asymptotic_ellipsoid(summary, options.level));
    }
    if (options.over_bound || options.volume_increase) {
      const Ellipsoid over = outer_approximation(setup, summary, data);
      rec.radius_overbound = over.radius;
      if (options.volume_increase) {
        const Ellipsoid asym = asymptotic_ellipsoid(summary, options.level);
        const double d = static_cast<double>(data.dimension());
        rec.volume_increase =
            over.bounded() ? std::pow(ellipsoid_volume(over) / ellipsoid_volume(asym), 1.0 / d) : kInf;
      }
    }
    report.trials[k] = rec;
  });
  return report;
}

}  // namespace sps
