#include "sps/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sps/comparators.hpp"
#include "sps/experiments.hpp"
#include "sps/geometry.hpp"
#include "sps/outer_ellipsoid.hpp"
#include "sps/rng.hpp"

namespace sps::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Flags as typed on the command line; unset options stay empty so that a
/// config file can supply them.
struct Flags {
  std::string data;
  std::string config;
  std::string generate;
  std::optional<int> m;
  std::optional<int> q;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> data_seed;
  std::string norm;
  std::optional<int> block;
  std::string theta;
  std::string out;
  std::optional<std::size_t> trials;
  std::optional<long> n;
  int threads = 1;
  int rays = 360;
  int resolution = 400;
  double level = 0.95;
};

struct GeneratorSource {
  SystemSpec system;
  Eigen::Index n = 25;
  std::uint64_t seed = 0;
};

/// Fully resolved inputs of a data-driven command.
struct RunConfig {
  std::optional<std::string> data_path;
  std::optional<GeneratorSource> generator;
  SpsConfig sps;
  std::optional<Vector> theta;
  std::string out_dir = ".";
  int rays = 360;
  int resolution = 400;
  double level = 0.95;

  [[nodiscard]] json to_json() const {
    json j;
    if (data_path) j["data"] = *data_path;
    if (generator) {
      j["generator"] = {{"system", generator->system}, {"n", generator->n}, {"seed", generator->seed}};
    }
    j["sps"] = sps;
    if (theta) j["theta"] = std::vector<double>(theta->data(), theta->data() + theta->size());
    j["out"] = out_dir;
    j["rays"] = rays;
    j["resolution"] = resolution;
    j["level"] = level;
    return j;
  }
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--data", f.data, "dataset file (CSV phi_1..phi_d,y or JSON)");
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--generate", f.generate,
                  "simulate data instead: fir2-laplacian, fir2-gaussian, fir2-ar-noise, undermodel, fir8");
  cmd->add_option("--n", f.n, "samples to simulate (with --generate)");
  cmd->add_option("--data-seed", f.data_seed, "seed of the simulated dataset (defaults to --seed)");
  cmd->add_option("--m", f.m, "number of sums (m > q > 0)");
  cmd->add_option("--q", f.q, "confidence level is 1 - q/m");
  cmd->add_option("--seed", f.seed, "seed of signs and permutation (fallback: $SPS_SEED)");
  cmd->add_option("--norm", f.norm, "l1, l2 or linf");
  cmd->add_option("--block", f.block, "Block SPS length T (must divide n)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--rays", f.rays, "boundary rays (region)")->check(CLI::PositiveNumber);
  cmd->add_option("--resolution", f.resolution, "raster cells per axis")->check(CLI::Range(2, 20000));
  cmd->add_option("--level", f.level, "level of the chi^2 and F comparator ellipsoids");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw BadConfig("--theta: cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw BadConfig("--theta: empty vector");
  return out;
}

SystemSpec preset_system(const std::string& name) {
  if (name == "fir2-laplacian") return fir2_system(NoiseModel::laplacian(0.1));
  if (name == "fir2-gaussian") return fir2_system(NoiseModel::gaussian(0.1));
  if (name == "fir2-ar-noise") return fir2_system(NoiseModel::ar1(0.3, 0.1));
  if (name == "undermodel") {
    SystemSpec s = fir2_system(NoiseModel::laplacian(0.1));
    s.true_params = Vector(3);
    s.true_params << 0.7, 0.3, 0.21;
    return s;
  }
  if (name == "fir8") {
    SystemSpec s = fir2_system(NoiseModel::laplacian(0.1));
    s.true_params = Vector(8);
    s.true_params << 0.7, 0.3, 0.21, 0.2, 0.15, 0.25, 0.1, 0.05;
    s.basis = RegressorBasis::fir(8);
    return s;
  }
  throw BadConfig("unknown generator preset '" + name + "'");
}

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("SPS_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw BadConfig("SPS_SEED is not an integer");
    return v;
  } catch (const std::logic_error&) {
    throw BadConfig("SPS_SEED is not an integer");
  }
}

RunConfig resolve(const Flags& f) {
  RunConfig rc;
  json file = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw BadConfig("cannot open config '" + f.config + "'");
    try {
      in >> file;
    } catch (const json::exception& e) {
      throw BadConfig(std::string("config: ") + e.what());
    }
  }
  try {
    // data source: file xor generator
    const bool file_data = !f.data.empty() || file.contains("data");
    const bool gen_data = !f.generate.empty() || file.contains("generator");
    if (file_data == gen_data) throw BadConfig("exactly one data source required: --data/\"data\" or --generate/\"generator\"");
    if (file_data) {
      rc.data_path = !f.data.empty() ? f.data : file.at("data").get<std::string>();
    }

    if (file.contains("sps")) rc.sps = file.at("sps").get<SpsConfig>();
    if (f.m) rc.sps.m = *f.m;
    if (f.q) rc.sps.q = *f.q;
    if (f.block) rc.sps.block_length = *f.block;
    if (!f.norm.empty()) rc.sps.norm = parse_norm(f.norm);
    if (f.seed) {
      rc.sps.seed = *f.seed;
    } else if (!(file.contains("sps") && file.at("sps").contains("seed"))) {
      rc.sps.seed = env_seed().value_or(0);
    }

    if (gen_data) {
      GeneratorSource g;
      if (!f.generate.empty()) {
        g.system = preset_system(f.generate);
      } else {
        g.system = file.at("generator").at("system").get<SystemSpec>();
      }
      const json gj = file.contains("generator") ? file.at("generator") : json::object();
      g.n = f.n ? *f.n : gj.value("n", static_cast<Eigen::Index>(25));
      g.seed = f.data_seed ? *f.data_seed : gj.value("seed", rc.sps.seed);
      rc.generator = g;
    }

    if (!f.theta.empty()) {
      const auto v = parse_list(f.theta);
      rc.theta = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    } else if (file.contains("theta")) {
      const auto v = file.at("theta").get<std::vector<double>>();
      rc.theta = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    rc.out_dir = !f.out.empty() ? f.out : file.value("out", std::string("."));
  } catch (const json::exception& e) {
    throw BadConfig(std::string("config: ") + e.what());
  }
  rc.rays = f.rays;
  rc.resolution = f.resolution;
  rc.level = f.level;
  return rc;
}

Dataset load(const RunConfig& rc) {
  if (rc.data_path) return load_dataset(*rc.data_path);
  return simulate_dataset(rc.generator->system, rc.generator->n, rc.generator->seed);
}

std::vector<double> as_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw BadConfig("cannot write '" + path.string() + "'");
  return f;
}

int cmd_check(const RunConfig& rc, std::ostream& out) {
  if (!rc.theta) throw BadConfig("check needs --theta");
  const Dataset data = load(rc);
  if (rc.theta->size() != data.dimension()) {
    throw BadConfig("--theta has " + std::to_string(rc.theta->size()) + " entries, data has d = " +
                    std::to_string(data.dimension()));
  }
  const RegressionSummary summary = summarize(data);
  const SpsSetup setup(rc.sps, data.samples());
  const SpsVerdict v = rank_of_reference(setup, summary, data, *rc.theta);
  const json result{{"theta", as_std(*rc.theta)},
                    {"rank", v.rank},
                    {"member", v.member},
                    {"m", setup.m()},
                    {"q", setup.q()},
                    {"p", setup.p()},
                    {"p_fraction", std::to_string(setup.p_numerator()) + "/" + std::to_string(setup.p_denominator())},
                    {"seed", setup.seed()},
                    {"config", rc.to_json()}};
  out << result.dump(2) << '\n';
  return v.member ? kMember : kNotMember;
}

int cmd_ellipsoid(const RunConfig& rc, std::ostream& out) {
  const Dataset data = load(rc);
  const RegressionSummary summary = summarize(data);
  const SpsSetup setup(rc.sps, data.samples());
  json result{{"config", rc.to_json()}, {"theta_hat", as_std(summary.theta_hat)}};
  result["overbound"] = outer_approximation(setup, summary, data);
  if (data.samples() > data.dimension()) {
    result["chi2"] = asymptotic_ellipsoid(summary, rc.level);
    result["f"] = f_ellipsoid(summary, rc.level);
  }
  out << result.dump(2) << '\n';
  if (!rc.out_dir.empty() && rc.out_dir != ".") {
    fs::create_directories(rc.out_dir);
    auto f = open_out(fs::path(rc.out_dir) / "ellipsoids.json");
    f << result.dump(2) << '\n';
  }
  return 0;
}

void write_polyline(const fs::path& path, const Ellipsoid& e, const std::string& echo) {
  auto f = open_out(path);
  f << "# " << echo << '\n';
  write_ellipse_polyline_csv(f, e, 360);
}

int cmd_region(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Dataset data = load(rc);
  if (data.dimension() != 2) throw BadConfig("region output needs a two-parameter model (d = 2)");
  const RegressionSummary summary = summarize(data);
  const SpsSetup setup(rc.sps, data.samples());
  const SpsRegion region(setup, summary, data);
  const std::string echo = rc.to_json().dump();
  fs::create_directories(rc.out_dir);
  const fs::path dir(rc.out_dir);
  json meta{{"config", rc.to_json()}, {"theta_hat", as_std(summary.theta_hat)}, {"files", json::array()}};

  // The 2-norm over-bound of the same signs: the output itself for l2, a
  // search scale for the other norms.
  SpsConfig l2 = rc.sps;
  l2.norm = Norm::L2;
  const SpsSetup l2_setup(l2, data.samples());
  const Ellipsoid over = outer_approximation(l2_setup, summary, data);

  if (setup.norm() == Norm::L2) {
    meta["overbound"] = over;
    if (over.bounded()) {
      write_polyline(dir / "ellipse_overbound.csv", over, echo);
      meta["files"].push_back("ellipse_overbound.csv");
    }
  } else {
    meta["overbound"] = "unsupported for norm " + to_string(setup.norm());
    err << "note: no over-bound for norm " << to_string(setup.norm()) << "; other files written\n";
  }

  BoundaryTrace trace = trace_sps_boundary(region, over, rc.rays);
  // Non-2-norm regions are not inside the 2-norm over-bound; widen where needed.
  for (int attempt = 0; attempt < 6 && trace.any_unbounded(); ++attempt) {
    for (auto& ray : trace.rays) {
      if (!std::isinf(ray.distance)) continue;
      const double base = over.bounded() ? 4.0 * over.radial_extent(ray.direction) : 10.0;
      const double r_max = base * std::pow(4.0, attempt + 1);
      const std::vector<Vector> dir1{ray.direction};
      const std::vector<double> rad1{r_max};
      ray = trace_boundary([&](const Vector& t) { return region.contains(t); }, region.center(), dir1, rad1, 1e-6)
                .rays.front();
    }
  }
  {
    auto f = open_out(dir / "boundary.csv");
    f << "# " << echo << '\n';
    write_boundary_csv(f, trace);
    meta["files"].push_back("boundary.csv");
  }

  Box2 box;
  if (setup.norm() == Norm::L2 && over.bounded() && over.radius > 0.0) {
    box = bounding_box(over, 1.05);
  } else {
    double x0 = summary.theta_hat(0), x1 = x0, y0 = summary.theta_hat(1), y1 = y0;
    for (std::size_t k = 0; k < trace.rays.size(); ++k) {
      if (std::isinf(trace.rays[k].distance)) continue;
      const Vector p = trace.point(k);
      x0 = std::min(x0, p(0));
      x1 = std::max(x1, p(0));
      y0 = std::min(y0, p(1));
      y1 = std::max(y1, p(1));
    }
    const double mx = 0.1 * std::max(x1 - x0, 1e-9);
    const double my = 0.1 * std::max(y1 - y0, 1e-9);
    box = Box2{x0 - mx, x1 + mx, y0 - my, y1 + my};
  }
  const RegionRaster raster = setup.norm() == Norm::L2
                                  ? rasterize_sps(region, box, rc.resolution, rc.resolution)
                                  : rasterize([&](const Vector& t) { return region.contains(t); }, box,
                                              rc.resolution, rc.resolution);
  {
    auto f = open_out(dir / "raster.pgm");
    write_raster_pgm(f, raster, echo);
    meta["files"].push_back("raster.pgm");
  }
  {
    auto f = open_out(dir / "raster_members.csv");
    f << "# " << echo << '\n';
    write_raster_members_csv(f, raster);
    meta["files"].push_back("raster_members.csv");
  }
  meta["raster_area"] = raster_area(raster);
  meta["p"] = setup.p();

  if (data.samples() > data.dimension()) {
    const Ellipsoid chi2 = asymptotic_ellipsoid(summary, rc.level);
    const Ellipsoid fe = f_ellipsoid(summary, rc.level);
    write_polyline(dir / "ellipse_chi2.csv", chi2, echo);
    write_polyline(dir / "ellipse_f.csv", fe, echo);
    meta["files"].push_back("ellipse_chi2.csv");
    meta["files"].push_back("ellipse_f.csv");
    meta["chi2"] = chi2;
    meta["f"] = fe;
  }
  {
    auto f = open_out(dir / "region.json");
    f << meta.dump(2) << '\n';
  }
  out << meta.dump(2) << '\n';
  return 0;
}

int cmd_experiment(const std::string& name, const Flags& f, std::ostream& out) {
  NamedExperimentOptions opt;
  opt.trials = f.trials;
  if (f.seed) {
    opt.seed = f.seed;
  } else if (auto s = env_seed()) {
    opt.seed = s;
  }
  if (f.n) opt.n = *f.n;
  opt.threads = f.threads;
  opt.resolution = f.resolution;
  const auto result = run_named_experiment(name, opt);

  const fs::path dir(f.out.empty() ? "." : f.out);
  fs::create_directories(dir);
  {
    auto file = open_out(dir / (name + ".json"));
    file << result.summary.dump(2) << '\n';
  }
  for (const auto& [label, report] : result.reports) {
    auto file = open_out(dir / (name + "_" + label + ".csv"));
    report.write_csv(file);
  }
  out << json{{"experiment", name}, {"table", result.summary.at("table")}}.dump(2) << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sign-Perturbed Sums confidence regions for linear regression"};
  app.require_subcommand(1);
  Flags flags;

  auto* check = app.add_subcommand("check", "test whether theta lies in the confidence region");
  add_common(check, flags);
  check->add_option("--theta", flags.theta, "comma-separated parameter vector");

  auto* region = app.add_subcommand("region", "write boundary, raster and ellipse files for d = 2");
  add_common(region, flags);

  auto* ellipsoid = app.add_subcommand("ellipsoid", "print the over-bound, chi^2 and F ellipsoids");
  add_common(ellipsoid, flags);

  std::string experiment_name;
  auto* experiment = app.add_subcommand("experiment", "run a named Monte Carlo study");
  experiment->add_option("name", experiment_name, "study name")->required();
  experiment->add_option("--trials", flags.trials, "Monte Carlo trials");
  experiment->add_option("--seed", flags.seed, "master seed (fallback: $SPS_SEED)");
  experiment->add_option("--n", flags.n, "samples per dataset");
  experiment->add_option("--out", flags.out, "output directory");
  experiment->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
  experiment->add_option("--resolution", flags.resolution, "raster cells per axis")->check(CLI::Range(2, 20000));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (experiment->parsed()) return cmd_experiment(experiment_name, flags, out);
    const RunConfig rc = resolve(flags);
    if (check->parsed()) return cmd_check(rc, out);
    if (region->parsed()) return cmd_region(rc, out, err);
    if (ellipsoid->parsed()) return cmd_ellipsoid(rc, out);
  } catch (const SingularDesign& e) {
    err << "error: singular design: " << e.what() << '\n';
    return kSingularDesign;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace sps::cli
