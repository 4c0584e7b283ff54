#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sps/regression.hpp"
#include "sps/sps.hpp"

namespace sps {

struct NoiseModel {
  enum class Kind { Gaussian, Laplacian, Uniform, AR1 };
  Kind kind = Kind::Gaussian;
  double variance = 0.1;  // marginal variance; for AR1 the variance of W_t
  double ar_coeff = 0.0;  // AR1 only: N_t = c N_{t-1} + sqrt(1 - c^2) W_t

  static NoiseModel gaussian(double var) { return {Kind::Gaussian, var, 0.0}; }
  static NoiseModel laplacian(double var) { return {Kind::Laplacian, var, 0.0}; }
  static NoiseModel uniform(double var) { return {Kind::Uniform, var, 0.0}; }
  static NoiseModel ar1(double coeff, double innovation_var) { return {Kind::AR1, innovation_var, coeff}; }
};

/// Regressor construction. Column k is the input filtered through
/// L_k(z, alpha) = 1/(z - alpha) * ((1 - alpha z)/(z - alpha))^{k-1};
/// alpha = 0 gives the FIR lags U_{t-1}, ..., U_{t-d}.
struct RegressorBasis {
  enum class Kind { FIR, Laguerre };
  Kind kind = Kind::FIR;
  int order = 2;
  double alpha = 0.0;

  static RegressorBasis fir(int order) { return {Kind::FIR, order, 0.0}; }
  static RegressorBasis laguerre(int order, double alpha) { return {Kind::Laguerre, order, alpha}; }
};

/// Data-generating system Y_t = sum_k theta*_k (L_k u)_t + N_t with AR(1)
/// input U_t = a U_{t-1} + V_t. `true_params` may be longer than the model
/// order (undermodelling).
struct SystemSpec {
  Vector true_params;
  double input_ar_coeff = 0.75;
  double input_noise_variance = 1.0;
  NoiseModel noise;
  RegressorBasis basis;
  int burn_in = 100;

  void validate() const;
};

/// The second-order FIR benchmark: theta* = (0.7, 0.3), U_t = 0.75 U_{t-1} + V_t.
SystemSpec fir2_system(const NoiseModel& noise);

void to_json(nlohmann::json& j, const SystemSpec& s);
void from_json(const nlohmann::json& j, SystemSpec& s);

/// Draws n samples; the input and AR noise start from zero and the first
/// `burn_in` samples are discarded.
Dataset simulate_dataset(const SystemSpec& spec, Eigen::Index n, std::uint64_t seed);

/// Limit of the LS estimate as n -> infinity for the model order of `spec`,
/// from the stationary input autocovariance (FIR basis only).
Vector asymptotic_ls_target(const SystemSpec& spec);

/// Wilson score interval for a binomial proportion.
struct Proportion {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

Proportion binomial_proportion(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// One Monte Carlo trial. Unset fields were not requested.
struct TrialRecord {
  std::uint64_t trial = 0;
  std::optional<bool> covered_sps;
  std::optional<bool> covered_block;
  std::optional<bool> covered_asym;
  std::optional<bool> covered_f;
  std::optional<bool> covered_overbound;
  std::optional<double> area_sps;
  std::optional<double> area_block;
  std::optional<double> area_f;
  std::optional<double> area_asym;
  std::optional<double> radius_overbound;
  std::optional<double> volume_increase;  // (vol_overbound / vol_asym)^{1/d}
};

struct StudyOptions {
  SpsConfig sps;              // seed is ignored; each trial draws its own
  int block_length = 10;      // for the Block SPS variant
  double level = 0.95;        // comparator ellipsoid level
  bool block_variant = false;
  bool asymptotic = false;
  bool f_ellipsoid = false;
  bool over_bound = false;
  bool areas = false;          // raster areas (d = 2, 2-norm)
  bool volume_increase = false;
  int resolution = 400;        // raster cells per axis
  int threads = 1;
  /// Selects independent sign streams for studies that share datasets
  /// (same master seed) across configurations.
  std::uint64_t stream = 0;
};

void to_json(nlohmann::json& j, const StudyOptions& o);

struct ExperimentReport {
  nlohmann::json config;
  std::vector<TrialRecord> trials;

  /// Recomputed from `trials` on every call.
  [[nodiscard]] nlohmann::json aggregates() const;
  [[nodiscard]] nlohmann::json to_json(bool include_trials = true) const;
  void write_csv(std::ostream& out) const;
};

/// Membership of theta* (or the asymptotic LS target under undermodelling)
/// in freshly drawn regions, trial by trial.
ExperimentReport coverage_study(const SystemSpec& spec, Eigen::Index n, const StudyOptions& options,
                                std::size_t trials, std::uint64_t master_seed);

/// Region sizes: SPS raster area, comparator areas, over-bound radius/volume.
ExperimentReport area_study(const SystemSpec& spec, Eigen::Index n, const StudyOptions& options,
                            std::size_t trials, std::uint64_t master_seed);

/// Runs `body(trial)` for trial = 0..count-1 on `threads` workers.
void parallel_trials(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// SPS area of one dataset: row-sweep raster over the over-bound's bounding
/// box (or a grown box when the over-bound is unbounded).
double sps_region_area(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                       int resolution);

// Catalog of named studies reproducing the benchmark experiments.
struct NamedExperimentOptions {
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<Eigen::Index> n;
  int threads = 1;
  int resolution = 400;
};

struct NamedExperimentResult {
  nlohmann::json summary;                                        // config echo + table
  std::vector<std::pair<std::string, ExperimentReport>> reports;  // label -> per-trial report
};

const std::vector<std::string>& experiment_names();
/// Throws BadConfig for unknown names.
NamedExperimentResult run_named_experiment(const std::string& name, const NamedExperimentOptions& options);

}  // namespace sps
