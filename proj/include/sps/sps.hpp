#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sps/regression.hpp"
#include "sps/types.hpp"

namespace sps {

enum class Norm { L1, L2, Linf };

std::string to_string(Norm norm);
/// Accepts l1, l2, linf (case-insensitive). Throws BadConfig otherwise.
Norm parse_norm(const std::string& text);

/// The serializable part of a setup. The signs and the permutation are
/// regenerated from `seed`.
struct SpsConfig {
  int m = 100;
  int q = 5;
  std::uint64_t seed = 0;
  int block_length = 1;
  Norm norm = Norm::L2;
};

void to_json(nlohmann::json& j, const SpsConfig& c);
void from_json(const nlohmann::json& j, SpsConfig& c);

/// Random objects of an SPS construction: m-1 sign sequences (constant over
/// blocks of `block_length` samples) and the tie-breaking permutation.
/// Row 0 (the unperturbed reference sum) is implicit.
class SpsSetup {
 public:
  SpsSetup(const SpsConfig& config, Eigen::Index samples);

  [[nodiscard]] int m() const { return config_.m; }
  [[nodiscard]] int q() const { return config_.q; }
  [[nodiscard]] std::uint64_t seed() const { return config_.seed; }
  [[nodiscard]] int block_length() const { return config_.block_length; }
  [[nodiscard]] Norm norm() const { return config_.norm; }
  [[nodiscard]] const SpsConfig& config() const { return config_; }
  [[nodiscard]] Eigen::Index samples() const { return samples_; }
  [[nodiscard]] Eigen::Index blocks() const { return samples_ / config_.block_length; }

  /// Confidence level 1 - q/m as a reduced fraction.
  [[nodiscard]] std::int64_t p_numerator() const;
  [[nodiscard]] std::int64_t p_denominator() const;
  [[nodiscard]] double p() const { return 1.0 - static_cast<double>(config_.q) / config_.m; }

  /// alpha_{i,t}; i in 0..m-1 (row 0 is all +1), t in 0..n-1.
  [[nodiscard]] int sign(int i, Eigen::Index t) const;
  /// Sign shared by block k of row i (i >= 1).
  [[nodiscard]] int block_sign(int i, Eigen::Index k) const {
    return block_signs_[static_cast<std::size_t>((i - 1) * blocks() + k)];
  }
  /// pi(k) for k in 0..m-1.
  [[nodiscard]] int tie_break(int k) const { return tie_break_[static_cast<std::size_t>(k)]; }
  [[nodiscard]] const std::vector<int>& permutation() const { return tie_break_; }

  /// Row i has all signs equal, so ||S_i|| == ||S_0|| for every theta.
  [[nodiscard]] bool constant_row(int i) const;

  /// Overrides the random objects; for enumeration tests and replaying
  /// externally drawn signs. `signs` is (m-1) x blocks with entries +-1.
  void assign(const std::vector<std::vector<int>>& signs, const std::vector<int>& permutation);

 private:
  SpsConfig config_;
  Eigen::Index samples_;
  std::vector<signed char> block_signs_;
  std::vector<int> tie_break_;
};

/// Validates the configuration and draws signs and permutation from `seed`.
SpsSetup init_sps(int m, int q, std::uint64_t seed, Eigen::Index samples, int block_length = 1,
                  Norm norm = Norm::L2);

struct SpsVerdict {
  int rank = 0;
  bool member = false;
  Vector s_norms;  // ||S_i(theta)||^2 in the configured norm, i = 0..m-1
};

/// Value of a sum's norm raised to the power two.
double squared_norm(const Vector& s, Norm norm);

/// S_i(theta) = R_n^{-1/2} (1/n) sum_t alpha_{i,t} phi_t eps_t(theta).
Vector evaluate_s(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                  const Vector& theta, int i);

/// Rank of index 0 among `values` under the pi-tie-broken strict order
/// (1 = smallest).
int rank_under_order(const Vector& values, const std::vector<int>& tie_break);

SpsVerdict rank_of_reference(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                             const Vector& theta);

bool sps_indicator(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                   const Vector& theta);

/// Precomputed affine form S_i(theta) = g_i - G_i theta for repeated
/// membership queries on the same (setup, data). Each query costs O(m d^2)
/// instead of O(m n d).
class SpsRegion {
 public:
  SpsRegion(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data);

  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] int q() const { return q_; }
  [[nodiscard]] Norm norm() const { return norm_; }
  [[nodiscard]] Eigen::Index dimension() const { return d_; }
  [[nodiscard]] const Vector& center() const { return center_; }
  [[nodiscard]] const std::vector<int>& tie_break() const { return tie_break_; }
  [[nodiscard]] const std::vector<bool>& constant_rows() const { return constant_rows_; }

  /// Stacked offsets g_i (block i occupies rows i*d .. i*d+d-1), i = 0..m-1.
  [[nodiscard]] const Vector& offsets() const { return offsets_; }
  /// Stacked slopes G_i, (m*d) x d.
  [[nodiscard]] const Matrix& slopes() const { return slopes_; }

  [[nodiscard]] Vector s_norms(const Vector& theta) const;
  [[nodiscard]] SpsVerdict verdict(const Vector& theta) const;
  [[nodiscard]] bool contains(const Vector& theta) const;

 private:
  int m_;
  int q_;
  Norm norm_;
  Eigen::Index d_;
  Vector center_;
  Vector offsets_;
  Matrix slopes_;
  std::vector<int> tie_break_;
  std::vector<bool> constant_rows_;
};

}  // namespace sps
