#include "sps/sps.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sps/rng.hpp"

namespace sps {

std::string to_string(Norm norm) {
  switch (norm) {
    case Norm::L1:
      return "l1";
    case Norm::L2:
      return "l2";
    case Norm::Linf:
      return "linf";
  }
  return "l2";
}

Norm parse_norm(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "l1") return Norm::L1;
  if (t == "l2") return Norm::L2;
  if (t == "linf") return Norm::Linf;
  throw BadConfig("unknown norm '" + text + "' (expected l1, l2 or linf)");
}

void to_json(nlohmann::json& j, const SpsConfig& c) {
  j = nlohmann::json{{"m", c.m}, {"q", c.q}, {"seed", c.seed}, {"block_length", c.block_length},
                     {"norm", to_string(c.norm)}};
}

void from_json(const nlohmann::json& j, SpsConfig& c) {
  c.m = j.value("m", c.m);
  c.q = j.value("q", c.q);
  c.seed = j.value("seed", c.seed);
  c.block_length = j.value("block_length", c.block_length);
  if (j.contains("norm")) c.norm = parse_norm(j.at("norm").get<std::string>());
}

SpsSetup::SpsSetup(const SpsConfig& config, Eigen::Index samples) : config_(config), samples_(samples) {
  if (config.m < 2) throw BadConfig("m must be at least 2");
  if (config.q <= 0 || config.q >= config.m) throw BadConfig("need 0 < q < m");
  if (config.block_length < 1) throw BadConfig("block length must be >= 1");
  if (samples < 1) throw BadConfig("need at least one sample");
  if (samples % config.block_length != 0) {
    throw BadConfig("block length " + std::to_string(config.block_length) + " does not divide n = " +
                    std::to_string(samples));
  }

  Engine rng = make_engine(config.seed);
  const auto count = static_cast<std::size_t>((config.m - 1) * blocks());
  block_signs_.resize(count);
  std::uint64_t bits = 0;
  int left = 0;
  for (auto& s : block_signs_) {
    if (left == 0) {
      bits = rng();
      left = 64;
    }
    s = (bits & 1U) ? 1 : -1;
    bits >>= 1;
    --left;
  }

  // Fisher-Yates: every one of the m! permutations is equally likely.
  tie_break_.resize(static_cast<std::size_t>(config.m));
  std::iota(tie_break_.begin(), tie_break_.end(), 0);
  for (int k = config.m - 1; k > 0; --k) {
    std::uniform_int_distribution<int> pick(0, k);
    std::swap(tie_break_[static_cast<std::size_t>(k)], tie_break_[static_cast<std::size_t>(pick(rng))]);
  }
}

std::int64_t SpsSetup::p_numerator() const {
  const std::int64_t num = config_.m - config_.q;
  return num / std::gcd(num, static_cast<std::int64_t>(config_.m));
}

std::int64_t SpsSetup::p_denominator() const {
  const std::int64_t num = config_.m - config_.q;
  return config_.m / std::gcd(num, static_cast<std::int64_t>(config_.m));
}

int SpsSetup::sign(int i, Eigen::Index t) const {
  if (i == 0) return 1;
  return block_sign(i, t / config_.block_length);
}

bool SpsSetup::constant_row(int i) const {
  if (i == 0) return true;
  const int first = block_sign(i, 0);
  for (Eigen::Index k = 1; k < blocks(); ++k) {
    if (block_sign(i, k) != first) return false;
  }
  return true;
}

void SpsSetup::assign(const std::vector<std::vector<int>>& signs, const std::vector<int>& permutation) {
  if (signs.size() != static_cast<std::size_t>(config_.m - 1)) throw BadConfig("assign: need m-1 sign rows");
  if (permutation.size() != static_cast<std::size_t>(config_.m)) throw BadConfig("assign: permutation size != m");
  std::vector<int> sorted = permutation;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < config_.m; ++k) {
    if (sorted[static_cast<std::size_t>(k)] != k) throw BadConfig("assign: not a permutation of 0..m-1");
  }
  std::vector<signed char> packed;
  packed.reserve(block_signs_.size());
  for (const auto& row : signs) {
    if (row.size() != static_cast<std::size_t>(blocks())) throw BadConfig("assign: sign row length != n/T");
    for (int s : row) {
      if (s != 1 && s != -1) throw BadConfig("assign: signs must be +1 or -1");
      packed.push_back(static_cast<signed char>(s));
    }
  }
  block_signs_ = std::move(packed);
  tie_break_ = permutation;
}

SpsSetup init_sps(int m, int q, std::uint64_t seed, Eigen::Index samples, int block_length, Norm norm) {
  return SpsSetup(SpsConfig{m, q, seed, block_length, norm}, samples);
}

double squared_norm(const Vector& s, Norm norm) {
  switch (norm) {
    case Norm::L1: {
      const double v = s.lpNorm<1>();
      return v * v;
    }
    case Norm::L2:
      return s.squaredNorm();
    case Norm::Linf: {
      const double v = s.lpNorm<Eigen::Infinity>();
      return v * v;
    }
  }
  return s.squaredNorm();
}

namespace {

void check_dims(const SpsSetup& setup, const Dataset& data, const Vector& theta) {
  if (setup.samples() != data.samples()) throw BadConfig("setup was drawn for a different sample size");
  if (theta.size() != data.dimension()) throw BadConfig("theta has wrong dimension");
}

/// Per-block sums of phi_t eps_t(theta), blocks() x d.
Matrix block_moments(const SpsSetup& setup, const Dataset& data, const Vector& theta) {
  const Vector eps = residuals(data, theta);
  const auto d = data.dimension();
  const auto len = setup.block_length();
  Matrix out = Matrix::Zero(setup.blocks(), d);
  for (Eigen::Index t = 0; t < data.samples(); ++t) {
    out.row(t / len) += eps(t) * data.regressors.row(t);
  }
  return out;
}

/// (1/n) sum_t alpha_{i,t} phi_t eps_t for every i; column i of the result.
Matrix perturbed_sums(const SpsSetup& setup, const Matrix& moments, double n) {
  const auto d = moments.cols();
  Matrix out(d, setup.m());
  // Same accumulation order for every row, so rows with constant signs
  // reproduce +-S_0 bit for bit and ties stay exact.
  for (int i = 0; i < setup.m(); ++i) {
    Vector acc = Vector::Zero(d);
    for (Eigen::Index k = 0; k < setup.blocks(); ++k) {
      if (i == 0 || setup.block_sign(i, k) > 0) {
        acc += moments.row(k).transpose();
      } else {
        acc -= moments.row(k).transpose();
      }
    }
    out.col(i) = acc;
  }
  return out / n;
}

}  // namespace

Vector evaluate_s(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                  const Vector& theta, int i) {
  check_dims(setup, data, theta);
  if (i < 0 || i >= setup.m()) throw BadConfig("perturbation index out of range");
  const Vector eps = residuals(data, theta);
  Vector acc = Vector::Zero(data.dimension());
  for (Eigen::Index t = 0; t < data.samples(); ++t) {
    acc += static_cast<double>(setup.sign(i, t)) * eps(t) * data.regressors.row(t).transpose();
  }
  acc /= static_cast<double>(data.samples());
  return summary.apply_inverse_factor(acc);
}

int rank_under_order(const Vector& values, const std::vector<int>& tie_break) {
  const double z0 = values(0);
  const int pi0 = tie_break[0];
  int rank = 1;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    const double zi = values(i);
    if (z0 > zi || (z0 == zi && pi0 > tie_break[static_cast<std::size_t>(i)])) ++rank;
  }
  return rank;
}

SpsVerdict rank_of_reference(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                             const Vector& theta) {
  check_dims(setup, data, theta);
  const Matrix sums =
      perturbed_sums(setup, block_moments(setup, data, theta), static_cast<double>(data.samples()));
  SpsVerdict v;
  v.s_norms.resize(setup.m());
  for (int i = 0; i < setup.m(); ++i) {
    // column-by-column so that every S_i goes through identical arithmetic
    v.s_norms(i) = squared_norm(summary.apply_inverse_factor(sums.col(i)), setup.norm());
  }
  v.rank = rank_under_order(v.s_norms, setup.permutation());
  v.member = v.rank <= setup.m() - setup.q();
  return v;
}

bool sps_indicator(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data,
                   const Vector& theta) {
  return rank_of_reference(setup, summary, data, theta).member;
}

SpsRegion::SpsRegion(const SpsSetup& setup, const RegressionSummary& summary, const Dataset& data)
    : m_(setup.m()),
      q_(setup.q()),
      norm_(setup.norm()),
      d_(data.dimension()),
      center_(summary.theta_hat),
      tie_break_(setup.permutation()) {
  if (setup.samples() != data.samples()) throw BadConfig("setup was drawn for a different sample size");
  const auto n = static_cast<double>(data.samples());
  const auto len = setup.block_length();
  const auto nb = setup.blocks();

  // Per-block moments of phi_t phi_t^T and phi_t Y_t.
  std::vector<Matrix> block_outer(static_cast<std::size_t>(nb), Matrix::Zero(d_, d_));
  Matrix block_cross = Matrix::Zero(d_, nb);
  for (Eigen::Index t = 0; t < data.samples(); ++t) {
    const auto k = t / len;
    const auto phi = data.regressors.row(t).transpose();
    block_outer[static_cast<std::size_t>(k)].noalias() += phi * phi.transpose();
    block_cross.col(k) += data.outputs(t) * phi;
  }

  offsets_.resize(static_cast<Eigen::Index>(m_) * d_);
  slopes_.resize(static_cast<Eigen::Index>(m_) * d_, d_);
  constant_rows_.assign(static_cast<std::size_t>(m_), false);
  const auto factor = summary.r_n_half.triangularView<Eigen::Lower>();
  for (int i = 0; i < m_; ++i) {
    Matrix q_i = Matrix::Zero(d_, d_);
    Vector psi_i = Vector::Zero(d_);
    for (Eigen::Index k = 0; k < nb; ++k) {
      const int a = setup.sign(i, k * len);
      if (a > 0) {
        q_i += block_outer[static_cast<std::size_t>(k)];
        psi_i += block_cross.col(k);
      } else {
        q_i -= block_outer[static_cast<std::size_t>(k)];
        psi_i -= block_cross.col(k);
      }
    }
    q_i /= n;
    psi_i /= n;
    offsets_.segment(static_cast<Eigen::Index>(i) * d_, d_) = factor.solve(psi_i);
    slopes_.middleRows(static_cast<Eigen::Index>(i) * d_, d_) = factor.solve(q_i);
    constant_rows_[static_cast<std::size_t>(i)] = setup.constant_row(i);
  }
}

Vector SpsRegion::s_norms(const Vector& theta) const {
  if (theta.size() != d_) throw BadConfig("theta has wrong dimension");
  const Vector s = offsets_ - slopes_ * theta;
  Vector out(m_);
  for (int i = 0; i < m_; ++i) out(i) = squared_norm(s.segment(static_cast<Eigen::Index>(i) * d_, d_), norm_);
  return out;
}

SpsVerdict SpsRegion::verdict(const Vector& theta) const {
  SpsVerdict v;
  v.s_norms = s_norms(theta);
  v.rank = rank_under_order(v.s_norms, tie_break_);
  v.member = v.rank <= m_ - q_;
  return v;
}

bool SpsRegion::contains(const Vector& theta) const { return verdict(theta).member; }

}  // namespace sps
