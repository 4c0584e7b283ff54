#pragma once

#include <iosfwd>
#include <string>

#include "sps/types.hpp"

namespace sps {

/// n samples of a scalar linear regression: row t of `regressors` is phi_t^T,
/// `outputs(t)` is Y_t.
struct Dataset {
  Matrix regressors;
  Vector outputs;

  Dataset() = default;
  Dataset(Matrix phi, Vector y);

  [[nodiscard]] Eigen::Index samples() const { return regressors.rows(); }
  [[nodiscard]] Eigen::Index dimension() const { return regressors.cols(); }
};

/// Quantities shared by every consumer of a dataset: R_n, its lower Cholesky
/// factor, the least-squares estimate and the residual variance.
struct RegressionSummary {
  Matrix r_n;
  Matrix r_n_half;  // lower triangular, r_n_half * r_n_half^T == r_n
  Vector theta_hat;
  double sigma2_hat = 0.0;  // NaN when n == d
  Eigen::Index samples = 0;

  /// Solves r_n_half * x = v.
  [[nodiscard]] Vector apply_inverse_factor(const Vector& v) const;
  /// Solves r_n * x = v through the triangular factor.
  [[nodiscard]] Vector solve(const Vector& v) const;
};

/// (1/n) sum_t phi_t phi_t^T.
Matrix outer_product_matrix(const Dataset& data);

/// Lower Cholesky factor. Throws SingularDesign when a pivot falls below
/// 1e-10 * trace(r_n) / d.
Matrix factor_rn(const Matrix& r_n);

Vector least_squares(const Dataset& data);

/// eps_t(theta) = Y_t - phi_t^T theta.
Vector residuals(const Dataset& data, const Vector& theta);

/// sum eps_t^2(theta_hat) / (n - d). Throws DegenerateSample when n <= d.
double noise_variance_estimate(const Dataset& data, const Vector& theta_hat);

/// Everything above in one pass. sigma2_hat is NaN when n == d.
RegressionSummary summarize(const Dataset& data);

// Dataset files: CSV with header `phi_1,...,phi_d,y`, or JSON
// {"regressors": [[...], ...], "outputs": [...]}.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_json(std::istream& in);
/// Dispatches on extension (.json, otherwise CSV).
Dataset load_dataset(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace sps
