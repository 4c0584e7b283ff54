#include "sps/regression.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace sps {

Dataset::Dataset(Matrix phi, Vector y) : regressors(std::move(phi)), outputs(std::move(y)) {
  if (regressors.rows() != outputs.size()) {
    throw BadConfig("dataset: " + std::to_string(regressors.rows()) + " regressor rows but " +
                    std::to_string(outputs.size()) + " outputs");
  }
  if (regressors.cols() < 1) throw BadConfig("dataset: regressor dimension must be >= 1");
  if (regressors.rows() < regressors.cols()) {
    throw BadConfig("dataset: need n >= d samples");
  }
  if (!regressors.allFinite() || !outputs.allFinite()) {
    throw BadConfig("dataset: non-finite entries");
  }
}

Vector RegressionSummary::apply_inverse_factor(const Vector& v) const {
  return r_n_half.triangularView<Eigen::Lower>().solve(v);
}

Vector RegressionSummary::solve(const Vector& v) const {
  Vector w = apply_inverse_factor(v);
  return r_n_half.transpose().triangularView<Eigen::Upper>().solve(w);
}

Matrix outer_product_matrix(const Dataset& data) {
  const auto n = data.samples();
  Matrix r = data.regressors.transpose() * data.regressors;
  r /= static_cast<double>(n);
  // exact symmetry regardless of the product kernel's summation order
  return 0.5 * (r + r.transpose());
}

Matrix factor_rn(const Matrix& r_n) {
  const auto d = r_n.rows();
  if (d == 0 || r_n.cols() != d) throw BadConfig("factor_rn: expected a non-empty square matrix");
  const double tol_pd = 1e-10 * r_n.trace() / static_cast<double>(d);

  Matrix l = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = r_n(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > tol_pd)) {
      std::ostringstream msg;
      msg << "R_n is not positive definite: pivot " << j << " = " << pivot << " <= " << tol_pd;
      throw SingularDesign(msg.str());
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = r_n(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

namespace {

Vector cross_moment(const Dataset& data) {
  return data.regressors.transpose() * data.outputs / static_cast<double>(data.samples());
}

}  // namespace

Vector least_squares(const Dataset& data) { return summarize(data).theta_hat; }

Vector residuals(const Dataset& data, const Vector& theta) {
  if (theta.size() != data.dimension()) throw BadConfig("residuals: theta has wrong dimension");
  return data.outputs - data.regressors * theta;
}

double noise_variance_estimate(const Dataset& data, const Vector& theta_hat) {
  const auto n = data.samples();
  const auto d = data.dimension();
  if (n <= d) throw DegenerateSample("noise variance needs n > d");
  return residuals(data, theta_hat).squaredNorm() / static_cast<double>(n - d);
}

RegressionSummary summarize(const Dataset& data) {
  RegressionSummary s;
  s.samples = data.samples();
  s.r_n = outer_product_matrix(data);
  s.r_n_half = factor_rn(s.r_n);
  s.theta_hat = s.solve(cross_moment(data));
  s.sigma2_hat = data.samples() > data.dimension()
                     ? noise_variance_estimate(data, s.theta_hat)
                     : std::numeric_limits<double>::quiet_NaN();
  return s;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

Dataset from_rows(const std::vector<std::vector<double>>& rows, std::size_t d) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix phi(n, static_cast<Eigen::Index>(d));
  Vector y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& row = rows[static_cast<std::size_t>(t)];
    for (std::size_t j = 0; j < d; ++j) phi(t, static_cast<Eigen::Index>(j)) = row[j];
    y(t) = row[d];
  }
  return Dataset(std::move(phi), std::move(y));
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (line_no == 0 || trim(line).empty()) throw ParseError("csv: empty input");
  {
    const auto header = split_csv(trim(line));
    columns = header.size();
    if (columns < 2) throw ParseError("csv line " + std::to_string(line_no) + ": header needs phi_1..phi_d,y");
    for (std::size_t j = 0; j + 1 < columns; ++j) {
      if (trim(header[j]) != "phi_" + std::to_string(j + 1)) {
        throw ParseError("csv line " + std::to_string(line_no) + ": expected column 'phi_" +
                         std::to_string(j + 1) + "', got '" + trim(header[j]) + "'");
      }
    }
    if (trim(header.back()) != "y") {
      throw ParseError("csv line " + std::to_string(line_no) + ": last column must be 'y'");
    }
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto cells = split_csv(trimmed);
    if (cells.size() != columns) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                       " fields, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(columns);
    for (const auto& c : cells) {
      const auto v = trim(c);
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (v.empty() || used != v.size() || !std::isfinite(x)) {
        throw ParseError("csv line " + std::to_string(line_no) + ": bad number '" + v + "'");
      }
      row.push_back(x);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("csv: no data rows");
  try {
    return from_rows(rows, columns - 1);
  } catch (const BadConfig& e) {
    throw ParseError(std::string("csv: ") + e.what());
  }
}

Dataset read_dataset_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("json: ") + e.what());
  }
  if (!j.contains("regressors") || !j.contains("outputs")) {
    throw ParseError("json: need fields 'regressors' and 'outputs'");
  }
  try {
    const auto phi = j.at("regressors").get<std::vector<std::vector<double>>>();
    const auto y = j.at("outputs").get<std::vector<double>>();
    if (phi.size() != y.size()) throw ParseError("json: regressors and outputs differ in length");
    if (phi.empty()) throw ParseError("json: no samples");
    const std::size_t d = phi.front().size();
    std::vector<std::vector<double>> rows;
    rows.reserve(phi.size());
    for (std::size_t t = 0; t < phi.size(); ++t) {
      if (phi[t].size() != d) throw ParseError("json: regressor row " + std::to_string(t) + " has wrong length");
      auto row = phi[t];
      row.push_back(y[t]);
      rows.push_back(std::move(row));
    }
    return from_rows(rows, d);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("json: ") + e.what());
  } catch (const BadConfig& e) {
    throw ParseError(std::string("json: ") + e.what());
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return read_dataset_json(in);
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const auto d = data.dimension();
  for (Eigen::Index j = 0; j < d; ++j) out << "phi_" << (j + 1) << ',';
  out << "y\n";
  out.precision(17);
  for (Eigen::Index t = 0; t < data.samples(); ++t) {
    for (Eigen::Index j = 0; j < d; ++j) out << data.regressors(t, j) << ',';
    out << data.outputs(t) << '\n';
  }
}

}  // namespace sps
