#pragma once

#include "costlens/catalog.hpp"
#include "costlens/error.hpp"
#include "costlens/json.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace costlens {

// Confusion cost matrix: entry (row, col) is the cost of predicting class
// `row` when the target is class `col`.
template <typename Scalar = double>
using CostMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using CostMatrixd = CostMatrix<double>;

inline constexpr double kDefaultEpsilon = 0.1;
inline constexpr double kDefaultSkyCost = 1000.0;
inline constexpr double kSimplexTolerance = 1e-9;

// Cost matrix over named aggregates (rows = predicted, cols = target).
struct AggregateCostMatrix {
  std::vector<std::string> order;
  Eigen::MatrixXd values;
};

// Throws ValidationError unless the matrix is square, matches `order`, has
// a zero diagonal and strictly positive finite off-diagonal entries.
AggregateCostMatrix make_aggregate_matrix(std::vector<std::string> order,
                                          Eigen::MatrixXd values);

// Convex weights (alpha, beta, gamma) for the corners (C_R, C_A, C_E).
class BarycentricPoint {
 public:
  BarycentricPoint(double alpha, double beta, double gamma);

  double alpha() const { return w_[0]; }
  double beta() const { return w_[1]; }
  double gamma() const { return w_[2]; }
  const std::array<double, 3>& weights() const { return w_; }

  friend bool operator==(const BarycentricPoint&, const BarycentricPoint&) = default;

 private:
  std::array<double, 3> w_;
};

struct ValueSpaceViolation {
  int row;
  int col;
  double value;
  std::string reason;
};

struct ValueSpaceReport {
  std::vector<ValueSpaceViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks C_jj = 0 and C_ij > 0 (finite) for i != j.
template <typename Derived>
ValueSpaceReport validate_value_space(const Eigen::MatrixBase<Derived>& cost) {
  ValueSpaceReport report;
  if (cost.rows() != cost.cols()) {
    report.violations.push_back({-1, -1, 0.0, "matrix is not square"});
    return report;
  }
  for (Eigen::Index r = 0; r < cost.rows(); ++r) {
    for (Eigen::Index c = 0; c < cost.cols(); ++c) {
      const double v = static_cast<double>(cost(r, c));
      const int ri = static_cast<int>(r), ci = static_cast<int>(c);
      if (!std::isfinite(v)) {
        report.violations.push_back({ri, ci, v, "non-finite entry"});
      } else if (r == c && v != 0.0) {
        report.violations.push_back({ri, ci, v, "diagonal entry must be 0"});
      } else if (r != c && v <= 0.0) {
        report.violations.push_back({ri, ci, v, "off-diagonal entry must be > 0"});
      }
    }
  }
  return report;
}

template <typename Derived>
void require_value_space(const Eigen::MatrixBase<Derived>& cost) {
  const auto report = validate_value_space(cost);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw ValidationError("cost matrix outside the value space at (" + std::to_string(v.row) +
                          "," + std::to_string(v.col) + "): " + v.reason);
  }
}

// c_s: 0 on the diagonal, lambda elsewhere.
template <typename Scalar = double>
CostMatrix<Scalar> symmetric_cost_matrix(int n, Scalar lambda) {
  if (n < 2) throw ValidationError("cost matrix needs at least two classes");
  if (!(lambda > Scalar(0)) || !std::isfinite(static_cast<double>(lambda)))
    throw ValidationError("lambda must be positive");
  CostMatrix<Scalar> c = CostMatrix<Scalar>::Constant(n, n, lambda);
  c.diagonal().setZero();
  return c;
}

// c(k^, k) = psi(k) for k^ != k: every off-diagonal entry of column k is
// psi(k).
template <typename Derived>
CostMatrix<typename Derived::Scalar> thresholding_cost_matrix(
    const Eigen::MatrixBase<Derived>& psi) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = psi.size();
  if (n < 2) throw ValidationError("cost matrix needs at least two classes");
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(psi(k) > Scalar(0)) || !std::isfinite(static_cast<double>(psi(k))))
      throw ValidationError("psi weights must be positive");
  }
  CostMatrix<Scalar> c(n, n);
  for (Eigen::Index row = 0; row < n; ++row)
    for (Eigen::Index k = 0; k < n; ++k) c(row, k) = row == k ? Scalar(0) : psi(k);
  return c;
}

// c_p: lambda / p(k) off the diagonal. Throws on a zero prior.
CostMatrixd inverse_prior_cost_matrix(const PriorVector& priors, double lambda);

// Full-space matrix from an aggregate matrix: inter-aggregate entries copy
// the aggregate entry, distinct classes inside one aggregate cost epsilon,
// the sky prediction row costs sky_cost off the diagonal and the sky target
// column costs epsilon.
CostMatrixd expand_aggregate_matrix(const AggregateCostMatrix& aggregate,
                                    const ClassCatalog& catalog,
                                    double epsilon = kDefaultEpsilon,
                                    double sky_cost = kDefaultSkyCost);

// Built-in corners over (road, flat, static, info, humans, dynamic).
AggregateCostMatrix robotistic_matrix();
AggregateCostMatrix altruistic_matrix();
AggregateCostMatrix egoistic_matrix();
// "robotistic" | "altruistic" | "egoistic"; throws on anything else.
AggregateCostMatrix builtin_matrix(const std::string& name);
bool is_builtin_matrix_name(const std::string& name);

template <typename D1, typename D2, typename D3>
CostMatrix<typename D1::Scalar> barycentric_combination(const BarycentricPoint& point,
                                                        const Eigen::MatrixBase<D1>& cr,
                                                        const Eigen::MatrixBase<D2>& ca,
                                                        const Eigen::MatrixBase<D3>& ce) {
  using Scalar = typename D1::Scalar;
  if (cr.rows() != ca.rows() || cr.rows() != ce.rows() || cr.cols() != ca.cols() ||
      cr.cols() != ce.cols())
    throw ValidationError("corner matrices differ in size");
  return Scalar(point.alpha()) * cr + Scalar(point.beta()) * ca + Scalar(point.gamma()) * ce;
}

AggregateCostMatrix barycentric_combination(const BarycentricPoint& point,
                                            const AggregateCostMatrix& cr,
                                            const AggregateCostMatrix& ca,
                                            const AggregateCostMatrix& ce);

// {"order": [...], "matrix": [[...]]}
Json cost_matrix_to_json(const std::vector<std::string>& order, const Eigen::MatrixXd& matrix);

struct CostDocument {
  std::vector<std::string> order;
  Eigen::MatrixXd matrix;
};
CostDocument cost_document_from_json(const Json& doc);

// Aggregate-space documents (order = the catalog's aggregate names, any
// permutation) are expanded; class-space documents (order = class names)
// are permuted into catalog order and validated.
CostMatrixd resolve_cost_document(const CostDocument& doc, const ClassCatalog& catalog,
                                  double epsilon = kDefaultEpsilon,
                                  double sky_cost = kDefaultSkyCost);
bool is_aggregate_document(const CostDocument& doc, const ClassCatalog& catalog);

}  // namespace costlens
