#include "costlens/costspace.hpp"

#include <algorithm>
#include <initializer_list>

namespace costlens {

namespace {

const std::vector<std::string>& builtin_aggregate_order() {
  static const std::vector<std::string> order = {"road", "flat",   "static",
                                                 "info", "humans", "dynamic"};
  return order;
}

AggregateCostMatrix builtin(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(6, 6);
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return make_aggregate_matrix(builtin_aggregate_order(), std::move(m));
}

}  // namespace

AggregateCostMatrix make_aggregate_matrix(std::vector<std::string> order,
                                          Eigen::MatrixXd values) {
  if (values.rows() != values.cols())
    throw ValidationError("aggregate cost matrix must be square");
  if (static_cast<Eigen::Index>(order.size()) != values.rows())
    throw ValidationError("aggregate order length does not match the matrix size");
  require_value_space(values);
  return AggregateCostMatrix{std::move(order), std::move(values)};
}

BarycentricPoint::BarycentricPoint(double alpha, double beta, double gamma)
    : w_{alpha, beta, gamma} {
  for (double w : w_) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0)
      throw ValidationError("barycentric weights must lie in [0,1]");
  }
  if (std::abs(alpha + beta + gamma - 1.0) > kSimplexTolerance)
    throw ValidationError("barycentric weights must sum to 1 (simplex violation)");
}

CostMatrixd inverse_prior_cost_matrix(const PriorVector& priors, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive");
  const Eigen::VectorXd& p = priors.values();
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (!(p[k] > 0.0))
      throw ValidationError("prior of class " + std::to_string(k) +
                            " is zero; inverse-prior cost undefined");
  }
  const Eigen::VectorXd psi = lambda * p.cwiseInverse();
  return thresholding_cost_matrix(psi);
}

CostMatrixd expand_aggregate_matrix(const AggregateCostMatrix& aggregate,
                                    const ClassCatalog& catalog, double epsilon,
                                    double sky_cost) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be positive");
  if (!std::isfinite(sky_cost) || sky_cost < aggregate.values.maxCoeff())
    throw ValidationError("sky cost must be at least every aggregate entry");

  const auto& catalog_aggregates = catalog.aggregates();
  if (aggregate.order.size() != catalog_aggregates.size())
    throw ValidationError("aggregate matrix does not match the catalog's aggregates");
  // Map catalog aggregate position -> row/column of the aggregate matrix.
  std::vector<Eigen::Index> slot(catalog_aggregates.size());
  for (std::size_t a = 0; a < catalog_aggregates.size(); ++a) {
    const auto it = std::find(aggregate.order.begin(), aggregate.order.end(),
                              catalog_aggregates[a].name);
    if (it == aggregate.order.end())
      throw ValidationError("aggregate '" + catalog_aggregates[a].name +
                            "' missing from the cost matrix");
    slot[a] = it - aggregate.order.begin();
  }

  const int n = catalog.size();
  const auto sky = catalog.sky_index();
  CostMatrixd full(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        full(i, j) = 0.0;
      } else if (sky && i == *sky) {
        full(i, j) = sky_cost;
      } else if (sky && j == *sky) {
        full(i, j) = epsilon;
      } else {
        const int ai = catalog.aggregate_position(i);
        const int aj = catalog.aggregate_position(j);
        full(i, j) = ai == aj ? epsilon : aggregate.values(slot[ai], slot[aj]);
      }
    }
  }
  return full;
}

AggregateCostMatrix robotistic_matrix() {
  return builtin({{0, 1, 1, 1, 1, 1},
                  {1, 0, 1, 1, 1, 1},
                  {1, 1, 0, 1, 1, 1},
                  {1, 1, 1, 0, 1, 1},
                  {1, 1, 1, 1, 0, 1},
                  {1, 1, 1, 1, 1, 0}});
}

AggregateCostMatrix altruistic_matrix() {
  return builtin({{0, 1, 10, 100, 1000, 100},
                  {1, 0, 10, 100, 1000, 100},
                  {1, 1, 0, 100, 100, 10},
                  {1, 1, 1, 0, 1000, 100},
                  {1, 1, 1, 100, 0, 10},
                  {1, 1, 1, 100, 1000, 0}});
}

AggregateCostMatrix egoistic_matrix() {
  return builtin({{0, 1, 1000, 100, 10, 100},
                  {1, 0, 1000, 100, 10, 100},
                  {10, 1, 0, 1000, 1, 10},
                  {10, 1, 1000, 0, 1, 10},
                  {10, 1, 1000, 100, 0, 100},
                  {10, 10, 1000, 100, 100, 0}});
}

bool is_builtin_matrix_name(const std::string& name) {
  return name == "robotistic" || name == "altruistic" || name == "egoistic";
}

AggregateCostMatrix builtin_matrix(const std::string& name) {
  if (name == "robotistic") return robotistic_matrix();
  if (name == "altruistic") return altruistic_matrix();
  if (name == "egoistic") return egoistic_matrix();
  throw ValidationError("unknown built-in cost matrix '" + name + "'");
}

AggregateCostMatrix barycentric_combination(const BarycentricPoint& point,
                                            const AggregateCostMatrix& cr,
                                            const AggregateCostMatrix& ca,
                                            const AggregateCostMatrix& ce) {
  if (cr.order != ca.order || cr.order != ce.order)
    throw ValidationError("corner matrices use different aggregate orders");
  return AggregateCostMatrix{cr.order,
                             barycentric_combination(point, cr.values, ca.values, ce.values)};
}

Json cost_matrix_to_json(const std::vector<std::string>& order, const Eigen::MatrixXd& matrix) {
  Json doc;
  doc["order"] = order;
  doc["matrix"] = Json::array();
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    std::vector<double> row(matrix.cols());
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) row[c] = matrix(r, c);
    doc["matrix"].push_back(row);
  }
  return doc;
}

CostDocument cost_document_from_json(const Json& doc) {
  CostDocument out;
  try {
    out.order = doc.at("order").get<std::vector<std::string>>();
    const auto rows = doc.at("matrix").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(out.order.size());
    if (static_cast<Eigen::Index>(rows.size()) != n)
      throw ValidationError("cost matrix row count does not match 'order'");
    out.matrix.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != n)
        throw ValidationError("cost matrix is not square");
      for (Eigen::Index c = 0; c < n; ++c) out.matrix(r, c) = rows[r][c];
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed cost matrix JSON: ") + e.what());
  }
  return out;
}

bool is_aggregate_document(const CostDocument& doc, const ClassCatalog& catalog) {
  auto names = catalog.aggregate_names();
  auto order = doc.order;
  std::sort(names.begin(), names.end());
  std::sort(order.begin(), order.end());
  return names == order;
}

CostMatrixd resolve_cost_document(const CostDocument& doc, const ClassCatalog& catalog,
                                  double epsilon, double sky_cost) {
  if (is_aggregate_document(doc, catalog))
    return expand_aggregate_matrix(make_aggregate_matrix(doc.order, doc.matrix), catalog,
                                   epsilon, sky_cost);
  if (static_cast<int>(doc.order.size()) != catalog.size())
    throw ValidationError("cost matrix order names neither the aggregates nor the classes");
  std::vector<int> index(doc.order.size());
  std::vector<bool> seen(doc.order.size(), false);
  for (std::size_t i = 0; i < doc.order.size(); ++i) {
    index[i] = catalog.index_of(doc.order[i]);
    if (seen[index[i]]) throw ValidationError("class listed twice in cost matrix order");
    seen[index[i]] = true;
  }
  const int n = catalog.size();
  CostMatrixd full(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) full(index[r], index[c]) = doc.matrix(r, c);
  require_value_space(full);
  return full;
}

}  // namespace costlens
