#pragma once

#include "costlens/catalog.hpp"
#include "costlens/costspace.hpp"
#include "costlens/fields.hpp"
#include "costlens/parallel.hpp"
#include "costlens/types.hpp"

#include <Eigen/Core>

namespace costlens {

// Pixels per work item. Fixed, so the floating-point evaluation of any pixel
// never depends on how the grid is split across workers.
inline constexpr std::size_t kDecisionBlock = 2048;

namespace detail {

inline Mask blank_mask(int height, int width) { return Mask(height, width); }

// Index of the smallest entry; the lowest index wins ties.
template <typename Row>
int argmin_lowest(const Row& row) {
  int best = 0;
  auto best_value = row(0);
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    if (row(k) < best_value) {
      best_value = row(k);
      best = static_cast<int>(k);
    }
  }
  return best;
}

template <typename Row>
int argmax_lowest(const Row& row) {
  int best = 0;
  auto best_value = row(0);
  for (Eigen::Index k = 1; k < row.size(); ++k) {
    if (row(k) > best_value) {
      best_value = row(k);
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace detail

// Per-pixel expected cost of every class: rows are pixels, column k holds
// C_k . p. Accumulated in double.
template <typename Scalar, typename Derived>
Eigen::MatrixXd expected_costs(const BasicProbabilityField<Scalar>& field,
                               const Eigen::MatrixBase<Derived>& cost, Eigen::Index first,
                               Eigen::Index count) {
  return field.values().middleRows(first, count).template cast<double>() *
         cost.derived().template cast<double>().transpose();
}

// d(x; C) = argmin_k C_k . p(x), ties to the lowest class index.
template <typename Scalar, typename Derived>
Mask decide(const BasicProbabilityField<Scalar>& field, const Eigen::MatrixBase<Derived>& cost) {
  if (cost.rows() != field.num_classes() || cost.cols() != field.num_classes())
    throw ValidationError("cost matrix size " + std::to_string(cost.rows()) +
                          " does not match the field's class count " +
                          std::to_string(field.num_classes()));
  const Eigen::MatrixXd c = cost.derived().template cast<double>();
  Mask mask = detail::blank_mask(field.height(), field.width());
  parallel_for(static_cast<std::size_t>(field.pixel_count()), kDecisionBlock,
               [&](std::size_t begin, std::size_t end) {
                 const auto count = static_cast<Eigen::Index>(end - begin);
                 const Eigen::MatrixXd e =
                     expected_costs(field, c, static_cast<Eigen::Index>(begin), count);
                 for (Eigen::Index p = 0; p < count; ++p)
                   mask.data()[begin + p] = static_cast<std::uint8_t>(detail::argmin_lowest(e.row(p)));
               });
  return mask;
}

// MAP / Bayes rule: per-pixel argmax of the posterior.
template <typename Scalar>
Mask decide_bayes(const BasicProbabilityField<Scalar>& field) {
  Mask mask = detail::blank_mask(field.height(), field.width());
  const auto& v = field.values();
  for (Eigen::Index p = 0; p < v.rows(); ++p)
    mask.data()[p] = static_cast<std::uint8_t>(detail::argmax_lowest(v.row(p)));
  return mask;
}

// Maximum likelihood rule: per-pixel argmax of p(k|x) / p(k).
template <typename Scalar>
Mask decide_ml(const BasicProbabilityField<Scalar>& field, const PriorVector& priors) {
  if (priors.size() != field.num_classes())
    throw ValidationError("prior vector length does not match the field's class count");
  if (!(priors.values().array() > 0.0).all())
    throw ValidationError("maximum likelihood rule needs strictly positive priors");
  const Eigen::RowVectorXd inverse = priors.values().cwiseInverse().transpose();
  Mask mask = detail::blank_mask(field.height(), field.width());
  const auto& v = field.values();
  for (Eigen::Index p = 0; p < v.rows(); ++p) {
    const Eigen::RowVectorXd likelihood =
        v.row(p).template cast<double>().cwiseProduct(inverse);
    mask.data()[p] = static_cast<std::uint8_t>(detail::argmax_lowest(likelihood));
  }
  return mask;
}

// Value at (i,j) is C_{mask(i,j)} . p_ij.
template <typename Scalar, typename Derived>
PixelGrid<double> expected_cost_map(const BasicProbabilityField<Scalar>& field,
                                    const Eigen::MatrixBase<Derived>& cost, const Mask& mask) {
  if (cost.rows() != field.num_classes() || cost.cols() != field.num_classes())
    throw ValidationError("cost matrix size does not match the field's class count");
  if (mask.rows() != field.height() || mask.cols() != field.width())
    throw ValidationError("mask shape does not match the field");
  const Eigen::MatrixXd c = cost.derived().template cast<double>();
  PixelGrid<double> out(field.height(), field.width());
  for (Eigen::Index p = 0; p < field.pixel_count(); ++p) {
    const int k = mask.data()[p];
    if (k >= field.num_classes()) throw ValidationError("mask value exceeds the class count");
    out.data()[p] = c.row(k).dot(field.values().row(p).template cast<double>());
  }
  return out;
}

}  // namespace costlens
