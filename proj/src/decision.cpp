#include "costlens/decision.hpp"

namespace costlens {

template Mask decide(const BasicProbabilityField<float>&, const Eigen::MatrixBase<CostMatrixd>&);
template Mask decide(const BasicProbabilityField<double>&, const Eigen::MatrixBase<CostMatrixd>&);
template Mask decide_bayes(const BasicProbabilityField<float>&);
template Mask decide_ml(const BasicProbabilityField<float>&, const PriorVector&);

}  // namespace costlens
