#ifndef EXLASSO_TYPES_HPP
#define EXLASSO_TYPES_HPP

#include <Eigen/Core>

namespace exlasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace exlasso

#endif  // EXLASSO_TYPES_HPP
