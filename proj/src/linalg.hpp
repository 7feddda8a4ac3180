#pragma once

// Internal: the only translation units that see Eigen.

#include <Eigen/Dense>

namespace modmorph::linalg {

/// argmin_X ||A X - B||_F, column by column. Tall full-rank systems use
/// Householder QR; anything else (wide, or rank-deficient by the R diagonal)
/// gets the minimum-norm solution from a complete orthogonal decomposition.
Eigen::MatrixXd least_squares(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace modmorph::linalg
