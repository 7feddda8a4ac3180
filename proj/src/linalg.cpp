#include "linalg.hpp"

#include <limits>

#include "modmorph/errors.hpp"

namespace modmorph::linalg {

Eigen::MatrixXd least_squares(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) throw DimensionError("least_squares: row count mismatch");
  if (a.cols() == 0) return Eigen::MatrixXd(0, b.cols());
  if (a.rows() >= a.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    const double scale = diag.maxCoeff();
    const double cutoff = scale * static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() * 1e3;
    if (scale > 0.0 && diag.minCoeff() > cutoff) return qr.solve(b);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  return cod.solve(b);
}

}  // namespace modmorph::linalg
