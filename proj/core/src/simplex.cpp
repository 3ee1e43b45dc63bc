#include "fedcpsl/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace fedcpsl {

Eigen::RowVectorXd project_simplex(const Eigen::RowVectorXd& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) threshold = candidate;
  }
  return (v.array() - threshold).cwiseMax(0.0).matrix();
}

Matrix project_simplex_rows(const Matrix& rows) {
  Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    out.row(r) = project_simplex(rows.row(r));
  }
  return out;
}

bool rows_on_simplex(const Matrix& rows, double tol) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    if ((rows.row(r).array() < -tol).any()) return false;
    if (!rows.row(r).allFinite()) return false;
    if (std::abs(rows.row(r).sum() - 1.0) > tol) return false;
  }
  return true;
}

}  // namespace fedcpsl
