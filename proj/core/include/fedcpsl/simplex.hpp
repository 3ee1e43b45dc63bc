#pragma once

#include "fedcpsl/types.hpp"

namespace fedcpsl {

/// Euclidean projection onto the probability simplex (sort-and-threshold).
Eigen::RowVectorXd project_simplex(const Eigen::RowVectorXd& v);

Matrix project_simplex_rows(const Matrix& rows);

/// True when every row is nonnegative and sums to one within `tol`.
bool rows_on_simplex(const Matrix& rows, double tol = 1e-9);

}  // namespace fedcpsl
