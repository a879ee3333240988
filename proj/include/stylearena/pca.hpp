#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "stylearena/linear.hpp"

namespace stylearena {

/// Principal axes of the training rows. Components are the columns of
/// `components`, ordered by decreasing eigenvalue; each is oriented so that
/// its largest-magnitude coordinate is positive.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // dim x k
    Eigen::VectorXd eigenvalues;  // k, descending

    RowMatrix transform(const RowMatrix& x) const;
};

/// Covariance (denominator n - 1) eigendecomposition. Throws ValidationError
/// when k is 0 or exceeds the dimension, or with fewer than 2 rows.
PcaModel fit_pca(const RowMatrix& x, std::size_t k);

}  // namespace stylearena
