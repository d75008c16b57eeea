#pragma once

#include <Eigen/Dense>

#include <span>

namespace xva {

/// Row-major P x d matrix: one point (price vector, Gaussian draw, ...) per row,
/// so each row is a contiguous span.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline std::span<const double> row_span(const PointSet& points, Eigen::Index row) {
    return {points.data() + row * points.cols(), static_cast<std::size_t>(points.cols())};
}

} // namespace xva
