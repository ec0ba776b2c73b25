#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace qfeat {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Seed = std::uint64_t;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// A set of (x, y) pairs stored as two aligned n x d matrices.
struct PairSet {
  RowMatrix x;
  RowMatrix y;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
};

}  // namespace qfeat
