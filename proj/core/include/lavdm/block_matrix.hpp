#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lavdm/kernel.hpp"
#include "lavdm/types.hpp"

namespace lavdm {

/// Block compressed sparse row matrix with square q x q real blocks.
///
/// Holds the affinity-connection matrices: block (i, k) = w_ik * Omega_ik.
/// Blocks are stored column-major and contiguously in row order.
class BlockSparseMatrix {
 public:
  BlockSparseMatrix() = default;

  /// Empty matrix with the block pattern of `pattern`; blocks start at zero.
  BlockSparseMatrix(const SparseRows& pattern, Index block_size);

  /// Rebuilds a matrix from its raw arrays; throws FormatError if they are
  /// inconsistent.
  static BlockSparseMatrix from_raw(Index block_rows, Index block_cols, Index block_size,
                                    std::vector<Index> row_offsets, std::vector<Index> col_indices,
                                    std::vector<double> values);

  Index block_rows() const { return block_rows_; }
  Index block_cols() const { return block_cols_; }
  Index block_size() const { return q_; }
  Index rows() const { return block_rows_ * q_; }
  Index cols() const { return block_cols_ * q_; }
  Index nonzero_blocks() const { return static_cast<Index>(col_index_.size()); }

  const std::vector<Index>& row_offsets() const { return row_offset_; }
  const std::vector<Index>& col_indices() const { return col_index_; }
  const std::vector<double>& values() const { return values_; }

  Eigen::Map<Matrix> block(Index slot) { return {values_.data() + slot * q_ * q_, q_, q_}; }
  Eigen::Map<const Matrix> block(Index slot) const {
    return {values_.data() + slot * q_ * q_, q_, q_};
  }

  /// Storage slot of block (i, k), if that block is structurally present.
  std::optional<Index> find(Index i, Index k) const;

  Matrix apply(const Matrix& x) const;
  Matrix apply_transpose(const Matrix& x) const;
  Vector apply(const Vector& x) const { return apply(Matrix(x)).col(0); }
  Vector apply_transpose(const Vector& x) const { return apply_transpose(Matrix(x)).col(0); }

  /// Dense copy of block rows [begin, end), each scalar row scaled by
  /// row_scale(block row) and each block column by col_scale(block col).
  Matrix dense_rows(Index begin, Index end, const Vector& row_scale, const Vector& col_scale) const;
  Matrix to_dense() const;

  BlockSparseMatrix transpose() const;

 private:
  Index block_rows_ = 0;
  Index block_cols_ = 0;
  Index q_ = 1;
  std::vector<Index> row_offset_{0};
  std::vector<Index> col_index_;
  std::vector<double> values_;
};

}  // namespace lavdm
