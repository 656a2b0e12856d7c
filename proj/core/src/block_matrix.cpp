#include "lavdm/block_matrix.hpp"

#include <algorithm>

#include "lavdm/errors.hpp"

namespace lavdm {

BlockSparseMatrix::BlockSparseMatrix(const SparseRows& pattern, Index block_size)
    : block_rows_(pattern.rows()), block_cols_(pattern.cols()), q_(block_size) {
  if (block_size < 1) {
    throw Error(ErrorKind::InvalidArgument, "block size must be positive");
  }
  row_offset_.assign(static_cast<std::size_t>(block_rows_ + 1), 0);
  col_index_.reserve(static_cast<std::size_t>(pattern.nonZeros()));
  for (Index i = 0; i < pattern.outerSize(); ++i) {
    for (SparseRows::InnerIterator it(pattern, i); it; ++it) col_index_.push_back(it.col());
    row_offset_[static_cast<std::size_t>(i + 1)] = static_cast<Index>(col_index_.size());
  }
  values_.assign(col_index_.size() * static_cast<std::size_t>(q_ * q_), 0.0);
}

BlockSparseMatrix BlockSparseMatrix::from_raw(Index block_rows, Index block_cols, Index block_size,
                                              std::vector<Index> row_offsets, std::vector<Index> col_indices,
                                              std::vector<double> values) {
  const auto fail = [](const char* what) { throw Error(ErrorKind::FormatError, what); };
  if (block_rows < 0 || block_cols < 0 || block_size < 1) fail("bad block matrix dimensions");
  if (static_cast<Index>(row_offsets.size()) != block_rows + 1 || row_offsets.front() != 0) fail("bad row offsets");
  for (std::size_t i = 1; i < row_offsets.size(); ++i) {
    if (row_offsets[i] < row_offsets[i - 1]) fail("row offsets decrease");
    for (Index s = row_offsets[i - 1]; s < row_offsets[i]; ++s) {
      const Index k = col_indices.at(static_cast<std::size_t>(s));
      if (k < 0 || k >= block_cols) fail("column index out of range");
      if (s > row_offsets[i - 1] && col_indices[static_cast<std::size_t>(s - 1)] >= k) fail("column indices unsorted");
    }
  }
  if (static_cast<Index>(col_indices.size()) != row_offsets.back()) fail("column index count mismatch");
  if (values.size() != col_indices.size() * static_cast<std::size_t>(block_size * block_size)) fail("value count mismatch");
  BlockSparseMatrix out;
  out.block_rows_ = block_rows;
  out.block_cols_ = block_cols;
  out.q_ = block_size;
  out.row_offset_ = std::move(row_offsets);
  out.col_index_ = std::move(col_indices);
  out.values_ = std::move(values);
  return out;
}

std::optional<Index> BlockSparseMatrix::find(Index i, Index k) const {
  if (i < 0 || i >= block_rows_) return std::nullopt;
  const auto first = col_index_.begin() + row_offset_[static_cast<std::size_t>(i)];
  const auto last = col_index_.begin() + row_offset_[static_cast<std::size_t>(i + 1)];
  const auto it = std::lower_bound(first, last, k);
  if (it == last || *it != k) return std::nullopt;
  return static_cast<Index>(it - col_index_.begin());
}

Matrix BlockSparseMatrix::apply(const Matrix& x) const {
  if (x.rows() != cols()) {
    throw Error(ErrorKind::DimensionMismatch, "block matrix apply: operand has wrong length");
  }
  Matrix y = Matrix::Zero(rows(), x.cols());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < block_rows_; ++i) {
    auto yi = y.middleRows(i * q_, q_);
    for (Index s = row_offset_[static_cast<std::size_t>(i)]; s < row_offset_[static_cast<std::size_t>(i + 1)];
         ++s) {
      yi.noalias() += block(s) * x.middleRows(col_index_[static_cast<std::size_t>(s)] * q_, q_);
    }
  }
  return y;
}

Matrix BlockSparseMatrix::apply_transpose(const Matrix& x) const {
  if (x.rows() != rows()) {
    throw Error(ErrorKind::DimensionMismatch, "block matrix transpose apply: operand has wrong length");
  }
  Matrix y = Matrix::Zero(cols(), x.cols());
  for (Index i = 0; i < block_rows_; ++i) {
    const auto xi = x.middleRows(i * q_, q_);
    for (Index s = row_offset_[static_cast<std::size_t>(i)]; s < row_offset_[static_cast<std::size_t>(i + 1)];
         ++s) {
      y.middleRows(col_index_[static_cast<std::size_t>(s)] * q_, q_).noalias() += block(s).transpose() * xi;
    }
  }
  return y;
}

Matrix BlockSparseMatrix::dense_rows(Index begin, Index end, const Vector& row_scale,
                                     const Vector& col_scale) const {
  Matrix out = Matrix::Zero((end - begin) * q_, cols());
  for (Index i = begin; i < end; ++i) {
    for (Index s = row_offset_[static_cast<std::size_t>(i)]; s < row_offset_[static_cast<std::size_t>(i + 1)];
         ++s) {
      const Index k = col_index_[static_cast<std::size_t>(s)];
      out.block((i - begin) * q_, k * q_, q_, q_) = (row_scale(i) * col_scale(k)) * block(s);
    }
  }
  return out;
}

Matrix BlockSparseMatrix::to_dense() const {
  return dense_rows(0, block_rows_, Vector::Ones(block_rows_), Vector::Ones(block_cols_));
}

BlockSparseMatrix BlockSparseMatrix::transpose() const {
  SparseRows pattern(block_cols_, block_rows_);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(col_index_.size());
  for (Index i = 0; i < block_rows_; ++i) {
    for (Index s = row_offset_[static_cast<std::size_t>(i)]; s < row_offset_[static_cast<std::size_t>(i + 1)]; ++s) {
      triplets.emplace_back(col_index_[static_cast<std::size_t>(s)], i, 1.0);
    }
  }
  pattern.setFromTriplets(triplets.begin(), triplets.end());
  BlockSparseMatrix out(pattern, q_);
  for (Index i = 0; i < block_rows_; ++i) {
    for (Index s = row_offset_[static_cast<std::size_t>(i)]; s < row_offset_[static_cast<std::size_t>(i + 1)]; ++s) {
      const auto slot = out.find(col_index_[static_cast<std::size_t>(s)], i);
      out.block(*slot) = block(s).transpose();
    }
  }
  return out;
}

}  // namespace lavdm
