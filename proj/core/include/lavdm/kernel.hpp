#pragma once

#include <limits>

#include <Eigen/SparseCore>

#include "lavdm/manifold.hpp"
#include "lavdm/types.hpp"

namespace lavdm {

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Gaussian affinities between two point sets, compressed by row.
///
/// Entry (i, k) = exp(-|a_i - b_k|^2 / epsilon) whenever
/// |a_i - b_k|^2 <= truncation * epsilon; otherwise it is structurally zero.
struct AffinityMatrix {
  SparseRows entries;
  double epsilon = 1.0;
  double truncation = kNoTruncation;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
  Index nonzeros() const { return entries.nonZeros(); }
};

AffinityMatrix gaussian_affinity(const RowMatrix& a, const RowMatrix& b, double epsilon,
                                 double truncation = kNoTruncation);
AffinityMatrix gaussian_affinity(const PointCloud& a, const PointCloud& b, double epsilon,
                                 double truncation = kNoTruncation);

/// Row sums. Throws IsolatedPoint if any row sums to zero.
Vector row_degrees(const AffinityMatrix& w);
/// Column sums. Throws IsolatedLandmark if any column sums to zero.
Vector column_degrees(const AffinityMatrix& w);

/// D^-alpha W D^-alpha for a square W and its degrees D.
AffinityMatrix alpha_normalize(const AffinityMatrix& w, const Vector& degrees, double alpha);

/// Every entry multiplied by c > 0 (a rescaled kernel K -> cK).
AffinityMatrix scaled(const AffinityMatrix& w, double c);

/// True when W equals its transpose to tol (relative to the largest entry).
bool is_symmetric(const AffinityMatrix& w, double tol = 1e-12);

}  // namespace lavdm
