#pragma once

#include <cstdint>
#include <functional>

#include "lavdm/types.hpp"

namespace lavdm {

/// y = A x for a symmetric A, applied to a block of column vectors.
using SymmetricOperator = std::function<Matrix(const Matrix&)>;

struct EigenSolverOptions {
  /// Problems of at most this dimension are solved densely.
  Index dense_threshold = 2000;
  /// Relative residual |A y - theta y| / |A| accepted for each Ritz pair.
  double tolerance = 1e-10;
  /// Krylov block width; 0 picks max(r, 8).
  Index block_size = 0;
  Index max_iterations = 5000;
  std::uint64_t seed = 0x1a7dULL;
};

struct EigenPairs {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns
  Index iterations = 0;
  bool dense = false;
};

/// Largest r eigenpairs of a dense symmetric matrix.
EigenPairs top_eigenpairs(const Matrix& symmetric, Index r);

/// Largest r eigenpairs of a symmetric operator of dimension `dim`. Uses a
/// dense solve below the threshold, otherwise block Krylov iteration with
/// thick restarts and explicit Rayleigh-Ritz projection.
EigenPairs top_eigenpairs(const SymmetricOperator& op, Index dim, Index r,
                          const EigenSolverOptions& options = {});

/// Flips each column so that its entry of largest magnitude is positive.
void canonicalize_signs(Matrix& vectors);

}  // namespace lavdm
