#include "lavdm/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lavdm/errors.hpp"
#include "lavdm/random.hpp"

namespace lavdm {

namespace {

EigenPairs take_top(const Eigen::SelfAdjointEigenSolver<Matrix>& solver, Index r) {
  const Index n = solver.eigenvalues().size();
  EigenPairs out;
  out.values.resize(r);
  out.vectors.resize(n, r);
  for (Index j = 0; j < r; ++j) {
    out.values(j) = solver.eigenvalues()(n - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  }
  return out;
}

// Appends the columns of `block` to the orthonormal basis `basis` (first
// `used` columns valid), orthogonalising twice. Columns that collapse are
// replaced by random directions. Returns the number of columns added.
Index extend_basis(Matrix& basis, Index used, Matrix block, Rng& rng) {
  const Index dim = basis.rows();
  Index added = 0;
  for (Index j = 0; j < block.cols() && used + added < dim; ++j) {
    Vector v = block.col(j);
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        const auto q = basis.leftCols(used + added);
        v -= q * (q.transpose() * v);
      }
      const double after = v.norm();
      if (after > 1e-8 * before && after > 1e-300) {
        basis.col(used + added) = v / after;
        ++added;
        break;
      }
      for (Index i = 0; i < dim; ++i) v(i) = standard_normal(rng);
    }
  }
  return added;
}

}  // namespace

EigenPairs top_eigenpairs(const Matrix& symmetric, Index r) {
  if (symmetric.rows() != symmetric.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "eigensolver needs a square matrix");
  }
  if (r < 1 || r > symmetric.rows()) {
    throw Error(ErrorKind::InvalidArgument, "requested " + std::to_string(r) + " eigenpairs of a " +
                                                std::to_string(symmetric.rows()) + "-dimensional matrix");
  }
  const Matrix sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverFailure, "dense symmetric eigensolver did not converge");
  }
  EigenPairs out = take_top(solver, r);
  out.dense = true;
  return out;
}

EigenPairs top_eigenpairs(const SymmetricOperator& op, Index dim, Index r,
                          const EigenSolverOptions& options) {
  if (r < 1 || r > dim) {
    throw Error(ErrorKind::InvalidArgument, "requested " + std::to_string(r) + " eigenpairs of a " +
                                                std::to_string(dim) + "-dimensional operator");
  }
  const Index block = std::min(dim, options.block_size > 0 ? options.block_size : std::max<Index>(r, 8));
  const Index keep = std::min(dim, r + block);
  const Index max_basis = std::min(dim, std::max(3 * keep, keep + 10 * block));

  if (dim <= options.dense_threshold || max_basis >= dim) {
    return top_eigenpairs(op(Matrix::Identity(dim, dim)), r);
  }

  Rng rng = make_rng(options.seed);
  Matrix basis(dim, max_basis);
  Matrix image(dim, max_basis);
  Index used = 0;

  auto grow = [&](const Matrix& directions) {
    const Index added = extend_basis(basis, used, directions, rng);
    if (added > 0) {
      image.middleCols(used, added) = op(basis.middleCols(used, added));
      used += added;
    }
    return added;
  };

  Matrix start(dim, block);
  for (Index j = 0; j < block; ++j) {
    for (Index i = 0; i < dim; ++i) start(i, j) = standard_normal(rng);
  }
  grow(start);

  for (Index iteration = 1; iteration <= options.max_iterations; ++iteration) {
    Matrix projected = basis.leftCols(used).transpose() * image.leftCols(used);
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> small(projected);
    if (small.info() != Eigen::Success) {
      throw Error(ErrorKind::SolverFailure, "projected eigenproblem failed");
    }
    const Index k = std::min(keep, used);
    Matrix coeffs(used, k);
    Vector theta(k);
    for (Index j = 0; j < k; ++j) {
      coeffs.col(j) = small.eigenvectors().col(used - 1 - j);
      theta(j) = small.eigenvalues()(used - 1 - j);
    }
    Matrix ritz = basis.leftCols(used) * coeffs;
    Matrix ritz_image = image.leftCols(used) * coeffs;
    Matrix residual = ritz_image - ritz * theta.asDiagonal();

    const double scale = std::max(small.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    std::vector<Index> pending;
    for (Index j = 0; j < k; ++j) {
      if (residual.col(j).norm() > options.tolerance * scale) pending.push_back(j);
    }
    const bool top_converged = pending.empty() || pending.front() >= r;
    if (top_converged && k >= r) {
      // Confirm with true residuals before accepting.
      const Matrix y = ritz.leftCols(r);
      const Matrix ay = op(y);
      bool ok = true;
      for (Index j = 0; j < r; ++j) {
        if ((ay.col(j) - theta(j) * y.col(j)).norm() > 10.0 * options.tolerance * scale) ok = false;
      }
      if (ok) {
        EigenPairs out;
        out.values = theta.head(r);
        out.vectors = y;
        out.iterations = iteration;
        return out;
      }
    }

    // Next directions: residuals of unconverged wanted pairs first, then of
    // the remaining kept pairs.
    Matrix directions(dim, block);
    Index filled = 0;
    for (Index j : pending) {
      if (filled == block) break;
      directions.col(filled++) = residual.col(j);
    }
    for (Index j = r; j < k && filled < block; ++j) {
      if (std::find(pending.begin(), pending.end(), j) == pending.end()) {
        directions.col(filled++) = residual.col(j);
      }
    }
    for (; filled < block; ++filled) {
      for (Index i = 0; i < dim; ++i) directions(i, filled) = standard_normal(rng);
    }

    if (used + block > max_basis) {
      basis.leftCols(k) = ritz;
      image.leftCols(k) = ritz_image;
      used = k;
    }
    if (grow(directions) == 0) {
      throw Error(ErrorKind::SolverFailure, "Krylov basis cannot be extended");
    }
  }
  throw Error(ErrorKind::SolverFailure, "block Krylov eigensolver did not converge in " +
                                            std::to_string(options.max_iterations) + " iterations");
}

void canonicalize_signs(Matrix& vectors) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    Index arg = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

}  // namespace lavdm
