#pragma once

#include <cstdint>

#include "lavdm/block_matrix.hpp"
#include "lavdm/eigensolver.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/types.hpp"

namespace lavdm {

/// Affinity-connection matrix S and its scalar block-row degrees.
struct VdmSystem {
  BlockSparseMatrix S;
  Vector degrees;

  Index points() const { return degrees.size(); }
  Index fiber_dim() const { return S.block_size(); }
};

/// Block (i, j) = W(i, j) * Omega_ij, degree i = sum_j W(i, j). `connections`
/// must hold a block for every nonzero of W and satisfy Omega_ji = Omega_ij^T.
VdmSystem assemble_vdm(const AffinityMatrix& w_alpha, const BlockSparseMatrix& connections);

enum class Normalization : std::uint8_t { Euclidean, DegreeWeighted };

struct SpectralResult {
  Vector values;   // descending
  Matrix vectors;  // nq x r, read in q-blocks
  Index q = 1;
  Normalization normalization = Normalization::DegreeWeighted;
  Index iterations = 0;
  bool dense = false;

  Index count() const { return values.size(); }
  Index points() const { return q == 0 ? 0 : vectors.rows() / q; }
  /// Same pairs with unit Euclidean columns.
  SpectralResult euclidean() const;
};

/// Top-r eigenpairs of D^-1 S via the similar symmetric D^-1/2 S D^-1/2;
/// vectors are returned as D^-1/2 v.
SpectralResult vdm_spectrum(const VdmSystem& system, Index r, const EigenSolverOptions& options = {});

/// Max over columns of |D^-1 S u - lambda u| / |u|.
double markov_residual(const VdmSystem& system, const SpectralResult& spectrum);

/// Per-point r x r features, flattened row-major into row i of `features`.
struct Embedding {
  Matrix features;  // n x (r*r)
  Index r = 0;
  double t = 1.0;

  Index points() const { return features.rows(); }
  Matrix at(Index i) const;
  /// Frobenius inner product of the features of points i and j.
  double inner(Index i, Index j) const { return features.row(i).dot(features.row(j)); }
};

/// Entry (l, s) at point i: (lambda_l lambda_s)^t <u_l[i], u_s[i]>.
/// Throws FractionalPowerOfNegative for a negative product with non-integer t.
Embedding vdm_embed(const SpectralResult& spectrum, double t, Index r);

/// Shared kernel of both embeddings: entry (l, s) = (mu_l mu_s)^t <u_l[i], u_s[i]>.
Embedding spectral_embedding(const Vector& values, const Matrix& vectors, Index q, double t, Index r);

}  // namespace lavdm
