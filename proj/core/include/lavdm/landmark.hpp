#pragma once

#include <vector>

#include "lavdm/block_matrix.hpp"
#include "lavdm/connection.hpp"
#include "lavdm/eigensolver.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/manifold.hpp"
#include "lavdm/types.hpp"
#include "lavdm/vdm.hpp"

namespace lavdm {

/// Landmark affinity-connection matrix (n x m blocks of w * Omega) and the
/// scalar affinities it was built from.
struct LandmarkAssembly {
  BlockSparseMatrix S;
  AffinityMatrix W;
  /// Original indices of the landmarks kept; landmarks with no data point
  /// within the truncation radius are dropped.
  std::vector<Index> kept_landmarks;
  std::vector<Index> dropped_landmarks;
};

/// Builds S from a data-to-landmark affinity and connections defined (at
/// least) on its sparsity pattern. Throws MissingConnection otherwise.
LandmarkAssembly assemble_landmark(const AffinityMatrix& w, const BlockSparseMatrix& connections);

LandmarkAssembly assemble_landmark(const PointCloud& x, const PointCloud& z, double epsilon, double truncation,
                                   const BlockSparseMatrix& connections);

/// Convenience: connections from the frames on the affinity pattern.
LandmarkAssembly assemble_landmark(const PointCloud& x, const PointCloud& z, double epsilon, double truncation,
                                   const FrameField& frames_x, const FrameField& frames_z);

struct LandmarkDegrees {
  Vector d_z;      // m
  Vector d_xbeta;  // n
  Vector d_ba;     // n
};

/// The three degree vectors, computed with factored products only.
LandmarkDegrees landmark_degrees(const AffinityMatrix& w, double beta, double alpha);

struct LandmarkPipelineState {
  BlockSparseMatrix S;
  AffinityMatrix W;
  Vector d_z;
  Vector d_xbeta;
  Vector d_ba;
  double beta = 0.5;
  double alpha = 0.0;

  Index points() const { return W.rows(); }
  Index landmarks() const { return W.cols(); }
  Index fiber_dim() const { return S.block_size(); }

  /// Row scale D_ba^-1/2 D_xbeta^-alpha and column scale D_z^-beta/2 of the
  /// matrix whose SVD gives the embedding.
  Vector row_scale() const;
  Vector col_scale() const;

  /// Throws InvalidArgument when a block norm disagrees with its affinity,
  /// a degree is not positive or D_z differs from (W^T W) 1.
  void check_invariants(double tol = 1e-8) const;
};

LandmarkPipelineState make_pipeline_state(LandmarkAssembly assembly, double beta, double alpha);

struct LandmarkSpectralResult {
  Vector singular_values;   // descending
  Vector values;            // squared singular values
  Matrix left_vectors;      // D_ba^-1/2 U, nq x r
  Matrix left_orthonormal;  // U
  Matrix right_vectors;     // V, mq x r
  Index q = 1;
  Index iterations = 0;
  bool dense = false;

  Index count() const { return values.size(); }
  /// Degree-rescaled left vectors viewed as a spectrum of the landmark
  /// Markov matrix.
  SpectralResult as_spectrum() const;
};

/// Top-r singular triplets of D_ba^-1/2 D_xbeta^-alpha S D_z^-beta/2. Small
/// problems use a dense SVD; larger ones the eigenpairs of its mq x mq Gram
/// matrix accumulated in row chunks.
LandmarkSpectralResult landmark_svd(const LandmarkPipelineState& state, Index r,
                                    const EigenSolverOptions& options = {});

struct DenseMarkovOracle {
  Matrix s_beta_alpha;  // nq x nq
  Matrix markov;        // D_ba^-1 S_beta_alpha
  Vector values;        // descending (real parts)
  Matrix vectors;       // eigenvectors of markov, unit columns
};

/// Materialises the landmark Markov matrix and solves it with a general
/// eigensolver. Throws SizeGuard above nq = 4000.
DenseMarkovOracle dense_markov_oracle(const LandmarkPipelineState& state);

/// Entry (l, s) at point i: (sigma_l^2 sigma_s^2)^t <u_l[i], u_s[i]>.
Embedding lavdm_embed(const LandmarkSpectralResult& spectrum, double t, Index r);

/// sum_k c_k Omega_xk Omega_yk^T / sum_k c_k with c_k = w_xk w_yk d_z(k)^-beta.
/// Throws NoCommonLandmark when every c_k vanishes.
Matrix effective_transport(const Vector& w_x, const Vector& w_y, const Vector& d_z, double beta,
                           const std::vector<Matrix>& omega_x, const std::vector<Matrix>& omega_y);

/// Same, with affinities and connections computed from points and frames.
/// `d_z` may be empty when beta = 0.
Matrix effective_transport(const Vector& x, const Vector& y, const PointCloud& z, double epsilon, double beta,
                           double truncation, const Matrix& frame_x, const Matrix& frame_y,
                           const FrameField& frames_z, const Vector& d_z);

}  // namespace lavdm
