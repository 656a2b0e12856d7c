#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "lavdm/block_matrix.hpp"
#include "lavdm/manifold.hpp"
#include "lavdm/types.hpp"

namespace lavdm {

enum class FrameSource : std::uint8_t { GroundTruth, LocalPCA };

std::string_view to_string(FrameSource source);
FrameSource parse_frame_source(std::string_view name);

/// One p x q column-orthonormal frame per point.
struct FrameField {
  std::vector<Matrix> frames;
  FrameSource source = FrameSource::GroundTruth;

  Index size() const { return static_cast<Index>(frames.size()); }
  Index ambient_dim() const { return frames.empty() ? 0 : frames.front().rows(); }
  Index fiber_dim() const { return frames.empty() ? 0 : frames.front().cols(); }

  /// Largest |F^T F - I| entry over all frames.
  double orthonormality_error() const;
  FrameField subset(const std::vector<Index>& rows) const;
};

/// Top-d principal directions of the neighbours of point i within `radius`
/// (point i itself excluded), ordered by decreasing singular value, each
/// column signed so that its largest-magnitude entry is positive.
Matrix local_pca_frame(const PointCloud& cloud, Index i, double radius, Index d);

FrameField local_pca_frames(const PointCloud& cloud, double radius, Index d);
FrameField ground_truth_frames(const PointCloud& cloud, FrameSource tag);

/// Closest orthogonal matrix to F_i^T F_j (polar factor U V^T of its SVD).
Matrix align_connection(const Matrix& frame_i, const Matrix& frame_j);
/// Same through a general SVD, for any fiber dimension.
Matrix align_connection_svd(const Matrix& frame_i, const Matrix& frame_j);

using Edge = std::pair<Index, Index>;

/// Connections Omega_ik for the listed (data, landmark) edges, stored as a
/// block sparse matrix so that find(i, k) locates each one.
BlockSparseMatrix build_connection_field(const PointCloud& x, const PointCloud& z,
                                         const FrameField& frames_x, const FrameField& frames_z,
                                         const std::vector<Edge>& edges);

/// Connections on every structurally nonzero entry of `pattern`.
BlockSparseMatrix connections_on_pattern(const SparseRows& pattern, const FrameField& frames_x,
                                         const FrameField& frames_z);

/// Largest |Omega^T Omega - I| entry over all stored blocks.
double orthogonality_error(const BlockSparseMatrix& connections);

/// Spectral-norm distance from a square matrix to its orthogonal polar factor.
double distance_to_orthogonal(const Matrix& m);

}  // namespace lavdm
