#include "lavdm/connection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "lavdm/errors.hpp"
#include "parallel.hpp"

namespace lavdm {

std::string_view to_string(FrameSource source) {
  return source == FrameSource::GroundTruth ? "truth" : "pca";
}

FrameSource parse_frame_source(std::string_view name) {
  if (name == "truth") return FrameSource::GroundTruth;
  if (name == "pca") return FrameSource::LocalPCA;
  throw Error(ErrorKind::InvalidArgument, "unknown frame source '" + std::string(name) +
                                              "' (expected pca or truth)");
}

double FrameField::orthonormality_error() const {
  double worst = 0.0;
  for (const Matrix& f : frames) {
    const Matrix gram = f.transpose() * f - Matrix::Identity(f.cols(), f.cols());
    worst = std::max(worst, gram.cwiseAbs().maxCoeff());
  }
  return worst;
}

FrameField FrameField::subset(const std::vector<Index>& rows) const {
  FrameField out;
  out.source = source;
  out.frames.reserve(rows.size());
  for (Index i : rows) out.frames.push_back(frames[static_cast<std::size_t>(i)]);
  return out;
}

Matrix local_pca_frame(const PointCloud& cloud, Index i, double radius, Index d) {
  if (i < 0 || i >= cloud.size()) {
    throw Error(ErrorKind::InvalidArgument, "point index out of range");
  }
  if (d < 1 || d > cloud.dim()) {
    throw Error(ErrorKind::InvalidArgument, "intrinsic dimension must lie in [1, p]");
  }
  const double r2 = radius * radius;
  std::vector<Index> neighbours;
  for (Index j = 0; j < cloud.size(); ++j) {
    if (j != i && (cloud.points.row(j) - cloud.points.row(i)).squaredNorm() <= r2) neighbours.push_back(j);
  }
  const auto found = static_cast<Index>(neighbours.size());
  if (found < d + 1) {
    throw Error(ErrorKind::TooFewNeighbors, "point " + std::to_string(i) + " has " +
                                                std::to_string(found) + " neighbours, needs " +
                                                std::to_string(d + 1));
  }
  Matrix displacement(cloud.dim(), found);
  for (Index c = 0; c < found; ++c) {
    displacement.col(c) = (cloud.points.row(neighbours[static_cast<std::size_t>(c)]) - cloud.points.row(i)).transpose();
  }
  displacement.colwise() -= displacement.rowwise().mean();

  Eigen::JacobiSVD<Matrix> svd(displacement, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(d - 1) / sigma(0) < 1e-8) {
    throw Error(ErrorKind::RankDeficient, "neighbourhood of point " + std::to_string(i) +
                                              " spans fewer than " + std::to_string(d) + " directions");
  }
  Matrix frame = svd.matrixU().leftCols(d);
  for (Index c = 0; c < d; ++c) {
    Index arg = 0;
    frame.col(c).cwiseAbs().maxCoeff(&arg);
    if (frame(arg, c) < 0.0) frame.col(c) *= -1.0;
  }
  return frame;
}

FrameField local_pca_frames(const PointCloud& cloud, double radius, Index d) {
  FrameField field;
  field.source = FrameSource::LocalPCA;
  field.frames.resize(static_cast<std::size_t>(cloud.size()));
  detail::parallel_for(cloud.size(), [&](Index i) {
    field.frames[static_cast<std::size_t>(i)] = local_pca_frame(cloud, i, radius, d);
  });
  return field;
}

FrameField ground_truth_frames(const PointCloud& cloud, FrameSource tag) {
  FrameField field;
  field.source = tag;
  field.frames = ground_truth_frames(cloud);
  return field;
}

namespace {

// Polar factor of a 2 x 2 matrix, split into its rotation-like part
// [[p, -q], [q, p]] and reflection-like part [[r, s], [s, -r]].
Eigen::Matrix2d polar_2x2(const Eigen::Matrix2d& m) {
  const double p = 0.5 * (m(0, 0) + m(1, 1));
  const double q = 0.5 * (m(1, 0) - m(0, 1));
  const double r = 0.5 * (m(0, 0) - m(1, 1));
  const double s = 0.5 * (m(0, 1) + m(1, 0));
  const double rot = std::hypot(p, q);
  const double ref = std::hypot(r, s);
  Eigen::Matrix2d out;
  if (rot >= ref) {
    if (rot == 0.0) return Eigen::Matrix2d::Identity();
    out << p / rot, -q / rot, q / rot, p / rot;
  } else {
    out << r / ref, s / ref, s / ref, -r / ref;
  }
  return out;
}

template <typename Out>
void align_into(const Matrix& frame_i, const Matrix& frame_j, Out&& out) {
  if (frame_i.cols() == 2) {
    Eigen::Matrix2d overlap;
    for (Index a = 0; a < 2; ++a) {
      for (Index b = 0; b < 2; ++b) overlap(a, b) = frame_i.col(a).dot(frame_j.col(b));
    }
    out = polar_2x2(overlap);
    return;
  }
  const Matrix overlap = frame_i.transpose() * frame_j;
  Eigen::JacobiSVD<Matrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out = svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

Matrix align_connection(const Matrix& frame_i, const Matrix& frame_j) {
  if (frame_i.rows() != frame_j.rows() || frame_i.cols() != frame_j.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "frames must have the same shape");
  }
  Matrix out(frame_i.cols(), frame_i.cols());
  align_into(frame_i, frame_j, out);
  return out;
}

Matrix align_connection_svd(const Matrix& frame_i, const Matrix& frame_j) {
  if (frame_i.rows() != frame_j.rows() || frame_i.cols() != frame_j.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "frames must have the same shape");
  }
  const Matrix overlap = frame_i.transpose() * frame_j;
  Eigen::JacobiSVD<Matrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

namespace {

void check_field(const FrameField& field, Index expected, const char* what) {
  if (field.size() != expected) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " frame count does not match its cloud");
  }
}

}  // namespace

BlockSparseMatrix build_connection_field(const PointCloud& x, const PointCloud& z,
                                         const FrameField& frames_x, const FrameField& frames_z,
                                         const std::vector<Edge>& edges) {
  check_field(frames_x, x.size(), "data");
  check_field(frames_z, z.size(), "landmark");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size());
  for (const auto& [i, k] : edges) {
    if (i < 0 || i >= x.size() || k < 0 || k >= z.size()) {
      throw Error(ErrorKind::InvalidArgument, "edge (" + std::to_string(i) + ", " + std::to_string(k) +
                                                  ") is out of range");
    }
    triplets.emplace_back(i, k, 1.0);
  }
  SparseRows pattern(x.size(), z.size());
  pattern.setFromTriplets(triplets.begin(), triplets.end(), [](double a, double) { return a; });
  return connections_on_pattern(pattern, frames_x, frames_z);
}

BlockSparseMatrix connections_on_pattern(const SparseRows& pattern, const FrameField& frames_x,
                                         const FrameField& frames_z) {
  check_field(frames_x, pattern.rows(), "data");
  check_field(frames_z, pattern.cols(), "landmark");
  const Index q = frames_x.fiber_dim();
  if (frames_z.size() > 0 && frames_z.fiber_dim() != q) {
    throw Error(ErrorKind::DimensionMismatch, "data and landmark frames have different fiber dimensions");
  }
  BlockSparseMatrix field(pattern, std::max<Index>(q, 1));
  const auto& offsets = field.row_offsets();
  const auto& cols = field.col_indices();
  detail::parallel_for(field.block_rows(), [&](Index i) {
    const Matrix& fi = frames_x.frames[static_cast<std::size_t>(i)];
    for (Index s = offsets[static_cast<std::size_t>(i)]; s < offsets[static_cast<std::size_t>(i + 1)]; ++s) {
      align_into(fi, frames_z.frames[static_cast<std::size_t>(cols[static_cast<std::size_t>(s)])], field.block(s));
    }
  });
  return field;
}

double orthogonality_error(const BlockSparseMatrix& connections) {
  double worst = 0.0;
  const Index q = connections.block_size();
  for (Index s = 0; s < connections.nonzero_blocks(); ++s) {
    const auto b = connections.block(s);
    worst = std::max(worst, (b.transpose() * b - Matrix::Identity(q, q)).cwiseAbs().maxCoeff());
  }
  return worst;
}

double distance_to_orthogonal(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return (m - svd.matrixU() * svd.matrixV().transpose()).jacobiSvd().singularValues()(0);
}

}  // namespace lavdm
