#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lavdm/connection.hpp"
#include "lavdm/errors.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/transport.hpp"

namespace lavdm {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(LocalPca, PlanarCloud) {
  Rng rng = make_rng(8);
  PointCloud cloud;
  cloud.points = RowMatrix::Zero(200, 3);
  for (Index i = 0; i < 200; ++i) {
    cloud.points(i, 0) = 2.0 * uniform01(rng) - 1.0;
    cloud.points(i, 1) = 2.0 * uniform01(rng) - 1.0;
  }
  const Matrix f = local_pca_frame(cloud, 0, 0.5, 2);
  EXPECT_LT(f.row(2).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((f.transpose() * f - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LocalPca, SphereTangentPlane) {
  const PointCloud cloud = sample_surface(SurfaceChart::sphere(), 5000, SamplingDensity::area_uniform(), 13);
  for (Index i : {0, 17, 400}) {
    const Matrix f = local_pca_frame(cloud, i, 0.1, 2);
    const Matrix truth = ground_truth_frame(*cloud.chart, (*cloud.params)(i, 0), (*cloud.params)(i, 1));
    Eigen::JacobiSVD<Matrix> svd(truth.transpose() * f);
    const double smallest = std::min(1.0, svd.singularValues().minCoeff());
    EXPECT_LT(std::acos(smallest), 0.05);
  }
}

TEST(LocalPca, TooFewNeighbours) {
  PointCloud cloud;
  cloud.points = RowMatrix::Zero(3, 3);
  cloud.points(1, 0) = 0.1;
  cloud.points(2, 0) = 5.0;
  try {
    local_pca_frame(cloud, 0, 0.5, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewNeighbors);
  }
}

TEST(AlignConnection, IdentityAndRotation) {
  Rng rng = make_rng(2);
  const Matrix f = testing::random_orthogonal(4, rng).leftCols(2);
  EXPECT_LT((align_connection(f, f) - Matrix::Identity(2, 2)).norm(), 1e-14);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix r = testing::random_orthogonal(2, rng);
    EXPECT_LT((align_connection(f, f * r) - r).norm(), 1e-13);
  }
}

TEST(AlignConnection, ClosedFormMatchesSvd) {
  Rng rng = make_rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix a = testing::random_orthogonal(3, rng).leftCols(2);
    const Matrix b = testing::random_orthogonal(3, rng).leftCols(2);
    EXPECT_LT((align_connection(a, b) - align_connection_svd(a, b)).norm(), 1e-10);
  }
  const Matrix a = testing::random_orthogonal(5, rng).leftCols(3);
  const Matrix b = testing::random_orthogonal(5, rng).leftCols(3);
  const Matrix o = align_connection(a, b);
  EXPECT_LT((o.transpose() * o - Matrix::Identity(3, 3)).norm(), 1e-13);
}

TEST(AlignConnection, MatchesSphereTransport) {
  const SurfaceChart chart = SurfaceChart::sphere();
  const double t0 = 1.1, p0 = 0.4;
  const double t1 = t0 + 0.01 / std::sqrt(2.0), p1 = p0 + 0.01 / std::sqrt(2.0) / std::sin(t0);
  const Matrix fi = ground_truth_frame(chart, t0, p0);
  const Matrix fj = ground_truth_frame(chart, t1, p1);
  const Matrix omega = align_connection(fi, fj);
  // Column c: transport the c-th frame vector at j to i, read it in frame i.
  Matrix truth(2, 2);
  for (Index c = 0; c < 2; ++c) {
    const Eigen::Vector3d vj = fj.col(c);
    const auto moved = transport_along_geodesic(from_ambient(sphere_point(t1, p1), vj), sphere_point(t0, p0));
    truth.col(c) = fi.transpose() * to_ambient(moved);
  }
  Eigen::JacobiSVD<Matrix> svd(omega - truth);
  EXPECT_LT(svd.singularValues()(0), 0.02);
}

TEST(ConnectionField, SelfEdgesAreIdentity) {
  const PointCloud cloud = sample_surface(SurfaceChart::sphere(), 40, SamplingDensity::area_uniform(), 1);
  const FrameField frames = ground_truth_frames(cloud, FrameSource::GroundTruth);
  std::vector<Edge> edges;
  for (Index i = 0; i < 40; ++i) edges.emplace_back(i, i);
  const BlockSparseMatrix c = build_connection_field(cloud, cloud, frames, frames, edges);
  for (Index i = 0; i < 40; ++i) {
    EXPECT_LT((c.block(*c.find(i, i)) - Matrix::Identity(2, 2)).norm(), 1e-14);
  }
}

TEST(ConnectionField, TransposeSymmetry) {
  const PointCloud cloud = sample_surface(SurfaceChart::distorted_sphere(), 300, SamplingDensity::area_uniform(), 4);
  const FrameField frames = local_pca_frames(cloud, 0.5, 2);
  const AffinityMatrix w = gaussian_affinity(cloud, cloud, 0.1, 5.0);
  const BlockSparseMatrix c = connections_on_pattern(w.entries, frames, frames);
  for (Index i = 0; i < c.block_rows(); ++i) {
    for (Index s = c.row_offsets()[static_cast<std::size_t>(i)]; s < c.row_offsets()[static_cast<std::size_t>(i + 1)]; ++s) {
      const Index j = c.col_indices()[static_cast<std::size_t>(s)];
      ASSERT_LT((c.block(*c.find(j, i)) - c.block(s).transpose()).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(ConnectionField, KleinConnectionsOrthogonal) {
  const PointCloud cloud = sample_surface(SurfaceChart::klein_bottle(), 500, SamplingDensity::area_uniform(), 6);
  const double radius = 2.0;
  for (Index i = 0; i < cloud.size(); ++i) {
    Index count = 0;
    for (Index j = 0; j < cloud.size(); ++j) {
      if (j != i && (cloud.points.row(j) - cloud.points.row(i)).norm() <= radius) ++count;
    }
    ASSERT_GE(count, 30) << "radius too small at point " << i;
  }
  const FrameField frames = local_pca_frames(cloud, radius, 2);
  EXPECT_LT(frames.orthonormality_error(), 1e-12);
  const AffinityMatrix w = gaussian_affinity(cloud, cloud, 1.0, 5.0);
  const BlockSparseMatrix c = connections_on_pattern(w.entries, frames, frames);
  EXPECT_LT(orthogonality_error(c), 1e-8);
  for (Index s = 0; s < c.nonzero_blocks(); ++s) {
    EXPECT_NEAR(std::abs(Matrix(c.block(s)).determinant()), 1.0, 1e-6);
  }
}

TEST(ConnectionField, DistanceToOrthogonal) {
  Rng rng = make_rng(3);
  const Matrix o = testing::random_orthogonal(3, rng);
  EXPECT_LT(distance_to_orthogonal(o), 1e-14);
  EXPECT_NEAR(distance_to_orthogonal(2.0 * o), 1.0, 1e-12);
}

TEST(FrameSource, Names) {
  EXPECT_EQ(parse_frame_source("pca"), FrameSource::LocalPCA);
  EXPECT_EQ(to_string(FrameSource::GroundTruth), "truth");
  EXPECT_THROW(parse_frame_source("other"), Error);
}

}  // namespace
}  // namespace lavdm
