#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lavdm/errors.hpp"
#include "lavdm/landmark.hpp"

namespace lavdm {
namespace {

struct Instance {
  AffinityMatrix w;
  BlockSparseMatrix connections;
};

Instance random_instance(Index n, Index m, Index q, Rng& rng) {
  Instance out;
  out.w = testing::random_affinity(n, m, rng);
  out.connections = testing::random_connections(out.w.entries, q, rng);
  return out;
}

LandmarkPipelineState state_of(const Instance& inst, double beta, double alpha) {
  return make_pipeline_state(assemble_landmark(inst.w, inst.connections), beta, alpha);
}

TEST(LandmarkDegrees, AllOnesBetaOne) {
  AffinityMatrix w;
  w.entries = Matrix::Ones(2, 3).sparseView();
  const LandmarkDegrees d = landmark_degrees(w, 1.0, 0.0);
  EXPECT_LT((d.d_z - Vector::Constant(3, 6.0)).norm(), 1e-15);
  EXPECT_LT((d.d_xbeta - Vector::Ones(2)).norm(), 1e-15);
}

TEST(LandmarkDegrees, FactoredMatchesMaterialised) {
  Rng rng = make_rng(4);
  const AffinityMatrix w = testing::random_affinity(9, 4, rng);
  const Matrix dense(w.entries);
  for (double beta : {0.0, 0.3, 1.0}) {
    for (double alpha : {0.0, 0.6, 1.0}) {
      const LandmarkDegrees d = landmark_degrees(w, beta, alpha);
      const Matrix gram = dense.transpose() * dense;
      const Vector dz = gram * Vector::Ones(4);
      const Matrix w_beta = dense * dz.array().pow(-beta).matrix().asDiagonal() * dense.transpose();
      const Vector dxb = w_beta * Vector::Ones(9);
      const Matrix w_ba = dxb.array().pow(-alpha).matrix().asDiagonal() * w_beta *
                          dxb.array().pow(-alpha).matrix().asDiagonal();
      const Vector dba = w_ba * Vector::Ones(9);
      EXPECT_LT((d.d_z - dz).cwiseAbs().maxCoeff(), 1e-12 * dz.maxCoeff());
      EXPECT_LT((d.d_xbeta - dxb).cwiseAbs().maxCoeff(), 1e-12 * dxb.maxCoeff());
      EXPECT_LT((d.d_ba - dba).cwiseAbs().maxCoeff(), 1e-12 * dba.maxCoeff());
    }
  }
}

TEST(LandmarkDegrees, BetaZeroDropsLandmarkDegree) {
  Rng rng = make_rng(5);
  const AffinityMatrix w = testing::random_affinity(5, 3, rng);
  const Matrix dense(w.entries);
  const LandmarkDegrees d = landmark_degrees(w, 0.0, 0.0);
  const Vector expected = dense * (dense.transpose() * Vector::Ones(5));
  EXPECT_LT((d.d_xbeta - expected).norm(), 1e-13);
}

TEST(LandmarkDegrees, RejectsOutOfRange) {
  Rng rng = make_rng(6);
  const AffinityMatrix w = testing::random_affinity(3, 2, rng);
  EXPECT_THROW(landmark_degrees(w, 1.5, 0.0), Error);
  EXPECT_THROW(landmark_degrees(w, 0.5, -0.1), Error);
}

TEST(AssembleLandmark, SelfLandmarksTrivialBundle) {
  const PointCloud x = sample_surface(SurfaceChart::sphere(), 30, SamplingDensity::area_uniform(), 3);
  const AffinityMatrix w = gaussian_affinity(x, x, 0.3);
  BlockSparseMatrix ones(w.entries, 1);
  for (Index s = 0; s < ones.nonzero_blocks(); ++s) ones.block(s)(0, 0) = 1.0;
  const LandmarkAssembly a = assemble_landmark(x, x, 0.3, kNoTruncation, ones);
  EXPECT_LT((a.S.to_dense() - Matrix(a.W.entries)).norm(), 1e-15);
}

TEST(AssembleLandmark, SingleLandmarkColumnStack) {
  Rng rng = make_rng(7);
  const Instance inst = random_instance(5, 1, 2, rng);
  const LandmarkAssembly a = assemble_landmark(inst.w, inst.connections);
  EXPECT_EQ(a.S.rows(), 10);
  EXPECT_EQ(a.S.cols(), 2);
  const Matrix dense = a.S.to_dense();
  for (Index i = 0; i < 5; ++i) {
    EXPECT_LT((dense.middleRows(2 * i, 2) - inst.w.entries.coeff(i, 0) * inst.connections.block(i)).norm(), 1e-15);
  }
}

TEST(AssembleLandmark, BlockNormsFollowAffinity) {
  Rng rng = make_rng(8);
  const Instance inst = random_instance(3, 2, 2, rng);
  const LandmarkAssembly a = assemble_landmark(inst.w, inst.connections);
  for (Index i = 0; i < 3; ++i) {
    for (Index k = 0; k < 2; ++k) {
      EXPECT_NEAR(Matrix(a.S.block(*a.S.find(i, k))).norm(), std::sqrt(2.0) * inst.w.entries.coeff(i, k), 1e-14);
    }
  }
  EXPECT_NO_THROW(make_pipeline_state(a, 0.5, 0.5).check_invariants());
}

TEST(AssembleLandmark, DropsUnreachedLandmarks) {
  RowMatrix xp(3, 1), zp(3, 1);
  xp << 0.0, 0.1, 0.2;
  zp << 0.05, 50.0, 0.15;
  PointCloud x, z;
  x.points = xp;
  z.points = zp;
  FrameField fx, fz;
  fx.frames.assign(3, Matrix::Identity(1, 1));
  fz.frames.assign(3, Matrix::Identity(1, 1));
  const LandmarkAssembly a = assemble_landmark(x, z, 0.1, 5.0, fx, fz);
  EXPECT_EQ(a.kept_landmarks, (std::vector<Index>{0, 2}));
  EXPECT_EQ(a.dropped_landmarks, (std::vector<Index>{1}));
  EXPECT_EQ(a.W.cols(), 2);
}

TEST(LandmarkSvd, OracleEquivalence) {
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 12 + trial * 3;
    const Index m = 3 + trial;
    const double beta = uniform01(rng);
    const double alpha = uniform01(rng);
    const LandmarkPipelineState state = state_of(random_instance(n, m, 2, rng), beta, alpha);
    const Index r = 2 * m;
    const LandmarkSpectralResult svd = landmark_svd(state, r);
    const DenseMarkovOracle oracle = dense_markov_oracle(state);
    EXPECT_LT((svd.values - oracle.values.head(r)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(oracle.values.cwiseAbs().maxCoeff(), 1.0 + 1e-10);
    for (Index j = 0; j < r; ++j) {
      const double below = j + 1 < oracle.values.size() ? std::abs(oracle.values(j) - oracle.values(j + 1)) : 1.0;
      const double above = j > 0 ? std::abs(oracle.values(j - 1) - oracle.values(j)) : 1.0;
      if (std::min(below, above) <= 1e-4) continue;
      EXPECT_LT(testing::principal_angle_sine(svd.left_vectors.col(j), oracle.vectors.col(j)), 1e-6);
    }
  }
}

TEST(LandmarkSvd, GramRouteMatchesDense) {
  Rng rng = make_rng(12);
  const LandmarkPipelineState state = state_of(random_instance(60, 8, 2, rng), 0.5, 0.3);
  EigenSolverOptions gram;
  gram.dense_threshold = 20;
  const LandmarkSpectralResult a = landmark_svd(state, 6);
  const LandmarkSpectralResult b = landmark_svd(state, 6, gram);
  EXPECT_TRUE(a.dense);
  EXPECT_FALSE(b.dense);
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12);
  for (Index j = 0; j < 6; ++j) {
    EXPECT_LT(testing::principal_angle_sine(a.left_vectors.col(j), b.left_vectors.col(j)), 1e-8);
  }
}

TEST(LandmarkSvd, ScalarLandmarkDiffusion) {
  Rng rng = make_rng(13);
  const Index n = 60, m = 8;
  const PointCloud x = sample_surface(SurfaceChart::sphere(), n, SamplingDensity::area_uniform(), 14);
  const PointCloud z = x.subset(sample_without_replacement(n, m, rng));
  const AffinityMatrix w = gaussian_affinity(x, z, 0.5);
  BlockSparseMatrix ones(w.entries, 1);
  for (Index s = 0; s < ones.nonzero_blocks(); ++s) ones.block(s)(0, 0) = 1.0;
  const LandmarkSpectralResult svd = landmark_svd(make_pipeline_state(assemble_landmark(w, ones), 0.0, 0.0), m);

  // D^-1 W W^T with D = W W^T 1, through its symmetric conjugate.
  const Matrix wd(w.entries);
  const Vector d = wd * (wd.transpose() * Vector::Ones(n));
  const Matrix a = d.cwiseSqrt().cwiseInverse().asDiagonal() * wd;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a * a.transpose());
  for (Index j = 0; j < m; ++j) {
    EXPECT_NEAR(svd.values(j), eig.eigenvalues()(n - 1 - j), 1e-10);
    const Vector v = d.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().col(n - 1 - j);
    EXPECT_LT(testing::principal_angle_sine(svd.left_vectors.col(j), v), 1e-8);
  }
}

TEST(LandmarkSvd, KernelScaleInvariance) {
  Rng rng = make_rng(15);
  const Instance inst = random_instance(20, 6, 2, rng);
  Instance big = inst;
  big.w = scaled(inst.w, 7.0);
  const LandmarkSpectralResult a = landmark_svd(state_of(inst, 0.5, 0.5), 8);
  const LandmarkSpectralResult b = landmark_svd(state_of(big, 0.5, 0.5), 8);
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((a.left_vectors - b.left_vectors).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((lavdm_embed(a, 1.0, 8).features - lavdm_embed(b, 1.0, 8).features).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LandmarkSvd, GaugeEquivariance) {
  Rng rng = make_rng(16);
  const Index n = 20, m = 6;
  const Instance inst = random_instance(n, m, 2, rng);
  const LandmarkSpectralResult base = landmark_svd(state_of(inst, 0.5, 0.0), 6);
  for (int g = 0; g < 5; ++g) {
    const auto gx = testing::random_gauge(n, 2, rng);
    const auto gz = testing::random_gauge(m, 2, rng);
    Instance moved = inst;
    moved.connections = testing::apply_gauge(inst.connections, gx, gz);
    LandmarkSpectralResult out = landmark_svd(state_of(moved, 0.5, 0.0), 6);
    EXPECT_LT((out.values - base.values).cwiseAbs().maxCoeff(), 1e-9);
    const Matrix expected = testing::gauge_vectors(base.left_vectors, gx);
    for (Index l = 0; l < 6; ++l) {
      if (out.left_vectors.col(l).dot(expected.col(l)) < 0.0) out.left_vectors.col(l) *= -1.0;
    }
    EXPECT_LT((lavdm_embed(out, 1.0, 6).features - lavdm_embed(base, 1.0, 6).features).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LandmarkSvd, SmallTimeEmbedding) {
  Rng rng = make_rng(17);
  const LandmarkSpectralResult s = landmark_svd(state_of(random_instance(10, 4, 2, rng), 0.5, 0.0), 3);
  const Embedding e = lavdm_embed(s, 1e-12, 3);
  const Matrix block = s.left_vectors.middleRows(4, 2);
  EXPECT_LT((e.at(2) - block.transpose() * block).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(DenseOracle, SizeGuard) {
  Rng rng = make_rng(18);
  const LandmarkPipelineState state = state_of(random_instance(2001, 2, 2, rng), 0.5, 0.0);
  try {
    dense_markov_oracle(state);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SizeGuard);
  }
}

TEST(EffectiveTransport, SingleLandmark) {
  Rng rng = make_rng(19);
  const Matrix ox = testing::random_orthogonal(2, rng);
  const Matrix oy = testing::random_orthogonal(2, rng);
  const Matrix t = effective_transport(Vector::Constant(1, 0.4), Vector::Constant(1, 0.7), Vector::Constant(1, 3.0), 0.5,
                                       {ox}, {oy});
  EXPECT_LT((t - ox * oy.transpose()).norm(), 1e-15);
}

TEST(EffectiveTransport, FlatMidpoint) {
  PointCloud z;
  z.points = RowMatrix::Zero(1, 3);
  FrameField fz;
  fz.frames.push_back(Matrix::Identity(3, 2));
  const Vector x = (Vector(3) << -0.1, 0.0, 0.0).finished();
  const Vector y = (Vector(3) << 0.1, 0.0, 0.0).finished();
  const Matrix frame = Matrix::Identity(3, 2);
  const Matrix t = effective_transport(x, y, z, 0.3, 0.0, kNoTruncation, frame, frame, fz, Vector());
  EXPECT_LT((t - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(EffectiveTransport, NoCommonLandmark) {
  try {
    effective_transport(Vector::Constant(2, 0.0), Vector::Constant(2, 1.0), Vector(), 0.0,
                        {Matrix::Identity(1, 1), Matrix::Identity(1, 1)}, {Matrix::Identity(1, 1), Matrix::Identity(1, 1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoCommonLandmark);
  }
}

}  // namespace
}  // namespace lavdm
