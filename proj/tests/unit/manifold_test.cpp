#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "lavdm/errors.hpp"
#include "lavdm/manifold.hpp"

namespace lavdm {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(KleinPoint, Origin) {
  const auto chart = SurfaceChart::klein_bottle();
  const Eigen::Vector4d p = klein_point(0.0, 0.0, chart);
  EXPECT_NEAR(p(0), 2.0, 1e-15);
  EXPECT_NEAR(p(1), 0.0, 1e-15);
  EXPECT_NEAR(p(2), 1.0, 1e-15);
  EXPECT_NEAR(p(3), 0.0, 1e-15);
}

TEST(KleinPoint, QuarterTurnInV) {
  const Eigen::Vector4d p = klein_point(0.0, kPi / 2.0, SurfaceChart::klein_bottle());
  EXPECT_NEAR(p(0), 0.0, 1e-15);
  EXPECT_NEAR(p(1), 0.0, 1e-15);
  EXPECT_NEAR(p(2), 1.1, 1e-15);
  EXPECT_NEAR(p(3), 0.0, 1e-15);
}

TEST(KleinPoint, PeriodicInV) {
  const auto chart = SurfaceChart::klein_bottle();
  for (double u : {0.3, 1.7, 4.0}) {
    for (double v : {0.1, 2.5, 5.9}) {
      EXPECT_LT((klein_point(u, v, chart) - klein_point(u, v + 2.0 * kPi, chart)).norm(), 1e-13);
    }
  }
}

TEST(KleinPoint, RejectsOtherCharts) {
  EXPECT_THROW(klein_point(0.0, 0.0, SurfaceChart::sphere()), Error);
}

TEST(DistortedSphere, EquatorPointHasUnitRadius) {
  const auto chart = SurfaceChart::distorted_sphere();
  EXPECT_GT(distortion_cutoff(kPi / 2.0), 0.0);
  EXPECT_NEAR(distortion_radius(kPi / 2.0, 0.0), 1.0, 1e-15);
  const Eigen::Vector3d p = distorted_sphere_point(kPi / 2.0, 0.0, chart);
  EXPECT_NEAR(p(0), 1.1, 1e-15);
  EXPECT_NEAR(p(1), 0.0, 1e-15);
  EXPECT_NEAR(p(2), 0.0, 1e-15);
}

TEST(DistortedSphere, CutoffVanishesAtPoles) {
  EXPECT_EQ(distortion_cutoff(0.0), 0.0);
  EXPECT_EQ(distortion_cutoff(kPi), 0.0);
  const Eigen::Vector3d p = distorted_sphere_point(1e-9, 0.4, SurfaceChart::distorted_sphere());
  EXPECT_NEAR(p(0), 0.0, 1e-8);
  EXPECT_NEAR(p(1), 0.0, 1e-8);
  EXPECT_NEAR(p(2), 0.9, 1e-12);
}

TEST(SurfaceChart, RejectsNonPositiveShape) {
  EXPECT_THROW(SurfaceChart::klein_bottle(-1.0).validate(), Error);
  EXPECT_THROW(SurfaceChart::distorted_sphere(1.0, 0.0).validate(), Error);
}

TEST(GroundTruthFrame, SphereEquator) {
  const Matrix f = ground_truth_frame(SurfaceChart::sphere(), kPi / 2.0, 0.0);
  ASSERT_EQ(f.rows(), 3);
  ASSERT_EQ(f.cols(), 2);
  EXPECT_LT((f.col(0) - Eigen::Vector3d(0, 0, -1)).norm(), 1e-12);
  EXPECT_LT((f.col(1) - Eigen::Vector3d(0, 1, 0)).norm(), 1e-12);
}

TEST(GroundTruthFrame, OrthonormalAndTangent) {
  for (const auto& chart : {SurfaceChart::klein_bottle(), SurfaceChart::distorted_sphere()}) {
    for (double u : {0.4, 1.3, 2.2}) {
      for (double v : {0.2, 3.0, 5.5}) {
        const Matrix f = ground_truth_frame(chart, u, v);
        EXPECT_LT((f.transpose() * f - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
        const Matrix j = chart.jacobian(u, v);
        // Tangent: projecting the Jacobian onto the frame loses nothing.
        EXPECT_LT((j - f * (f.transpose() * j)).norm(), 1e-10 * j.norm());
      }
    }
  }
}

TEST(SampleSurface, Deterministic) {
  const auto chart = SurfaceChart::klein_bottle();
  const PointCloud a = sample_surface(chart, 300, SamplingDensity::area_uniform(), 17);
  const PointCloud b = sample_surface(chart, 300, SamplingDensity::area_uniform(), 17);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(*a.params, *b.params);
  const PointCloud c = sample_surface(chart, 300, SamplingDensity::area_uniform(), 18);
  EXPECT_NE(a.points, c.points);
}

TEST(SampleSurface, ChartReproduction) {
  for (const auto& chart : {SurfaceChart::klein_bottle(), SurfaceChart::distorted_sphere(), SurfaceChart::sphere()}) {
    const PointCloud cloud = sample_surface(chart, 500, SamplingDensity::area_uniform(), 3);
    EXPECT_LE(cloud.chart_reproduction_error(), 1e-12);
    EXPECT_NO_THROW(cloud.check_invariants(1e-12));
  }
}

double ks_uniform(std::vector<double> values, double period) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = values[i] / period;
    worst = std::max({worst, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  return worst;
}

TEST(SampleSurface, ParamUniformMarginals) {
  const PointCloud cloud = sample_surface(SurfaceChart::klein_bottle(), 10000, SamplingDensity::param_uniform(), 5);
  std::vector<double> u(10000), v(10000);
  for (Index i = 0; i < 10000; ++i) {
    u[static_cast<std::size_t>(i)] = (*cloud.params)(i, 0);
    v[static_cast<std::size_t>(i)] = (*cloud.params)(i, 1);
  }
  EXPECT_LT(ks_uniform(u, 2.0 * kPi), 0.05);
  EXPECT_LT(ks_uniform(v, 2.0 * kPi), 0.05);
}

TEST(SampleSurface, AreaUniformMatchesAreaElement) {
  const auto chart = SurfaceChart::distorted_sphere();
  const Index n = 100000;
  SamplingStats stats;
  const PointCloud cloud = sample_surface(chart, n, SamplingDensity::area_uniform(), 11, &stats);
  EXPECT_GT(stats.acceptance_ratio(), 0.0);
  EXPECT_LE(stats.acceptance_ratio(), 1.0);
  constexpr int kGrid = 20;
  const double du = chart.u_period() / kGrid;
  const double dv = chart.v_period() / kGrid;
  Matrix counts = Matrix::Zero(kGrid, kGrid);
  for (Index i = 0; i < n; ++i) {
    const int a = std::min(kGrid - 1, static_cast<int>((*cloud.params)(i, 0) / du));
    const int b = std::min(kGrid - 1, static_cast<int>((*cloud.params)(i, 1) / dv));
    counts(a, b) += 1.0;
  }
  // Expected cell mass by midpoint quadrature on a refined grid.
  Matrix mass = Matrix::Zero(kGrid, kGrid);
  constexpr int kSub = 8;
  for (int a = 0; a < kGrid; ++a) {
    for (int b = 0; b < kGrid; ++b) {
      for (int s = 0; s < kSub; ++s) {
        for (int t = 0; t < kSub; ++t) {
          mass(a, b) += chart.area_element((a + (s + 0.5) / kSub) * du, (b + (t + 0.5) / kSub) * dv);
        }
      }
    }
  }
  mass /= mass.sum();
  counts /= static_cast<double>(n);
  EXPECT_LT((counts - mass).cwiseAbs().sum(), 0.05);
}

TEST(SampleSurface, AngularCentralGaussianFlattensZ) {
  const Eigen::Matrix3d sigma = Eigen::Vector3d(1.0, 1.0, 0.8).asDiagonal();
  const PointCloud cloud =
      sample_surface(SurfaceChart::sphere(), 20000, SamplingDensity::angular_central_gaussian(sigma), 9);
  const Eigen::Matrix3d second = cloud.points.transpose() * cloud.points / static_cast<double>(cloud.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(second);
  EXPECT_GT(std::abs(eig.eigenvectors().col(0)(2)), 0.95);
  EXPECT_NO_THROW(cloud.check_invariants(1e-12));
}

TEST(SampleSurface, AngularCentralGaussianNeedsSphereLikeChart) {
  try {
    sample_surface(SurfaceChart::klein_bottle(), 10, SamplingDensity::angular_central_gaussian(Eigen::Matrix3d::Identity()),
                   1);
    FAIL() << "expected UnsupportedDensity";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedDensity);
  }
}

TEST(PointCloud, SubsetKeepsParams) {
  const PointCloud cloud = sample_surface(SurfaceChart::sphere(), 50, SamplingDensity::area_uniform(), 2);
  const PointCloud sub = cloud.subset({4, 7, 1});
  ASSERT_EQ(sub.size(), 3);
  EXPECT_EQ(sub.points.row(1), cloud.points.row(7));
  EXPECT_EQ(sub.params->row(2), cloud.params->row(1));
  EXPECT_LE(sub.chart_reproduction_error(), 1e-12);
}

}  // namespace
}  // namespace lavdm
