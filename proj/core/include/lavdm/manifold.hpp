#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lavdm/types.hpp"

namespace lavdm {

enum class ChartKind : std::uint8_t { KleinBottle, DistortedSphere, Sphere };

std::string_view to_string(ChartKind kind);
ChartKind parse_chart_kind(std::string_view name);

/// A closed parametrised surface together with its shape parameters.
///
/// Klein bottle:     (u, v) in [0, 2pi)^2 -> R^4, shape (R, P, gamma).
/// Distorted sphere: (u, v) in [0, pi) x [0, 2pi) -> R^3, shape (a, b, c).
/// Sphere:           colatitude u, longitude v on the unit sphere in R^3.
struct SurfaceChart {
  ChartKind kind = ChartKind::Sphere;
  double R = 2.0;
  double P = 1.0;
  double gamma = 0.1;
  double a = 1.1;
  double b = 1.0;
  double c = 0.9;

  static SurfaceChart klein_bottle(double R = 2.0, double P = 1.0, double gamma = 0.1);
  static SurfaceChart distorted_sphere(double a = 1.1, double b = 1.0, double c = 0.9);
  static SurfaceChart sphere();

  Index ambient_dim() const { return kind == ChartKind::KleinBottle ? 4 : 3; }
  Index intrinsic_dim() const { return 2; }
  double u_period() const;
  double v_period() const { return 2.0 * std::numbers::pi; }
  bool sphere_like() const { return kind != ChartKind::KleinBottle; }

  /// Throws InvalidArgument if a shape parameter is not strictly positive.
  void validate() const;

  Vector map(double u, double v) const;
  /// p x 2 matrix with columns d/du and d/dv of the chart map.
  Matrix jacobian(double u, double v) const;
  /// sqrt(det(J^T J)), the surface area element in chart coordinates.
  double area_element(double u, double v) const;
};

Eigen::Vector4d klein_point(double u, double v, const SurfaceChart& chart);
Eigen::Vector3d distorted_sphere_point(double u, double v, const SurfaceChart& chart);

/// Cutoff w(u) of the distorted sphere; exactly 0 at the poles.
double distortion_cutoff(double u);
/// Radial profile rho(u, v) of the distorted sphere.
double distortion_radius(double u, double v);

/// n points in R^p with optional chart coordinates.
struct PointCloud {
  RowMatrix points;               // n x p
  std::optional<RowMatrix> params;  // n x 2, (u, v)
  std::optional<SurfaceChart> chart;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }

  /// Largest deviation between stored points and the chart image of the stored
  /// params; 0 when no chart is attached.
  double chart_reproduction_error() const;
  /// Throws if a row is not finite or chart reproduction exceeds tol.
  void check_invariants(double tol = 1e-12) const;

  PointCloud subset(const std::vector<Index>& rows) const;
};

enum class DensityKind : std::uint8_t { AreaUniform, ParamUniform, AngularCentralGaussian };

std::string_view to_string(DensityKind kind);
DensityKind parse_density_kind(std::string_view name);

struct SamplingDensity {
  DensityKind kind = DensityKind::AreaUniform;
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Identity();

  static SamplingDensity area_uniform() { return {DensityKind::AreaUniform, Eigen::Matrix3d::Identity()}; }
  static SamplingDensity param_uniform() { return {DensityKind::ParamUniform, Eigen::Matrix3d::Identity()}; }
  static SamplingDensity angular_central_gaussian(const Eigen::Matrix3d& sigma) {
    return {DensityKind::AngularCentralGaussian, sigma};
  }
};

struct SamplingStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  double acceptance_ratio() const {
    return proposals == 0 ? 1.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

PointCloud sample_surface(const SurfaceChart& chart, Index n, const SamplingDensity& density,
                          std::uint64_t seed, SamplingStats* stats = nullptr);

/// Gram-Schmidt frame of the chart tangent plane; first column along d/du.
Matrix ground_truth_frame(const SurfaceChart& chart, double u, double v);

/// Frames for every point of a cloud that carries chart coordinates.
std::vector<Matrix> ground_truth_frames(const PointCloud& cloud);

}  // namespace lavdm
