#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "lavdm/types.hpp"

namespace lavdm {

/// Tangent vector V = theta_component * d_theta + phi_component * d_phi at the
/// spherical-coordinate point (base_theta, base_phi) of the unit sphere.
struct SphericalTangentVector {
  double theta_component = 0.0;
  double phi_component = 0.0;
  double base_theta = 0.5 * 3.14159265358979323846;
  double base_phi = 0.0;
};

/// Norm induced by g = d theta^2 + sin^2(theta) d phi^2.
double g_norm(const SphericalTangentVector& v);

Eigen::Vector3d sphere_point(double theta, double phi);
Eigen::Vector3d sphere_d_theta(double theta, double phi);
Eigen::Vector3d sphere_d_phi(double theta, double phi);

Eigen::Vector3d to_ambient(const SphericalTangentVector& v);
/// Coordinates of an ambient vector tangent at the unit vector `base`.
SphericalTangentVector from_ambient(const Eigen::Vector3d& base, const Eigen::Vector3d& tangent);

/// Position and velocity of a curve in spherical coordinates.
struct CurveSample {
  double theta;
  double phi;
  double dtheta;
  double dphi;
};

struct SphereCurve {
  std::function<CurveSample(double)> at;
  double t_begin = 0.0;
  double t_end = 1.0;
};

/// Minimizing great-circle arc between two unit vectors, unit speed.
SphereCurve great_circle(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

/// Curves of the worked S^2 example: gamma_1 (equator, x to y), gamma_21
/// (meridian, x to z = (pi/4, 0)) and gamma_22 (great circle, z to y).
SphereCurve example_gamma1();
SphereCurve example_gamma21();
SphereCurve example_gamma22();

/// Levi-Civita parallel transport along `curve`, classical RK4 with `steps`
/// uniform steps over [t_begin, t_end]. Throws ChartExit when the colatitude
/// leaves (margin, pi - margin).
SphericalTangentVector sphere_transport_ode(const SphereCurve& curve, const SphericalTangentVector& v0,
                                            Index steps, double margin = 1e-6);

/// Transport along the great circle from the base point of v0 to `to`, with
/// ceil(steps_per_unit * length) steps (at least 10).
SphericalTangentVector transport_along_geodesic(const SphericalTangentVector& v0,
                                                const Eigen::Vector3d& to,
                                                double steps_per_unit = 1e4, double margin = 1e-6);

struct DoubleTransportResult {
  double epsilon = 0.0;
  double median_error = 0.0;
  std::vector<double> errors;
};

/// Compares y -> z -> x against y -> x transport for random triples that are
/// pairwise within sqrt(epsilon) geodesic distance.
DoubleTransportResult double_transport_error(double epsilon, Index trials, std::uint64_t seed,
                                             double steps_per_unit = 1e4, double margin = 1e-6);

}  // namespace lavdm
