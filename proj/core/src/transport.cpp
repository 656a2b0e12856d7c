#include "lavdm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "lavdm/errors.hpp"
#include "lavdm/metrics.hpp"
#include "lavdm/random.hpp"

namespace lavdm {

namespace {

constexpr double kPi = std::numbers::pi;

struct Components {
  double theta;
  double phi;
};

// dV^theta/dt = sin(theta) cos(theta) phi' V^phi
// dV^phi/dt   = -cot(theta) (theta' V^phi + phi' V^theta)
Components transport_rhs(const CurveSample& c, const Components& v) {
  const double s = std::sin(c.theta);
  const double co = std::cos(c.theta);
  return {s * co * c.dphi * v.phi, -(co / s) * (c.dtheta * v.phi + c.dphi * v.theta)};
}

}  // namespace

double g_norm(const SphericalTangentVector& v) {
  const double s = std::sin(v.base_theta);
  return std::sqrt(v.theta_component * v.theta_component + s * s * v.phi_component * v.phi_component);
}

Eigen::Vector3d sphere_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Eigen::Vector3d sphere_d_theta(double theta, double phi) {
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
}

Eigen::Vector3d sphere_d_phi(double theta, double phi) {
  return {-std::sin(theta) * std::sin(phi), std::sin(theta) * std::cos(phi), 0.0};
}

Eigen::Vector3d to_ambient(const SphericalTangentVector& v) {
  return v.theta_component * sphere_d_theta(v.base_theta, v.base_phi) +
         v.phi_component * sphere_d_phi(v.base_theta, v.base_phi);
}

SphericalTangentVector from_ambient(const Eigen::Vector3d& base, const Eigen::Vector3d& tangent) {
  SphericalTangentVector out;
  out.base_theta = std::atan2(std::hypot(base(0), base(1)), base(2));
  out.base_phi = std::atan2(base(1), base(0));
  const Eigen::Vector3d dt = sphere_d_theta(out.base_theta, out.base_phi);
  const Eigen::Vector3d dp = sphere_d_phi(out.base_theta, out.base_phi);
  out.theta_component = tangent.dot(dt);
  out.phi_component = tangent.dot(dp) / dp.squaredNorm();
  return out;
}

SphereCurve great_circle(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const Eigen::Vector3d p = from.normalized();
  const Eigen::Vector3d q = to.normalized();
  const double length = std::atan2(p.cross(q).norm(), p.dot(q));
  Eigen::Vector3d w = q - p.dot(q) * p;
  if (w.norm() < 1e-300) {
    // Degenerate arc; any perpendicular direction gives a zero-length curve.
    w = p.unitOrthogonal();
  }
  w.normalize();
  SphereCurve curve;
  curve.t_begin = 0.0;
  curve.t_end = length;
  curve.at = [p, w](double t) {
    const Eigen::Vector3d x = std::cos(t) * p + std::sin(t) * w;
    const Eigen::Vector3d dx = -std::sin(t) * p + std::cos(t) * w;
    const double rho2 = x(0) * x(0) + x(1) * x(1);
    const double rho = std::sqrt(rho2);
    CurveSample s;
    s.theta = std::atan2(rho, x(2));
    s.phi = std::atan2(x(1), x(0));
    s.dtheta = -dx(2) / rho;
    s.dphi = (x(0) * dx(1) - x(1) * dx(0)) / rho2;
    return s;
  };
  return curve;
}

SphereCurve example_gamma1() {
  SphereCurve curve;
  curve.t_begin = 0.0;
  curve.t_end = kPi / 2.0;
  curve.at = [](double t) { return CurveSample{kPi / 2.0, t, 0.0, 1.0}; };
  return curve;
}

SphereCurve example_gamma21() {
  SphereCurve curve;
  curve.t_begin = 0.0;
  curve.t_end = kPi / 4.0;
  // (cos t, 0, sin t): colatitude pi/2 - t on the meridian phi = 0.
  curve.at = [](double t) { return CurveSample{kPi / 2.0 - t, 0.0, -1.0, 0.0}; };
  return curve;
}

SphereCurve example_gamma22() {
  SphereCurve curve;
  curve.t_begin = 0.0;
  curve.t_end = kPi / 2.0;
  curve.at = [](double t) {
    const double c = std::cos(t);
    const double s = std::sin(t);
    CurveSample out;
    out.theta = std::acos(c / std::numbers::sqrt2);
    out.phi = std::atan2(std::numbers::sqrt2 * s, c);
    out.dtheta = s / std::sqrt(2.0 - c * c);
    out.dphi = std::numbers::sqrt2 / (1.0 + s * s);
    return out;
  };
  return curve;
}

SphericalTangentVector sphere_transport_ode(const SphereCurve& curve, const SphericalTangentVector& v0,
                                            Index steps, double margin) {
  if (steps < 10) {
    throw Error(ErrorKind::InvalidArgument, "sphere_transport_ode needs at least 10 steps");
  }
  auto sample = [&](double t) {
    const CurveSample c = curve.at(t);
    if (!(c.theta > margin && c.theta < kPi - margin)) {
      throw Error(ErrorKind::ChartExit,
                  "curve colatitude " + std::to_string(c.theta) + " left the chart at t = " +
                      std::to_string(t));
    }
    return c;
  };
  const double h = (curve.t_end - curve.t_begin) / static_cast<double>(steps);
  Components v{v0.theta_component, v0.phi_component};
  for (Index k = 0; k < steps; ++k) {
    const double t = curve.t_begin + h * static_cast<double>(k);
    const CurveSample c0 = sample(t);
    const CurveSample cm = sample(t + 0.5 * h);
    const CurveSample c1 = sample(t + h);
    const Components k1 = transport_rhs(c0, v);
    const Components k2 = transport_rhs(cm, {v.theta + 0.5 * h * k1.theta, v.phi + 0.5 * h * k1.phi});
    const Components k3 = transport_rhs(cm, {v.theta + 0.5 * h * k2.theta, v.phi + 0.5 * h * k2.phi});
    const Components k4 = transport_rhs(c1, {v.theta + h * k3.theta, v.phi + h * k3.phi});
    v.theta += h / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
    v.phi += h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
  }
  const CurveSample end = sample(curve.t_end);
  SphericalTangentVector out;
  out.theta_component = v.theta;
  out.phi_component = v.phi;
  out.base_theta = end.theta;
  out.base_phi = end.phi;
  return out;
}

SphericalTangentVector transport_along_geodesic(const SphericalTangentVector& v0,
                                                const Eigen::Vector3d& to, double steps_per_unit,
                                                double margin) {
  const Eigen::Vector3d from = sphere_point(v0.base_theta, v0.base_phi);
  const SphereCurve curve = great_circle(from, to);
  const double length = curve.t_end - curve.t_begin;
  const auto steps = std::max<Index>(10, static_cast<Index>(std::ceil(steps_per_unit * length)));
  return sphere_transport_ode(curve, v0, steps, margin);
}

namespace {

// exp_x(r * direction) for a unit tangent direction at x.
Eigen::Vector3d sphere_exp(const Eigen::Vector3d& x, const Eigen::Vector3d& direction, double r) {
  return (std::cos(r) * x + std::sin(r) * direction).normalized();
}

Eigen::Vector3d random_unit_tangent(const Eigen::Vector3d& x, Rng& rng) {
  const Eigen::Vector3d e1 = x.unitOrthogonal();
  const Eigen::Vector3d e2 = x.cross(e1);
  const double angle = 2.0 * kPi * uniform01(rng);
  return std::cos(angle) * e1 + std::sin(angle) * e2;
}

}  // namespace

DoubleTransportResult double_transport_error(double epsilon, Index trials, std::uint64_t seed,
                                             double steps_per_unit, double margin) {
  if (!(epsilon > 0.0) || trials < 1) {
    throw Error(ErrorKind::InvalidArgument, "double_transport_error needs epsilon > 0 and trials >= 1");
  }
  DoubleTransportResult result;
  result.epsilon = epsilon;
  result.errors.reserve(static_cast<std::size_t>(trials));
  Rng rng = make_rng(seed);
  // y and z lie within sqrt(eps)/2 of x, so every pair is within sqrt(eps).
  const double reach = 0.5 * std::sqrt(epsilon);
  for (Index trial = 0; trial < trials; ++trial) {
    // x is area-uniform on the band |cos(theta)| <= 1/2, away from the poles.
    const double zc = uniform01(rng) - 0.5;
    const double lon = 2.0 * kPi * uniform01(rng);
    const double rc = std::sqrt(1.0 - zc * zc);
    const Eigen::Vector3d x(rc * std::cos(lon), rc * std::sin(lon), zc);
    const Eigen::Vector3d y =
        sphere_exp(x, random_unit_tangent(x, rng), reach * std::sqrt(uniform01(rng)));
    const Eigen::Vector3d z =
        sphere_exp(x, random_unit_tangent(x, rng), reach * std::sqrt(uniform01(rng)));

    const SphericalTangentVector at_y = from_ambient(y, random_unit_tangent(y, rng));
    const SphericalTangentVector direct = transport_along_geodesic(at_y, x, steps_per_unit, margin);
    const SphericalTangentVector via_z = transport_along_geodesic(
        transport_along_geodesic(at_y, z, steps_per_unit, margin), x, steps_per_unit, margin);

    const double s = std::sin(direct.base_theta);
    const double dt = via_z.theta_component - direct.theta_component;
    const double dp = via_z.phi_component - direct.phi_component;
    result.errors.push_back(std::sqrt(dt * dt + s * s * dp * dp));
  }
  result.median_error = median_of(result.errors);
  return result;
}

}  // namespace lavdm
