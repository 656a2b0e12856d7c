#include "lavdm/manifold.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <unsupported/Eigen/AutoDiff>

#include "lavdm/errors.hpp"
#include "lavdm/random.hpp"
#include "parallel.hpp"

namespace lavdm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Dual = Eigen::AutoDiffScalar<Eigen::Vector2d>;

double wrap_angle(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

double value_of(double x) { return x; }
double value_of(const Dual& x) { return x.value(); }

// w(u) = exp(-1 / (u^2.6 (pi-u)^2.2)) * (1/2 + 1/2 cos(2u - pi))^2.2, and 0 at
// the poles by continuous extension. Below the threshold the exponential
// underflows, so the constant branch also keeps derivatives finite.
template <typename T>
T cutoff(const T& u) {
  using std::cos;
  using std::exp;
  using std::pow;
  const double uv = value_of(u);
  if (uv <= 0.0 || uv >= kPi) return T(0.0);
  const T g = pow(u, 2.6) * pow(T(kPi) - u, 2.2);
  if (value_of(g) < 1.0e-3) return T(0.0);
  return exp(T(-1.0) / g) * pow(T(0.5) + T(0.5) * cos(T(2.0) * u - T(kPi)), 2.2);
}

template <typename T>
T radius(const T& u, const T& v) {
  using std::cos;
  using std::sin;
  return T(1.0) + cutoff(u) * (T(0.2) * sin(T(2.0) * u + v) + T(0.15) * cos(T(4.0) * v + u) +
                               T(0.1) * sin(T(4.0) * u) * cos(T(2.0) * v));
}

template <typename T>
std::array<T, 4> chart_eval(const SurfaceChart& chart, const T& u, const T& v) {
  using std::cos;
  using std::sin;
  switch (chart.kind) {
    case ChartKind::KleinBottle: {
      const T cu = cos(u / T(2.0));
      const T su = sin(u / T(2.0));
      const T s2v = sin(T(2.0) * v);
      const T cv = cos(v);
      const T lift = T(1.0) + T(chart.gamma) * sin(v);
      return {T(chart.R) * (cu * cv - su * s2v), T(chart.R) * (su * cv - cu * s2v),
              T(chart.P) * cos(u) * lift, T(chart.P) * sin(u) * lift};
    }
    case ChartKind::DistortedSphere: {
      const T rho = radius(u, v);
      return {T(chart.a) * rho * sin(u) * cos(v), T(chart.b) * rho * sin(u) * sin(v),
              T(chart.c) * rho * cos(u), T(0.0)};
    }
    case ChartKind::Sphere:
      return {sin(u) * cos(v), sin(u) * sin(v), cos(u), T(0.0)};
  }
  return {T(0.0), T(0.0), T(0.0), T(0.0)};
}

}  // namespace

std::string_view to_string(ChartKind kind) {
  switch (kind) {
    case ChartKind::KleinBottle: return "klein";
    case ChartKind::DistortedSphere: return "dsphere";
    case ChartKind::Sphere: return "sphere";
  }
  return "unknown";
}

ChartKind parse_chart_kind(std::string_view name) {
  if (name == "klein") return ChartKind::KleinBottle;
  if (name == "dsphere") return ChartKind::DistortedSphere;
  if (name == "sphere") return ChartKind::Sphere;
  throw Error(ErrorKind::InvalidArgument, "unknown chart '" + std::string(name) +
                                              "' (expected klein, dsphere or sphere)");
}

std::string_view to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::AreaUniform: return "area";
    case DensityKind::ParamUniform: return "param";
    case DensityKind::AngularCentralGaussian: return "acg";
  }
  return "unknown";
}

DensityKind parse_density_kind(std::string_view name) {
  if (name == "area") return DensityKind::AreaUniform;
  if (name == "param") return DensityKind::ParamUniform;
  if (name == "acg") return DensityKind::AngularCentralGaussian;
  throw Error(ErrorKind::InvalidArgument,
              "unknown density '" + std::string(name) + "' (expected area, param or acg)");
}

SurfaceChart SurfaceChart::klein_bottle(double R, double P, double gamma) {
  SurfaceChart chart;
  chart.kind = ChartKind::KleinBottle;
  chart.R = R;
  chart.P = P;
  chart.gamma = gamma;
  chart.validate();
  return chart;
}

SurfaceChart SurfaceChart::distorted_sphere(double a, double b, double c) {
  SurfaceChart chart;
  chart.kind = ChartKind::DistortedSphere;
  chart.a = a;
  chart.b = b;
  chart.c = c;
  chart.validate();
  return chart;
}

SurfaceChart SurfaceChart::sphere() {
  SurfaceChart chart;
  chart.kind = ChartKind::Sphere;
  return chart;
}

double SurfaceChart::u_period() const { return kind == ChartKind::KleinBottle ? kTwoPi : kPi; }

void SurfaceChart::validate() const {
  for (double x : {R, P, gamma, a, b, c}) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw Error(ErrorKind::InvalidArgument, "chart shape parameters must be strictly positive");
    }
  }
}

Vector SurfaceChart::map(double u, double v) const {
  if (kind == ChartKind::KleinBottle) {
    u = wrap_angle(u, kTwoPi);
  }
  v = wrap_angle(v, kTwoPi);
  const auto x = chart_eval<double>(*this, u, v);
  Vector out(ambient_dim());
  for (Index i = 0; i < out.size(); ++i) out(i) = x[static_cast<std::size_t>(i)];
  return out;
}

Matrix SurfaceChart::jacobian(double u, double v) const {
  if (kind == ChartKind::KleinBottle) {
    u = wrap_angle(u, kTwoPi);
  }
  v = wrap_angle(v, kTwoPi);
  const Dual du(u, 2, 0);
  const Dual dv(v, 2, 1);
  const auto x = chart_eval<Dual>(*this, du, dv);
  Matrix J(ambient_dim(), 2);
  for (Index i = 0; i < J.rows(); ++i) {
    J.row(i) = x[static_cast<std::size_t>(i)].derivatives().transpose();
  }
  return J;
}

double SurfaceChart::area_element(double u, double v) const {
  const Matrix J = jacobian(u, v);
  const double det = (J.transpose() * J).determinant();
  return std::sqrt(std::max(det, 0.0));
}

Eigen::Vector4d klein_point(double u, double v, const SurfaceChart& chart) {
  if (chart.kind != ChartKind::KleinBottle) {
    throw Error(ErrorKind::InvalidArgument, "klein_point requires a Klein bottle chart");
  }
  return chart.map(u, v);
}

Eigen::Vector3d distorted_sphere_point(double u, double v, const SurfaceChart& chart) {
  if (chart.kind != ChartKind::DistortedSphere) {
    throw Error(ErrorKind::InvalidArgument, "distorted_sphere_point requires a distorted sphere chart");
  }
  return chart.map(u, v);
}

double distortion_cutoff(double u) { return cutoff(u); }

double distortion_radius(double u, double v) { return radius(u, v); }

double PointCloud::chart_reproduction_error() const {
  if (!chart || !params) return 0.0;
  double worst = 0.0;
  for (Index i = 0; i < size(); ++i) {
    const Vector x = chart->map((*params)(i, 0), (*params)(i, 1));
    worst = std::max(worst, (points.row(i).transpose() - x).cwiseAbs().maxCoeff());
  }
  return worst;
}

void PointCloud::check_invariants(double tol) const {
  if (!points.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "point cloud contains non-finite coordinates");
  }
  if (params && params->rows() != points.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "params row count differs from point count");
  }
  const double err = chart_reproduction_error();
  if (err > tol) {
    throw Error(ErrorKind::InvalidArgument,
                "chart does not reproduce stored points (max deviation " + std::to_string(err) + ")");
  }
}

PointCloud PointCloud::subset(const std::vector<Index>& rows) const {
  PointCloud out;
  out.points.resize(static_cast<Index>(rows.size()), dim());
  if (params) out.params = RowMatrix(static_cast<Index>(rows.size()), 2);
  out.chart = chart;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<Index>(k);
    out.points.row(r) = points.row(rows[k]);
    if (params) out.params->row(r) = params->row(rows[k]);
  }
  return out;
}

namespace {

// Upper bound of the area element over the parameter domain: grid maximum
// with 10% headroom. The charts are smooth, so the grid resolves the peak.
double area_element_bound(const SurfaceChart& chart) {
  constexpr int kGrid = 256;
  double peak = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double u = chart.u_period() * i / kGrid;
    for (int j = 0; j < kGrid; ++j) {
      const double v = chart.v_period() * j / kGrid;
      peak = std::max(peak, chart.area_element(u, v));
    }
  }
  return 1.1 * peak;
}

}  // namespace

PointCloud sample_surface(const SurfaceChart& chart, Index n, const SamplingDensity& density,
                          std::uint64_t seed, SamplingStats* stats) {
  chart.validate();
  if (n < 1) {
    throw Error(ErrorKind::InvalidArgument, "sample_surface needs n >= 1");
  }
  PointCloud cloud;
  cloud.chart = chart;
  cloud.points.resize(n, chart.ambient_dim());
  cloud.params = RowMatrix(n, 2);
  Rng rng = make_rng(seed);
  SamplingStats local;

  auto store = [&](Index i, double u, double v) {
    (*cloud.params)(i, 0) = u;
    (*cloud.params)(i, 1) = v;
    cloud.points.row(i) = chart.map(u, v).transpose();
  };

  switch (density.kind) {
    case DensityKind::ParamUniform:
      for (Index i = 0; i < n; ++i) {
        const double u = chart.u_period() * uniform01(rng);
        const double v = chart.v_period() * uniform01(rng);
        store(i, u, v);
      }
      local.proposals = local.accepted = static_cast<std::uint64_t>(n);
      break;
    case DensityKind::AreaUniform: {
      const double bound = area_element_bound(chart);
      for (Index i = 0; i < n;) {
        const double u = chart.u_period() * uniform01(rng);
        const double v = chart.v_period() * uniform01(rng);
        ++local.proposals;
        if (uniform01(rng) * bound <= chart.area_element(u, v)) {
          store(i++, u, v);
          ++local.accepted;
        }
      }
      break;
    }
    case DensityKind::AngularCentralGaussian: {
      if (!chart.sphere_like()) {
        throw Error(ErrorKind::UnsupportedDensity,
                    "angular central Gaussian sampling is only defined for sphere charts");
      }
      Eigen::LLT<Eigen::Matrix3d> llt(density.sigma);
      if (llt.info() != Eigen::Success || !density.sigma.isApprox(density.sigma.transpose())) {
        throw Error(ErrorKind::InvalidArgument, "ACG covariance must be symmetric positive definite");
      }
      const Eigen::Matrix3d A = llt.matrixL();
      for (Index i = 0; i < n; ++i) {
        Eigen::Vector3d z;
        for (int k = 0; k < 3; ++k) z(k) = standard_normal(rng);
        const Eigen::Vector3d x = (A * z).normalized();
        const double u = std::atan2(std::hypot(x(0), x(1)), x(2));
        const double v = wrap_angle(std::atan2(x(1), x(0)), kTwoPi);
        store(i, u, v);
      }
      local.proposals = local.accepted = static_cast<std::uint64_t>(n);
      break;
    }
  }
  if (stats) *stats = local;
  return cloud;
}

Matrix ground_truth_frame(const SurfaceChart& chart, double u, double v) {
  const Matrix J = chart.jacobian(u, v);
  constexpr double kTol = 1e-10;
  Vector e1 = J.col(0);
  const double n1 = e1.norm();
  if (n1 < kTol) {
    throw Error(ErrorKind::DegenerateJacobian, "d/du vanishes at (" + std::to_string(u) + ", " +
                                                   std::to_string(v) + ")");
  }
  e1 /= n1;
  Vector e2 = J.col(1) - e1.dot(J.col(1)) * e1;
  const double n2 = e2.norm();
  if (n2 < kTol) {
    throw Error(ErrorKind::DegenerateJacobian, "chart Jacobian has rank < 2 at (" +
                                                   std::to_string(u) + ", " + std::to_string(v) + ")");
  }
  e2 /= n2;
  Matrix F(J.rows(), 2);
  F.col(0) = e1;
  F.col(1) = e2;
  return F;
}

std::vector<Matrix> ground_truth_frames(const PointCloud& cloud) {
  if (!cloud.chart || !cloud.params) {
    throw Error(ErrorKind::InvalidArgument, "ground-truth frames need chart coordinates");
  }
  std::vector<Matrix> frames(static_cast<std::size_t>(cloud.size()));
detail::parallel_for(cloud.size(), [&](Index i) {
    frames[static_cast<std::size_t>(i)] =
        ground_truth_frame(*cloud.chart, (*cloud.params)(i, 0), (*cloud.params)(i, 1));
  });
  return frames;
}

}  // namespace lavdm
