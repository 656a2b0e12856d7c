#include "lavdm/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <toml.hpp>

#include "lavdm/errors.hpp"

namespace lavdm {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 7> kExperimentNames{{
    {ExperimentKind::LandmarkSweep, "landmark_sweep"},
    {ExperimentKind::BetaSweep, "beta_sweep"},
    {ExperimentKind::AlphaSweep, "alpha_sweep"},
    {ExperimentKind::EigenRecovery, "eigen_recovery"},
    {ExperimentKind::EffectiveTransport, "effective_transport"},
    {ExperimentKind::TimingScaling, "timing_scaling"},
    {ExperimentKind::DoubleTransportScaling, "double_transport_scaling"},
}};

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  std::string s = buffer;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

template <typename T, typename F>
std::string format_array(const std::vector<T>& values, F format) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format(values[i]);
  }
  return out + "]";
}

std::string quoted(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::vector<Index> klein_grid(int first, int last) {
  std::vector<Index> grid;
  for (int i = first; i <= last; ++i) grid.push_back(static_cast<Index>(std::floor(std::pow(2.0, i / 2.0))));
  return grid;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const auto& [k, n] : kExperimentNames) {
    if (n == name) return k;
  }
  throw Error(ErrorKind::ConfigError, "unknown experiment '" + std::string(name) + "'");
}

std::string_view to_string(Preset preset) { return preset == Preset::Desk ? "desk" : "paper"; }

Preset parse_preset(std::string_view name) {
  if (name == "desk") return Preset::Desk;
  if (name == "paper") return Preset::Paper;
  throw Error(ErrorKind::ConfigError, "unknown preset '" + std::string(name) + "' (expected desk or paper)");
}

double default_epsilon(ChartKind chart, Index n) {
  const double reference = chart == ChartKind::KleinBottle ? 0.2 : 0.17;
  constexpr double kReferenceN = 3500.0;
  return reference * std::pow(kReferenceN / static_cast<double>(std::max<Index>(n, 1)), 2.0 / 2.0);
}

double ExperimentConfig::resolved_pca_radius() const {
  return pca_radius > 0.0 ? pca_radius : 1.5 * std::sqrt(epsilon);
}

std::vector<Index> ExperimentConfig::reported_eigenvectors() const {
  if (!eigenvectors.empty()) return eigenvectors;
  std::vector<Index> all;
  for (Index l = 1; l <= r; ++l) all.push_back(l);
  return all;
}

SamplingDensity ExperimentConfig::sampling_density() const {
  SamplingDensity d;
  d.kind = density;
  d.sigma = Eigen::Vector3d(sigma[0], sigma[1], sigma[2]).asDiagonal();
  return d;
}

SurfaceChart ExperimentConfig::surface_chart() const {
  switch (chart) {
    case ChartKind::KleinBottle: return SurfaceChart::klein_bottle();
    case ChartKind::DistortedSphere: return SurfaceChart::distorted_sphere();
    case ChartKind::Sphere: return SurfaceChart::sphere();
  }
  return SurfaceChart::sphere();
}

ExperimentConfig preset_config(ExperimentKind kind, Preset preset) {
  const bool paper = preset == Preset::Paper;
  ExperimentConfig c;
  c.experiment = kind;
  c.dense_threshold = paper ? 2000 : 500;
  switch (kind) {
    case ExperimentKind::LandmarkSweep:
      c.chart = ChartKind::KleinBottle;
      c.n = paper ? 3500 : 1000;
      c.m_grid = paper ? klein_grid(11, 20) : std::vector<Index>{64, 128, 256, 512};
      c.beta_grid = {0.5};
      c.alpha_grid = {0.0};
      c.epsilon = default_epsilon(c.chart, c.n);
      c.trials = paper ? 30 : 10;
      break;
    case ExperimentKind::BetaSweep:
    case ExperimentKind::AlphaSweep: {
      const bool beta = kind == ExperimentKind::BetaSweep;
      c.chart = ChartKind::DistortedSphere;
      c.density = DensityKind::AngularCentralGaussian;
      c.sigma = {1.0, 1.0, 0.8};
      c.n = paper ? 3500 : 1200;
      c.m_grid = {paper ? (beta ? 2200 : 2500) : 800};
      c.beta_grid = beta ? std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0} : std::vector<double>{0.5};
      c.alpha_grid = beta ? std::vector<double>{0.0} : std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};
      c.reference_alpha = beta ? 0.0 : 1.0;
      c.epsilon = default_epsilon(c.chart, c.n);
      c.trials = paper ? 30 : 10;
      break;
    }
    case ExperimentKind::EigenRecovery:
      c.chart = ChartKind::DistortedSphere;
      c.n = paper ? 5000 : 1500;
      c.m_grid = {paper ? 500 : 270};
      c.beta_grid = {0.5};
      c.alpha_grid = {0.0};
      c.r = 20;
      c.epsilon = default_epsilon(c.chart, c.n);
      c.trials = paper ? 30 : 10;
      break;
    case ExperimentKind::EffectiveTransport:
      c.chart = ChartKind::DistortedSphere;
      c.n = 2;
      c.m_grid = {20, 40, 60, 80};
      c.beta_grid = {0.0};
      c.alpha_grid = {0.0};
      c.epsilon = 0.3;
      c.trials = 30;
      break;
    case ExperimentKind::TimingScaling:
      c.chart = ChartKind::Sphere;
      c.frames = FrameSource::GroundTruth;
      c.n = 20000;
      c.m_grid = paper ? std::vector<Index>{50, 100, 200, 400, 800} : std::vector<Index>{50, 100, 200, 400};
      c.n_grid = paper ? std::vector<Index>{10000, 20000, 40000, 80000} : std::vector<Index>{5000, 10000, 20000, 40000};
      c.timing_fixed_m = 100;
      c.beta_grid = {0.5};
      c.alpha_grid = {0.0};
      c.epsilon = default_epsilon(c.chart, c.n);
      c.trials = 1;
      c.dense_threshold = 2000;
      break;
    case ExperimentKind::DoubleTransportScaling:
      c.chart = ChartKind::Sphere;
      c.frames = FrameSource::GroundTruth;
      c.n = 1;
      c.m_grid = {1};
      c.epsilon_grid = {0.2, 0.1, 0.05, 0.025};
      c.trials = 200;
      c.epsilon = 0.2;
      break;
  }
  return c;
}

std::vector<std::string> check_config(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  auto require = [&errors](bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  };
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  require(c.n >= 1, "n: must be at least 1");
  require(!c.m_grid.empty(), "m_grid: must not be empty");
  for (Index m : c.m_grid) require(m >= 1, "m_grid: every landmark count must be at least 1");
  require(!c.beta_grid.empty(), "beta_grid: must not be empty");
  for (double b : c.beta_grid) require(in_unit(b), "beta_grid: value " + format_double(b) + " outside [0, 1]");
  require(!c.alpha_grid.empty(), "alpha_grid: must not be empty");
  for (double a : c.alpha_grid) require(in_unit(a), "alpha_grid: value " + format_double(a) + " outside [0, 1]");
  require(c.epsilon > 0.0 && std::isfinite(c.epsilon), "epsilon: must be positive and finite");
  require(c.t > 0.0 && std::isfinite(c.t), "t: must be positive");
  require(c.r >= 1, "r: must be at least 1");
  require(c.trials >= 1, "trials: must be at least 1");
  for (double s : c.sigma) require(s > 0.0 && std::isfinite(s), "sigma: entries must be positive");
  require(c.density != DensityKind::AngularCentralGaussian || c.chart != ChartKind::KleinBottle,
          "density: acg sampling is only defined for sphere-like charts");
  require(!c.output_dir.empty(), "output_dir: must not be empty");
  require(c.truncation > 0.0, "truncation: must be positive (inf disables truncation)");
  require(c.pca_radius >= 0.0 && std::isfinite(c.pca_radius), "pca_radius: must be >= 0 (0 selects the default)");
  require(in_unit(c.reference_alpha), "reference_alpha: must lie in [0, 1]");
  for (Index l : c.eigenvectors) require(l >= 1 && l <= c.r, "eigenvectors: index " + std::to_string(l) + " outside [1, r]");
  require(c.dense_threshold >= 1, "dense_threshold: must be at least 1");
  require(c.solver_tolerance > 0.0 && c.solver_tolerance < 1e-2, "solver_tolerance: must lie in (0, 1e-2)");
  for (Index n : c.n_grid) require(n >= 1, "n_grid: every size must be at least 1");
  require(c.timing_fixed_m >= 1, "timing_fixed_m: must be at least 1");
  require(!c.epsilon_grid.empty(), "epsilon_grid: must not be empty");
  for (double e : c.epsilon_grid) require(e > 0.0 && std::isfinite(e), "epsilon_grid: values must be positive");
  require(c.steps_per_unit >= 1.0, "steps_per_unit: must be at least 1");
  require(c.landmark_region == "union" || c.landmark_region == "each", "landmark_region: expected union or each");

  switch (c.experiment) {
    case ExperimentKind::LandmarkSweep:
    case ExperimentKind::BetaSweep:
    case ExperimentKind::AlphaSweep:
    case ExperimentKind::EigenRecovery:
      for (Index m : c.m_grid) require(m <= c.n, "m_grid: landmark count " + std::to_string(m) + " exceeds n");
      for (Index m : c.m_grid) require(c.r <= 2 * m, "r: more eigenpairs than the landmark matrix has columns");
      break;
    case ExperimentKind::EffectiveTransport:
      require(c.chart != ChartKind::KleinBottle, "chart: effective transport runs on a sphere-like chart");
      break;
    case ExperimentKind::TimingScaling:
      for (Index m : c.m_grid) require(m <= c.n, "m_grid: landmark count " + std::to_string(m) + " exceeds n");
      for (Index n : c.n_grid) require(c.timing_fixed_m <= n, "n_grid: size below timing_fixed_m");
      break;
    case ExperimentKind::DoubleTransportScaling:
      require(c.chart == ChartKind::Sphere, "chart: double transport is defined on the round sphere");
      break;
  }
  return errors;
}

namespace {

struct Parser {
  ExperimentConfig& config;
  std::vector<std::string>& errors;
  std::string_view source;

  std::string where(const toml::node& node) const {
    return std::string(source) + ":" + std::to_string(node.source().begin.line) + ": ";
  }
  void fail(const toml::node& node, const std::string& key, const std::string& message) {
    errors.push_back(where(node) + key + ": " + message);
  }

  bool integer(const toml::node& node, const std::string& key, Index& out) {
    if (auto v = node.as_integer()) {
      out = static_cast<Index>(v->get());
      return true;
    }
    fail(node, key, "expected an integer");
    return false;
  }
  bool real(const toml::node& node, const std::string& key, double& out) {
    if (auto v = node.as_floating_point()) {
      out = v->get();
      return true;
    }
    if (auto v = node.as_integer()) {
      out = static_cast<double>(v->get());
      return true;
    }
    fail(node, key, "expected a number");
    return false;
  }
  bool text(const toml::node& node, const std::string& key, std::string& out) {
    if (auto v = node.as_string()) {
      out = v->get();
      return true;
    }
    fail(node, key, "expected a string");
    return false;
  }
  bool integers(const toml::node& node, const std::string& key, std::vector<Index>& out) {
    const auto* arr = node.as_array();
    if (arr == nullptr) {
      fail(node, key, "expected an array of integers");
      return false;
    }
    std::vector<Index> values;
    for (const toml::node& item : *arr) {
      Index v = 0;
      if (!integer(item, key, v)) return false;
      values.push_back(v);
    }
    out = std::move(values);
    return true;
  }
  bool reals(const toml::node& node, const std::string& key, std::vector<double>& out) {
    const auto* arr = node.as_array();
    if (arr == nullptr) {
      fail(node, key, "expected an array of numbers");
      return false;
    }
    std::vector<double> values;
    for (const toml::node& item : *arr) {
      double v = 0;
      if (!real(item, key, v)) return false;
      values.push_back(v);
    }
    out = std::move(values);
    return true;
  }
  template <typename F>
  void named(const toml::node& node, const std::string& key, F parse) {
    std::string value;
    if (!text(node, key, value)) return;
    try {
      parse(value);
    } catch (const Error& e) {
      fail(node, key, e.what());
    }
  }
};

}  // namespace

ConfigValidation validate_config_text(std::string_view text, std::optional<Preset> preset, std::string_view source) {
  ConfigValidation out;
  toml::table table;
  try {
    table = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    out.errors.push_back(std::string(source) + ":" + std::to_string(e.source().begin.line) + ": " +
                         std::string(e.description()));
    return out;
  }

  const toml::node* experiment_node = table.get("experiment");
  if (experiment_node == nullptr) {
    out.errors.push_back(std::string(source) + ": experiment: required key is missing");
    return out;
  }
  ExperimentKind kind{};
  {
    const auto* s = experiment_node->as_string();
    if (s == nullptr) {
      out.errors.push_back(std::string(source) + ":" + std::to_string(experiment_node->source().begin.line) +
                           ": experiment: expected a string");
      return out;
    }
    try {
      kind = parse_experiment_kind(s->get());
    } catch (const Error& e) {
      out.errors.push_back(std::string(source) + ":" + std::to_string(experiment_node->source().begin.line) +
                           ": experiment: " + e.what());
      return out;
    }
  }

  ExperimentConfig config = preset_config(kind, preset.value_or(Preset::Desk));
  Parser p{config, out.errors, source};
  bool epsilon_given = false;

  using Handler = std::function<void(const toml::node&, const std::string&)>;
  const std::map<std::string, Handler> handlers{
      {"experiment", [](const toml::node&, const std::string&) {}},
      {"n", [&](const toml::node& v, const std::string& k) { p.integer(v, k, config.n); }},
      {"m_grid", [&](const toml::node& v, const std::string& k) { p.integers(v, k, config.m_grid); }},
      {"beta_grid", [&](const toml::node& v, const std::string& k) { p.reals(v, k, config.beta_grid); }},
      {"alpha_grid", [&](const toml::node& v, const std::string& k) { p.reals(v, k, config.alpha_grid); }},
      {"epsilon", [&](const toml::node& v, const std::string& k) { epsilon_given = p.real(v, k, config.epsilon); }},
      {"t", [&](const toml::node& v, const std::string& k) { p.real(v, k, config.t); }},
      {"r", [&](const toml::node& v, const std::string& k) { p.integer(v, k, config.r); }},
      {"trials", [&](const toml::node& v, const std::string& k) { p.integer(v, k, config.trials); }},
      {"seed",
       [&](const toml::node& v, const std::string& k) {
         Index seed = 0;
         if (p.integer(v, k, seed)) {
           if (seed < 0) p.fail(v, k, "must be non-negative");
           config.seed = static_cast<std::uint64_t>(seed);
         }
       }},
      {"chart", [&](const toml::node& v, const std::string& k) {
         p.named(v, k, [&](const std::string& s) { config.chart = parse_chart_kind(s); });
       }},
      {"density", [&](const toml::node& v, const std::string& k) {
         p.named(v, k, [&](const std::string& s) { config.density = parse_density_kind(s); });
       }},
      {"sigma",
       [&](const toml::node& v, const std::string& k) {
         std::vector<double> s;
         if (!p.reals(v, k, s)) return;
         if (s.size() != 3) {
           p.fail(v, k, "expected three diagonal entries");
           return;
         }
         config.sigma = {s[0], s[1], s[2]};
       }},
      {"frames", [&](const toml::node& v, const std::string& k) {
         p.named(v, k, [&](const std::string& s) { config.frames = parse_frame_source(s); });
       }},
      {"output_dir", [&](const toml::node& v, const std::string& k) { p.text(v, k, config.output_dir); }},
      {"truncation", [&](const toml::node& v, const std::string& k) { p.real(v, k, config.truncation); }},
      {"pca_radius", [&](const toml::node& v, const std::string& k) { p.real(v, k, config.pca_radius); }},
      {"reference_alpha", [&](const toml::node& v, const std::string& k) { p.real(v, k, config.reference_alpha); }},
      {"eigenvectors", [&](const toml::node& v, const std::string& k) { p.integers(v, k, config.eigenvectors); }},
      {"pairing", [&](const toml::node& v, const std::string& k) {
         p.named(v, k, [&](const std::string& s) { config.pairing = parse_pairing_mode(s); });
       }},
      {"dense_threshold",
       [&](const toml::node& v, const std::string& k) { p.integer(v, k, config.dense_threshold); }},
      {"solver_tolerance", [&](const toml::node& v, const std::string& k) { p.real(v, k, config.solver_tolerance); }},
      {"n_grid", [&](const toml::node& v, const std::string& k) { p.integers(v, k, config.n_grid); }},
      {"timing_fixed_m", [&](const toml::node& v, const std::string& k) { p.integer(v, k, config.timing_fixed_m); }},
      {"epsilon_grid", [&](const toml::node& v, const std::string& k) { p.reals(v, k, config.epsilon_grid); }},
      {"steps_per_unit", [&](const toml::node& v, const std::string& k) { p.real(v, k, config.steps_per_unit); }},
      {"landmark_region", [&](const toml::node& v, const std::string& k) { p.text(v, k, config.landmark_region); }},
  };

  for (const auto& [key, node] : table) {
    const std::string name(key.str());
    const auto handler = handlers.find(name);
    if (handler == handlers.end()) {
      out.errors.push_back(std::string(source) + ":" + std::to_string(key.source().begin.line) + ": unknown key '" +
                           name + "'");
      continue;
    }
    handler->second(node, name);
  }

  // A changed chart or n without an explicit bandwidth moves the default.
  const ExperimentConfig base = preset_config(kind, preset.value_or(Preset::Desk));
  if (!epsilon_given && (config.chart != base.chart || config.n != base.n) &&
      kind != ExperimentKind::EffectiveTransport && kind != ExperimentKind::DoubleTransportScaling) {
    config.epsilon = default_epsilon(config.chart, config.n);
    out.warnings.push_back("epsilon not given; using " + format_double(config.epsilon) + " scaled to n = " +
                           std::to_string(config.n));
  }

  for (std::string& e : check_config(config)) out.errors.push_back(std::string(source) + ": " + e);
  if (out.errors.empty()) out.config = config;
  return out;
}

ConfigValidation validate_config(const std::filesystem::path& path, std::optional<Preset> preset) {
  std::ifstream in(path);
  if (!in) {
    ConfigValidation out;
    out.errors.push_back(path.string() + ": cannot open file");
    return out;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return validate_config_text(buffer.str(), preset, path.string());
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Preset> preset) {
  ConfigValidation v = validate_config(path, preset);
  if (!v.config) {
    std::string message = "invalid configuration";
    for (const std::string& e : v.errors) message += "\n  " + e;
    throw Error(ErrorKind::ConfigError, message);
  }
  return *v.config;
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto integer = [](Index v) { return std::to_string(v); };
  out << "experiment = " << quoted(to_string(c.experiment)) << '\n'
      << "n = " << c.n << '\n'
      << "m_grid = " << format_array(c.m_grid, integer) << '\n'
      << "beta_grid = " << format_array(c.beta_grid, format_double) << '\n'
      << "alpha_grid = " << format_array(c.alpha_grid, format_double) << '\n'
      << "epsilon = " << format_double(c.epsilon) << '\n'
      << "t = " << format_double(c.t) << '\n'
      << "r = " << c.r << '\n'
      << "trials = " << c.trials << '\n'
      << "seed = " << c.seed << '\n'
      << "chart = " << quoted(to_string(c.chart)) << '\n'
      << "density = " << quoted(to_string(c.density)) << '\n'
      << "sigma = " << format_array(std::vector<double>(c.sigma.begin(), c.sigma.end()), format_double) << '\n'
      << "frames = " << quoted(to_string(c.frames)) << '\n'
      << "output_dir = " << quoted(c.output_dir) << '\n'
      << "truncation = " << format_double(c.truncation) << '\n'
      << "pca_radius = " << format_double(c.pca_radius) << '\n'
      << "reference_alpha = " << format_double(c.reference_alpha) << '\n'
      << "eigenvectors = " << format_array(c.eigenvectors, integer) << '\n'
      << "pairing = " << quoted(to_string(c.pairing)) << '\n'
      << "dense_threshold = " << c.dense_threshold << '\n'
      << "solver_tolerance = " << format_double(c.solver_tolerance) << '\n'
      << "n_grid = " << format_array(c.n_grid, integer) << '\n'
      << "timing_fixed_m = " << c.timing_fixed_m << '\n'
      << "epsilon_grid = " << format_array(c.epsilon_grid, format_double) << '\n'
      << "steps_per_unit = " << format_double(c.steps_per_unit) << '\n'
      << "landmark_region = " << quoted(c.landmark_region) << '\n';
  return out.str();
}

}  // namespace lavdm
