#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lavdm/connection.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/manifold.hpp"
#include "lavdm/metrics.hpp"
#include "lavdm/types.hpp"

namespace lavdm {

enum class ExperimentKind : std::uint8_t {
  LandmarkSweep,
  BetaSweep,
  AlphaSweep,
  EigenRecovery,
  EffectiveTransport,
  TimingScaling,
  DoubleTransportScaling,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

enum class Preset : std::uint8_t { Desk, Paper };

std::string_view to_string(Preset preset);
Preset parse_preset(std::string_view name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::LandmarkSweep;
  Index n = 1000;
  std::vector<Index> m_grid{64, 128, 256, 512};
  std::vector<double> beta_grid{0.5};
  std::vector<double> alpha_grid{0.0};
  /// Kernel bandwidth. When the file omits it, the chart's reference value
  /// scaled to n is used.
  double epsilon = 0.2;
  double t = 1.0;
  Index r = 6;
  Index trials = 10;
  std::uint64_t seed = 1;
  ChartKind chart = ChartKind::KleinBottle;
  DensityKind density = DensityKind::AreaUniform;
  std::array<double, 3> sigma{1.0, 1.0, 1.0};
  FrameSource frames = FrameSource::LocalPCA;
  std::string output_dir = "results";

  double truncation = kNoTruncation;
  /// Local PCA radius; 0 selects 1.5 sqrt(epsilon).
  double pca_radius = 0.0;
  /// alpha of the VDM reference.
  double reference_alpha = 0.0;
  /// 1-based eigenvector indices written to the results table; empty = 1..r.
  std::vector<Index> eigenvectors;
  PairingMode pairing = PairingMode::Index;
  /// Problems up to this size use dense eigen/SVD solves.
  Index dense_threshold = 2000;
  double solver_tolerance = 1e-10;

  /// Timing study: data sizes for the assembly sweep at fixed m.
  std::vector<Index> n_grid;
  Index timing_fixed_m = 100;
  /// Double transport: bandwidths and integrator resolution.
  std::vector<double> epsilon_grid{0.2, 0.1, 0.05, 0.025};
  double steps_per_unit = 1e4;
  /// Effective transport: landmarks from the union of the two balls
  /// ("union") or m from each ("each").
  std::string landmark_region = "union";

  double resolved_pca_radius() const;
  std::vector<Index> reported_eigenvectors() const;
  SamplingDensity sampling_density() const;
  SurfaceChart surface_chart() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults of an experiment at the given scale.
ExperimentConfig preset_config(ExperimentKind kind, Preset preset = Preset::Desk);

/// Bandwidth used when the file gives none: the chart's reference value
/// scaled by (n_ref / n)^(2/d).
double default_epsilon(ChartKind chart, Index n);

struct ConfigValidation {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

/// Parses TOML text on top of the experiment's preset. Unknown keys, type
/// errors and range errors are reported with their line numbers.
ConfigValidation validate_config_text(std::string_view text, std::optional<Preset> preset = std::nullopt,
                                      std::string_view source = "<config>");
ConfigValidation validate_config(const std::filesystem::path& path, std::optional<Preset> preset = std::nullopt);

/// As validate_config, throwing ConfigError with every message on failure.
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Preset> preset = std::nullopt);

/// Range checks on an in-memory config; returns one message per problem.
std::vector<std::string> check_config(const ExperimentConfig& config);

/// TOML rendering of every field; parsing it back yields an equal config.
std::string echo_config(const ExperimentConfig& config);

}  // namespace lavdm
