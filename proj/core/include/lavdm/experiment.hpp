#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lavdm/config.hpp"
#include "lavdm/types.hpp"

namespace lavdm {

/// One row of the metrics table.
struct MetricRow {
  std::string exp;
  Index trial = 0;
  Index l = 0;
  Index m = 0;
  double beta = 0.0;
  double alpha = 0.0;
  double ratio = 0.0;
  double cosine = 0.0;
  double aligned_l2 = 0.0;
  double median_i2 = 0.0;
  double mad_i2 = 0.0;
  double median_ia = 0.0;
  double mad_ia = 0.0;
  double median_im = 0.0;
  double mad_im = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "exp,trial,l,m,beta,alpha,ratio,cosine,alignedL2,median_I2,mad_I2,median_Ia,mad_Ia,median_Im,mad_Im";

std::string format_metric_row(const MetricRow& row);

/// Per-trial diagnostics of a sweep.
struct TrialDiagnostics {
  Index trial = 0;
  std::uint64_t data_seed = 0;
  double vdm_top_eigenvalue = 0.0;
  /// Largest |eigenvalue| seen in VDM and landmark spectra.
  double spectral_radius = 0.0;
  double vdm_residual = 0.0;
  /// Whether index and window pairings agree for the reported eigenvectors,
  /// per (m, beta, alpha) grid point in grid order.
  std::vector<bool> pairings_agree;
  double min_neighbours = 0.0;
  double seconds_data = 0.0;
  double seconds_vdm = 0.0;
  double seconds_landmark = 0.0;
};

/// Runs one trial of a landmark, beta, alpha or eigen-recovery sweep. The VDM
/// reference is computed once and reused across the grid; both methods share
/// the sample, frames and connections.
std::vector<MetricRow> run_sweep_trial(const ExperimentConfig& config, Index trial, TrialDiagnostics* diagnostics = nullptr);

struct TransportRow {
  std::string exp;
  Index trial = 0;
  Index m = 0;
  double epsilon = 0.0;
  double error = 0.0;
  /// Spectral-norm distance of the effective transport to O(q).
  double orthogonality_gap = 0.0;
};

inline constexpr const char* kTransportHeader = "exp,trial,m,epsilon,error,orthogonality_gap";

std::string format_transport_row(const TransportRow& row);

/// Landmark-transport error of one trial of the two-point experiment on the
/// distorted sphere: the transport from s1 to s2 through m landmarks against
/// the alignment of the true tangent frames at s1 and s2.
TransportRow effective_transport_trial(const ExperimentConfig& config, Index m, Index trial);

struct TimingRow {
  std::string sweep;  // "m" or "n"
  Index n = 0;
  Index m = 0;
  double assembly = 0.0;
  double degrees = 0.0;
  double svd = 0.0;
  double total = 0.0;
};

inline constexpr const char* kTimingHeader = "exp,sweep,n,m,assembly_s,degrees_s,svd_s,total_s";

struct TimingStudyResult {
  std::vector<TimingRow> rows;
  double svd_slope_m = 0.0;
  double total_slope_m = 0.0;
  double assembly_slope_n = 0.0;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Wall time per pipeline stage over the m grid at fixed n, then assembly
/// time over the n grid at fixed m.
TimingStudyResult timing_study(const ExperimentConfig& config);

struct RunOptions {
  Index jobs = 1;
  bool write_files = true;
  /// Output directory name below <output_dir>/<exp>/; UTC time when empty.
  std::string timestamp;
  std::function<void(const std::string&)> log;
};

struct ExperimentResult {
  std::filesystem::path directory;
  std::vector<MetricRow> rows;
  std::vector<TransportRow> transport_rows;
  std::vector<TrialDiagnostics> diagnostics;
  std::optional<TimingStudyResult> timing;
  std::vector<std::string> warnings;
  std::string manifest_json;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace lavdm
