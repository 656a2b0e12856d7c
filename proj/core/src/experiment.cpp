#include "lavdm/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <Eigen/Core>
#include <json.hpp>
#include <toml.hpp>

#include "lavdm/connection.hpp"
#include "lavdm/errors.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/landmark.hpp"
#include "lavdm/metrics.hpp"
#include "lavdm/random.hpp"
#include "lavdm/transport.hpp"
#include "lavdm/vdm.hpp"

namespace lavdm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

EigenSolverOptions solver_options(const ExperimentConfig& config, Index trial) {
  EigenSolverOptions o;
  o.dense_threshold = config.dense_threshold;
  o.tolerance = config.solver_tolerance;
  o.seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial), 7);
  return o;
}

FrameField frames_for(const ExperimentConfig& config, const PointCloud& cloud) {
  if (config.frames == FrameSource::GroundTruth) return ground_truth_frames(cloud, FrameSource::GroundTruth);
  return local_pca_frames(cloud, config.resolved_pca_radius(), 2);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buffer[20];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(v));
  return buffer;
}

std::string utc_stamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y%m%dT%H%M%SZ", &tm);
  return buffer;
}

// Runs body(0..count-1) on up to `jobs` threads; completion callbacks are
// serialised. The first exception stops new work and is rethrown.
template <typename Body, typename Done>
void run_parallel(Index count, Index jobs, Body body, Done done) {
  std::atomic<Index> next{0};
  std::mutex mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      {
        std::lock_guard lock(mutex);
        if (error) return;
      }
      const Index i = next++;
      if (i >= count) return;
      try {
        auto result = body(i);
        std::lock_guard lock(mutex);
        done(i, std::move(result));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  const Index threads = std::max<Index>(1, std::min(jobs, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (Index t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string format_metric_row(const MetricRow& r) {
  return r.exp + ',' + std::to_string(r.trial) + ',' + std::to_string(r.l) + ',' + std::to_string(r.m) + ',' +
         num(r.beta) + ',' + num(r.alpha) + ',' + num(r.ratio) + ',' + num(r.cosine) + ',' + num(r.aligned_l2) +
         ',' + num(r.median_i2) + ',' + num(r.mad_i2) + ',' + num(r.median_ia) + ',' + num(r.mad_ia) + ',' +
         num(r.median_im) + ',' + num(r.mad_im);
}

std::string format_transport_row(const TransportRow& r) {
  return r.exp + ',' + std::to_string(r.trial) + ',' + std::to_string(r.m) + ',' + num(r.epsilon) + ',' +
         num(r.error) + ',' + num(r.orthogonality_gap);
}

std::vector<MetricRow> run_sweep_trial(const ExperimentConfig& config, Index trial, TrialDiagnostics* diagnostics) {
  TrialDiagnostics diag;
  diag.trial = trial;
  const std::string exp(to_string(config.experiment));
  const SurfaceChart chart = config.surface_chart();

  auto start = Clock::now();
  diag.data_seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial), 0);
  const PointCloud x = sample_surface(chart, config.n, config.sampling_density(), diag.data_seed);
  const FrameField frames = frames_for(config, x);
  const AffinityMatrix w = gaussian_affinity(x, x, config.epsilon, config.truncation);
  const BlockSparseMatrix omega = connections_on_pattern(w.entries, frames, frames);
  {
    const double near = std::exp(-1.0);
    double fewest = static_cast<double>(config.n);
    for (Index i = 0; i < w.entries.outerSize(); ++i) {
      Index count = 0;
      for (SparseRows::InnerIterator it(w.entries, i); it; ++it) count += (it.col() != i && it.value() >= near) ? 1 : 0;
      fewest = std::min(fewest, static_cast<double>(count));
    }
    diag.min_neighbours = fewest;
  }
  diag.seconds_data = seconds_since(start);

  start = Clock::now();
  const EigenSolverOptions options = solver_options(config, trial);
  const AffinityMatrix w_ref = alpha_normalize(w, row_degrees(w), config.reference_alpha);
  const VdmSystem system = assemble_vdm(w_ref, omega);
  const SpectralResult reference = vdm_spectrum(system, config.r, options);
  diag.vdm_top_eigenvalue = reference.values(0);
  diag.spectral_radius = reference.values.cwiseAbs().maxCoeff();
  diag.vdm_residual = markov_residual(system, reference);
  diag.seconds_vdm = seconds_since(start);

  start = Clock::now();
  const std::vector<Index> reported = config.reported_eigenvectors();
  std::vector<MetricRow> rows;
  for (std::size_t gi = 0; gi < config.m_grid.size(); ++gi) {
    const Index m = config.m_grid[gi];
    Rng rng = make_rng(config.seed, static_cast<std::uint64_t>(trial), 1 + gi);
    const std::vector<Index> picked = sample_without_replacement(config.n, m, rng);
    const PointCloud z = x.subset(picked);
    const LandmarkAssembly assembly = assemble_landmark(x, z, config.epsilon, config.truncation, frames,
                                                        frames.subset(picked));
    for (double beta : config.beta_grid) {
      for (double alpha : config.alpha_grid) {
        const LandmarkPipelineState state = make_pipeline_state(assembly, beta, alpha);
        const SpectralResult candidate = landmark_svd(state, config.r, options).as_spectrum();
        diag.spectral_radius = std::max(diag.spectral_radius, candidate.values.cwiseAbs().maxCoeff());

        const Pairing by_index = match_eigenvectors(reference, candidate, config.r, PairingMode::Index);
        const Pairing by_window = match_eigenvectors(reference, candidate, config.r, PairingMode::Window);
        bool agree = true;
        for (Index l : reported) {
          agree = agree && by_index.candidate_for[static_cast<std::size_t>(l - 1)] ==
                               by_window.candidate_for[static_cast<std::size_t>(l - 1)];
        }
        diag.pairings_agree.push_back(agree);
        const Pairing& pairing = config.pairing == PairingMode::Index ? by_index : by_window;

        for (Index l : reported) {
          const Index rc = l - 1;
          const Index cc = pairing.candidate_for[static_cast<std::size_t>(rc)];
          const EigenComparison cmp = compare_eigenpair(candidate, cc, reference, rc);
          const PointwiseFields fields = pointwise_fields(candidate, cc, reference, rc);
          MetricRow row;
          row.exp = exp;
          row.trial = trial;
          row.l = l;
          row.m = m;
          row.beta = beta;
          row.alpha = alpha;
          row.ratio = cmp.ratio;
          row.cosine = cmp.cosine;
          row.aligned_l2 = cmp.aligned_l2;
          std::tie(row.median_i2, row.mad_i2) = median_mad(fields.i2);
          std::tie(row.median_ia, row.mad_ia) = median_mad(fields.ia);
          std::tie(row.median_im, row.mad_im) = median_mad(fields.im);
          rows.push_back(row);
        }
      }
    }
  }
  diag.seconds_landmark = seconds_since(start);
  if (diagnostics != nullptr) *diagnostics = diag;
  return rows;
}

TransportRow effective_transport_trial(const ExperimentConfig& config, Index m, Index trial) {
  constexpr double kPi = 3.14159265358979323846;
  const SurfaceChart chart = config.surface_chart();
  if (!chart.sphere_like()) throw Error(ErrorKind::InvalidArgument, "effective transport needs a sphere-like chart");
  const double eps = config.epsilon;
  const double radius = std::sqrt(eps);
  const Eigen::Vector2d p1(kPi / 2.0, kPi + 0.15);
  const Eigen::Vector2d p2(kPi / 2.0, kPi - 0.15);
  const Vector s1 = chart.map(p1(0), p1(1));
  const Vector s2 = chart.map(p2(0), p2(1));

  // Landmarks: area-uniform surface points inside the sqrt(eps) balls.
  const bool each = config.landmark_region == "each";
  const Index wanted = each ? 2 * m : m;
  std::vector<Index> quota{each ? m : wanted, each ? m : 0};
  RowMatrix points(wanted, chart.ambient_dim());
  RowMatrix params(wanted, 2);
  Index found = 0;
  for (std::uint64_t batch = 0; found < wanted; ++batch) {
    if (batch > 1000) throw Error(ErrorKind::SolverFailure, "landmark rejection sampling did not fill the balls");
    const PointCloud draws = sample_surface(chart, 4 * wanted, SamplingDensity::area_uniform(),
                                            derive_seed(config.seed, static_cast<std::uint64_t>(trial),
                                                        (static_cast<std::uint64_t>(m) << 20) + batch));
    for (Index i = 0; i < draws.size() && found < wanted; ++i) {
      const bool near1 = (draws.points.row(i).transpose() - s1).norm() <= radius;
      const bool near2 = (draws.points.row(i).transpose() - s2).norm() <= radius;
      bool take = false;
      if (!each) {
        take = near1 || near2;
      } else if (near1 && quota[0] > 0) {
        --quota[0];
        take = true;
      } else if (near2 && quota[1] > 0) {
        --quota[1];
        take = true;
      }
      if (take) {
        points.row(found) = draws.points.row(i);
        params.row(found) = draws.params->row(i);
        ++found;
      }
    }
  }

  PointCloud cloud;
  cloud.points.resize(wanted + 2, chart.ambient_dim());
  cloud.params = RowMatrix(wanted + 2, 2);
  cloud.chart = chart;
  cloud.points.row(0) = s1.transpose();
  cloud.points.row(1) = s2.transpose();
  cloud.points.bottomRows(wanted) = points;
  cloud.params->row(0) = p1.transpose();
  cloud.params->row(1) = p2.transpose();
  cloud.params->bottomRows(wanted) = params;

  const FrameField frames = frames_for(config, cloud);
  std::vector<Index> landmark_rows(static_cast<std::size_t>(wanted));
  for (Index k = 0; k < wanted; ++k) landmark_rows[static_cast<std::size_t>(k)] = k + 2;
  const PointCloud z = cloud.subset(landmark_rows);
  const FrameField frames_z = frames.subset(landmark_rows);

  const double beta = config.beta_grid.front();
  Vector d_z;
  if (beta != 0.0) {
    const AffinityMatrix w = gaussian_affinity(cloud.subset({0, 1}), z, eps, config.truncation);
    d_z = w.entries.transpose() * Vector(w.entries * Vector::Ones(wanted));
  }
  // Maps frame coordinates at s1 to frame coordinates at s2.
  const Matrix t = effective_transport(s2, s1, z, eps, beta, config.truncation, frames.frames[1], frames.frames[0],
                                       frames_z, d_z);

  const Matrix g1 = ground_truth_frame(chart, p1(0), p1(1));
  const Matrix g2 = ground_truth_frame(chart, p2(0), p2(1));
  Vector u(3);
  u << -0.06, 0.59, -0.80;
  const Vector tangent = (g1 * (g1.transpose() * u)).normalized();
  const Vector estimate = frames.frames[1] * (t * (frames.frames[0].transpose() * tangent));
  const Vector reference = g2 * (align_connection(g2, g1) * (g1.transpose() * tangent));

  TransportRow row;
  row.exp = std::string(to_string(config.experiment));
  row.trial = trial;
  row.m = m;
  row.epsilon = eps;
  row.error = (estimate - reference).norm();
  row.orthogonality_gap = distance_to_orthogonal(t);
  return row;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "slope needs at least two paired samples");
  }
  const auto k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "log-log slope needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

namespace {

// Minimum wall time of `stage` over a few repetitions (at least one, more
// while the cumulative time stays short).
template <typename F>
double min_time(F stage) {
  double best = 0.0;
  double total = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const auto start = Clock::now();
    stage();
    const double s = seconds_since(start);
    best = rep == 0 ? s : std::min(best, s);
    total += s;
    if (total > 0.3) break;
  }
  return best;
}

TimingRow time_pipeline(const ExperimentConfig& config, const PointCloud& x, const FrameField& frames, Index m,
                        std::uint64_t stream, const char* sweep) {
  Rng rng = make_rng(config.seed, 1000, stream);
  const std::vector<Index> picked = sample_without_replacement(x.size(), m, rng);
  const PointCloud z = x.subset(picked);
  const FrameField frames_z = frames.subset(picked);

  TimingRow row;
  row.sweep = sweep;
  row.n = x.size();
  row.m = m;
  LandmarkAssembly assembly;
  row.assembly = min_time([&] {
    const AffinityMatrix w = gaussian_affinity(x, z, config.epsilon, config.truncation);
    assembly = assemble_landmark(w, connections_on_pattern(w.entries, frames, frames_z));
  });
  const double beta = config.beta_grid.front();
  const double alpha = config.alpha_grid.front();
  LandmarkDegrees degrees;
  row.degrees = min_time([&] { degrees = landmark_degrees(assembly.W, beta, alpha); });
  const LandmarkPipelineState state = make_pipeline_state(std::move(assembly), beta, alpha);
  EigenSolverOptions options = solver_options(config, 0);
  const Index r = std::min<Index>(config.r, m * frames.fiber_dim());
  row.svd = min_time([&] { (void)landmark_svd(state, r, options); });
  row.total = row.assembly + row.degrees + row.svd;
  return row;
}

}  // namespace

TimingStudyResult timing_study(const ExperimentConfig& config) {
  const SurfaceChart chart = config.surface_chart();
  TimingStudyResult result;
  {
    const PointCloud x = sample_surface(chart, config.n, config.sampling_density(), derive_seed(config.seed, 0, 0));
    const FrameField frames = frames_for(config, x);
    std::vector<double> ms, svd, total;
    for (std::size_t gi = 0; gi < config.m_grid.size(); ++gi) {
      const TimingRow row = time_pipeline(config, x, frames, config.m_grid[gi], gi, "m");
      ms.push_back(static_cast<double>(row.m));
      svd.push_back(row.svd);
      total.push_back(row.total);
      result.rows.push_back(row);
    }
    if (ms.size() >= 2) {
      result.svd_slope_m = loglog_slope(ms, svd);
      result.total_slope_m = loglog_slope(ms, total);
    }
  }
  std::vector<double> ns, assembly;
  for (std::size_t gi = 0; gi < config.n_grid.size(); ++gi) {
    const Index n = config.n_grid[gi];
    const PointCloud x = sample_surface(chart, n, config.sampling_density(), derive_seed(config.seed, 1, gi));
    const FrameField frames = frames_for(config, x);
    const TimingRow row = time_pipeline(config, x, frames, config.timing_fixed_m, 100 + gi, "n");
    ns.push_back(static_cast<double>(n));
    assembly.push_back(row.assembly);
    result.rows.push_back(row);
  }
  if (ns.size() >= 2) result.assembly_slope_n = loglog_slope(ns, assembly);
  return result;
}

namespace {

nlohmann::json library_versions() {
  return {{"lavdm", "0.1.0"},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"tomlplusplus", std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." +
                               std::to_string(TOML_LIB_PATCH)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

std::filesystem::path make_run_directory(const ExperimentConfig& config, const RunOptions& options) {
  const std::filesystem::path base =
      std::filesystem::path(config.output_dir) / std::string(to_string(config.experiment));
  const std::string stamp = options.timestamp.empty() ? utc_stamp() : options.timestamp;
  std::filesystem::path dir = base / stamp;
  for (int suffix = 1; std::filesystem::exists(dir); ++suffix) dir = base / (stamp + "-" + std::to_string(suffix));
  std::filesystem::create_directories(dir);
  return dir;
}

class RowWriter {
 public:
  RowWriter(const std::filesystem::path& path, const char* header, bool enabled) : enabled_(enabled) {
    if (!enabled_) return;
    out_.open(path);
    if (!out_) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    out_ << header << '\n';
    out_.flush();
  }
  void write(const std::vector<std::string>& lines) {
    if (!enabled_) return;
    for (const auto& l : lines) out_ << l << '\n';
    out_.flush();
  }

 private:
  bool enabled_;
  std::ofstream out_;
};

// Buffers per-item output and releases it in item order.
template <typename T>
class OrderedSink {
 public:
  explicit OrderedSink(std::function<void(Index, T&)> emit) : emit_(std::move(emit)) {}
  void push(Index i, T value) {
    pending_.emplace(i, std::move(value));
    while (!pending_.empty() && pending_.begin()->first == next_) {
      emit_(next_, pending_.begin()->second);
      pending_.erase(pending_.begin());
      ++next_;
    }
  }

 private:
  std::function<void(Index, T&)> emit_;
  std::map<Index, T> pending_;
  Index next_ = 0;
};

void log_line(const RunOptions& options, const std::string& text) {
  if (options.log) options.log(text);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const std::vector<std::string> problems = check_config(config);
  if (!problems.empty()) {
    std::string message = "invalid configuration";
    for (const auto& p : problems) message += "\n  " + p;
    throw Error(ErrorKind::ConfigError, message);
  }
  const auto run_start = Clock::now();
  ExperimentResult result;
  const std::string echo = echo_config(config);
  const std::string exp(to_string(config.experiment));
  if (options.write_files) {
    result.directory = make_run_directory(config, options);
    std::ofstream(result.directory / "config.echo.toml") << echo;
  }
  const std::filesystem::path csv = result.directory / "results.csv";

  nlohmann::json manifest;
  manifest["experiment"] = exp;
  manifest["config_hash"] = hex(fnv1a(echo));
  manifest["seed"] = config.seed;
  manifest["libraries"] = library_versions();
  manifest["jobs"] = options.jobs;
  std::exception_ptr failure;

  try {
    switch (config.experiment) {
      case ExperimentKind::LandmarkSweep:
      case ExperimentKind::BetaSweep:
      case ExperimentKind::AlphaSweep:
      case ExperimentKind::EigenRecovery: {
        RowWriter writer(csv, kMetricsHeader, options.write_files);
        using Item = std::pair<std::vector<MetricRow>, TrialDiagnostics>;
        OrderedSink<Item> sink([&](Index, Item& item) {
          std::vector<std::string> lines;
          for (const MetricRow& row : item.first) lines.push_back(format_metric_row(row));
          writer.write(lines);
          result.rows.insert(result.rows.end(), item.first.begin(), item.first.end());
          result.diagnostics.push_back(item.second);
        });
        run_parallel(
            config.trials, options.jobs,
            [&](Index trial) {
              Item item;
              item.first = run_sweep_trial(config, trial, &item.second);
              return item;
            },
            [&](Index trial, Item item) {
              log_line(options, exp + ": trial " + std::to_string(trial + 1) + "/" + std::to_string(config.trials) +
                                    " done (vdm " + num(item.second.seconds_vdm) + " s, landmark " +
                                    num(item.second.seconds_landmark) + " s)");
              sink.push(trial, std::move(item));
            });
        break;
      }
      case ExperimentKind::EffectiveTransport: {
        RowWriter writer(csv, kTransportHeader, options.write_files);
        const auto grid = static_cast<Index>(config.m_grid.size());
        OrderedSink<std::vector<TransportRow>> sink([&](Index, std::vector<TransportRow>& rows) {
          std::vector<std::string> lines;
          for (const auto& row : rows) lines.push_back(format_transport_row(row));
          writer.write(lines);
          result.transport_rows.insert(result.transport_rows.end(), rows.begin(), rows.end());
        });
        run_parallel(
            config.trials, options.jobs,
            [&](Index trial) {
              std::vector<TransportRow> rows;
              for (Index gi = 0; gi < grid; ++gi) {
                rows.push_back(effective_transport_trial(config, config.m_grid[static_cast<std::size_t>(gi)], trial));
              }
              return rows;
            },
            [&](Index trial, std::vector<TransportRow> rows) { sink.push(trial, std::move(rows)); });
        break;
      }
      case ExperimentKind::DoubleTransportScaling: {
        RowWriter writer(csv, kTransportHeader, options.write_files);
        const auto grid = static_cast<Index>(config.epsilon_grid.size());
        OrderedSink<DoubleTransportResult> sink([&](Index, DoubleTransportResult& r) {
          std::vector<std::string> lines;
          for (std::size_t t = 0; t < r.errors.size(); ++t) {
            TransportRow row{exp, static_cast<Index>(t), 0, r.epsilon, r.errors[t], 0.0};
            lines.push_back(format_transport_row(row));
            result.transport_rows.push_back(row);
          }
          writer.write(lines);
        });
        run_parallel(
            grid, options.jobs,
            [&](Index gi) {
              return double_transport_error(config.epsilon_grid[static_cast<std::size_t>(gi)], config.trials,
                                            derive_seed(config.seed, static_cast<std::uint64_t>(gi), 0),
                                            config.steps_per_unit);
            },
            [&](Index gi, DoubleTransportResult r) { sink.push(gi, std::move(r)); });
        break;
      }
      case ExperimentKind::TimingScaling: {
        RowWriter writer(csv, kTimingHeader, options.write_files);
        TimingStudyResult timing = timing_study(config);
        std::vector<std::string> lines;
        for (const TimingRow& r : timing.rows) {
          lines.push_back(exp + ',' + r.sweep + ',' + std::to_string(r.n) + ',' + std::to_string(r.m) + ',' +
                          num(r.assembly) + ',' + num(r.degrees) + ',' + num(r.svd) + ',' + num(r.total));
        }
        writer.write(lines);
        result.timing = std::move(timing);
        break;
      }
    }
  } catch (...) {
    failure = std::current_exception();
  }

  // Summaries and diagnostics.
  if (!result.diagnostics.empty()) {
    nlohmann::json trials = nlohmann::json::array();
    double radius = 0.0;
    double fewest = 1e300;
    for (const TrialDiagnostics& d : result.diagnostics) {
      radius = std::max(radius, d.spectral_radius);
      fewest = std::min(fewest, d.min_neighbours);
      nlohmann::json pairs = nlohmann::json::array();
      for (bool b : d.pairings_agree) pairs.push_back(b);
      trials.push_back({{"trial", d.trial},
                        {"data_seed", d.data_seed},
                        {"vdm_top_eigenvalue", d.vdm_top_eigenvalue},
                        {"spectral_radius", d.spectral_radius},
                        {"vdm_residual", d.vdm_residual},
                        {"index_window_pairings_agree", pairs},
                        {"min_neighbours", d.min_neighbours},
                        {"seconds", {{"data", d.seconds_data}, {"vdm", d.seconds_vdm}, {"landmark", d.seconds_landmark}}}});
    }
    manifest["trials"] = trials;
    manifest["max_spectral_radius"] = radius;
    if (fewest < 30.0) {
      result.warnings.push_back("some point has only " + num(fewest) +
                                " neighbours within sqrt(epsilon); at least 30 are advisable");
    }
  }
  if (!result.rows.empty()) {
    std::map<std::tuple<Index, double, double, Index>, std::vector<const MetricRow*>> groups;
    for (const MetricRow& r : result.rows) groups[{r.m, r.beta, r.alpha, r.l}].push_back(&r);
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& [key, rows] : groups) {
      std::vector<double> cosine, l2, ratio;
      for (const MetricRow* r : rows) {
        cosine.push_back(std::abs(r->cosine));
        l2.push_back(r->aligned_l2);
        ratio.push_back(r->ratio);
      }
      summary.push_back({{"m", std::get<0>(key)},
                         {"beta", std::get<1>(key)},
                         {"alpha", std::get<2>(key)},
                         {"l", std::get<3>(key)},
                         {"median_abs_cosine", median_of(cosine)},
                         {"median_alignedL2", median_of(l2)},
                         {"median_ratio", median_of(ratio)}});
    }
    manifest["summary"] = summary;
  }
  if (!result.transport_rows.empty()) {
    std::map<std::pair<Index, double>, std::vector<double>> groups;
    for (const TransportRow& r : result.transport_rows) groups[{r.m, r.epsilon}].push_back(r.error);
    nlohmann::json summary = nlohmann::json::array();
    std::vector<double> eps, med;
    for (const auto& [key, errors] : groups) {
      const auto [median, mad] = median_mad(errors);
      summary.push_back({{"m", key.first}, {"epsilon", key.second}, {"median_error", median}, {"mad_error", mad}});
      eps.push_back(key.second);
      med.push_back(median);
    }
    manifest["summary"] = summary;
    if (config.experiment == ExperimentKind::DoubleTransportScaling && eps.size() >= 2) {
      manifest["loglog_slope"] = loglog_slope(eps, med);
    }
  }
  if (result.timing) {
    manifest["svd_slope_m"] = result.timing->svd_slope_m;
    manifest["total_slope_m"] = result.timing->total_slope_m;
    manifest["assembly_slope_n"] = result.timing->assembly_slope_n;
  }
  manifest["warnings"] = result.warnings;
  manifest["wall_seconds"] = seconds_since(run_start);
  manifest["status"] = failure ? "failed" : "ok";
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      manifest["error"] = e.what();
    }
  }
  result.manifest_json = manifest.dump(2);
  if (options.write_files) std::ofstream(result.directory / "manifest.json") << result.manifest_json << '\n';
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace lavdm
