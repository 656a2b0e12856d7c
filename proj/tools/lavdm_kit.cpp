#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lavdm/config.hpp"
#include "lavdm/connection.hpp"
#include "lavdm/container.hpp"
#include "lavdm/errors.hpp"
#include "lavdm/experiment.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/landmark.hpp"
#include "lavdm/manifold.hpp"
#include "lavdm/point_cloud_io.hpp"
#include "lavdm/random.hpp"
#include "lavdm/vdm.hpp"

namespace {

using namespace lavdm;

struct GenArgs {
  std::string chart = "klein";
  Index n = 1000;
  std::string density = "area";
  std::string sigma = "1,1,1";
  std::uint64_t seed = 1;
  std::string out;
};

struct SpectralArgs {
  std::string input;
  double epsilon = 0.2;
  double alpha = 0.0;
  Index r = 6;
  double t = 1.0;
  std::string frames = "pca";
  double pca_radius = 0.0;
  double trunc = kNoTruncation;
  Index dense_threshold = 2000;
  std::string out;
  // landmark only
  std::string landmarks = "subset:100";
  double beta = 0.5;
  std::uint64_t seed = 1;
};

struct RunArgs {
  std::string config;
  Index jobs = 1;
  std::string preset;
  std::string timestamp;
  bool quiet = false;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    std::size_t used = 0;
    out.push_back(std::stod(cell, &used));
    if (used != cell.size()) throw Error(ErrorKind::InvalidArgument, "bad number '" + cell + "'");
  }
  return out;
}

FrameField frames_of(const PointCloud& cloud, FrameSource source, double radius) {
  if (source == FrameSource::GroundTruth) {
    if (!cloud.params || !cloud.chart) {
      throw Error(ErrorKind::InvalidArgument, "--frames truth needs chart coordinates (u, v columns and sidecar)");
    }
    return ground_truth_frames(cloud, FrameSource::GroundTruth);
  }
  return local_pca_frames(cloud, radius, 2);
}

double pca_radius_of(const SpectralArgs& a) { return a.pca_radius > 0.0 ? a.pca_radius : 1.5 * std::sqrt(a.epsilon); }

void write_sidecar(const std::string& out, const nlohmann::json& meta) {
  std::ofstream side(out + ".json");
  side << meta.dump(2) << '\n';
  if (!side) throw Error(ErrorKind::IoError, "failed writing " + out + ".json");
}

nlohmann::json eigen_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

int run_gen(const GenArgs& a) {
  const SurfaceChart chart = [&] {
    switch (parse_chart_kind(a.chart)) {
      case ChartKind::KleinBottle: return SurfaceChart::klein_bottle();
      case ChartKind::DistortedSphere: return SurfaceChart::distorted_sphere();
      case ChartKind::Sphere: return SurfaceChart::sphere();
    }
    return SurfaceChart::sphere();
  }();
  SamplingDensity density;
  density.kind = parse_density_kind(a.density);
  const std::vector<double> sigma = parse_list(a.sigma);
  if (sigma.size() != 3) throw Error(ErrorKind::InvalidArgument, "--sigma takes three diagonal entries");
  density.sigma = Eigen::Vector3d(sigma[0], sigma[1], sigma[2]).asDiagonal();
  SamplingStats stats;
  const PointCloud cloud = sample_surface(chart, a.n, density, a.seed, &stats);
  write_point_cloud_csv(a.out, cloud);
  std::cerr << "wrote " << cloud.size() << " points to " << a.out << " (acceptance ratio "
            << stats.acceptance_ratio() << ")\n";
  return 0;
}

int run_vdm(const SpectralArgs& a) {
  const PointCloud x = read_point_cloud_csv(a.input);
  const FrameField frames = frames_of(x, parse_frame_source(a.frames), pca_radius_of(a));
  const AffinityMatrix w = gaussian_affinity(x, x, a.epsilon, a.trunc);
  const BlockSparseMatrix omega = connections_on_pattern(w.entries, frames, frames);
  const VdmSystem system = assemble_vdm(alpha_normalize(w, row_degrees(w), a.alpha), omega);
  EigenSolverOptions options;
  options.dense_threshold = a.dense_threshold;
  const SpectralResult spectrum = vdm_spectrum(system, a.r, options);
  const Embedding embedding = vdm_embed(spectrum, a.t, a.r);

  Container c;
  c.add("affinity", w);
  c.add("frames", frames);
  c.add("connections", omega, true);
  c.add("degrees", system.degrees);
  c.add("eigenvalues", spectrum.values);
  c.add("eigenvectors", spectrum.vectors);
  c.add("embedding", embedding.features);
  c.write(a.out);
  write_sidecar(a.out, {{"eigenvalues", eigen_json(spectrum.values)},
                        {"n", x.size()},
                        {"q", spectrum.q},
                        {"r", a.r},
                        {"t", a.t},
                        {"alpha", a.alpha},
                        {"epsilon", a.epsilon},
                        {"frames", a.frames}});
  std::cout << "eigenvalues:";
  for (Index i = 0; i < spectrum.count(); ++i) std::cout << ' ' << spectrum.values(i);
  std::cout << '\n';
  return 0;
}

int run_lavdm(const SpectralArgs& a) {
  const PointCloud x = read_point_cloud_csv(a.input);
  const FrameSource source = parse_frame_source(a.frames);
  const double radius = pca_radius_of(a);

  PointCloud z;
  FrameField frames_x;
  FrameField frames_z;
  std::string mode;
  if (a.landmarks.rfind("subset:", 0) == 0) {
    mode = "subset";
    const Index m = std::stol(a.landmarks.substr(7));
    Rng rng = make_rng(a.seed);
    const std::vector<Index> picked = sample_without_replacement(x.size(), m, rng);
    z = x.subset(picked);
    frames_x = frames_of(x, source, radius);
    frames_z.source = frames_x.source;
    for (Index i : picked) frames_z.frames.push_back(frames_x.frames[static_cast<std::size_t>(i)]);
  } else {
    mode = "designed";
    z = read_point_cloud_csv(a.landmarks);
    if (z.dim() != x.dim()) throw Error(ErrorKind::DimensionMismatch, "landmarks and data differ in dimension");
    if (source == FrameSource::GroundTruth) {
      frames_x = frames_of(x, source, radius);
      frames_z = frames_of(z, source, radius);
    } else {
      // Landmark frames from the data around each landmark.
      PointCloud joint;
      joint.points.resize(x.size() + z.size(), x.dim());
      joint.points << x.points, z.points;
      const FrameField all = local_pca_frames(joint, radius, 2);
      frames_x.source = frames_z.source = FrameSource::LocalPCA;
      frames_x.frames.assign(all.frames.begin(), all.frames.begin() + x.size());
      frames_z.frames.assign(all.frames.begin() + x.size(), all.frames.end());
    }
  }

  LandmarkAssembly assembly = assemble_landmark(x, z, a.epsilon, a.trunc, frames_x, frames_z);
  if (!assembly.dropped_landmarks.empty()) {
    std::cerr << "warning: dropped " << assembly.dropped_landmarks.size()
              << " landmarks with no data point within the truncation radius\n";
  }
  const Index kept = static_cast<Index>(assembly.kept_landmarks.size());
  const AffinityMatrix w = assembly.W;
  const BlockSparseMatrix s = assembly.S;
  const LandmarkPipelineState state = make_pipeline_state(std::move(assembly), a.beta, a.alpha);
  EigenSolverOptions options;
  options.dense_threshold = a.dense_threshold;
  const LandmarkSpectralResult spectrum = landmark_svd(state, a.r, options);
  const Embedding embedding = lavdm_embed(spectrum, a.t, a.r);

  Container c;
  c.add("affinity", w);
  c.add("frames", frames_x);
  c.add("landmark_frames", frames_z);
  c.add("S_landmark", s);
  c.add("d_z", state.d_z);
  c.add("d_xbeta", state.d_xbeta);
  c.add("d_ba", state.d_ba);
  c.add("eigenvalues", spectrum.values);
  c.add("eigenvectors", spectrum.left_vectors);
  c.add("embedding", embedding.features);
  c.write(a.out);
  write_sidecar(a.out, {{"eigenvalues", eigen_json(spectrum.values)},
                        {"n", x.size()},
                        {"q", spectrum.q},
                        {"r", a.r},
                        {"t", a.t},
                        {"alpha", a.alpha},
                        {"beta", a.beta},
                        {"epsilon", a.epsilon},
                        {"m", kept},
                        {"landmark_mode", mode},
                        {"frames", a.frames}});
  std::cout << "eigenvalues:";
  for (Index i = 0; i < spectrum.count(); ++i) std::cout << ' ' << spectrum.values(i);
  std::cout << '\n';
  return 0;
}

std::optional<Preset> preset_of(const std::string& name) {
  if (name.empty()) return std::nullopt;
  return parse_preset(name);
}

int run_validate(const RunArgs& a) {
  const ConfigValidation v = validate_config(a.config, preset_of(a.preset));
  for (const auto& w : v.warnings) std::cerr << "warning: " << w << '\n';
  if (!v.config) {
    for (const auto& e : v.errors) std::cerr << e << '\n';
    return 2;
  }
  std::cout << echo_config(*v.config);
  return 0;
}

int run_run(const RunArgs& a) {
  const ConfigValidation v = validate_config(a.config, preset_of(a.preset));
  for (const auto& w : v.warnings) std::cerr << "warning: " << w << '\n';
  if (!v.config) {
    for (const auto& e : v.errors) std::cerr << e << '\n';
    return 2;
  }
  RunOptions options;
  options.jobs = a.jobs;
  options.timestamp = a.timestamp;
  if (!a.quiet) options.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const ExperimentResult result = run_experiment(*v.config, options);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << result.directory.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landmark-accelerated vector diffusion maps"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Sample a point cloud from a surface");
  gen_cmd->add_option("--chart", gen.chart, "klein | dsphere | sphere")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Number of points")->capture_default_str();
  gen_cmd->add_option("--density", gen.density, "area | param | acg")->capture_default_str();
  gen_cmd->add_option("--sigma", gen.sigma, "ACG covariance diagonal, comma separated")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output CSV")->required();

  SpectralArgs vdm;
  auto* vdm_cmd = app.add_subcommand("vdm", "Vector diffusion maps on a point cloud");
  SpectralArgs lavdm_args;
  auto* lavdm_cmd = app.add_subcommand("lavdm", "Landmark-accelerated vector diffusion maps");
  for (auto [cmd, args] : {std::pair{vdm_cmd, &vdm}, std::pair{lavdm_cmd, &lavdm_args}}) {
    cmd->add_option("--input", args->input, "Point cloud CSV")->required();
    cmd->add_option("--epsilon", args->epsilon)->capture_default_str();
    cmd->add_option("--alpha", args->alpha)->capture_default_str();
    cmd->add_option("--r", args->r, "Number of eigenpairs")->capture_default_str();
    cmd->add_option("--t", args->t, "Diffusion time")->capture_default_str();
    cmd->add_option("--frames", args->frames, "pca | truth")->capture_default_str();
    cmd->add_option("--pca-radius", args->pca_radius, "Local PCA radius (default 1.5 sqrt(epsilon))");
    cmd->add_option("--trunc", args->trunc, "Drop entries with |x - y|^2 > trunc * epsilon");
    cmd->add_option("--dense-threshold", args->dense_threshold)->capture_default_str();
    cmd->add_option("--out", args->out, "Output container")->required();
  }
  lavdm_cmd->add_option("--landmarks", lavdm_args.landmarks, "CSV path or subset:m")->capture_default_str();
  lavdm_cmd->add_option("--beta", lavdm_args.beta)->capture_default_str();
  lavdm_cmd->add_option("--seed", lavdm_args.seed)->capture_default_str();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment from a TOML config");
  RunArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
  for (auto [cmd, args] : {std::pair{run_cmd, &run}, std::pair{validate_cmd, &validate}}) {
    cmd->add_option("--config", args->config)->required()->check(CLI::ExistingFile);
    cmd->add_option("--preset", args->preset, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));
  }
  run_cmd->add_option("--jobs", run.jobs, "Trials run in parallel")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_option("--timestamp", run.timestamp, "Run directory name instead of the UTC time");
  run_cmd->add_flag("--quiet", run.quiet);

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (vdm_cmd->parsed()) return run_vdm(vdm);
    if (lavdm_cmd->parsed()) return run_lavdm(lavdm_args);
    if (run_cmd->parsed()) return run_run(run);
    if (validate_cmd->parsed()) return run_validate(validate);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
