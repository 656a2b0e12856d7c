#include <benchmark/benchmark.h>

#include "lavdm/connection.hpp"
#include "lavdm/kernel.hpp"
#include "lavdm/landmark.hpp"
#include "lavdm/manifold.hpp"
#include "lavdm/random.hpp"
#include "lavdm/vdm.hpp"

namespace lavdm {
namespace {

struct Sample {
  PointCloud x;
  FrameField frames;
};

Sample sphere_sample(Index n) {
  Sample s;
  s.x = sample_surface(SurfaceChart::sphere(), n, SamplingDensity::area_uniform(), 3);
  s.frames = ground_truth_frames(s.x, FrameSource::GroundTruth);
  return s;
}

std::vector<Index> landmarks(Index n, Index m) {
  Rng rng = make_rng(4);
  return sample_without_replacement(n, m, rng);
}

void BM_Affinity(benchmark::State& state) {
  const Sample s = sphere_sample(state.range(0));
  const PointCloud z = s.x.subset(landmarks(s.x.size(), 100));
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_affinity(s.x, z, 0.05));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Affinity)->RangeMultiplier(2)->Range(2000, 16000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_LandmarkAssembly(benchmark::State& state) {
  const Sample s = sphere_sample(state.range(0));
  const std::vector<Index> picked = landmarks(s.x.size(), 100);
  const PointCloud z = s.x.subset(picked);
  const FrameField fz = s.frames.subset(picked);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_landmark(s.x, z, 0.05, kNoTruncation, s.frames, fz));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LandmarkAssembly)->RangeMultiplier(2)->Range(2000, 16000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_LandmarkSvd(benchmark::State& state) {
  const Sample s = sphere_sample(10000);
  const std::vector<Index> picked = landmarks(s.x.size(), state.range(0));
  const LandmarkPipelineState pipeline = make_pipeline_state(
      assemble_landmark(s.x, s.x.subset(picked), 0.05, kNoTruncation, s.frames, s.frames.subset(picked)), 0.5, 0.0);
  EigenSolverOptions options;
  options.dense_threshold = 500;
  for (auto _ : state) benchmark::DoNotOptimize(landmark_svd(pipeline, 10, options));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LandmarkSvd)->RangeMultiplier(2)->Range(50, 400)->Unit(benchmark::kMillisecond)->Complexity();

void BM_VdmSpectrum(benchmark::State& state) {
  const Sample s = sphere_sample(state.range(0));
  const AffinityMatrix w = gaussian_affinity(s.x, s.x, 0.05, 9.0);
  const VdmSystem system = assemble_vdm(w, connections_on_pattern(w.entries, s.frames, s.frames));
  EigenSolverOptions options;
  options.dense_threshold = 500;
  for (auto _ : state) benchmark::DoNotOptimize(vdm_spectrum(system, 10, options));
}
BENCHMARK(BM_VdmSpectrum)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace lavdm

BENCHMARK_MAIN();
