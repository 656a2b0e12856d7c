#include <malloc.h>

#include <atomic>
#include <cstddef>
#include <cstdio>

#include <gtest/gtest.h>

#include "lavdm/landmark.hpp"
#include "lavdm/random.hpp"

extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void __libc_free(void*);
void* __libc_memalign(std::size_t, std::size_t);
}

namespace {

std::atomic<bool> tracking{false};
std::atomic<long long> live{0};
std::atomic<long long> peak{0};

void note_alloc(void* p) {
  if (p == nullptr || !tracking.load(std::memory_order_relaxed)) return;
  const long long now = live.fetch_add(static_cast<long long>(malloc_usable_size(p))) +
                        static_cast<long long>(malloc_usable_size(p));
  long long seen = peak.load();
  while (now > seen && !peak.compare_exchange_weak(seen, now)) {
  }
}

void note_free(void* p) {
  if (p == nullptr || !tracking.load(std::memory_order_relaxed)) return;
  live.fetch_sub(static_cast<long long>(malloc_usable_size(p)));
}

}  // namespace

extern "C" {

void* malloc(std::size_t size) {
  void* p = __libc_malloc(size);
  note_alloc(p);
  return p;
}

void* calloc(std::size_t count, std::size_t size) {
  void* p = __libc_calloc(count, size);
  note_alloc(p);
  return p;
}

void* realloc(void* old, std::size_t size) {
  note_free(old);
  void* p = __libc_realloc(old, size);
  note_alloc(p);
  return p;
}

void free(void* p) {
  note_free(p);
  __libc_free(p);
}

void* memalign(std::size_t alignment, std::size_t size) {
  void* p = __libc_memalign(alignment, size);
  note_alloc(p);
  return p;
}

void* aligned_alloc(std::size_t alignment, std::size_t size) { return memalign(alignment, size); }

int posix_memalign(void** out, std::size_t alignment, std::size_t size) {
  *out = memalign(alignment, size);
  return *out == nullptr ? 12 : 0;
}

}  // extern "C"

namespace lavdm {
namespace {

// Blocks freed while tracking was off must not be subtracted; keeping the
// inputs alive across the tracked region avoids that.
TEST(Memory, LandmarkPipelineStaysBelowDenseSize) {
  const Index n = 10000, m = 100, q = 2, r = 10;
  const PointCloud x = sample_surface(SurfaceChart::sphere(), n, SamplingDensity::area_uniform(), 1);
  Rng rng = make_rng(2);
  const PointCloud z = x.subset(sample_without_replacement(n, m, rng));
  const FrameField fx = ground_truth_frames(x, FrameSource::GroundTruth);
  const FrameField fz = ground_truth_frames(z, FrameSource::GroundTruth);

  live = 0;
  peak = 0;
  tracking = true;
  {
    LandmarkPipelineState state = make_pipeline_state(assemble_landmark(x, z, 0.05, kNoTruncation, fx, fz), 0.5, 0.0);
    const LandmarkSpectralResult s = landmark_svd(state, r);
    const Embedding e = lavdm_embed(s, 1.0, r);
    EXPECT_EQ(e.points(), n);
  }
  tracking = false;

  const double budget_doubles = static_cast<double>(n * m * q * q + n * q * r);
  const double peak_doubles = static_cast<double>(peak.load()) / sizeof(double);
  std::printf("peak %.1f MB, %.2f x (nmq^2 + nqr) doubles\n", static_cast<double>(peak.load()) / 1e6,
              peak_doubles / budget_doubles);
  EXPECT_LT(peak_doubles, 4.0 * budget_doubles);
  // One dense scalar n x n matrix would already exceed this.
  EXPECT_LT(peak_doubles, static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace
}  // namespace lavdm
