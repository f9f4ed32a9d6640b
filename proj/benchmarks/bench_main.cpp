#include "bev3d/eval.hpp"
#include "bev3d/occlusion.hpp"
#include "bev3d/polygeo.hpp"
#include "bev3d/rng.hpp"
#include "bev3d/synth.hpp"

#include <benchmark/benchmark.h>

using namespace bev3d;

namespace {

SynthConfig bench_config() {
  SynthConfig cfg;
  cfg.seed = 1234;
  cfg.clip_length = 10;
  cfg.vehicle_count_range = {30, 60};
  cfg.congestion = 0.5;
  return cfg;
}

void BM_Projection(benchmark::State& state) {
  const auto cfg = bench_config();
  const auto scene = generate_scene(cfg);
  const auto clip = generate_clip(scene, cfg);
  const auto& sample = clip.gt.samples[0];
  for (auto _ : state) {
    for (const auto& cam : scene.cameras)
      for (const auto& box : sample.boxes)
        benchmark::DoNotOptimize(box3d_image_polygon(cam, box));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(scene.cameras.size() *
                                                    sample.boxes.size()));
}
BENCHMARK(BM_Projection);

void BM_UnionArea(benchmark::State& state) {
  Rng rng(7);
  std::vector<Polygon2D> polys;
  for (int i = 0; i < state.range(0); ++i) {
    std::vector<Vec2> pts;
    const Vec2 c(rng.uniform(-5, 5), rng.uniform(-5, 5));
    for (int k = 0; k < 8; ++k) {
      const double a = rng.uniform(0, 2 * M_PI);
      const double r = rng.uniform(0.5, 2.0);
      pts.emplace_back(c.x() + r * std::cos(a), c.y() + r * std::sin(a));
    }
    polys.push_back(convex_hull(pts));
  }
  for (auto _ : state) benchmark::DoNotOptimize(union_area(polys));
}
BENCHMARK(BM_UnionArea)->Arg(4)->Arg(16)->Arg(64);

void BM_SampleOcclusion(benchmark::State& state) {
  const auto cfg = bench_config();
  const auto scene = generate_scene(cfg);
  const auto clip = generate_clip(scene, cfg);
  const auto& sample = clip.gt.samples[0];
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_occlusions(scene, sample, 0));
}
BENCHMARK(BM_SampleOcclusion);

void BM_Evaluate(benchmark::State& state) {
  const auto cfg = bench_config();
  const auto scene = generate_scene(cfg);
  const auto clip = generate_clip(scene, cfg);
  DetectionClip dc;
  dc.clip_id = clip.gt.scene_id;
  Rng rng(9);
  for (const auto& s : clip.gt.samples) {
    DetectionSample ds;
    ds.timestamp = s.timestamp;
    for (const auto& b : s.boxes) {
      Detection d;
      d.box = b;
      d.box.center.x() += rng.uniform(-0.5, 0.5);
      d.score = rng.uniform(0.1, 1.0);
      ds.detections.push_back(d);
    }
    dc.samples.push_back(std::move(ds));
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(evaluate({clip.gt}, {dc}));
}
BENCHMARK(BM_Evaluate);

}  // namespace

BENCHMARK_MAIN();
