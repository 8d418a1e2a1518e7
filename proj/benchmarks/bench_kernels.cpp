#include <benchmark/benchmark.h>

#include <numbers>

#include "sectkit/infer.hpp"
#include "sectkit/random.hpp"
#include "sectkit/sect.hpp"
#include "sectkit/study.hpp"

using namespace sectkit;

namespace {

ShapeSpec family_shape(std::uint64_t seed) {
  FamilyParams params;
  RandomStream stream = RandomStream::keyed(seed, {});
  return sample_random_shape(params, stream);
}

GroupSample synthetic_group(std::uint64_t seed, int n, int gamma, int delta) {
  GroupSample group;
  const DirectionGrid grid = study_direction_grid(gamma);
  const LevelGrid levels{3.0, delta};
  RandomStream stream(seed);
  for (int i = 0; i < n; ++i) {
    RandomStream fs = stream.child(i);
    Eigen::MatrixXd values(gamma, delta);
    for (int p = 0; p < gamma; ++p)
      for (int q = 0; q < delta; ++q) values(p, q) = fs.next_normal(0.0, 1.0);
    group.sect.push_back(SECTField{grid, levels, values, "bench", 1.5});
  }
  return group;
}

void BM_PlanarFiltrationBuild(benchmark::State& state) {
  const ShapeSpec shape = family_shape(1);
  for (auto _ : state) {
    PlanarUnionFiltration filtration(shape.balls());
    benchmark::DoNotOptimize(filtration);
  }
}
BENCHMARK(BM_PlanarFiltrationBuild);

void BM_PlanarFiltrationEcc(benchmark::State& state) {
  const ShapeSpec shape = family_shape(2);
  const PlanarUnionFiltration filtration(shape.balls());
  const Point dir{std::cos(0.3), std::sin(0.3), 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(filtration.ecc(dir, 1.5));
  }
}
BENCHMARK(BM_PlanarFiltrationEcc);

void BM_NerveEnumeration(benchmark::State& state) {
  const ShapeSpec shape =
      make_deterministic_shape(DeterministicShape::K1,
                               static_cast<int>(state.range(0)));
  NerveOptions options;
  options.max_simplex_vertices = 64;
  for (auto _ : state) {
    BallNerve nerve(shape.balls(), options);
    benchmark::DoNotOptimize(nerve.simplex_count());
  }
}
BENCHMARK(BM_NerveEnumeration)->Arg(25)->Arg(50);

void BM_RasterEcc(benchmark::State& state) {
  const ShapeSpec shape = family_shape(3);
  const RasterizedUnion raster(shape.balls(), 0.005);
  const Point dir{std::cos(1.1), std::sin(1.1), 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(raster.ecc(dir, 1.5));
  }
}
BENCHMARK(BM_RasterEcc);

void BM_ComputeFields(benchmark::State& state) {
  const ShapeSpec shape = family_shape(4);
  const DirectionGrid grid = study_direction_grid(4);
  const LevelGrid levels{3.0, 50};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        compute_fields(shape, grid, levels, ComputeBackend{}, "bench", 1));
  }
}
BENCHMARK(BM_ComputeFields);

void BM_SectFromEcc(benchmark::State& state) {
  const ShapeSpec shape = family_shape(5);
  const PlanarUnionFiltration filtration(shape.balls());
  const ECCurve curve = filtration.ecc(Point{1, 0, 0}, 1.5);
  const LevelGrid levels{3.0, static_cast<int>(state.range(0))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sect_from_ecc(curve, levels));
  }
}
BENCHMARK(BM_SectFromEcc)->Arg(50)->Arg(200);

void BM_Algorithm1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GroupSample g1 = synthetic_group(10, n, 4, 50);
  const GroupSample g2 = synthetic_group(11, n, 4, 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(algorithm1_chi2(g1, g2, 0.05));
  }
}
BENCHMARK(BM_Algorithm1)->Arg(25)->Arg(100);

void BM_Algorithm2(benchmark::State& state) {
  const GroupSample g1 = synthetic_group(12, 50, 4, 50);
  const GroupSample g2 = synthetic_group(13, 50, 4, 50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(algorithm2_permutation(
        g1, g2, 0.05, static_cast<int>(state.range(0)), 7));
  }
}
BENCHMARK(BM_Algorithm2)->Arg(100);

void BM_Algorithm3(benchmark::State& state) {
  GroupSample g1 = synthetic_group(14, 50, 4, 50);
  GroupSample g2 = synthetic_group(15, 50, 4, 50);
  for (auto& group : {&g1, &g2})
    for (auto& field : group->sect) {
      ECTField ect;
      ect.grid = field.grid;
      ect.levels = field.levels;
      ect.shape_id = field.shape_id;
      ect.bounding_radius = field.bounding_radius;
      ect.values = field.values.array().round().cast<int>();
      group->ect.push_back(std::move(ect));
    }
  for (auto _ : state) {
    benchmark::DoNotOptimize(algorithm3_nhst(g1, g2, 0.05, 100, 7));
  }
}
BENCHMARK(BM_Algorithm3);

}  // namespace

BENCHMARK_MAIN();
