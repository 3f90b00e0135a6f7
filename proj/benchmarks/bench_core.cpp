#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "torsionlab/fem.hpp"
#include "torsionlab/geometry.hpp"
#include "torsionlab/mesh.hpp"
#include "torsionlab/plaplace.hpp"
#include "torsionlab/torsion_linear.hpp"
#include "torsionlab/wos.hpp"

using namespace torsionlab;

namespace {

const PolygonalDomain& disk() {
    static const std::vector<double> params{1.0, 256.0};
    static const PolygonalDomain d = make_canonical_domain(CanonicalKind::disk_polygon, params);
    return d;
}

MeshPtr disk_mesh(int level) {
    return std::make_shared<const TriangleMesh>(refine(triangulate(disk(), 0.2), level));
}

void BM_Triangulate(benchmark::State& state) {
    const double h = 0.2 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(triangulate(disk(), h));
}
BENCHMARK(BM_Triangulate)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_AssembleSystem(benchmark::State& state) {
    const MeshPtr mesh = disk_mesh(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(FemSystem(mesh));
    state.counters["nodes"] = static_cast<double>(mesh->node_count());
}
BENCHMARK(BM_AssembleSystem)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_DirichletTorsion(benchmark::State& state) {
    const FemSystem fem(disk_mesh(static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(solve_torsion(fem, BoundaryCondition::dirichlet()));
    state.counters["nodes"] = static_cast<double>(fem.mesh->node_count());
}
BENCHMARK(BM_DirichletTorsion)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_RobinSpectrum(benchmark::State& state) {
    const FemSystem fem(disk_mesh(1));
    const int k = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(robin_spectrum(fem, 1.0, k));
}
BENCHMARK(BM_RobinSpectrum)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_PTorsion(benchmark::State& state) {
    const FemSystem fem(disk_mesh(1));
    const double p = static_cast<double>(state.range(0)) / 2.0;
    for (auto _ : state) benchmark::DoNotOptimize(solve_p_torsion(fem, p, BoundaryCondition::robin(1.0)));
}
BENCHMARK(BM_PTorsion)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_WalkOnSpheres(benchmark::State& state) {
    WosOptions options;
    options.n_walks = static_cast<int>(state.range(0));
    options.seed = 7;
    for (auto _ : state) benchmark::DoNotOptimize(wos_exit_time(disk(), Vec2{0.3, 0.2}, options));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WalkOnSpheres)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BoundaryDistance(benchmark::State& state) {
    const BoundaryDistance distance(disk());
    double x = -0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(distance(Vec2{x, 0.1}));
        x = x > 0.5 ? -0.5 : x + 1e-3;
    }
}
BENCHMARK(BM_BoundaryDistance);

}  // namespace

BENCHMARK_MAIN();
