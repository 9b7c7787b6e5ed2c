#include <msfem/chebyshev.hpp>
#include <msfem/evolution.hpp>
#include <msfem/msbasis.hpp>
#include <msfem/reference.hpp>

#include <benchmark/benchmark.h>

#include <vector>

using namespace msfem;

namespace {

// Example 1 at eps = 1/40 with h = eps/64; the coarse mesh has n cells.
struct Setup
{
    PeriodicMesh mesh;
    FineSystem system;
    WaveField psi;

    explicit Setup(int n)
        : mesh(build_mesh(1, 1.0 / n, 1.0 / 2560)),
          system(assemble(mesh, potentials::Mathieu{1.0 / 40}, 1.0 / 40)),
          psi(interpolate(mesh, gaussian_1d))
    {
    }
};

void localized_basis(benchmark::State& state)
{
    const Setup s(static_cast<int>(state.range(0)));
    const ConstraintMatrix C = constraint_matrix(s.mesh);
    const int level = default_l_star(s.mesh);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_basis_localized(s.mesh, s.system, C, level));
}
BENCHMARK(localized_basis)->Arg(160)->Arg(320)->Arg(640)->Unit(benchmark::kMillisecond);

void global_basis(benchmark::State& state)
{
    const Setup s(static_cast<int>(state.range(0)));
    const ConstraintMatrix C = constraint_matrix(s.mesh);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_basis_global(s.system, C));
}
BENCHMARK(global_basis)->Arg(160)->Arg(320)->Unit(benchmark::kMillisecond);

void reduce_and_decompose(benchmark::State& state)
{
    const Setup s(static_cast<int>(state.range(0)));
    const MultiscaleBasis basis =
        build_basis_localized(s.mesh, s.system, constraint_matrix(s.mesh), default_l_star(s.mesh));
    for (auto _ : state) {
        const ReducedSystem reduced = reduce(s.system, basis);
        benchmark::DoNotOptimize(decompose(reduced));
    }
}
BENCHMARK(reduce_and_decompose)->Arg(160)->Arg(320)->Arg(640)->Unit(benchmark::kMillisecond);

void chebyshev_unit_time(benchmark::State& state)
{
    const Setup s(static_cast<int>(state.range(0)));
    const MultiscaleBasis basis =
        build_basis_localized(s.mesh, s.system, constraint_matrix(s.mesh), default_l_star(s.mesh));
    const ReducedSystem reduced = reduce(s.system, basis);
    const CoefficientState c0 = project_initial(reduced, s.system, basis, s.psi);
    const ChebyshevPropagator cheb(reduced);
    for (auto _ : state)
        benchmark::DoNotOptimize(cheb.propagate(c0, 1.0));
}
BENCHMARK(chebyshev_unit_time)->Arg(160)->Arg(320)->Unit(benchmark::kMillisecond);

void reference_steps(benchmark::State& state)
{
    const Setup s(40);
    const auto scheme = static_cast<TimeScheme>(state.range(0));
    const std::vector<double> times{0.1};
    for (auto _ : state)
        benchmark::DoNotOptimize(integrate_reference(s.system, s.psi, 1e-3, 0.1, times, scheme));
    state.SetLabel(to_string(scheme) + ", 100 steps");
}
BENCHMARK(reference_steps)
    ->Arg(static_cast<int>(TimeScheme::crank_nicolson))
    ->Arg(static_cast<int>(TimeScheme::gauss4))
    ->Arg(static_cast<int>(TimeScheme::gauss8))
    ->Unit(benchmark::kMillisecond);

} // namespace

// the packaged benchmark_main archive carries LTO bytecode from another compiler release
BENCHMARK_MAIN();
