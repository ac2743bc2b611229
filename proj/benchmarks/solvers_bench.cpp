#include "switchbox/fd_solver.hpp"
#include "switchbox/picard_mc.hpp"
#include "switchbox/problem_io.hpp"
#include "switchbox/sde.hpp"
#include "switchbox/strategy.hpp"
#include "switchbox/tree_oracle.hpp"

#include <benchmark/benchmark.h>

#include <array>
#include <filesystem>

using namespace switchbox;

namespace {

const SwitchingProblem& benchmark_problem() {
    static const SwitchingProblem p =
        load_problem_file(std::filesystem::path(SWITCHBOX_SOURCE_DIR) / "problems" / "benchmark.yaml").problem;
    return p;
}

Grid grid_for(const SwitchingProblem& p, std::size_t nx) {
    const std::array<std::size_t, 1> n{nx};
    return make_grid(p, n, 2 * (nx - 1));
}

void BM_FdImplicit(benchmark::State& state) {
    const SwitchingProblem& p = benchmark_problem();
    const Grid g = grid_for(p, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_fd(p, g));
}
BENCHMARK(BM_FdImplicit)->Arg(101)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    const SwitchingProblem& p = benchmark_problem();
    const auto paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate(p, 0.0, p.x0, paths, 50, 7));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(paths) * 50);
}
BENCHMARK(BM_Simulate)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_PicardMc(benchmark::State& state) {
    const SwitchingProblem& p = benchmark_problem();
    const PathEnsemble e = simulate(p, 0.0, p.x0, static_cast<std::size_t>(state.range(0)), 50, 7);
    McOptions o;
    o.degree = 8;
    for (auto _ : state) benchmark::DoNotOptimize(solve_mc(p, e, o));
}
BENCHMARK(BM_PicardMc)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state) {
    const SwitchingProblem& p = benchmark_problem();
    const auto levels = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        const ChainApprox c = build_chain(p, levels);
        benchmark::DoNotOptimize(solve_dp(c, p));
    }
}
BENCHMARK(BM_Oracle)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_StrategySimulation(benchmark::State& state) {
    const SwitchingProblem& p = benchmark_problem();
    const ValueField v = solve_fd(p, grid_for(p, 201));
    const PolicyField pol = extract_policy(v, p);
    const PathEnsemble e = simulate(p, 0.0, p.x0, 20000, 400, 8);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_strategy(pol, e, p));
}
BENCHMARK(BM_StrategySimulation)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
