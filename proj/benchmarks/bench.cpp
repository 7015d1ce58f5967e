#include <random>

#include <benchmark/benchmark.h>

#include "relay_mtl/encode/encoder.hpp"
#include "relay_mtl/milp/solver.hpp"
#include "relay_mtl/mtl/eval.hpp"
#include "relay_mtl/runtime/synthesis.hpp"
#include "relay_mtl/scenario/scenario.hpp"
#include "support/generators.hpp"
#include "support/lp_oracle.hpp"

using namespace relay_mtl;

namespace {

void BM_Care(benchmark::State& state) {
  const auto e = sim::double_integrator_explorer("e", 0.04, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(control::solve_care(e.a, e.b, 0.1));
}
BENCHMARK(BM_Care);

void BM_Expm(benchmark::State& state) {
  const auto relay = sim::hover_relay_model(control::Vector::Constant(4, -5), control::Vector::Constant(4, 5));
  for (auto _ : state) benchmark::DoNotOptimize(control::zoh_discretize(relay.a0, relay.b0, 0.5));
}
BENCHMARK(BM_Expm);

void BM_RandomMilp(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const milp::Model m = oracle::random_milp(rng, static_cast<int>(state.range(0)), 3, 8);
  for (auto _ : state) benchmark::DoNotOptimize(milp::solve(m));
}
BENCHMARK(BM_RandomMilp)->Arg(6)->Arg(12)->Unit(benchmark::kMicrosecond);

void BM_Evaluate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto atoms = gen::random_boxes(rng, 3, 3);
  gen::FormulaOptions fo;
  fo.max_depth = 4;
  const mtl::Formula f = gen::random_formula(rng, atoms, fo);
  const mtl::Trace tr = gen::random_trace(rng, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(mtl::evaluate(tr, f, 0));
}
BENCHMARK(BM_Evaluate)->Arg(20)->Arg(200);

// Assembling and solving the first window of a desk scenario.
scenario::Assembled desk(const char* name) { return scenario::assemble(scenario::desk_scale(scenario::builtin(name))); }

void BM_DeskInitialEncode(benchmark::State& state) {
  const auto a = desk("scenario1-phi1");
  const auto& w = a.problem.world;
  for (auto _ : state) {
    encode::EncodingContext ctx;
    ctx.horizon = a.problem.horizon;
    for (std::size_t i = 0; i < w.explorers().size(); ++i) {
      const auto& ex = w.explorers()[i];
      ctx.constants[runtime::estimate_signal(ex.name)] =
          encode::precompute_estimates(a.problem.explorer_x[i], w.config().x_g, ex, w.config().ts, ctx.horizon);
    }
    benchmark::DoNotOptimize(
        encode::build_milp(w.relay(), w.relay_discrete(), a.problem.x0, ctx, mtl::Formula::at(1, a.formula), a.problem.encoder));
  }
}
BENCHMARK(BM_DeskInitialEncode)->Unit(benchmark::kMillisecond);

void BM_DeskRun(benchmark::State& state) {
  const auto a = desk("scenario1-phi1");
  for (auto _ : state) benchmark::DoNotOptimize(runtime::run_synthesis(a.problem));
}
BENCHMARK(BM_DeskRun)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
