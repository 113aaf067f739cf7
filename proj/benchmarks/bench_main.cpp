#include "ggn/cases.hpp"
#include "ggn/gcn.hpp"

#include <benchmark/benchmark.h>

namespace {

// One full training iteration (forward + residual + backward) of the cavity
// problem, the largest case; dominated by the dense Chebyshev matmuls.
void BM_CavityIteration(benchmark::State& state) {
  auto p = ggn::make_case("ns_cavity", ggn::RunMode::Forward);
  ggn::TrainConfig cfg = p->train;
  cfg.max_iters = 1;
  ggn::Trainer trainer(*p->assembler, cfg);
  for (auto _ : state) {
    trainer.params().zero_moments();
    benchmark::DoNotOptimize(trainer.run().best_loss);
  }
}
BENCHMARK(BM_CavityIteration)->Unit(benchmark::kMillisecond);

void BM_GcnForward(benchmark::State& state) {
  auto p = ggn::make_case("poisson_square", ggn::RunMode::Forward);
  auto graph = ggn::build_graph_operators(p->spaces[0].conn, p->spaces[0].node_count());
  ggn::GcnNet net("u", 2, graph.scaled_laplacian);
  ggn::ParamSet params;
  net.register_params(params, 1);
  const ggn::Mat x = ggn::normalize_coords(p->spaces[0].nodes);
  for (auto _ : state) {
    ggn::Tape tape;
    auto leaves = params.make_leaves(tape);
    ggn::Tensor xt = tape.constant({(int)x.rows(), (int)x.cols()},
                                   Eigen::Map<const ggn::Vec>(x.data(), x.size()));
    benchmark::DoNotOptimize(net.forward(tape, leaves, xt).values().sum());
  }
}
BENCHMARK(BM_GcnForward)->Unit(benchmark::kMillisecond);

void BM_ResidualAssembly(benchmark::State& state) {
  auto p = ggn::make_case("ns_cavity", ggn::RunMode::Forward);
  const ggn::Vec st = p->reference_state;
  for (auto _ : state) benchmark::DoNotOptimize(p->assembler->assemble_plain(st).norm());
}
BENCHMARK(BM_ResidualAssembly)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
