// Serial reference against the OpenMP kernel for the three parallel paths.
#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "relguide/angles.hpp"
#include "relguide/neural_guidance.hpp"
#include "relguide/oracle_solver.hpp"
#include "relguide/rdp_generator.hpp"

using namespace relguide;

namespace {

RdpConfig coarse(Exec exec) {
  RdpConfig cfg;
  cfg.grid.delta_theta = kPi / 4;
  cfg.grid.n_theta = 8;
  cfg.grid.delta_len = 5000.0;
  cfg.grid.n_len = 5;
  cfg.grid.max_order = 3;
  cfg.cell = CellSize{500.0, 500.0, deg2rad(1.0)};
  cfg.exec = exec;
  return cfg;
}

const std::vector<TrainingSample>& samples() {
  static const std::vector<TrainingSample> s = generate_tree(coarse(Exec::kSerial)).samples;
  return s;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::kParallel : Exec::kSerial; }

void BM_generate_tree(benchmark::State& st) {
  const RdpConfig cfg = coarse(exec_of(st));
  for (auto _ : st) benchmark::DoNotOptimize(generate_tree(cfg).samples.size());
}

void BM_oracle_costs(benchmark::State& st) {
  std::vector<RelativeState> states;
  for (std::size_t i = 0; i < samples().size(); i += 8) states.push_back(samples()[i].state);
  const OracleConfig oc = oracle_config_from(coarse(Exec::kSerial));
  for (auto _ : st) benchmark::DoNotOptimize(oracle_costs(states, oc, exec_of(st)).size());
}

void BM_batch_gradient(benchmark::State& st) {
  const double r_min = coarse(Exec::kSerial).r_min();
  const NetworkParams p = make_network({kInputs, 32, 32, kOutputs}, 1, r_min);
  std::vector<std::size_t> batch(samples().size());
  std::iota(batch.begin(), batch.end(), 0);
  for (auto _ : st) benchmark::DoNotOptimize(batch_gradient(p, samples(), batch, exec_of(st)).size());
}

}  // namespace

BENCHMARK(BM_generate_tree)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_oracle_costs)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_gradient)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
