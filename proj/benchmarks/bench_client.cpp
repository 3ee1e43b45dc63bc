#include <benchmark/benchmark.h>

#include <memory>

#include "fedcpsl/client.hpp"
#include "fedcpsl/data.hpp"
#include "fedcpsl/metrics.hpp"
#include "fedcpsl/trainer.hpp"

namespace {

using namespace fedcpsl;

std::shared_ptr<const ClientData> bench_client() {
  const auto data = gen_synthetic_blobs(10, 64, 40, 0.5, 7);
  return std::make_shared<const ClientData>(split_semi(data, 0.9, 0.2, 7));
}

void BM_ClientRound(benchmark::State& state) {
  const auto spec = ModelSpec::make({64, 32, 10});
  const auto data = bench_client();
  Rng init(3);
  const ParamVector theta = init_params(spec, init);
  const ParamVector c_global = ParamVector::Zero(spec.param_count());
  const auto states = initial_clients(spec, theta, {data}, {1.0}, {0.75});
  LocalPlan plan;
  plan.q_steps = static_cast<int>(state.range(0));
  plan.gamma = 0.8;
  plan.eta = 0.005;
  plan.eta_c = 0.01;
  ClientOptions options;
  Rng rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(client_round(states.front(), spec, theta, c_global, plan, options, rng));
  }
}
BENCHMARK(BM_ClientRound)->Arg(10)->Arg(50);

void BM_GlobalGap(benchmark::State& state) {
  const auto spec = ModelSpec::make({64, 32, 10});
  const auto data = bench_client();
  Rng init(5);
  const ParamVector theta = init_params(spec, init);
  const auto states = initial_clients(spec, theta, {data}, {1.0}, {0.75});
  const std::vector<Matrix> before{states.front().nu};
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimality_gap_global(spec, theta, states, before, ClientOptions{}));
  }
}
BENCHMARK(BM_GlobalGap);

}  // namespace
