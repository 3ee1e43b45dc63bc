#include <benchmark/benchmark.h>

#include "fedcpsl/nn.hpp"
#include "fedcpsl/rng.hpp"

namespace {

using fedcpsl::Matrix;
using fedcpsl::ModelSpec;

void BM_Forward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const auto spec = ModelSpec::make({784, 32, 10});
  fedcpsl::Rng rng(1);
  const auto params = fedcpsl::init_params(spec, rng);
  const Matrix inputs = Matrix::Random(batch, 784);
  for (auto _ : state) benchmark::DoNotOptimize(fedcpsl::forward(spec, params, inputs));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(32)->Arg(256);

void BM_Backprop(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const auto spec = ModelSpec::make({784, 32, 10});
  fedcpsl::Rng rng(2);
  const auto params = fedcpsl::init_params(spec, rng);
  const Matrix inputs = Matrix::Random(batch, 784);
  const Matrix output_grad = Matrix::Random(batch, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fedcpsl::backprop(spec, params, inputs, output_grad));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_Backprop)->Arg(1)->Arg(32)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
