#include <random>

#include <benchmark/benchmark.h>

#include "lmpkit/model.hpp"
#include "lmpkit/ops.hpp"
#include "lmpkit/pooling.hpp"

namespace {

lmpkit::Tensor random_tensor(lmpkit::Shape shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    lmpkit::Tensor t(std::move(shape));
    for (double& v : t.data()) v = d(rng);
    return t;
}

// Layer shapes of the default toy backbone: (cin, cout, in_size, stride).
void BM_ConvForward(benchmark::State& state) {
    const auto cin = static_cast<std::size_t>(state.range(0));
    const auto cout = static_cast<std::size_t>(state.range(1));
    const auto size = static_cast<std::size_t>(state.range(2));
    const auto stride = static_cast<std::size_t>(state.range(3));
    const auto x = random_tensor({1, cin, size, size}, 1);
    const auto k = random_tensor({cout, cin, 3, 3}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(lmpkit::conv2d_forward(x, k, {stride, 1}));
}
BENCHMARK(BM_ConvForward)->Args({1, 16, 32, 1})->Args({16, 32, 32, 2})->Args({32, 32, 16, 2});

void BM_ConvBackward(benchmark::State& state) {
    const auto cin = static_cast<std::size_t>(state.range(0));
    const auto cout = static_cast<std::size_t>(state.range(1));
    const auto size = static_cast<std::size_t>(state.range(2));
    const auto stride = static_cast<std::size_t>(state.range(3));
    const auto x = random_tensor({1, cin, size, size}, 1);
    const auto k = random_tensor({cout, cin, 3, 3}, 2);
    const auto y = lmpkit::conv2d_forward(x, k, {stride, 1});
    const auto g = random_tensor(y.shape(), 3);
    for (auto _ : state) benchmark::DoNotOptimize(lmpkit::conv2d_backward(x, k, g, {stride, 1}));
}
BENCHMARK(BM_ConvBackward)->Args({1, 16, 32, 1})->Args({16, 32, 32, 2})->Args({32, 32, 16, 2});

void BM_PoolForward(benchmark::State& state) {
    const auto kind = static_cast<lmpkit::PoolingKind>(state.range(0));
    const auto x = random_tensor({32, 32, 8, 8}, 4);
    const lmpkit::PoolingKernel kernel{kind, 0.1};
    for (auto _ : state) benchmark::DoNotOptimize(lmpkit::pool_forward(x, kernel));
}
BENCHMARK(BM_PoolForward)->Arg(0)->Arg(1)->Arg(2);

void BM_PoolForwardMatvec(benchmark::State& state) {
    const auto x = random_tensor({32, 32, 8, 8}, 4);
    for (auto _ : state) benchmark::DoNotOptimize(lmpkit::pool_forward_matvec(x, lmpkit::PoolingKernel::leaky_max()));
}
BENCHMARK(BM_PoolForwardMatvec);

}  // namespace
