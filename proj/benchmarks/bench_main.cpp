#include <benchmark/benchmark.h>

#include "rebasin/costs.hpp"
#include "rebasin/data.hpp"
#include "rebasin/hungarian.hpp"
#include "rebasin/sinkhorn.hpp"

using namespace rebasin;

namespace {

Matrix random_square(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, n);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform(-5.0, 5.0);
    return m;
}

void bm_sinkhorn(benchmark::State& state) {
    const Matrix x = random_square(state.range(0), 1);
    SinkhornConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(sinkhorn(x, cfg));
}
BENCHMARK(bm_sinkhorn)->Arg(32)->Arg(64)->Arg(128);

void bm_sinkhorn_vjp(benchmark::State& state) {
    const Matrix x = random_square(state.range(0), 2);
    const Matrix up = random_square(state.range(0), 3);
    SinkhornConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(sinkhorn_vjp(x, cfg, up));
}
BENCHMARK(bm_sinkhorn_vjp)->Arg(32)->Arg(64);

void bm_hungarian(benchmark::State& state) {
    const Matrix m = random_square(state.range(0), 4);
    for (auto _ : state) benchmark::DoNotOptimize(hungarian(m, Objective::maximize));
}
BENCHMARK(bm_hungarian)->Arg(32)->Arg(128)->Arg(256);

void bm_mlp_forward(benchmark::State& state) {
    const Mlp m = init_mlp({784, static_cast<std::size_t>(state.range(0)),
                            static_cast<std::size_t>(state.range(0)), 10},
                           Activation::relu, InitKind::glorot, 5);
    const Matrix batch = random_square(784, 6);  // 784 rows reused as a batch
    for (auto _ : state) benchmark::DoNotOptimize(forward(m, batch));
}
BENCHMARK(bm_mlp_forward)->Arg(64)->Arg(128);

void bm_c_l2_eval(benchmark::State& state) {
    const std::size_t w = state.range(0);
    const Mlp a = init_mlp({10, w, w, 10}, Activation::tanh, InitKind::glorot, 7);
    const Mlp b = init_mlp({10, w, w, 10}, Activation::tanh, InitKind::glorot, 8);
    std::vector<Matrix> params{random_square(w, 9), random_square(w, 10)};
    SinkhornConfig sk;
    for (auto _ : state)
        benchmark::DoNotOptimize(eval_c_l2(params, a, b, sk));
}
BENCHMARK(bm_c_l2_eval)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
