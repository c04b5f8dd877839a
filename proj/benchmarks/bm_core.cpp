#include <benchmark/benchmark.h>

#include "turbmt/rng.hpp"
#include "turbmt/scan_order.hpp"
#include "turbmt/ssm.hpp"
#include "turbmt/warp.hpp"
#include "turbmt/zernike.hpp"

using namespace turbmt;

namespace {

std::vector<ssm::StepParams> make_params(int L, int N, uint64_t seed) {
    Rng rng(seed);
    std::vector<ssm::StepParams> params(L);
    for (auto& p : params) {
        p.a_bar.resize(N);
        p.b_bar.resize(N);
        p.c.resize(N);
        for (int i = 0; i < N; ++i) {
            p.a_bar[i] = 0.3 + 0.65 * rng.next_unit();
            p.b_bar[i] = rng.next_gaussian();
            p.c[i] = rng.next_gaussian();
        }
        p.d = 0.5;
    }
    return params;
}

void BM_parallel_scan(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    auto params = make_params(L, 8, 3);
    Rng rng(4);
    std::vector<double> x(L);
    for (double& v : x) v = rng.next_gaussian();
    for (auto _ : state) {
        auto y = ssm::parallel_scan(params, x);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetComplexityN(L);
}
BENCHMARK(BM_parallel_scan)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void BM_recurrence(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    auto params = make_params(L, 8, 3);
    Rng rng(4);
    std::vector<double> x(L);
    for (double& v : x) v = rng.next_gaussian();
    for (auto _ : state) {
        auto y = ssm::recurrence(params, x);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetComplexityN(L);
}
BENCHMARK(BM_recurrence)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void BM_attention_baseline(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    Rng rng(5);
    std::vector<double> x(L);
    for (double& v : x) v = rng.next_gaussian();
    for (auto _ : state) {
        auto y = ssm::attention_baseline(x);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetComplexityN(L);
}
BENCHMARK(BM_attention_baseline)->RangeMultiplier(2)->Range(1 << 8, 1 << 12)->Complexity();

void BM_warp(benchmark::State& state) {
    const int S = static_cast<int>(state.range(0));
    Rng rng(6);
    Tensor img(1, S, S, 1), tilt(1, S, S, 2);
    for (double& v : img.raw()) v = rng.next_unit();
    for (double& v : tilt.raw()) v = rng.next_gaussian();
    for (auto _ : state) {
        auto out = sim::warp(img, tilt);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_warp)->Arg(64)->Arg(128)->Arg(256);

void BM_build_permutation(benchmark::State& state) {
    for (auto _ : state) {
        auto p = scan::build_permutation(scan::Order::LocalHilbert, 4, 128, 128, 8);
        benchmark::DoNotOptimize(p.inverse.data());
    }
}
BENCHMARK(BM_build_permutation);

void BM_zernike_basis(benchmark::State& state) {
    for (auto _ : state) {
        auto b = zernike::build_zernike_basis(36, 128);
        benchmark::DoNotOptimize(b.tables.data());
    }
}
BENCHMARK(BM_zernike_basis);

}  // namespace

BENCHMARK_MAIN();
