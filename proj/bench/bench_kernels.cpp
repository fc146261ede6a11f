// OpenMP kernels against the serial reference implementation.
//
//   ./vsa_bench_kernels --benchmark_filter=conv
//   OMP_NUM_THREADS=4 ./vsa_bench_kernels

#include <benchmark/benchmark.h>

#include <vector>

#include "vsa/core/rng.hpp"
#include "vsa/model/kernels.hpp"

namespace {

using namespace vsa::model;

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    vsa::Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

// A VGG-style 3x3 block at reduced resolution.
ConvGeometry conv_geometry(std::size_t size) { return {8, 32, size, size, 32, 3, 1, 1}; }

template <bool Parallel>
void conv_forward(benchmark::State& state) {
    const auto g = conv_geometry(static_cast<std::size_t>(state.range(0)));
    const auto in = random_values(g.batch * g.in_channels * g.height * g.width, 1);
    const auto w = random_values(g.out_channels * g.in_channels * g.kernel * g.kernel, 2);
    const auto b = random_values(g.out_channels, 3);
    std::vector<double> out(g.batch * g.out_channels * g.out_height() * g.out_width());
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::conv2d_forward(g, in, w, b, out);
        } else {
            reference::conv2d_forward(g, in, w, b, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void conv_backward(benchmark::State& state) {
    const auto g = conv_geometry(static_cast<std::size_t>(state.range(0)));
    const auto in = random_values(g.batch * g.in_channels * g.height * g.width, 1);
    const auto w = random_values(g.out_channels * g.in_channels * g.kernel * g.kernel, 2);
    const auto go = random_values(g.batch * g.out_channels * g.out_height() * g.out_width(), 3);
    std::vector<double> gi(in.size()), gw(w.size()), gb(g.out_channels);
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::conv2d_backward(g, in, w, go, gi, gw, gb);
        } else {
            reference::conv2d_backward(g, in, w, go, gi, gw, gb);
        }
        benchmark::DoNotOptimize(gw.data());
    }
}

template <bool Parallel>
void dense_forward(benchmark::State& state) {
    const DenseGeometry g{32, static_cast<std::size_t>(state.range(0)), 512};
    const auto in = random_values(g.batch * g.in_features, 1);
    const auto w = random_values(g.in_features * g.out_features, 2);
    const auto b = random_values(g.out_features, 3);
    std::vector<double> out(g.batch * g.out_features);
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::dense_forward(g, in, w, b, out);
        } else {
            reference::dense_forward(g, in, w, b, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void maxpool_forward(benchmark::State& state) {
    const auto size = static_cast<std::size_t>(state.range(0));
    const PoolGeometry g{8, 64, size, size, 2, 2};
    const auto in = random_values(g.batch * g.channels * size * size, 1);
    std::vector<double> out(g.batch * g.channels * g.out_height() * g.out_width());
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::maxpool_forward(g, in, out);
        } else {
            reference::maxpool_forward(g, in, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void softmax(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto in = random_values(rows * 10, 1);
    std::vector<double> out(in.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::softmax_rows(rows, 10, in, out);
        } else {
            reference::softmax_rows(rows, 10, in, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(conv_forward<false>)->Name("conv_forward/reference")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_forward<true>)->Name("conv_forward/openmp")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward<false>)->Name("conv_backward/reference")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(conv_backward<true>)->Name("conv_backward/openmp")->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(dense_forward<false>)->Name("dense_forward/reference")->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(dense_forward<true>)->Name("dense_forward/openmp")->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(maxpool_forward<false>)->Name("maxpool_forward/reference")->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(maxpool_forward<true>)->Name("maxpool_forward/openmp")->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(softmax<false>)->Name("softmax_rows/reference")->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(softmax<true>)->Name("softmax_rows/openmp")->Arg(4096)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
