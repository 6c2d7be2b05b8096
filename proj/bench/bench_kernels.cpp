// Serial reference vs OpenMP kernels on random attribute data.

#include <numeric>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dtmon/kernels.hpp"

using namespace dtmon;

namespace {

std::vector<LabeledSample> random_samples(std::size_t n) {
    std::mt19937_64 rng(n);
    std::normal_distribution<double> g(0.0, 1.0);
    std::bernoulli_distribution b(0.2);
    std::vector<LabeledSample> out(n);
    for (auto& s : out) {
        for (auto& v : s.attributes.values) v = g(rng);
        s.label = b(rng) ? Label::Interfere : Label::NotInterfere;
    }
    return out;
}

template <auto Kernel>
void neighbors(benchmark::State& state) {
    const auto samples = random_samples(static_cast<std::size_t>(state.range(0)));
    kernels::Weights w;
    w.fill(1.0);
    const AttributeVector center{};
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(samples, center, w, 1.5, kNumAttributes));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void split(benchmark::State& state) {
    const auto samples = random_samples(static_cast<std::size_t>(state.range(0)));
    std::vector<std::size_t> rows(samples.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const std::vector<std::size_t> attrs{0, 1, 2, 3, 4, 5, 6, 7};
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(samples, rows, attrs, 5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(neighbors<kernels::neighbors_within_serial>)->Name("neighbors_within/serial")->Arg(10'000)->Arg(100'000);
BENCHMARK(neighbors<kernels::neighbors_within>)->Name("neighbors_within/omp")->Arg(10'000)->Arg(100'000);
BENCHMARK(split<kernels::best_split_serial>)->Name("best_split/serial")->Arg(1'000)->Arg(10'000);
BENCHMARK(split<kernels::best_split>)->Name("best_split/omp")->Arg(1'000)->Arg(10'000);

BENCHMARK_MAIN();
