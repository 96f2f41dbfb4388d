#include <benchmark/benchmark.h>

#include <random>

#include "forge/splitmerge.hpp"

namespace {

forge::Histogram random_histogram(int bins, std::mt19937& rng) {
    forge::Histogram h{"counts", bins, 0, 100, std::vector<double>(static_cast<std::size_t>(bins))};
    std::uniform_int_distribution<int> d(0, 50);
    for (auto& c : h.counts) c = d(rng);
    return h;
}

void BM_MergeHistograms(benchmark::State& state) {
    std::mt19937 rng(1);
    std::vector<forge::Histogram> parts;
    for (int i = 0; i < state.range(0); ++i) parts.push_back(random_histogram(100, rng));
    for (auto _ : state) benchmark::DoNotOptimize(forge::merge_histograms(parts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MergeHistograms)->RangeMultiplier(4)->Range(2, 512);

void BM_ParseHistogram(benchmark::State& state) {
    std::mt19937 rng(2);
    auto text = forge::format_histogram(random_histogram(static_cast<int>(state.range(0)), rng));
    for (auto _ : state) benchmark::DoNotOptimize(forge::parse_histogram(text));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseHistogram)->Arg(10)->Arg(1000);

void BM_MergeTables(benchmark::State& state) {
    std::vector<forge::Table> parts;
    for (int i = 0; i < state.range(0); ++i) {
        std::string text = "file\tn\n";
        for (int r = 0; r < 50; ++r) text += "f" + std::to_string(r) + "\t" + std::to_string(r * i) + "\n";
        parts.push_back(forge::parse_table(text));
    }
    for (auto _ : state) benchmark::DoNotOptimize(forge::merge_tables(parts));
}
BENCHMARK(BM_MergeTables)->Arg(4)->Arg(64);

}  // namespace
