#include <benchmark/benchmark.h>

#include <random>

#include "forge/backends.hpp"

namespace {

void BM_SelectCe(benchmark::State& state) {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> mem(1, 16), slots(0, 8);
    std::vector<forge::ComputingElement> ces;
    std::vector<int> free;
    for (int i = 0; i < state.range(0); ++i) {
        forge::ComputingElement ce;
        ce.name = "ce" + std::to_string(i);
        ce.attributes["MemoryMB"] = 512.0 * mem(rng);
        ce.attributes["OS"] = std::string(i % 3 ? "linux" : "other");
        ce.slots = 8;
        ces.push_back(ce);
        free.push_back(slots(rng));
    }
    forge::ResourceRequirements reqs;
    reqs.entries = {{"MinMemoryMB", 4096.0}, {"OS", std::string("linux")}};
    for (auto _ : state) benchmark::DoNotOptimize(forge::select_ce(ces, free, reqs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SelectCe)->RangeMultiplier(8)->Range(8, 4096);

}  // namespace
