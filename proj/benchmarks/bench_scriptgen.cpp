#include <benchmark/benchmark.h>

#include "forge/scriptgen.hpp"

namespace {

forge::Job job(int steps) {
    forge::Job j;
    j.id = "j000001";
    j.name = "bench";
    j.application.name = "generic";
    j.application.version = "1.0";
    j.workflow.elements.push_back(forge::InputFile{"in.txt", ""});
    for (int i = 0; i < steps; ++i)
        j.workflow.elements.push_back(forge::Executable{"echo", {"step", std::to_string(i), "two words"}});
    j.workflow.elements.push_back(forge::OutputFile{"out.txt", ""});
    j.requirements.entries = {{"MinMemoryMB", 512.0}, {"Queue", std::string("short")}};
    return j;
}

void BM_GenerateScript(benchmark::State& state) {
    auto j = job(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(forge::generate_script(j, forge::Dialect::BatchSim));
}
BENCHMARK(BM_GenerateScript)->Arg(1)->Arg(64);

void BM_GenerateAndParseJdl(benchmark::State& state) {
    auto j = job(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(forge::parse_jdl(forge::generate_jdl(j)));
}
BENCHMARK(BM_GenerateAndParseJdl)->Arg(1)->Arg(64);

}  // namespace
