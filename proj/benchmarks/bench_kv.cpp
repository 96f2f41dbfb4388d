#include <benchmark/benchmark.h>

#include "forge/kv.hpp"

namespace {

std::string document(int keys) {
    forge::KvDocument doc;
    for (int i = 0; i < keys; ++i) doc.set("element." + std::to_string(i) + ".name", "value number " + std::to_string(i));
    return doc.serialize();
}

void BM_KvParse(benchmark::State& state) {
    auto text = document(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(forge::KvDocument::parse(text));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_KvParse)->Arg(16)->Arg(1024);

void BM_KvSerialize(benchmark::State& state) {
    auto doc = forge::KvDocument::parse(document(static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(doc.serialize());
}
BENCHMARK(BM_KvSerialize)->Arg(16)->Arg(1024);

}  // namespace
