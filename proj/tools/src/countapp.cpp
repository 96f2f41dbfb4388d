// Demo payload: counts pattern occurrences per input file and histograms
// the per-file counts.
//
// Environment: FORGE_INPUT_FILES (space separated), FORGE_PARAM_PATTERN,
// optional FORGE_PARAM_NBINS / FORGE_PARAM_LO / FORGE_PARAM_HI.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "forge/splitmerge.hpp"
#include "forge/strings.hpp"

namespace {

std::string env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

long count_in(const std::string& path, const std::string& pattern) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    long n = 0;
    for (auto pos = text.find(pattern); pos != std::string::npos; pos = text.find(pattern, pos + pattern.size())) ++n;
    return n;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        std::string pattern = env_or("FORGE_PARAM_PATTERN", "");
        if (pattern.empty()) {
            std::cerr << "countapp: FORGE_PARAM_PATTERN is not set\n";
            return 2;
        }
        forge::Histogram h;
        h.name = "counts";
        h.nbins = std::stoi(env_or("FORGE_PARAM_NBINS", "10"));
        h.lo = std::stod(env_or("FORGE_PARAM_LO", "0"));
        h.hi = std::stod(env_or("FORGE_PARAM_HI", "100"));
        h.counts.assign(static_cast<std::size_t>(h.nbins), 0.0);
        for (const auto& file : forge::split(env_or("FORGE_INPUT_FILES", ""), ' ')) {
            if (file.empty()) continue;
            long n = count_in(std::string(file), pattern);
            std::cout << file << "\t" << n << "\n";
            h.fill(static_cast<double>(n));
        }
        std::ofstream out(argc > 1 ? argv[1] : "counts.hist", std::ios::binary);
        out << forge::format_histogram(h);
        return out ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "countapp: " << e.what() << "\n";
        return 1;
    }
}
