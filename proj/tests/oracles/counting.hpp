#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace forge::oracle {

/// Non-overlapping occurrences, scanning one character at a time.
inline long count_occurrences(const std::string& text, const std::string& pattern) {
    long n = 0;
    std::size_t i = 0;
    while (i + pattern.size() <= text.size()) {
        bool match = true;
        for (std::size_t k = 0; k < pattern.size(); ++k)
            if (text[i + k] != pattern[k]) {
                match = false;
                break;
            }
        if (match) {
            ++n;
            i += pattern.size();
        } else {
            ++i;
        }
    }
    return n;
}

/// Integer bin counts for values in [lo, hi) with equal-width bins.
inline std::vector<long> bin_counts(const std::vector<long>& values, int nbins, double lo, double hi) {
    std::vector<long> counts(static_cast<std::size_t>(nbins), 0);
    for (long v : values) {
        double x = static_cast<double>(v);
        if (x < lo || x >= hi) continue;
        auto b = static_cast<std::size_t>(std::floor((x - lo) * nbins / (hi - lo)));
        if (b >= counts.size()) b = counts.size() - 1;
        ++counts[b];
    }
    return counts;
}

}  // namespace forge::oracle
