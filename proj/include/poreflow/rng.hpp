#pragma once
#include <cstdint>

namespace pf {

// splitmix64 stream; the algorithm name is recorded in run outputs so results
// can be reproduced outside this codebase
struct SplitMix64 {
    uint64_t state;
    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0, 1) from the top 53 bits
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    // uniform index in [0, n)
    int pick(int n) {
        int i = int(uniform() * double(n));
        return i < n ? i : n - 1;
    }

    static constexpr const char* algorithm = "splitmix64";
};

} // namespace pf
