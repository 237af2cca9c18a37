#pragma once

#include <cstdint>

namespace normnet {

struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

// Counter-based generator: output i of stream (seed, stream) is a pure function
// of the triple, so trials can be replayed or split across threads freely.
class CounterRng {
public:
    explicit CounterRng(RngSpec spec) : key_(mix(spec.seed ^ 0x243f6a8885a308d3ULL) ^ mix(spec.stream_id + 0x9e3779b97f4a7c15ULL)) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream) : CounterRng(RngSpec{seed, stream}) {}

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // uniform on [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int sign() { return (next_u64() >> 63) ? 1 : -1; }

    std::uint64_t counter() const { return counter_; }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace normnet
