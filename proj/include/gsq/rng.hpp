#pragma once

#include <cstdint>
#include <random>

namespace gsq {

// splitmix64; used only to spread (seed, stream id) pairs into well-separated
// engine seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// One stochastic stream. Every run owns a fixed set of substreams (arrivals,
/// per-group services, patience) so that runs with a common base seed stay
/// synchronized when a single parameter is varied.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform draw strictly inside (0,1); log(u) is always finite.
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t substream_seed(std::uint64_t base_seed, std::uint64_t stream_id) {
    std::uint64_t s = base_seed;
    splitmix64(s);
    s ^= 0xd1b54a32d192ed03ULL * (stream_id + 1);
    return splitmix64(s);
}

inline RngStream make_substream(std::uint64_t base_seed, std::uint64_t stream_id) {
    return RngStream(substream_seed(base_seed, stream_id));
}

}  // namespace gsq
