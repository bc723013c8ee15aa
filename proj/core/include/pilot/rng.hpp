#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace pilot {

/// SplitMix64 finaliser; a bijective mixer used to derive stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of the independent stream for replication `index` under master `seed`.
/// Depends only on (seed, index), so results do not depend on thread count.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Per-replication generator: 64-bit Mersenne Twister seeded from
/// stream_seed, ziggurat normals.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t index) : engine_(stream_seed(seed, index)) {}

    double normal() { return normal_(engine_); }
    /// Uniform on [0, 1).
    double uniform() { return uniform_(engine_); }

private:
    boost::random::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_{0.0, 1.0};
    boost::random::uniform_01<double> uniform_;
};

}  // namespace pilot
