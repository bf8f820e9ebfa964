#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sinrmac {

/// SplitMix64 finalizer. Used to derive independent seeds from structured keys.
std::uint64_t mix64(std::uint64_t x);

/// Order-sensitive combination of two 64-bit keys.
std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b);

/// FNV-1a over the bytes of a tag string.
std::uint64_t hash_tag(std::string_view tag);

// Random stream with platform-stable output. The engine is std::mt19937_64,
// whose sequence is fixed by the standard; conversions to doubles and bounded
// integers are done here because the <random> distributions are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [lo, hi], inclusive, without modulo bias.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

private:
    std::mt19937_64 engine_;
};

/// Stream for (master_seed, node, tag). Stable across runs and platforms.
Rng per_node_rng(std::uint64_t master_seed, std::uint32_t node_id, std::string_view stream_tag);

/// Stream keyed by additional integers, e.g. (epoch, phase).
Rng per_node_rng(std::uint64_t master_seed, std::uint32_t node_id, std::string_view stream_tag,
                 std::uint64_t k1, std::uint64_t k2 = 0);

/// Substream i of a seed; the mapping used when trials are partitioned.
Rng substream(std::uint64_t seed, std::uint64_t index);

} // namespace sinrmac
