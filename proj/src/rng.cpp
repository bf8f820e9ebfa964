#include "sinrmac/rng.hpp"

#include <limits>

namespace sinrmac {

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t combine_seed(std::uint64_t a, std::uint64_t b)
{
    return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

std::uint64_t hash_tag(std::string_view tag)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x00000100000001b3ULL;
    }
    return h;
}

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi)
{
    if (hi <= lo)
        return lo;
    const std::uint64_t span = hi - lo;
    if (span == std::numeric_limits<std::uint64_t>::max())
        return engine_();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return lo + v % range;
}

Rng per_node_rng(std::uint64_t master_seed, std::uint32_t node_id, std::string_view stream_tag)
{
    return Rng(combine_seed(combine_seed(master_seed, node_id), hash_tag(stream_tag)));
}

Rng per_node_rng(std::uint64_t master_seed, std::uint32_t node_id, std::string_view stream_tag,
                 std::uint64_t k1, std::uint64_t k2)
{
    std::uint64_t s = combine_seed(combine_seed(master_seed, node_id), hash_tag(stream_tag));
    return Rng(combine_seed(combine_seed(s, k1), k2));
}

Rng substream(std::uint64_t seed, std::uint64_t index)
{
    return Rng(combine_seed(seed, index));
}

} // namespace sinrmac
