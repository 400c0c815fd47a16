#include "lfs/rng.hpp"

#include <cmath>

#include "lfs/errors.hpp"

namespace lfs {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double SeededRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t SeededRng::uniform_int(std::uint64_t n) {
    require(n > 0, "uniform_int: n must be positive");
    // Rejection sampling keeps the draw unbiased for any n.
    const std::uint64_t limit = ~0ull - (~0ull % n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double SeededRng::normal() {
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double SeededRng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

bool SeededRng::bernoulli(double p) {
    return uniform() < p;
}

SeededRng SeededRng::split(std::uint64_t stream) const {
    return derive_rng(seed_, {stream});
}

std::uint64_t hash_path(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t x = seed;
    std::uint64_t h = splitmix64(x);
    for (std::uint64_t tag : path) {
        std::uint64_t t = tag ^ 0xa0761d6478bd642full;
        h ^= splitmix64(t) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

SeededRng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return SeededRng(hash_path(seed, path));
}

} // namespace lfs
