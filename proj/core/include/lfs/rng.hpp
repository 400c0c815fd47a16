#ifndef LFS_RNG_HPP
#define LFS_RNG_HPP

#include <array>
#include <cstdint>
#include <initializer_list>

namespace lfs {

// Deterministic xoshiro256++ stream. Every stochastic choice in the
// pipeline (pairing, attack sampling, weight init) draws from one of
// these, so a run is fully reproducible from its seed. Distribution
// helpers are implemented by hand rather than with <random> adapters:
// the standard distributions are implementation-defined and would tie
// reproducibility to a particular libstdc++.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t next_u64();

    // [0, 1), 53-bit resolution
    double uniform();
    double uniform(double lo, double hi);

    // [0, n)
    std::uint64_t uniform_int(std::uint64_t n);

    // Box-Muller, no caching so the draw count per call is fixed.
    double normal();
    double normal(double mean, double stddev);

    bool bernoulli(double p);

    // Independent child stream; deterministic in (parent seed, stream id).
    SeededRng split(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }
    std::array<std::uint64_t, 4> state() const { return s_; }
    void set_state(const std::array<std::uint64_t, 4>& s) { s_ = s; }

private:
    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> s_{};
};

// Hash a seed with a path of tags (epoch, step, item, purpose ids) into
// a fresh stream. Used to give every batch item its own attack stream
// regardless of thread scheduling.
std::uint64_t hash_path(std::uint64_t seed, std::initializer_list<std::uint64_t> path);
SeededRng derive_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

} // namespace lfs

#endif
