#ifndef FDM_CORE_RNG_HPP
#define FDM_CORE_RNG_HPP

#include <cstdint>
#include <vector>

namespace fdm {

// Counter-based substreams: sample k of chunk c under seed s is a pure
// function of (s, c, k), so parallel chunk evaluation is reproducible.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t chunk)
        : state_(mix(seed ^ 0x9e3779b97f4a7c15ull ^ (chunk * 0xbf58476d1ce4e5b9ull))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in the open interval (0,1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal();

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

// Inverse standard normal CDF (Wichura's AS 241, double precision).
double inverse_normal_cdf(double p);

// Scrambled Halton sequence mapped through the inverse normal CDF.
// Digit permutations are drawn per (seed, axis), Warnock-style shifts plus a
// random permutation of the base digits.
class ScrambledHaltonNormal {
public:
    ScrambledHaltonNormal(int dim, std::uint64_t seed, std::uint64_t index_offset = 0);

    // Fills z with the next point, each coordinate standard-normal distributed.
    void next(std::vector<double>& z);

private:
    double radical_inverse(int axis, std::uint64_t n) const;
    int dim_;
    std::uint64_t index_;
    std::vector<int> bases_;
    std::vector<std::vector<int>> perms_;  // per-axis digit permutation
    std::vector<double> shifts_;           // per-axis rotation
};

}  // namespace fdm

#endif
