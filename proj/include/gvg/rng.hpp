#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace gvg {

// splitmix64 round. Used both as the generator step and as the mixer for
// deriving counter-based substreams.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic PRNG with explicitly specified arithmetic. No std::
// distributions anywhere: their sequences are implementation-defined and
// would break bitwise reproducibility of generated data and checkpoints.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(mix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

    // Independent stream keyed by (seed, stream): sample i of a dataset uses
    // substream(seed, i) so generation order and worker count don't matter.
    static Rng substream(uint64_t seed, uint64_t stream) {
        return Rng(mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL));
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the spare is cached so one call consumes one normal.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n). Modulo bias is < 2^-32 for desk-scale n.
    int64_t uniform_int(int64_t n) {
        return static_cast<int64_t>(next_u64() % static_cast<uint64_t>(n));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; i--) {
            std::swap(v[i], v[uniform_int(i + 1)]);
        }
    }

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gvg
