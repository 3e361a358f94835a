#pragma once

// Self-contained xoshiro256++ generator with the distributions the campaign
// runners need. std::mt19937 plus <random> distributions would work on one
// platform, but the standard leaves distribution algorithms unspecified, and
// campaign outputs must be byte-identical everywhere. Keeping the whole chain
// in-tree pins the stream.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace relight {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    // Independent stream for a trial index; campaigns draw one per trial so
    // thread count cannot affect results.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t sm = seed ^ (0x6a09e667f3bcc909ull + index * 0x9e3779b97f4a7c15ull);
        splitmix64(sm);
        return Rng(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive bounds; rejection keeps the draw unbiased.
    int uniform_int(int lo, int hi) {
        if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t draw;
        do {
            draw = next_u64();
        } while (draw >= limit);
        return lo + static_cast<int>(draw % span);
    }

    // Box-Muller, cosine branch only; u is bumped away from 0 so log stays finite.
    double normal() {
        const double u = uniform() + 0x1.0p-54;
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
    }

    // Marsaglia-Tsang; boost trick below shape 1.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = uniform() + 0x1.0p-54;
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform() + 0x1.0p-54;
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    Eigen::VectorXd dirichlet(int n, double alpha) {
        if (n < 1) throw std::invalid_argument("dirichlet: need at least one component");
        Eigen::VectorXd draw(n);
        for (int i = 0; i < n; ++i) draw[i] = gamma(alpha);
        const double total = draw.sum();
        if (total <= 0.0) return Eigen::VectorXd::Constant(n, 1.0 / n);
        return draw / total;
    }

    Eigen::Vector3d unit_vector() {
        for (;;) {
            Eigen::Vector3d v(normal(), normal(), normal());
            const double len = v.norm();
            if (len > 1e-12) return v / len;
        }
    }

  private:
    std::uint64_t state_[4];
};

}  // namespace relight
