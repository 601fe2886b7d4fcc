// Seedable 64-bit generator with pinned transforms so that identical seeds
// reproduce identical streams on any platform:
//   - state update: splitmix64 (Steele/Lea/Flood 2014)
//   - uniform double in [0,1): top 53 bits / 2^53
//   - standard normal: Box-Muller, z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 the
//     sine twin, drawn in pairs with the second value cached
#pragma once

#include <cstdint>

#include "so3syn/so3.hpp"

namespace so3syn {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    Vec3 normal_vec3() {
        double a = normal(), b = normal(), c = normal();
        return {a, b, c};
    }

    Vec3 unit_vec3() {
        for (;;) {
            Vec3 v = normal_vec3();
            double n = norm(v);
            if (n > 1e-12) return v / n;
        }
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace so3syn
