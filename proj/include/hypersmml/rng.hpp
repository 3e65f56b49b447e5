#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hypersmml {

/// splitmix64 step, used to derive independent substream seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random source. The normal and chi-squared draws are generated
/// by fixed algorithms (Box-Muller, sums of squared normals) rather than the
/// standard-library distributions, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (no caching, so the stream position is
    /// a pure function of the number of calls).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Eigen::VectorXd normal_vector(Eigen::Index k) {
        Eigen::VectorXd z(k);
        for (Eigen::Index i = 0; i < k; ++i) z[i] = normal();
        return z;
    }

    /// Chi-squared with k degrees of freedom as a sum of squared normals.
    double chi_squared(int k) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            const double z = normal();
            s += z * z;
        }
        return s;
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace hypersmml
