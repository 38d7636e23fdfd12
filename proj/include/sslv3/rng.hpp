#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace sslv3 {

/// Deterministic random source. Wraps std::mt19937_64 (whose output stream is
/// pinned by the standard) and derives all values from raw 64-bit draws, so a
/// given seed produces the same sequence on every platform and toolchain.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller. One value per call; no cached spare,
    /// so the draw count is a pure function of the call count.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n).
    int64_t below(int64_t n) { return static_cast<int64_t>(gen_() % static_cast<uint64_t>(n)); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(below(i + 1));
            std::swap(p[i], p[j]);
        }
        return p;
    }

    /// Child generator with a decorrelated stream, e.g. one per epoch.
    Rng fork(uint64_t stream) {
        uint64_t s = next_u64();
        return Rng(s ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace sslv3
