#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gsched {

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random stream. mt19937_64 output is pinned by the standard,
// and all conversions are done by hand (std::* distributions are
// implementation-defined), so sequences are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    // uniform integer in [0, n)
    std::size_t index(std::size_t n) {
        // rejection-free via 128-bit multiply would be nicer; modulo bias is
        // irrelevant at the n (< a few thousand) this project uses
        return static_cast<std::size_t>(eng_() % n);
    }

    // i with probability weights[i] / sum(weights); weights must be > 0
    std::size_t weighted_index(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        const double u = uniform01() * total;
        double cum = 0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            cum += weights[i];
            if (u < cum) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    // exponential with the given mean
    double exponential(double mean) {
        double u = uniform01();
        return -mean * std::log(1.0 - u);
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace gsched
