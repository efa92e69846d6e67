#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rebasin {

// Seeded generator shared by everything that randomizes. Determinism is
// guaranteed within a single build (std distributions are fixed per libstdc++).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    double normal(double mean, double sd) {
        return std::normal_distribution<double>(mean, sd)(gen_);
    }
    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
    }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = index(i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace rebasin
