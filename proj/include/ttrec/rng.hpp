// Seeded random source with named sub-streams. One root generator per run,
// forked by purpose (datagen, init, shuffle, ...) so that adding a consumer
// never perturbs the draws of another. Gaussian sampling is done in-house
// (polar Box-Muller) because std::normal_distribution is not bit-stable
// across standard libraries.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "ttrec/matrix.hpp"

namespace ttrec {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    // Independent stream derived from this one's seed and a label.
    Rng fork(std::string_view stream) const { return Rng(seed_ ^ fnv1a64(stream)); }

    std::uint64_t seed() const { return seed_; }

    double uniform() {  // [0, 1)
        return (engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    std::uint64_t uniform_int(std::uint64_t n) {  // [0, n)
        // rejection sampling keeps the draw unbiased
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / n * n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    double gaussian(double mean, double std) {
        if (std < 0.0) throw std::invalid_argument("gaussian: std must be >= 0");
        if (have_spare_) {
            have_spare_ = false;
            return mean + std * spare_;
        }
        double u, w, s;
        do {
            u = 2.0 * uniform() - 1.0;
            w = 2.0 * uniform() - 1.0;
            s = u * u + w * w;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = w * m;
        have_spare_ = true;
        return mean + std * u * m;
    }

    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            std::size_t j = uniform_int(i);
            std::swap(xs[i - 1], xs[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline Matrix sample_gaussian(Rng& rng, double mean, double std, std::size_t rows,
                              std::size_t cols) {
    if (std < 0.0) throw std::invalid_argument("sample_gaussian: std must be >= 0");
    Matrix m(rows, cols);
    for (double& x : m.v) x = rng.gaussian(mean, std);
    return m;
}

// Entrywise Bernoulli draws; p holds probabilities in [0, 1].
inline Matrix sample_bernoulli(Rng& rng, const Matrix& p) {
    Matrix m(p.rows, p.cols);
    for (std::size_t i = 0; i < p.v.size(); ++i) {
        const double pi = p.v[i];
        if (!(pi >= 0.0 && pi <= 1.0))
            throw std::invalid_argument("sample_bernoulli: probability outside [0,1]");
        m.v[i] = rng.uniform() < pi ? 1.0 : 0.0;
    }
    return m;
}

}  // namespace ttrec
