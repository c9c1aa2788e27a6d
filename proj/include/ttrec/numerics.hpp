// Shared scalar/vector kernels: softmax, sigmoid, KL divergence, cosine
// similarity and a central-difference gradient oracle.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>

#include "ttrec/matrix.hpp"

namespace ttrec {

inline constexpr double kProbFloor = 1e-12;

inline double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Stable softmax (max subtraction). Output sums to 1.
inline Vector softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    const double mx = *std::max_element(logits.begin(), logits.end());
    if (!std::isfinite(mx)) throw std::invalid_argument("softmax: non-finite logit");
    Vector out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

// KL(P || Q) = sum_i p_i log(p_i / q_i), with 0 log(0/q) = 0 and q floored
// at kProbFloor before the division.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        s += p[i] * std::log(p[i] / std::max(q[i], kProbFloor));
    }
    return s;
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: length mismatch");
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na <= 1e-12) throw std::invalid_argument("cosine_similarity: first vector has zero norm");
    if (nb <= 1e-12) throw std::invalid_argument("cosine_similarity: second vector has zero norm");
    return dot(a, b) / (na * nb);
}

// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h.
inline Vector finite_diff_gradient(const std::function<double(const Vector&)>& f,
                                   const Vector& theta, double h) {
    Vector grad(theta.size());
    Vector x = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_gradient: non-finite function value");
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

inline double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

// True when v is a probability vector: entries in [0,1], sum within tol of 1.
inline bool is_prob_vector(std::span<const double> v, double tol = 1e-9) {
    double s = 0.0;
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0 + tol)) return false;
        s += x;
    }
    return std::abs(s - 1.0) <= tol;
}

}  // namespace ttrec
