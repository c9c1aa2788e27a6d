// Numerical verification of the convexity/smoothness/gradient bounds of
// cross-entropy over softmax and of the aligned-step improvement guarantee.
// The improvement check runs on a convex surrogate (CE over softmax of the
// parameter vector itself) where the hypotheses provably hold; the deep
// model only gets a logged alignment diagnostic.
#pragma once

#include <cmath>
#include <vector>

#include <json.hpp>

#include "ttrec/loss_grad.hpp"
#include "ttrec/matrix.hpp"
#include "ttrec/numerics.hpp"
#include "ttrec/rng.hpp"

namespace ttrec {

// Hessian of -log softmax(g)_c with respect to the logits:
// M_ij = -y_i y_j for i != j, y_i - y_i^2 on the diagonal.
inline Matrix ce_hessian(const Vector& probs) {
    const std::size_t n = probs.size();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = i == j ? probs[i] - probs[i] * probs[i] : -probs[i] * probs[j];
    return m;
}

// Single-instance CE over softmax: loss and its closed-form gradient
// (y_hat - onehot_c).
inline double ce_instance_loss(const Vector& logits, int true_class) {
    const Vector probs = softmax(logits);
    return -std::log(std::max(probs[true_class], kProbFloor));
}

inline Vector ce_instance_grad(const Vector& logits, int true_class) {
    Vector g = softmax(logits);
    g[true_class] -= 1.0;
    return g;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Fine for the
// small (N <= 100) Hessians checked here.
inline Vector symmetric_eigenvalues(Matrix a) {
    require(a.rows == a.cols, "symmetric_eigenvalues: matrix must be square");
    const std::size_t n = a.rows;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-18) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vector eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

// ---------------------------------------------------------------------------

struct Theorem1Report {
    int trials = 0;
    int passes = 0;
    double worst_min_eig = std::numeric_limits<double>::infinity();
    double worst_max_eig = -std::numeric_limits<double>::infinity();
    double worst_grad_norm = 0.0;

    bool all_passed() const { return passes == trials; }

    nlohmann::ordered_json to_json() const {
        return {{"trials", trials},
                {"passes", passes},
                {"worst_min_eig", trials ? worst_min_eig : 0.0},
                {"worst_max_eig", trials ? worst_max_eig : 0.0},
                {"worst_grad_norm", worst_grad_norm}};
    }
};

// For random CE instances: Hessian PSD (convexity), eigenvalues bounded by 2
// (beta-smoothness), gradient norm bounded by 2.
inline Theorem1Report verify_theorem1(int samples, int n_max, Rng& rng, double slack = 1e-8) {
    require(n_max >= 1, "verify_theorem1: n_max must be >= 1");
    Theorem1Report rep;
    rep.trials = samples;
    for (int t = 0; t < samples; ++t) {
        const std::size_t n = 1 + rng.uniform_int(std::uint64_t(n_max));
        Vector logits(n);
        for (double& x : logits) x = rng.gaussian(0.0, 3.0);
        const int c = int(rng.uniform_int(n));
        const Vector probs = softmax(logits);
        const Vector eig = symmetric_eigenvalues(ce_hessian(probs));
        const Vector grad = ce_instance_grad(logits, c);
        const double gnorm = norm2(grad);
        rep.worst_min_eig = std::min(rep.worst_min_eig, eig.front());
        rep.worst_max_eig = std::max(rep.worst_max_eig, eig.back());
        rep.worst_grad_norm = std::max(rep.worst_grad_norm, gnorm);
        if (eig.front() >= -slack && eig.back() <= 2.0 + slack && gnorm <= 2.0 + slack)
            ++rep.passes;
    }
    return rep;
}

struct Theorem2Report {
    int trials = 0;
    int condition_met = 0;
    int passes = 0;
    double mean_decrease = 0.0;

    bool all_passed() const { return passes == condition_met; }

    nlohmann::ordered_json to_json() const {
        return {{"trials", trials},
                {"condition_met", condition_met},
                {"passes", passes},
                {"mean_decrease", mean_decrease}};
    }
};

struct Theorem2Config {
    double epsilon = 0.01;
    double beta = 2.0;
    double bound = 2.0;  // B, also caps the sampled SSL gradient norm
    int n_max = 10;
};

// Convex surrogate: L_SUP(theta) = CE over softmax(theta). Per trial an SSL
// gradient direction with norm <= B is drawn; whenever its inner product
// with the supervised gradient exceeds epsilon, the step
// theta' = theta - (epsilon / (beta B^2)) * t must strictly decrease L_SUP.
inline Theorem2Report verify_theorem2(const Theorem2Config& cfg, int trials, Rng& rng) {
    require(cfg.epsilon > 0.0 && cfg.beta > 0.0 && cfg.bound > 0.0,
            "verify_theorem2: constants must be positive");
    Theorem2Report rep;
    rep.trials = trials;
    const double delta = cfg.epsilon / (cfg.beta * cfg.bound * cfg.bound);
    double decrease_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        const std::size_t n = 2 + rng.uniform_int(std::uint64_t(cfg.n_max - 1));
        Vector theta(n);
        for (double& x : theta) x = rng.gaussian(0.0, 2.0);
        const int c = int(rng.uniform_int(n));

        Vector ssl_grad(n);
        for (double& x : ssl_grad) x = rng.gaussian(0.0, 1.0);
        const double target_norm = rng.uniform() * cfg.bound;
        const double cur = norm2(ssl_grad);
        if (cur > 0.0)
            for (double& x : ssl_grad) x *= target_norm / cur;

        const Vector sup_grad = ce_instance_grad(theta, c);
        const double align = dot(sup_grad, ssl_grad);
        if (!(align > cfg.epsilon)) continue;
        ++rep.condition_met;

        Vector stepped = theta;
        for (std::size_t i = 0; i < n; ++i) stepped[i] -= delta * ssl_grad[i];
        const double before = ce_instance_loss(theta, c);
        const double after = ce_instance_loss(stepped, c);
        if (after < before) {
            ++rep.passes;
            decrease_sum += before - after;
        }
    }
    rep.mean_decrease = rep.condition_met ? decrease_sum / rep.condition_met : 0.0;
    return rep;
}

// Diagnostic on the real model: inner product of the flattened CE gradient
// (labeled batch) with the flattened dual-SSL gradient (unlabeled pairs
// against fixed centers). No pass/fail; the deep model is non-convex.
inline double measure_alignment(const RecommenderModel& m, const Matrix& user_feats,
                                const Matrix& item_feats, const Histories& hist,
                                const CEBatch& labeled,
                                std::span<const std::pair<int, int>> ssl_pairs,
                                const Matrix& centers, const TTTParams& prm) {
    ModelGrads ce_grads = ModelGrads::zeros_like(m);
    ce_batch_loss(m, user_feats, item_feats, hist, labeled, &ce_grads);
    ModelGrads ssl_grads = ModelGrads::zeros_like(m);
    ttt_batch_loss(m, user_feats, item_feats, hist, ssl_pairs, centers, prm, &ssl_grads);
    const Vector a = flatten_gradients(ce_grads);
    const Vector b = flatten_gradients(ssl_grads);
    return dot(a, b);
}

}  // namespace ttrec
