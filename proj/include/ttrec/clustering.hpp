// Soft K-means over fused embeddings and the pieces built on top of it:
// the sharpening function, high-confidence sample selection, cluster
// division and preference-center computation.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ttrec/matrix.hpp"
#include "ttrec/numerics.hpp"
#include "ttrec/rng.hpp"

namespace ttrec {

struct ClusterState {
    Matrix centers;  // K x d
    Matrix q;        // N x K soft assignments
    Matrix p;        // N x K sharpened targets (filled by sharpen)
    double inertia = 0.0;
    double bandwidth = 1.0;
    int iterations = 0;
};

// Soft assignment kernels. The Student-t kernel (q ∝ (1+d²)^{-1}) keeps
// assignments genuinely soft regardless of the embedding scale; the Gaussian
// kernel (softmax of -d², unit temperature) saturates to one-hot once center
// distances differ by more than a few units, which happens quickly in
// high-dimensional embedding spaces.
enum class AssignKernel { student_t, gaussian };

inline AssignKernel assign_kernel_from_name(const std::string& s) {
    if (s == "student_t") return AssignKernel::student_t;
    if (s == "gaussian") return AssignKernel::gaussian;
    throw std::invalid_argument("unknown assignment kernel: " + s);
}

inline const char* assign_kernel_name(AssignKernel k) {
    return k == AssignKernel::student_t ? "student_t" : "gaussian";
}

// bandwidth rescales the squared distances before the kernel; 1 is the unit
// kernel, the pipeline passes the epoch's mean within-cluster squared
// distance so assignments stay calibrated at any embedding scale.
inline Matrix assign(const Matrix& e, const Matrix& centers,
                     AssignKernel kernel = AssignKernel::student_t, double bandwidth = 1.0) {
    require(e.cols == centers.cols, "assign: dimension mismatch");
    require(bandwidth > 0.0, "assign: bandwidth must be positive");
    Matrix q(e.rows, centers.rows);
    Vector buf(centers.rows);
    for (std::size_t n = 0; n < e.rows; ++n) {
        if (kernel == AssignKernel::gaussian) {
            for (std::size_t k = 0; k < centers.rows; ++k)
                buf[k] = -squared_distance(e.row_span(n), centers.row_span(k)) / bandwidth;
            const Vector row = softmax(buf);
            std::copy(row.begin(), row.end(), q.row(n));
        } else {
            double sum = 0.0;
            for (std::size_t k = 0; k < centers.rows; ++k) {
                buf[k] = 1.0 / (1.0 + squared_distance(e.row_span(n), centers.row_span(k)) /
                                          bandwidth);
                sum += buf[k];
            }
            for (std::size_t k = 0; k < centers.rows; ++k) q(n, k) = buf[k] / sum;
        }
    }
    return q;
}

namespace detail {

inline Matrix kmeanspp_seed(const Matrix& e, std::size_t k, Rng& rng) {
    Matrix centers(k, e.cols);
    std::vector<double> d2(e.rows, std::numeric_limits<double>::max());
    std::size_t first = rng.uniform_int(e.rows);
    std::copy(e.row(first), e.row(first) + e.cols, centers.row(0));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t n = 0; n < e.rows; ++n) {
            d2[n] = std::min(d2[n], squared_distance(e.row_span(n), centers.row_span(c - 1)));
            total += d2[n];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.uniform_int(e.rows);
        } else {
            double target = rng.uniform() * total;
            pick = e.rows - 1;
            for (std::size_t n = 0; n < e.rows; ++n) {
                target -= d2[n];
                if (target <= 0.0) {
                    pick = n;
                    break;
                }
            }
        }
        std::copy(e.row(pick), e.row(pick) + e.cols, centers.row(c));
    }
    return centers;
}

}  // namespace detail

// k-means++ seeding followed by EM refinement and a final soft assignment.
// The center update uses the hard (zero-temperature) limit of the
// responsibility-weighted mean: with genuinely soft responsibilities every
// center update is dragged toward the global centroid and the centers
// collapse onto each other whenever the embedding spread is comparable to
// the kernel bandwidth, which is exactly the regime fused recommender
// embeddings live in. Hard updates keep the centers apart; the returned Q is
// still the soft assignment against the converged centers.
inline ClusterState fit_soft_kmeans(const Matrix& e, std::size_t k, Rng& rng,
                                    AssignKernel kernel = AssignKernel::student_t,
                                    bool adaptive_bandwidth = false,
                                    double bandwidth_scale = 1.0, int max_iters = 100,
                                    double tol = 1e-6) {
    require(e.rows >= k, "fit_soft_kmeans: fewer samples than clusters");
    require(e.all_finite(), "fit_soft_kmeans: non-finite embeddings");
    ClusterState state;
    state.centers = detail::kmeanspp_seed(e, k, rng);
    for (int it = 0; it < max_iters; ++it) {
        state.iterations = it + 1;
        Matrix next(k, e.cols);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t n = 0; n < e.rows; ++n) {
            std::size_t best = 0;
            double best_d = squared_distance(e.row_span(n), state.centers.row_span(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double d = squared_distance(e.row_span(n), state.centers.row_span(c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            ++count[best];
            const double* er = e.row(n);
            double* nr = next.row(best);
            for (std::size_t d = 0; d < e.cols; ++d) nr[d] += er[d];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) {
                double* nr = next.row(c);
                for (std::size_t d = 0; d < e.cols; ++d) nr[d] /= double(count[c]);
            } else {
                std::copy(state.centers.row(c), state.centers.row(c) + e.cols, next.row(c));
            }
            shift = std::max(shift,
                             std::sqrt(squared_distance(next.row_span(c),
                                                        state.centers.row_span(c))));
        }
        state.centers = std::move(next);
        if (shift < tol) break;
    }
    if (adaptive_bandwidth) {
        double mean_min = 0.0;
        for (std::size_t n = 0; n < e.rows; ++n) {
            double best = squared_distance(e.row_span(n), state.centers.row_span(0));
            for (std::size_t c = 1; c < k; ++c)
                best = std::min(best,
                                squared_distance(e.row_span(n), state.centers.row_span(c)));
            mean_min += best;
        }
        state.bandwidth = std::max(bandwidth_scale * mean_min / double(e.rows), 1e-8);
    }
    state.q = assign(e, state.centers, kernel, state.bandwidth);
    state.inertia = 0.0;
    for (std::size_t n = 0; n < e.rows; ++n) {
        const double* qr = state.q.row(n);
        for (std::size_t c = 0; c < k; ++c)
            state.inertia += qr[c] * squared_distance(e.row_span(n), state.centers.row_span(c));
    }
    return state;
}

// p_{nk} = q_{nk}^{1/T} / sum_j q_{nj}^{1/T}, computed in log space so small
// temperatures do not underflow.
inline Matrix sharpen(const Matrix& q, double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("sharpen: temperature must be > 0");
    Matrix p(q.rows, q.cols);
    const double inv_t = 1.0 / temperature;
    Vector logits(q.cols);
    for (std::size_t n = 0; n < q.rows; ++n) {
        const double* qr = q.row(n);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < q.cols; ++k) {
            logits[k] = qr[k] > 0.0 ? inv_t * std::log(qr[k])
                                    : -std::numeric_limits<double>::infinity();
            mx = std::max(mx, logits[k]);
        }
        double sum = 0.0;
        double* pr = p.row(n);
        for (std::size_t k = 0; k < q.cols; ++k) {
            pr[k] = std::exp(logits[k] - mx);
            sum += pr[k];
        }
        for (std::size_t k = 0; k < q.cols; ++k) pr[k] /= sum;
    }
    return p;
}

struct ConfidenceSelection {
    std::vector<int> indices;  // row ids into the assignment matrix
    std::vector<int> labels;   // argmax cluster per selected row
    double threshold = 0.0;
    bool fallback_used = false;
};

// Rows whose max assignment probability reaches tau, with argmax labels.
// When fewer than 2K rows qualify, the top 10% of rows by confidence is used
// instead, but only if that actually enlarges the selection; this keeps both
// losses defined early in adaptation without ever shrinking a valid pick.
inline ConfidenceSelection select_high_confidence(const Matrix& q, double tau) {
    require(tau >= 0.0 && tau <= 1.0, "select_high_confidence: tau must be in [0,1]");
    ConfidenceSelection sel;
    sel.threshold = tau;
    std::vector<double> max_prob(q.rows);
    std::vector<int> arg(q.rows);
    for (std::size_t n = 0; n < q.rows; ++n) {
        const double* qr = q.row(n);
        std::size_t best = 0;
        for (std::size_t k = 1; k < q.cols; ++k)
            if (qr[k] > qr[best]) best = k;
        max_prob[n] = qr[best];
        arg[n] = int(best);
    }
    for (std::size_t n = 0; n < q.rows; ++n) {
        if (max_prob[n] >= tau) {
            sel.indices.push_back(int(n));
            sel.labels.push_back(arg[n]);
        }
    }
    const std::size_t tenth = std::max<std::size_t>(1, (q.rows + 9) / 10);
    if (sel.indices.size() < 2 * q.cols && sel.indices.size() < tenth) {
        std::vector<int> order(q.rows);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return max_prob[a] > max_prob[b]; });
        std::vector<int> keep(order.begin(), order.begin() + tenth);
        std::sort(keep.begin(), keep.end());
        sel.indices.clear();
        sel.labels.clear();
        sel.fallback_used = true;
        for (int n : keep) {
            sel.indices.push_back(n);
            sel.labels.push_back(arg[n]);
        }
    }
    return sel;
}

// Alternative reading of tau: keep the top fraction of rows by confidence.
inline ConfidenceSelection select_top_fraction(const Matrix& q, double fraction) {
    require(fraction >= 0.0 && fraction <= 1.0, "select_top_fraction: fraction in [0,1]");
    std::vector<double> max_prob(q.rows);
    std::vector<int> arg(q.rows);
    for (std::size_t n = 0; n < q.rows; ++n) {
        const double* qr = q.row(n);
        std::size_t best = 0;
        for (std::size_t k = 1; k < q.cols; ++k)
            if (qr[k] > qr[best]) best = k;
        max_prob[n] = qr[best];
        arg[n] = int(best);
    }
    std::vector<int> order(q.rows);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return max_prob[a] > max_prob[b]; });
    const std::size_t want = std::max<std::size_t>(1, std::size_t(fraction * double(q.rows)));
    std::vector<int> keep(order.begin(), order.begin() + std::min(want, order.size()));
    std::sort(keep.begin(), keep.end());
    ConfidenceSelection sel;
    sel.threshold = fraction;
    for (int n : keep) {
        sel.indices.push_back(n);
        sel.labels.push_back(arg[n]);
    }
    return sel;
}

// Partition selected rows into K disjoint clusters by label. Entry m holds
// the original row ids assigned to cluster m; clusters may be empty.
inline std::vector<std::vector<int>> divide(const ConfidenceSelection& sel, std::size_t k) {
    std::vector<std::vector<int>> clusters(k);
    for (std::size_t i = 0; i < sel.indices.size(); ++i) {
        require(sel.labels[i] >= 0 && std::size_t(sel.labels[i]) < k, "divide: label out of range");
        clusters[sel.labels[i]].push_back(sel.indices[i]);
    }
    return clusters;
}

// Per-cluster centroid of member embeddings. Empty clusters yield empty
// vectors; fewer than two nonempty clusters is an error because the
// contrastive loss is undefined there.
inline std::vector<Vector> compute_centers(const Matrix& e,
                                           const std::vector<std::vector<int>>& clusters) {
    std::size_t nonempty = 0;
    for (const auto& c : clusters)
        if (!c.empty()) ++nonempty;
    if (nonempty < 2)
        throw std::invalid_argument(
            "compute_centers: contrastive loss undefined with fewer than 2 nonempty clusters");
    std::vector<Vector> centers(clusters.size());
    for (std::size_t m = 0; m < clusters.size(); ++m) {
        if (clusters[m].empty()) continue;
        centers[m].assign(e.cols, 0.0);
        for (int row : clusters[m]) {
            const double* er = e.row(row);
            for (std::size_t d = 0; d < e.cols; ++d) centers[m][d] += er[d];
        }
        for (double& x : centers[m]) x /= double(clusters[m].size());
    }
    return centers;
}

}  // namespace ttrec
