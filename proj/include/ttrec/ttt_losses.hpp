// The dual self-supervised objective: self-distillation KL loss over
// sharpened cluster assignments, the positive (within-cluster MSE) and
// negative (between-center cosine) contrastive parts, and their gradients
// with respect to the fused embedding rows. The sharpened target P and the
// cluster centers are treated as constants: gradients flow through Q and the
// member embeddings only.
#pragma once

#include <iostream>
#include <vector>

#include "ttrec/clustering.hpp"
#include "ttrec/matrix.hpp"
#include "ttrec/numerics.hpp"

namespace ttrec {

struct LossBreakdown {
    double l_d = 0.0;
    double l_p = 0.0;
    double l_n = 0.0;
    double l_c = 0.0;
    double l_total = 0.0;
};

// Mean over rows of KL(P_row || Q_row).
inline double self_distillation_loss(const Matrix& p, const Matrix& q) {
    require(p.rows == q.rows && p.cols == q.cols, "self_distillation_loss: shape mismatch");
    require(p.rows > 0, "self_distillation_loss: empty input");
    double s = 0.0;
    for (std::size_t n = 0; n < p.rows; ++n) s += kl_divergence(p.row_span(n), q.row_span(n));
    return s / double(p.rows);
}

// d/de_n of the row-mean KL with P constant. With the Gaussian kernel
// (Q = softmax(-d²)) the per-center weight is (p_nk - q_nk); with the
// Student-t kernel it picks up the extra factor (1+d²)^{-1}. Both reduce to
// (2/N) sum_k w_nk (p_nk - q_nk)(e_n - mu_k). Accumulates into de.
inline void self_distillation_grad_embeddings(const Matrix& p, const Matrix& q,
                                              const Matrix& e, const Matrix& centers,
                                              Matrix& de, double scale = 1.0,
                                              AssignKernel kernel = AssignKernel::student_t,
                                              double bandwidth = 1.0) {
    const double inv_n = scale / (double(p.rows) * bandwidth);
    for (std::size_t n = 0; n < p.rows; ++n) {
        const double* pr = p.row(n);
        const double* qr = q.row(n);
        const double* er = e.row(n);
        double* dr = de.row(n);
        for (std::size_t k = 0; k < p.cols; ++k) {
            double w = 2.0 * inv_n * (pr[k] - qr[k]);
            if (w == 0.0) continue;
            const double* cr = centers.row(k);
            if (kernel == AssignKernel::student_t)
                w /= 1.0 +
                     squared_distance(e.row_span(n), centers.row_span(k)) / bandwidth;
            for (std::size_t d = 0; d < e.cols; ++d) dr[d] += w * (er[d] - cr[d]);
        }
    }
}

inline std::size_t selected_count(const std::vector<std::vector<int>>& clusters) {
    std::size_t n = 0;
    for (const auto& c : clusters) n += c.size();
    return n;
}

// (1 / (K N (N-1))) sum_m sum_{i<j in R_m} ||e_i - e_j||^2 with K the cluster
// count and N the total number of selected samples. Returns 0 with a warning
// when fewer than two samples are selected.
inline double positive_loss(const Matrix& e, const std::vector<std::vector<int>>& clusters) {
    const std::size_t k = clusters.size();
    const std::size_t n = selected_count(clusters);
    if (n < 2) {
        std::cerr << "warning: positive loss undefined with fewer than 2 selected samples; "
                     "returning 0\n";
        return 0.0;
    }
    const double norm = 1.0 / (double(k) * double(n) * double(n - 1));
    double s = 0.0;
    for (const auto& members : clusters)
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = i + 1; j < members.size(); ++j)
                s += squared_distance(e.row_span(members[i]), e.row_span(members[j]));
    return norm * s;
}

inline void positive_loss_grad_embeddings(const Matrix& e,
                                          const std::vector<std::vector<int>>& clusters,
                                          Matrix& de, double scale = 1.0) {
    const std::size_t k = clusters.size();
    const std::size_t n = selected_count(clusters);
    if (n < 2) return;
    const double norm = scale / (double(k) * double(n) * double(n - 1));
    for (const auto& members : clusters) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                const double* ei = e.row(members[i]);
                const double* ej = e.row(members[j]);
                double* di = de.row(members[i]);
                double* dj = de.row(members[j]);
                for (std::size_t d = 0; d < e.cols; ++d) {
                    const double g = 2.0 * norm * (ei[d] - ej[d]);
                    di[d] += g;
                    dj[d] -= g;
                }
            }
        }
    }
}

// (1 / (K^2 - K)) sum_{i<j} sim(C_i, C_j) over nonempty center pairs; K is
// the configured cluster count (empty clusters only drop out of the sum).
inline double negative_loss(const std::vector<Vector>& centers) {
    const std::size_t k = centers.size();
    require(k >= 2, "negative_loss: need at least 2 clusters");
    for (std::size_t i = 0; i < k; ++i)
        if (!centers[i].empty() && norm2(centers[i]) <= 1e-12)
            throw std::invalid_argument("negative_loss: center " + std::to_string(i) +
                                        " has zero norm");
    const double norm = 1.0 / (double(k) * double(k) - double(k));
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (centers[i].empty()) continue;
        for (std::size_t j = i + 1; j < k; ++j) {
            if (centers[j].empty()) continue;
            s += cosine_similarity(centers[i], centers[j]);
        }
    }
    return norm * s;
}

// Gradient through the centers into the member embeddings: each center is
// the mean of its members, so dC/de = 1/|R_m| for members of R_m.
inline void negative_loss_grad_embeddings(const Matrix& e,
                                          const std::vector<std::vector<int>>& clusters,
                                          const std::vector<Vector>& centers, Matrix& de,
                                          double scale = 1.0) {
    const std::size_t k = centers.size();
    const double norm = scale / (double(k) * double(k) - double(k));
    std::vector<Vector> dc(k);
    for (std::size_t i = 0; i < k; ++i)
        if (!centers[i].empty()) dc[i].assign(e.cols, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        if (centers[i].empty()) continue;
        for (std::size_t j = i + 1; j < k; ++j) {
            if (centers[j].empty()) continue;
            const double ni = norm2(centers[i]);
            const double nj = norm2(centers[j]);
            const double sim = dot(centers[i], centers[j]) / (ni * nj);
            for (std::size_t d = 0; d < e.cols; ++d) {
                dc[i][d] += norm * (centers[j][d] / (ni * nj) - sim * centers[i][d] / (ni * ni));
                dc[j][d] += norm * (centers[i][d] / (ni * nj) - sim * centers[j][d] / (nj * nj));
            }
        }
    }
    for (std::size_t m = 0; m < k; ++m) {
        if (centers[m].empty() || clusters[m].empty()) continue;
        const double inv = 1.0 / double(clusters[m].size());
        for (int row : clusters[m]) {
            double* dr = de.row(row);
            for (std::size_t d = 0; d < e.cols; ++d) dr[d] += inv * dc[m][d];
        }
    }
}

inline double contrastive_loss(double l_p, double l_n) { return l_p + l_n; }

inline double total_loss(double l_d, double l_c, double alpha) {
    require(alpha >= 0.0, "total_loss: alpha must be >= 0");
    return l_d + alpha * l_c;
}

}  // namespace ttrec
