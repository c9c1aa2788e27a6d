// Model-level loss evaluation and analytic gradients: cross-entropy over
// dot-product scores for supervised training, and the dual self-supervised
// objective for test-time adaptation. Distinct users/items in a batch are
// encoded once; gradients are scatter-accumulated back through both encoders
// and the fusion MLP.
#pragma once

#include <map>
#include <span>
#include <string>
#include <tuple>

#include "ttrec/model.hpp"
#include "ttrec/numerics.hpp"
#include "ttrec/ttt_losses.hpp"

namespace ttrec {

// ---------------------------------------------------------------------------
// Shared pair-batch plumbing for the SSL losses.

struct PairBatch {
    std::vector<int> users;  // distinct user ids, first-appearance order
    std::vector<int> items;  // distinct item ids, first-appearance order
    std::vector<std::pair<int, int>> rows;  // per pair: (user slot, item slot)
};

inline PairBatch make_pair_batch(std::span<const std::pair<int, int>> pairs) {
    PairBatch b;
    std::map<int, int> uslot, islot;
    for (const auto& [u, i] : pairs) {
        auto [uit, unew] = uslot.try_emplace(u, int(b.users.size()));
        if (unew) b.users.push_back(u);
        auto [iit, inew] = islot.try_emplace(i, int(b.items.size()));
        if (inew) b.items.push_back(i);
        b.rows.push_back({uit->second, iit->second});
    }
    return b;
}

struct PairForward {
    PairBatch batch;
    SparseBatch u_inputs, i_inputs;
    EncoderCache ucache, icache;
    Matrix eu, ei;        // distinct embeddings
    Matrix eu_rows, ei_rows;  // row-aligned copies per pair
    FusionCache fcache;
    Matrix fused;         // rows x d
};

inline PairForward pair_forward(const RecommenderModel& m, const Matrix& user_feats,
                                const Matrix& item_feats, const Histories& hist,
                                std::span<const std::pair<int, int>> pairs) {
    PairForward fw;
    fw.batch = make_pair_batch(pairs);
    fw.u_inputs = make_user_inputs(m.cfg, user_feats, hist, fw.batch.users);
    fw.i_inputs = make_item_inputs(m.cfg, item_feats, hist, fw.batch.items);
    fw.eu = encoder_forward(m.f, fw.u_inputs, &fw.ucache);
    fw.ei = encoder_forward(m.g, fw.i_inputs, &fw.icache);
    const std::size_t d = fw.eu.cols;
    fw.eu_rows = Matrix(fw.batch.rows.size(), d);
    fw.ei_rows = Matrix(fw.batch.rows.size(), d);
    for (std::size_t r = 0; r < fw.batch.rows.size(); ++r) {
        std::copy(fw.eu.row(fw.batch.rows[r].first), fw.eu.row(fw.batch.rows[r].first) + d,
                  fw.eu_rows.row(r));
        std::copy(fw.ei.row(fw.batch.rows[r].second), fw.ei.row(fw.batch.rows[r].second) + d,
                  fw.ei_rows.row(r));
    }
    fw.fused = fuse(m, fw.eu_rows, fw.ei_rows, &fw.fcache);
    return fw;
}

inline void pair_backward(const RecommenderModel& m, const PairForward& fw,
                          const Matrix& dfused, ModelGrads& grads) {
    Matrix dcat;
    fusion_backward(m.gamma, fw.fcache, dfused, grads.gamma, &dcat);
    const std::size_t d = fw.eu.cols;
    Matrix deu(fw.eu.rows, d), dei(fw.ei.rows, d);
    for (std::size_t r = 0; r < fw.batch.rows.size(); ++r) {
        const double* dc = dcat.row(r);
        double* du = deu.row(fw.batch.rows[r].first);
        double* di = dei.row(fw.batch.rows[r].second);
        for (std::size_t j = 0; j < d; ++j) {
            du[j] += dc[j];
            di[j] += dc[d + j];
        }
    }
    encoder_backward(m.f, fw.u_inputs, fw.ucache, deu, grads.f);
    encoder_backward(m.g, fw.i_inputs, fw.icache, dei, grads.g);
}

// ---------------------------------------------------------------------------
// Dual SSL objective on a batch of (user, item) pairs against fixed K-means
// centers.

struct TTTParams {
    double alpha = 1.0;
    double tau = 0.9;
    double temperature = 0.1;
    bool tau_is_fraction = false;
    AssignKernel kernel = AssignKernel::student_t;
    double bandwidth = 1.0;
    // cluster on L2-normalized fused embeddings; removes the degenerate
    // shrink-everything optimum of the tightening losses
    bool normalize = true;
    // term switches used by the ablations and the per-loss gradient checks
    double w_d = 1.0;
    double w_p = 1.0;
    double w_n = 1.0;
};

// Rowwise L2 normalization with the norms kept for the backward pass.
inline Matrix normalize_rows(const Matrix& e, Vector* norms = nullptr) {
    Matrix out = e;
    if (norms) norms->assign(e.rows, 1.0);
    for (std::size_t n = 0; n < e.rows; ++n) {
        const double nrm = std::max(norm2(e.row_span(n)), 1e-12);
        if (norms) (*norms)[n] = nrm;
        double* r = out.row(n);
        for (std::size_t d = 0; d < e.cols; ++d) r[d] /= nrm;
    }
    return out;
}

// d(e/||e||) backward: dE = (dN - (dN . ê) ê) / ||e||.
inline void normalize_rows_backward(const Matrix& normed, const Vector& norms,
                                    const Matrix& dnormed, Matrix& de) {
    for (std::size_t n = 0; n < normed.rows; ++n) {
        const double* u = normed.row(n);
        const double* g = dnormed.row(n);
        double* out = de.row(n);
        const double proj = dot({g, normed.cols}, {u, normed.cols});
        for (std::size_t d = 0; d < normed.cols; ++d)
            out[d] = (g[d] - proj * u[d]) / norms[n];
    }
}

// Quantities treated as constants by the gradient: the sharpened target and
// the high-confidence cluster membership. Captured once per evaluation point
// so finite differences see the same function the analytic gradient assumes.
struct TTTFixed {
    Matrix p;
    std::vector<std::vector<int>> clusters;
    bool lc_active = false;
};

inline TTTFixed capture_ttt_fixed(const Matrix& q, const TTTParams& prm) {
    TTTFixed fx;
    fx.p = sharpen(q, prm.temperature);
    const ConfidenceSelection sel = prm.tau_is_fraction
                                        ? select_top_fraction(q, prm.tau)
                                        : select_high_confidence(q, prm.tau);
    fx.clusters = divide(sel, q.cols);
    std::size_t nonempty = 0;
    for (const auto& c : fx.clusters)
        if (!c.empty()) ++nonempty;
    fx.lc_active = nonempty >= 2 && sel.indices.size() >= 2;
    return fx;
}

// Loss (and optionally gradients) of w_d*L_d + alpha*(w_p*L_p + w_n*L_n) on
// one batch. When `fixed` is null the target/selection is captured from the
// current parameters; `capture` exports it for finite-difference replay.
inline LossBreakdown ttt_batch_loss(const RecommenderModel& m, const Matrix& user_feats,
                                    const Matrix& item_feats, const Histories& hist,
                                    std::span<const std::pair<int, int>> pairs,
                                    const Matrix& centers, const TTTParams& prm,
                                    ModelGrads* grads = nullptr, const TTTFixed* fixed = nullptr,
                                    TTTFixed* capture = nullptr, bool* lc_skipped = nullptr) {
    require(!pairs.empty(), "ttt_batch_loss: empty batch");
    PairForward fw = pair_forward(m, user_feats, item_feats, hist, pairs);
    Vector norms;
    const Matrix view = prm.normalize ? normalize_rows(fw.fused, &norms) : fw.fused;
    const Matrix q = assign(view, centers, prm.kernel, prm.bandwidth);

    TTTFixed local;
    if (!fixed) {
        local = capture_ttt_fixed(q, prm);
        fixed = &local;
    }
    if (capture) *capture = *fixed;
    if (lc_skipped) *lc_skipped = !fixed->lc_active;

    LossBreakdown out;
    out.l_d = prm.w_d * self_distillation_loss(fixed->p, q);

    std::vector<Vector> cluster_centers;
    if (fixed->lc_active) {
        cluster_centers = compute_centers(view, fixed->clusters);
        if (prm.w_p != 0.0) out.l_p = positive_loss(view, fixed->clusters);
        if (prm.w_n != 0.0) out.l_n = negative_loss(cluster_centers);
    }
    out.l_c = prm.w_p * out.l_p + prm.w_n * out.l_n;
    out.l_total = out.l_d + prm.alpha * out.l_c;

    if (grads) {
        Matrix dview(view.rows, view.cols);
        if (prm.w_d != 0.0)
            self_distillation_grad_embeddings(fixed->p, q, view, centers, dview, prm.w_d,
                                              prm.kernel, prm.bandwidth);
        if (fixed->lc_active && prm.alpha != 0.0) {
            if (prm.w_p != 0.0)
                positive_loss_grad_embeddings(view, fixed->clusters, dview,
                                              prm.alpha * prm.w_p);
            if (prm.w_n != 0.0)
                negative_loss_grad_embeddings(view, fixed->clusters, cluster_centers, dview,
                                              prm.alpha * prm.w_n);
        }
        if (prm.normalize) {
            Matrix dfused(fw.fused.rows, fw.fused.cols);
            normalize_rows_backward(view, norms, dview, dfused);
            pair_backward(m, fw, dfused, *grads);
        } else {
            pair_backward(m, fw, dview, *grads);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cross-entropy over softmax of dot-product scores.

struct CESample {
    int user_slot = 0;
    std::vector<int> cand_slots;
    int pos_within = 0;  // index of the positive inside cand_slots
};

struct CEBatch {
    std::vector<int> users;
    std::vector<int> items;
    std::vector<CESample> samples;
};

namespace detail {

inline int slot_of(std::map<int, int>& slots, std::vector<int>& order, int id) {
    auto [it, fresh] = slots.try_emplace(id, int(order.size()));
    if (fresh) order.push_back(id);
    return it->second;
}

}  // namespace detail

// Candidate set per positive = the positive itself plus n_negatives uniform
// draws from the other items.
inline CEBatch build_ce_batch_sampled(std::span<const Interaction> positives, int n_items,
                                      int n_negatives, Rng& rng) {
    CEBatch b;
    std::map<int, int> uslots, islots;
    for (const auto& t : positives) {
        CESample s;
        s.user_slot = detail::slot_of(uslots, b.users, t.user);
        s.cand_slots.push_back(detail::slot_of(islots, b.items, t.item));
        s.pos_within = 0;
        for (int k = 0; k < n_negatives; ++k) {
            int neg = int(rng.uniform_int(std::uint64_t(n_items - 1)));
            if (neg >= t.item) ++neg;  // uniform over items != positive
            s.cand_slots.push_back(detail::slot_of(islots, b.items, neg));
        }
        b.samples.push_back(std::move(s));
    }
    return b;
}

// Full-softmax variant: every item is a candidate for every sample.
inline CEBatch build_ce_batch_full(std::span<const Interaction> positives, int n_items) {
    CEBatch b;
    b.items.resize(n_items);
    for (int i = 0; i < n_items; ++i) b.items[i] = i;
    std::map<int, int> uslots;
    std::vector<int> all(n_items);
    for (int i = 0; i < n_items; ++i) all[i] = i;
    for (const auto& t : positives) {
        CESample s;
        s.user_slot = detail::slot_of(uslots, b.users, t.user);
        s.cand_slots = all;
        s.pos_within = t.item;
        b.samples.push_back(std::move(s));
    }
    return b;
}

// Explicit candidate sets; throws when a positive is missing from its set.
inline CEBatch build_ce_batch_explicit(
    const std::vector<std::tuple<int, int, std::vector<int>>>& rows) {
    CEBatch b;
    std::map<int, int> uslots, islots;
    for (const auto& [user, positive, candidates] : rows) {
        CESample s;
        s.user_slot = detail::slot_of(uslots, b.users, user);
        s.pos_within = -1;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (candidates[c] == positive) s.pos_within = int(c);
            s.cand_slots.push_back(detail::slot_of(islots, b.items, candidates[c]));
        }
        if (s.pos_within < 0)
            throw std::invalid_argument("ce_loss: positive item " + std::to_string(positive) +
                                        " absent from its candidate set");
        b.samples.push_back(std::move(s));
    }
    return b;
}

// Mean of -log softmax(logits)[positive] over the batch. Nonzero
// dropout_rate with an rng enables training mode on both encoders.
inline double ce_batch_loss(const RecommenderModel& m, const Matrix& user_feats,
                            const Matrix& item_feats, const Histories& hist, const CEBatch& b,
                            ModelGrads* grads = nullptr, double dropout_rate = 0.0,
                            Rng* drop_rng = nullptr) {
    require(!b.samples.empty(), "ce_batch_loss: empty batch");
    const SparseBatch u_inputs = make_user_inputs(m.cfg, user_feats, hist, b.users);
    const SparseBatch i_inputs = make_item_inputs(m.cfg, item_feats, hist, b.items);
    EncoderCache ucache, icache;
    const Matrix eu = encoder_forward(m.f, u_inputs, &ucache, dropout_rate, drop_rng);
    const Matrix ei = encoder_forward(m.g, i_inputs, &icache, dropout_rate, drop_rng);

    const double inv_n = 1.0 / double(b.samples.size());
    double loss = 0.0;
    Matrix deu, dei;
    if (grads) {
        deu = Matrix(eu.rows, eu.cols);
        dei = Matrix(ei.rows, ei.cols);
    }
    Vector logits;
    for (const auto& s : b.samples) {
        logits.resize(s.cand_slots.size());
        const auto eu_row = eu.row_span(std::size_t(s.user_slot));
        for (std::size_t c = 0; c < s.cand_slots.size(); ++c)
            logits[c] = dot(eu_row, ei.row_span(std::size_t(s.cand_slots[c])));
        const Vector probs = softmax(logits);
        loss -= inv_n * std::log(std::max(probs[s.pos_within], kProbFloor));
        if (grads) {
            double* du = deu.row(s.user_slot);
            for (std::size_t c = 0; c < s.cand_slots.size(); ++c) {
                const double dl =
                    inv_n * (probs[c] - (int(c) == s.pos_within ? 1.0 : 0.0));
                const double* ei_r = ei.row(std::size_t(s.cand_slots[c]));
                double* di = dei.row(std::size_t(s.cand_slots[c]));
                for (std::size_t d = 0; d < eu.cols; ++d) {
                    du[d] += dl * ei_r[d];
                    di[d] += dl * eu_row[d];
                }
            }
        }
    }
    if (grads) {
        encoder_backward(m.f, u_inputs, ucache, deu, grads->f);
        encoder_backward(m.g, i_inputs, icache, dei, grads->g);
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Selector-based gradient entry point used by the oracle tests.

struct GradCheckBatch {
    CEBatch ce;                               // used by "ce"
    std::vector<std::pair<int, int>> pairs;   // used by the SSL selectors
    Matrix centers;
    TTTParams prm;
};

inline TTTParams selector_params(const std::string& selector, const TTTParams& base) {
    TTTParams p = base;
    if (selector == "self_distillation") {
        p.w_d = 1.0;
        p.w_p = p.w_n = 0.0;
        p.alpha = 0.0;
    } else if (selector == "positive") {
        p.w_d = 0.0;
        p.w_p = 1.0;
        p.w_n = 0.0;
        p.alpha = 1.0;
    } else if (selector == "negative") {
        p.w_d = 0.0;
        p.w_p = 0.0;
        p.w_n = 1.0;
        p.alpha = 1.0;
    } else if (selector == "contrastive") {
        p.w_d = 0.0;
        p.w_p = p.w_n = 1.0;
        p.alpha = 1.0;
    } else if (selector == "total") {
        p.w_d = p.w_p = p.w_n = 1.0;
    } else {
        throw std::invalid_argument("unknown loss selector: " + selector);
    }
    return p;
}

// Scalar loss under a selector with a fixed SSL context (captured when null).
inline double selector_loss(const std::string& selector, const RecommenderModel& m,
                            const Matrix& user_feats, const Matrix& item_feats,
                            const Histories& hist, const GradCheckBatch& batch,
                            const TTTFixed* fixed = nullptr) {
    if (selector == "ce")
        return ce_batch_loss(m, user_feats, item_feats, hist, batch.ce);
    const TTTParams prm = selector_params(selector, batch.prm);
    return ttt_batch_loss(m, user_feats, item_feats, hist, batch.pairs, batch.centers, prm,
                          nullptr, fixed)
        .l_total;
}

// Flat analytic gradient for every parameter of f, g and the fusion MLP.
inline Vector analytic_gradients(const std::string& selector, const RecommenderModel& m,
                                 const Matrix& user_feats, const Matrix& item_feats,
                                 const Histories& hist, const GradCheckBatch& batch,
                                 const TTTFixed* fixed = nullptr) {
    ModelGrads grads = ModelGrads::zeros_like(m);
    if (selector == "ce") {
        ce_batch_loss(m, user_feats, item_feats, hist, batch.ce, &grads);
    } else {
        const TTTParams prm = selector_params(selector, batch.prm);
        ttt_batch_loss(m, user_feats, item_feats, hist, batch.pairs, batch.centers, prm, &grads,
                       fixed);
    }
    return flatten_gradients(grads);
}

}  // namespace ttrec
