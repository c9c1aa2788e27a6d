// The test-time adaptation loop: each epoch re-encodes the shifted inputs,
// re-fits soft K-means on the full fused set, then takes Adam steps on the
// dual self-supervised loss over shuffled minibatches. Labels are not part
// of the interface; metric computation happens separately afterwards.
#pragma once

#include <functional>
#include <iostream>

#include <json.hpp>

#include "ttrec/clustering.hpp"
#include "ttrec/loss_grad.hpp"

namespace ttrec {

struct TTTConfig {
    double alpha = 1.0;
    double tau = 0.9;
    double temperature = 0.1;
    int clusters = 4;
    int epochs = 10;
    double learning_rate = 1e-4;
    int batch_size = 500;
    bool tau_is_fraction = false;
    AssignKernel kernel = AssignKernel::gaussian;
    bool normalize = true;
    bool adaptive_bandwidth = true;
    double bandwidth_scale = 12.0;
    std::uint64_t seed = 0;
    bool verbose = false;

    void validate() const {
        require(alpha >= 0.0, "TTTConfig: alpha must be >= 0");
        require(tau >= 0.0 && tau <= 1.0, "TTTConfig: tau must be in [0,1]");
        require(temperature > 0.0, "TTTConfig: temperature must be > 0");
        require(clusters >= 2, "TTTConfig: need at least 2 clusters");
        require(epochs >= 0, "TTTConfig: epochs must be >= 0");
        require(batch_size > 0, "TTTConfig: batch_size must be > 0");
    }
};

enum class Ablation { none, no_ssl1, no_ssl2, no_both };

inline const char* ablation_name(Ablation a) {
    switch (a) {
        case Ablation::none: return "none";
        case Ablation::no_ssl1: return "no_SSL1";
        case Ablation::no_ssl2: return "no_SSL2";
        default: return "no_both";
    }
}

inline Ablation ablation_from_name(const std::string& s) {
    if (s == "none") return Ablation::none;
    if (s == "no_SSL1") return Ablation::no_ssl1;
    if (s == "no_SSL2") return Ablation::no_ssl2;
    if (s == "no_both") return Ablation::no_both;
    throw std::invalid_argument("unknown ablation: " + s);
}

struct AdaptResult {
    RecommenderModel model;                 // adapted copy; the input stays untouched
    std::vector<LossBreakdown> epochs;      // per-epoch mean loss components
    std::vector<double> alignment;          // optional per-epoch probe values
    int lc_skipped_batches = 0;
    std::vector<ClusterState> last_cluster_state;  // state of the final epoch (size <= 1)
};

// Optional diagnostic invoked after each epoch with the current model.
using EpochProbe = std::function<double(const RecommenderModel&, int epoch)>;

inline AdaptResult adapt(const RecommenderModel& model, const Matrix& user_feats,
                         const Matrix& item_feats, const Histories& hist,
                         std::span<const std::pair<int, int>> pairs, const TTTConfig& cfg,
                         Ablation ablation = Ablation::none,
                         const EpochProbe* probe = nullptr) {
    cfg.validate();
    require(!pairs.empty(), "adapt: no test pairs");
    require(std::size_t(cfg.clusters) <= pairs.size(),
            "adapt: cluster count exceeds the number of test samples");

    AdaptResult out;
    out.model = model;
    if (ablation == Ablation::no_both) return out;

    TTTParams prm;
    prm.alpha = ablation == Ablation::no_ssl2 ? 0.0 : cfg.alpha;
    prm.tau = cfg.tau;
    prm.temperature = cfg.temperature;
    prm.tau_is_fraction = cfg.tau_is_fraction;
    prm.kernel = cfg.kernel;
    prm.normalize = cfg.normalize;
    prm.w_d = ablation == Ablation::no_ssl1 ? 0.0 : 1.0;

    Rng root(cfg.seed);
    Rng kmeans_rng = root.fork("kmeans");
    Rng shuffle_rng = root.fork("shuffle");

    std::vector<std::pair<int, int>> order(pairs.begin(), pairs.end());

    Adam adam;
    adam.lr = cfg.learning_rate;
    Vector params = flatten_parameters(out.model);
    ModelGrads grads = ModelGrads::zeros_like(out.model);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // one pass over the shuffled pair list defines this epoch's state:
        // K-means centers, the sharpened target rows and the high-confidence
        // cluster membership all stay fixed until the next re-fit
        shuffle_rng.shuffle(order);
        const PairForward full = pair_forward(out.model, user_feats, item_feats, hist, order);
        if (!full.fused.all_finite())
            throw std::runtime_error("adapt: loss diverged (non-finite embeddings) at epoch " +
                                     std::to_string(epoch));
        ClusterState state =
            fit_soft_kmeans(cfg.normalize ? normalize_rows(full.fused) : full.fused,
                            std::size_t(cfg.clusters), kmeans_rng, cfg.kernel,
                            cfg.adaptive_bandwidth, cfg.bandwidth_scale);
        state.p = sharpen(state.q, cfg.temperature);
        prm.bandwidth = state.bandwidth;
        const ConfidenceSelection sel = cfg.tau_is_fraction
                                            ? select_top_fraction(state.q, cfg.tau)
                                            : select_high_confidence(state.q, cfg.tau);
        std::vector<int> label_of(order.size(), -1);
        for (std::size_t i = 0; i < sel.indices.size(); ++i)
            label_of[sel.indices[i]] = sel.labels[i];

        LossBreakdown epoch_mean;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::span<const std::pair<int, int>> chunk(order.data() + start, stop - start);

            // slice the epoch-level targets and membership for this batch
            TTTFixed fixed;
            fixed.p = Matrix(stop - start, state.p.cols);
            for (std::size_t r = start; r < stop; ++r)
                std::copy(state.p.row(r), state.p.row(r) + state.p.cols,
                          fixed.p.row(r - start));
            fixed.clusters.assign(std::size_t(cfg.clusters), {});
            std::size_t n_selected = 0;
            for (std::size_t r = start; r < stop; ++r) {
                if (label_of[r] >= 0) {
                    fixed.clusters[label_of[r]].push_back(int(r - start));
                    ++n_selected;
                }
            }
            std::size_t nonempty = 0;
            for (const auto& c : fixed.clusters)
                if (!c.empty()) ++nonempty;
            fixed.lc_active = nonempty >= 2 && n_selected >= 2;

            grads.zero();
            const LossBreakdown b =
                ttt_batch_loss(out.model, user_feats, item_feats, hist, chunk, state.centers,
                               prm, &grads, &fixed);
            if (!std::isfinite(b.l_total))
                throw std::runtime_error("adapt: loss diverged (NaN/Inf) at epoch " +
                                         std::to_string(epoch));
            if (!fixed.lc_active && prm.alpha != 0.0) {
                ++out.lc_skipped_batches;
                std::cerr << "warning: batch at epoch " << epoch
                          << " holds fewer than 2 confident clusters; skipping "
                             "contrastive loss\n";
            }
            adam.step(params, flatten_gradients(grads));
            assign_parameters(out.model, params);
            epoch_mean.l_d += b.l_d;
            epoch_mean.l_p += b.l_p;
            epoch_mean.l_n += b.l_n;
            epoch_mean.l_c += b.l_c;
            ++batches;
        }
        epoch_mean.l_d /= batches;
        epoch_mean.l_p /= batches;
        epoch_mean.l_n /= batches;
        epoch_mean.l_c /= batches;
        epoch_mean.l_total = epoch_mean.l_d + prm.alpha * epoch_mean.l_c;
        out.epochs.push_back(epoch_mean);
        if (cfg.verbose)
            std::cerr << "adapt epoch " << epoch << ": L_d=" << epoch_mean.l_d
                      << " L_p=" << epoch_mean.l_p << " L_n=" << epoch_mean.l_n
                      << " L=" << epoch_mean.l_total << "\n";
        if (probe && *probe) out.alignment.push_back((*probe)(out.model, epoch));
        if (epoch + 1 == cfg.epochs) {
            out.last_cluster_state.clear();
            out.last_cluster_state.push_back(std::move(state));
        }
    }
    return out;
}

// Convenience wrapper mirroring the ablation study: no_SSL1 drops the
// self-distillation term, no_SSL2 drops the contrastive term, no_both
// returns the frozen model.
inline AdaptResult ablate(const RecommenderModel& model, const Matrix& user_feats,
                          const Matrix& item_feats, const Histories& hist,
                          std::span<const std::pair<int, int>> pairs, const TTTConfig& cfg,
                          Ablation which) {
    return adapt(model, user_feats, item_feats, hist, pairs, cfg, which);
}

inline nlohmann::ordered_json adapt_report_json(const AdaptResult& res, const TTTConfig& cfg,
                                                Ablation ablation,
                                                const nlohmann::ordered_json& config_echo,
                                                const nlohmann::ordered_json* final_metrics) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < res.epochs.size(); ++e) {
        const auto& b = res.epochs[e];
        epochs.push_back({{"epoch", e},
                          {"L_d", b.l_d},
                          {"L_p", b.l_p},
                          {"L_n", b.l_n},
                          {"L_c", b.l_c},
                          {"L_total", b.l_total}});
    }
    j["epochs"] = epochs;
    if (!res.alignment.empty()) j["alignment"] = res.alignment;
    j["lc_skipped_batches"] = res.lc_skipped_batches;
    j["ablation"] = ablation_name(ablation);
    if (final_metrics) j["final_metrics"] = *final_metrics;
    j["config"] = config_echo;
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace ttrec
