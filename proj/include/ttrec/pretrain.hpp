// Supervised pretraining: minibatch Adam on the cross-entropy loss over
// sampled candidate sets, with dropout on the encoder hidden layers and an
// optional per-epoch validation Recall.
#pragma once

#include <iostream>

#include "ttrec/evalrank.hpp"
#include "ttrec/loss_grad.hpp"

namespace ttrec {

struct PretrainConfig {
    int epochs = 5;
    int batch_size = 1000;
    double learning_rate = 1e-4;
    double dropout = 0.5;
    int negatives = 100;     // candidates per positive = 1 + negatives
    bool full_softmax = false;
    bool log_validation = true;
    int validation_k = 10;
    std::uint64_t seed = 0;
    bool verbose = false;
};

struct PretrainResult {
    std::vector<double> epoch_loss;     // mean batch CE per epoch
    std::vector<double> valid_recall;   // Recall@validation_k per epoch (if logged)
};

inline PretrainResult pretrain(RecommenderModel& model, const Matrix& user_feats,
                               const Matrix& item_feats, const Histories& hist,
                               const InteractionSet& interactions, const PretrainConfig& cfg) {
    std::vector<Interaction> train = interactions.in_split(Split::train);
    require(!train.empty(), "pretrain: empty train split");
    require(cfg.epochs >= 0 && cfg.batch_size > 0, "pretrain: invalid config");

    Rng root(cfg.seed);
    Rng shuffle_rng = root.fork("shuffle");
    Rng neg_rng = root.fork("negatives");
    Rng drop_rng = root.fork("dropout");

    Adam adam;
    adam.lr = cfg.learning_rate;
    Vector params = flatten_parameters(model);
    ModelGrads grads = ModelGrads::zeros_like(model);
    PretrainResult result;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(train);
        double loss_sum = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < train.size(); start += cfg.batch_size) {
            for (double x : params)
                if (!std::isfinite(x))
                    throw std::runtime_error(
                        "pretrain: parameters diverged (non-finite) at epoch " +
                        std::to_string(epoch) + "; consider lowering the learning rate");
            const std::size_t stop = std::min(train.size(), start + cfg.batch_size);
            std::span<const Interaction> chunk(train.data() + start, stop - start);
            const CEBatch batch =
                cfg.full_softmax
                    ? build_ce_batch_full(chunk, model.cfg.n_items)
                    : build_ce_batch_sampled(chunk, model.cfg.n_items, cfg.negatives, neg_rng);
            grads.zero();
            const double loss = ce_batch_loss(model, user_feats, item_feats, hist, batch,
                                              &grads, cfg.dropout, &drop_rng);
            if (!std::isfinite(loss))
                throw std::runtime_error(
                    "pretrain: loss diverged (NaN/Inf) at epoch " + std::to_string(epoch) +
                    "; consider lowering the learning rate");
            adam.step(params, flatten_gradients(grads));
            assign_parameters(model, params);
            loss_sum += loss;
            ++batches;
        }
        result.epoch_loss.push_back(loss_sum / std::max(1, batches));
        if (cfg.log_validation) {
            const RankingMetrics vm = evaluate(model, user_feats, item_feats, hist,
                                               interactions, Split::valid, {cfg.validation_k});
            result.valid_recall.push_back(vm.per_k.at(cfg.validation_k).first);
            if (cfg.verbose)
                std::cerr << "pretrain epoch " << epoch << ": ce=" << result.epoch_loss.back()
                          << " valid recall@" << cfg.validation_k << "="
                          << result.valid_recall.back() << "\n";
        } else if (cfg.verbose) {
            std::cerr << "pretrain epoch " << epoch << ": ce=" << result.epoch_loss.back()
                      << "\n";
        }
    }
    return result;
}

}  // namespace ttrec
