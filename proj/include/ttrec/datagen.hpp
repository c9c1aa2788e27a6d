// Synthetic benchmark generator. Users and items get Gaussian features;
// user preference is a sigmoid of a signed sum of features; interactions are
// Bernoulli draws whose probability combines user preference and item score.
// The OOD partition re-samples user features with a shifted mean while the
// item features stay byte-identical.
#pragma once

#include <cmath>
#include <vector>

#include "ttrec/dataset.hpp"
#include "ttrec/numerics.hpp"
#include "ttrec/rng.hpp"

namespace ttrec {

struct SyntheticConfig {
    int n_users = 1000;
    int n_items = 1000;
    int feature_dim = 16;
    double iid_user_mean = 0.0;
    double ood_user_mean = 1.0;
    double item_mean = -1.0;
    double feature_std = 1.0;
    // +1 for the first half of the features, -1 for the second half unless
    // overridden.
    std::vector<int> preference_weight_signs;
    double interaction_scale = 100.0;
    double interaction_bias = 0.0;
    bool calibrate_bias = true;
    double target_density = 0.2576;
    std::uint64_t seed = 0;

    std::vector<int> effective_signs() const {
        if (!preference_weight_signs.empty()) return preference_weight_signs;
        std::vector<int> s(feature_dim);
        for (int f = 0; f < feature_dim; ++f) s[f] = f < feature_dim / 2 ? 1 : -1;
        return s;
    }

    void validate() const {
        require(n_users > 0 && n_items > 0 && feature_dim > 0,
                "SyntheticConfig: counts must be positive");
        require(feature_std > 0.0, "SyntheticConfig: feature_std must be > 0");
        if (!preference_weight_signs.empty()) {
            require(int(preference_weight_signs.size()) == feature_dim,
                    "SyntheticConfig: sign vector length must equal feature_dim");
            for (int s : preference_weight_signs)
                require(s == 1 || s == -1, "SyntheticConfig: signs must be +1 or -1");
        }
    }
};

inline std::pair<Matrix, Matrix> sample_features(const SyntheticConfig& cfg, Rng& rng) {
    cfg.validate();
    Matrix users = sample_gaussian(rng, cfg.iid_user_mean, cfg.feature_std, cfg.n_users,
                                   cfg.feature_dim);
    Matrix items = sample_gaussian(rng, cfg.item_mean, cfg.feature_std, cfg.n_items,
                                   cfg.feature_dim);
    return {std::move(users), std::move(items)};
}

// preference_u = sigmoid(sum_f sign_f * x_uf), one value per row.
inline Vector compute_preferences(const Matrix& features, const std::vector<int>& signs) {
    require(signs.size() == features.cols, "compute_preferences: sign length mismatch");
    Vector prefs(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) {
        double s = 0.0;
        const double* r = features.row(i);
        for (std::size_t f = 0; f < features.cols; ++f) s += signs[f] * r[f];
        prefs[i] = sigmoid(s);
    }
    return prefs;
}

// Per-feature preference intensities: sigmoid(sign_f * x_f) entrywise. The
// signed user features give each user a vector of aspect affinities; items
// get the mirrored aspect vector. Relevance couples the two bilinearly, so
// every user carries an item ordering of their own and re-sampling user
// features genuinely reshuffles it.
inline Matrix compute_preference_matrix(const Matrix& features, const std::vector<int>& signs) {
    require(signs.size() == features.cols, "compute_preference_matrix: sign length mismatch");
    Matrix prefs(features.rows, features.cols);
    for (std::size_t i = 0; i < features.rows; ++i)
        for (std::size_t f = 0; f < features.cols; ++f)
            prefs(i, f) = sigmoid(signs[f] * features(i, f));
    return prefs;
}

// mean_f u_f * i_f, the affinity the relevance sigmoid consumes.
inline Matrix affinity_matrix(const Matrix& user_prefs, const Matrix& item_prefs) {
    require(user_prefs.cols == item_prefs.cols, "affinity_matrix: aspect dim mismatch");
    Matrix a = matmul_bt(user_prefs, item_prefs);
    for (double& x : a.v) x /= double(user_prefs.cols);
    return a;
}

inline double interaction_probability(double affinity, double scale, double bias) {
    return sigmoid(scale * affinity + bias);
}

// Expected positive density over the full user x item grid at a given bias.
inline double expected_density(const Matrix& affinity, double scale, double bias) {
    double s = 0.0;
    for (double a : affinity.v) s += interaction_probability(a, scale, bias);
    return s / double(affinity.v.size());
}

// Bisection on the bias so the expected density hits the target. The density
// is monotone increasing in the bias, so this always converges.
inline double calibrate_interaction_bias(const Matrix& affinity, double scale, double target) {
    double lo = -200.0, hi = 200.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (expected_density(affinity, scale, mid) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-10) break;
    }
    return 0.5 * (lo + hi);
}

// Bernoulli draws over the full grid; only the positive draws are kept as
// interactions. density reports positives / (users * items).
inline InteractionSet sample_interactions(const Matrix& affinity, double scale, double bias,
                                          Rng& rng) {
    InteractionSet set;
    for (std::size_t u = 0; u < affinity.rows; ++u) {
        for (std::size_t i = 0; i < affinity.cols; ++i) {
            const double p = interaction_probability(affinity(u, i), scale, bias);
            if (rng.uniform() < p) set.triples.push_back({int(u), int(i), 1, Split::train});
        }
    }
    set.density = double(set.triples.size()) / (double(affinity.rows) * double(affinity.cols));
    return set;
}

// Full pipeline: IID features and interactions, bias calibration, OOD
// re-sample of user features (items constant), and the 80/10/10 splits.
inline Dataset generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    Rng root(cfg.seed);
    Rng datagen = root.fork("datagen");
    Rng splitter = root.fork("split");

    Dataset ds;
    ds.n_users = cfg.n_users;
    ds.n_items = cfg.n_items;
    ds.feature_dim = cfg.feature_dim;
    ds.seed = cfg.seed;

    auto [users, items] = sample_features(cfg, datagen);
    ds.user_features = std::move(users);
    ds.item_features = std::move(items);

    const auto signs = cfg.effective_signs();
    const Matrix item_prefs = compute_preference_matrix(ds.item_features, signs);
    const Matrix affinity_iid =
        affinity_matrix(compute_preference_matrix(ds.user_features, signs), item_prefs);

    double bias = cfg.interaction_bias;
    if (cfg.calibrate_bias)
        bias = calibrate_interaction_bias(affinity_iid, cfg.interaction_scale,
                                          cfg.target_density);

    ds.iid = sample_interactions(affinity_iid, cfg.interaction_scale, bias, datagen);

    // OOD: user features re-sampled with the shifted mean, same items, same
    // calibrated bias; interactions re-drawn from scratch.
    ds.user_features_ood = sample_gaussian(datagen, cfg.ood_user_mean, cfg.feature_std,
                                           cfg.n_users, cfg.feature_dim);
    const Matrix affinity_ood =
        affinity_matrix(compute_preference_matrix(ds.user_features_ood, signs), item_prefs);
    ds.ood = sample_interactions(affinity_ood, cfg.interaction_scale, bias, datagen);

    split_interactions(ds.iid, splitter.fork("iid"));
    split_interactions(ds.ood, splitter.fork("ood"));
    return ds;
}

}  // namespace ttrec
