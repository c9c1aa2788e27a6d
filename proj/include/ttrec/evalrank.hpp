// All-ranking evaluation: Recall@K and NDCG@K over each user's
// non-interacted item universe. Ties broken by ascending item id so results
// are identical across platforms.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <json.hpp>

#include "ttrec/loss_grad.hpp"
#include "ttrec/model.hpp"

namespace ttrec {

struct RankingMetrics {
    std::map<int, std::pair<double, double>> per_k;  // K -> (recall, ndcg)
    int users_evaluated = 0;

    nlohmann::ordered_json to_json(const std::string& split_label) const {
        nlohmann::ordered_json j;
        for (const auto& [k, rn] : per_k) {
            j[std::to_string(k)] = {{"recall", rn.first}, {"ndcg", rn.second}};
        }
        j["users"] = users_evaluated;
        j["split"] = split_label;
        return j;
    }
};

// Candidates sorted by score descending, ties by ascending item id.
inline std::vector<int> rank_candidates(const Vector& scores, const std::set<int>& exclude) {
    std::vector<int> candidates;
    for (int i = 0; i < int(scores.size()); ++i)
        if (!exclude.count(i)) candidates.push_back(i);
    if (candidates.empty())
        throw std::invalid_argument("rank_items: exclude set covers every item");
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return candidates;
}

inline std::vector<int> rank_items(const RecommenderModel& m, const Matrix& user_feats,
                                   const Matrix& item_feats, const Histories& hist, int user,
                                   const std::set<int>& exclude) {
    const int all[] = {user};
    const Matrix e_u = encode_users(m, user_feats, hist, all);
    std::vector<int> items(m.cfg.n_items);
    for (int i = 0; i < m.cfg.n_items; ++i) items[i] = i;
    const Matrix e_i = encode_items(m, item_feats, hist, items);
    const Vector scores = score_user(e_u.row_span(0), e_i);
    return rank_candidates(scores, exclude);
}

inline double recall_at_k(const std::vector<int>& ranked, const std::set<int>& relevant,
                          int k) {
    require(k >= 1, "recall_at_k: K must be >= 1");
    require(!relevant.empty(), "recall_at_k: empty relevant set");
    int hits = 0;
    const int top = std::min<int>(k, int(ranked.size()));
    for (int r = 0; r < top; ++r)
        if (relevant.count(ranked[r])) ++hits;
    return double(hits) / double(relevant.size());
}

inline double ndcg_at_k(const std::vector<int>& ranked, const std::set<int>& relevant, int k) {
    require(k >= 1, "ndcg_at_k: K must be >= 1");
    require(!relevant.empty(), "ndcg_at_k: empty relevant set");
    double dcg = 0.0;
    const int top = std::min<int>(k, int(ranked.size()));
    for (int r = 0; r < top; ++r)
        if (relevant.count(ranked[r])) dcg += 1.0 / std::log2(double(r) + 2.0);
    double idcg = 0.0;
    const int ideal = std::min<int>(k, int(relevant.size()));
    for (int r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(double(r) + 2.0);
    return dcg / idcg;
}

// Per-user metrics on the target split, averaged over users with at least one
// positive there. The exclude set is each user's positives in the earlier
// splits (train for valid, train+valid for test).
inline RankingMetrics evaluate(const RecommenderModel& m, const Matrix& user_feats,
                               const Matrix& item_feats, const Histories& hist,
                               const InteractionSet& set, Split target,
                               const std::vector<int>& ks) {
    require(!ks.empty(), "evaluate: no K values given");
    const auto relevant_by_user = set.positives_by_user({target});
    if (relevant_by_user.empty())
        throw std::invalid_argument("evaluate: no users with positives in the target split");

    const auto exclude_by_user = target == Split::test
                                     ? set.positives_by_user({Split::train, Split::valid})
                                     : set.positives_by_user({Split::train});

    std::vector<int> items(m.cfg.n_items);
    for (int i = 0; i < m.cfg.n_items; ++i) items[i] = i;
    const Matrix e_i = encode_items(m, item_feats, hist, items);

    RankingMetrics out;
    std::map<int, std::pair<double, double>> sums;
    for (int k : ks) sums[k] = {0.0, 0.0};

    for (const auto& [user, rel_items] : relevant_by_user) {
        std::set<int> relevant(rel_items.begin(), rel_items.end());
        std::set<int> exclude;
        if (auto it = exclude_by_user.find(user); it != exclude_by_user.end())
            exclude.insert(it->second.begin(), it->second.end());

        const int uid[] = {user};
        const Matrix e_u = encode_users(m, user_feats, hist, uid);
        const Vector scores = score_user(e_u.row_span(0), e_i);
        const std::vector<int> ranked = rank_candidates(scores, exclude);

        for (int k : ks) {
            sums[k].first += recall_at_k(ranked, relevant, k);
            sums[k].second += ndcg_at_k(ranked, relevant, k);
        }
        ++out.users_evaluated;
    }
    for (int k : ks)
        out.per_k[k] = {sums[k].first / out.users_evaluated,
                        sums[k].second / out.users_evaluated};
    return out;
}

}  // namespace ttrec
