// Acceptance suite: runs every release gate end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero when any criterion fails.
//
//   1 kernel exactness          hand-arithmetic identities within 1e-9
//   2 gradient oracle           analytic vs central differences, rel err < 1e-4
//   3 theorem 1                 CE Hessian PSD, eigenvalues <= 2, grad norm <= 2
//   4 theorem 2                 aligned SSL step strictly decreases the loss
//   5 ranking oracle            evaluate() == brute force on small instances
//   6 synthetic OOD headline    adapted model beats frozen baseline, ablations ordered
//   7 sensitivity direction     T=0.1 not dominated by T=0.9
//   8 determinism               every CLI command byte-reproducible under a seed
//   9 complexity scaling        loss time linear in B, quadratic in N
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ttrec/datagen.hpp"
#include "ttrec/evalrank.hpp"
#include "ttrec/pretrain.hpp"
#include "ttrec/theory.hpp"
#include "ttrec/ttt.hpp"

using namespace ttrec;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << " — " << detail << "\n";
    std::cout.flush();
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

std::string fmt(double x) {
    std::ostringstream ss;
    ss.precision(4);
    ss << x;
    return ss.str();
}

// ---------------------------------------------------------------------------

void criterion_kernels() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string why;
    auto check = [&](bool cond, const char* what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    };

    const Vector sm = softmax(Vector{0.0, std::log(3.0)});
    check(std::abs(sm[0] - 0.25) < 1e-9 && std::abs(sm[1] - 0.75) < 1e-9, "softmax value");
    const Vector uniform = softmax(Vector{0.0, 0.0, 0.0});
    for (double x : uniform) check(std::abs(x - 1.0 / 3.0) < 1e-9, "softmax symmetry");
    Vector shifted{1.25, -0.5, 3.0};
    const Vector base_sm = softmax(shifted);
    for (double& x : shifted) x += 17.5;
    const Vector shifted_sm = softmax(shifted);
    for (std::size_t i = 0; i < 3; ++i)
        check(std::abs(base_sm[i] - shifted_sm[i]) < 1e-9, "softmax shift invariance");

    check(std::abs(kl_divergence(Vector{1.0, 0.0}, Vector{0.5, 0.5}) - std::log(2.0)) < 1e-9,
          "kl ln2");
    check(std::abs(kl_divergence(Vector{0.9, 0.1}, Vector{0.5, 0.5}) -
                   (0.9 * std::log(1.8) + 0.1 * std::log(0.2))) < 1e-9,
          "kl hand value");
    check(std::abs(kl_divergence(Vector{0.3, 0.7}, Vector{0.3, 0.7})) < 1e-9, "kl identity");

    check(std::abs(cosine_similarity(Vector{2.0, 1.0}, Vector{2.0, 1.0}) - 1.0) < 1e-9,
          "cosine identity");
    check(std::abs(cosine_similarity(Vector{1.0, 0.0}, Vector{0.0, 2.0})) < 1e-9,
          "cosine orthogonal");
    check(std::abs(cosine_similarity(Vector{1.0, 0.0}, Vector{1.0, 1.0}) -
                   1.0 / std::sqrt(2.0)) < 1e-9,
          "cosine hand value");

    Matrix q(1, 2);
    q(0, 0) = 0.8;
    q(0, 1) = 0.2;
    const Matrix p = sharpen(q, 0.5);
    check(std::abs(p(0, 0) - 16.0 / 17.0) < 1e-9 && std::abs(p(0, 1) - 1.0 / 17.0) < 1e-9,
          "sharpen hand value");
    const Matrix same = sharpen(q, 1.0);
    check(std::abs(same(0, 0) - 0.8) < 1e-9, "sharpen identity at T=1");
    Matrix flat(1, 4, 0.25);
    const Matrix still = sharpen(flat, 0.2);
    for (double x : still.v) check(std::abs(x - 0.25) < 1e-9, "sharpen uniform fixed point");

    const double dt = seconds_since(t0);
    report("kernel exactness", ok && dt < 1.0,
           ok ? "all hand-arithmetic identities within 1e-9 in " + fmt(dt) + "s"
              : why + " out of tolerance");
}

void criterion_gradient_oracle() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::string worst_sel = "none";
    for (int trial = 0; trial < 3; ++trial) {
        // d=4 embeddings, 8 pairs, K=2 clusters, plus a CE batch
        ModelConfig mc;
        mc.feature_dim = 3;
        mc.n_users = 6;
        mc.n_items = 8;
        mc.embed_dim = 4;
        mc.hidden_dim = 5;
        mc.dropout_rate = 0.0;
        mc.init_seed = 9000 + trial;
        RecommenderModel model = RecommenderModel::init(mc);
        Rng rng(9100 + trial);
        const Matrix uf = sample_gaussian(rng, 0.0, 1.0, 6, 3);
        const Matrix itf = sample_gaussian(rng, -1.0, 1.0, 8, 3);
        std::vector<Interaction> pos;
        for (int u = 0; u < 6; ++u)
            for (int i = 0; i < 8; ++i)
                if (rng.uniform() < 0.3) pos.push_back({u, i, 1, Split::train});
        const Histories hist = Histories::build(6, 8, pos);

        GradCheckBatch batch;
        std::set<std::pair<int, int>> seen;
        while (batch.pairs.size() < 8) {
            std::pair<int, int> pr{int(rng.uniform_int(6)), int(rng.uniform_int(8))};
            if (seen.insert(pr).second) batch.pairs.push_back(pr);
        }
        std::vector<Interaction> ce_pos(pos.begin(), pos.begin() + std::min<std::size_t>(6, pos.size()));
        batch.ce = build_ce_batch_sampled(ce_pos, 8, 3, rng);
        batch.prm.tau = 0.0;
        batch.prm.temperature = 0.5;
        batch.prm.alpha = 1.0;
        {
            const PairForward fw = pair_forward(model, uf, itf, hist, batch.pairs);
            Rng km(9200 + trial);
            batch.centers =
                fit_soft_kmeans(normalize_rows(fw.fused), 2, km, batch.prm.kernel).centers;
        }
        const PairForward fw = pair_forward(model, uf, itf, hist, batch.pairs);
        Vector norms;
        const Matrix view = normalize_rows(fw.fused, &norms);
        const Matrix q = assign(view, batch.centers, batch.prm.kernel);
        const TTTFixed fixed = capture_ttt_fixed(q, batch.prm);

        for (const char* sel :
             {"ce", "self_distillation", "positive", "negative", "contrastive", "total"}) {
            const Vector analytic =
                analytic_gradients(sel, model, uf, itf, hist, batch, &fixed);
            RecommenderModel probe = model;
            auto loss = [&](const Vector& theta) {
                assign_parameters(probe, theta);
                return selector_loss(sel, probe, uf, itf, hist, batch, &fixed);
            };
            const Vector fd = finite_diff_gradient(loss, flatten_parameters(model), 1e-5);
            for (std::size_t i = 0; i < fd.size(); ++i) {
                const double denom = std::max({std::abs(fd[i]), std::abs(analytic[i]), 1e-4});
                const double rel = std::abs(fd[i] - analytic[i]) / denom;
                if (rel > worst) {
                    worst = rel;
                    worst_sel = sel;
                }
            }
        }
    }
    const double dt = seconds_since(t0);
    report("gradient oracle suite", worst < 1e-4 && dt < 10.0,
           "max rel err " + fmt(worst) + " (selector " + worst_sel + ") in " + fmt(dt) + "s");
}

void criterion_theorem1() {
    const auto t0 = Clock::now();
    Rng rng(424242);
    const Theorem1Report rep = verify_theorem1(1000, 10, rng);
    const double dt = seconds_since(t0);
    report("theorem 1 verification",
           rep.passes == 1000 && rep.worst_min_eig >= -1e-8 && rep.worst_max_eig <= 2.0 + 1e-8 &&
               rep.worst_grad_norm <= 2.0 + 1e-8 && dt < 10.0,
           std::to_string(rep.passes) + "/1000 pass; min eig " + fmt(rep.worst_min_eig) +
               ", max eig " + fmt(rep.worst_max_eig) + ", grad norm " +
               fmt(rep.worst_grad_norm) + ", " + fmt(dt) + "s");
}

void criterion_theorem2() {
    const auto t0 = Clock::now();
    Rng rng(515151);
    Theorem2Config cfg;  // epsilon 0.01, beta 2, B 2
    const Theorem2Report rep = verify_theorem2(cfg, 500, rng);
    const double dt = seconds_since(t0);
    report("theorem 2 verification",
           rep.trials == 500 && rep.condition_met > 0 && rep.passes == rep.condition_met &&
               dt < 30.0,
           std::to_string(rep.passes) + "/" + std::to_string(rep.condition_met) +
               " aligned trials strictly decrease (mean " + fmt(rep.mean_decrease) + "), " +
               fmt(dt) + "s");
}

void criterion_ranking_oracle() {
    const auto t0 = Clock::now();
    Rng master(606060);
    int instances = 0;
    bool exact = true;
    for (int it = 0; it < 200 && exact; ++it) {
        const int n_users = 2 + int(master.uniform_int(5));
        const int n_items = 4 + int(master.uniform_int(7));
        ModelConfig mc;
        mc.feature_dim = 3;
        mc.n_users = n_users;
        mc.n_items = n_items;
        mc.embed_dim = 4;
        mc.hidden_dim = 5;
        mc.init_seed = 7000 + it;
        const RecommenderModel model = RecommenderModel::init(mc);
        Rng rng(7100 + it);
        const Matrix uf = sample_gaussian(rng, 0.0, 1.0, n_users, 3);
        const Matrix itf = sample_gaussian(rng, 0.0, 1.0, n_items, 3);
        InteractionSet set;
        for (int u = 0; u < n_users; ++u)
            for (int i = 0; i < n_items; ++i) {
                if (rng.uniform() < 0.5) continue;
                Interaction tr{u, i, 1, Split::train};
                const double r = rng.uniform();
                if (r < 0.3)
                    tr.split = Split::test;
                else if (r < 0.45)
                    tr.split = Split::valid;
                set.triples.push_back(tr);
            }
        const Histories hist = Histories::build(n_users, n_items, set.in_split(Split::train));
        const auto relevant = set.positives_by_user({Split::test});
        if (relevant.empty()) continue;
        ++instances;
        const std::vector<int> ks{1, 3, 5};
        const RankingMetrics metrics = evaluate(model, uf, itf, hist, set, Split::test, ks);

        // literal brute force, same ascending-user accumulation order
        const auto excl = set.positives_by_user({Split::train, Split::valid});
        std::vector<int> items(n_items);
        std::iota(items.begin(), items.end(), 0);
        const Matrix ei = encode_items(model, itf, hist, items);
        std::map<int, std::pair<double, double>> sums;
        for (int k : ks) sums[k] = {0.0, 0.0};
        int users = 0;
        for (const auto& [user, rel_list] : relevant) {
            const std::set<int> rel(rel_list.begin(), rel_list.end());
            std::set<int> exc;
            if (auto itx = excl.find(user); itx != excl.end())
                exc.insert(itx->second.begin(), itx->second.end());
            const int uid[] = {user};
            const Matrix eu = encode_users(model, uf, hist, uid);
            const Vector scores = score_user(eu.row_span(0), ei);
            std::vector<int> cand;
            for (int i = 0; i < n_items; ++i)
                if (!exc.count(i)) cand.push_back(i);
            for (std::size_t a = 0; a < cand.size(); ++a)
                for (std::size_t b = a + 1; b < cand.size(); ++b)
                    if (scores[cand[b]] > scores[cand[a]] ||
                        (scores[cand[b]] == scores[cand[a]] && cand[b] < cand[a]))
                        std::swap(cand[a], cand[b]);
            for (int k : ks) {
                int hits = 0;
                double dcg = 0.0;
                for (int r = 0; r < std::min<int>(k, int(cand.size())); ++r)
                    if (rel.count(cand[r])) {
                        ++hits;
                        dcg += 1.0 / std::log2(double(r) + 2.0);
                    }
                double idcg = 0.0;
                for (int r = 0; r < std::min<int>(k, int(rel.size())); ++r)
                    idcg += 1.0 / std::log2(double(r) + 2.0);
                sums[k].first += double(hits) / double(rel.size());
                sums[k].second += dcg / idcg;
            }
            ++users;
        }
        for (int k : ks) {
            if (metrics.per_k.at(k).first != sums[k].first / users ||
                metrics.per_k.at(k).second != sums[k].second / users)
                exact = false;
        }
    }
    const double dt = seconds_since(t0);
    report("ranking-metric oracle", exact && dt < 5.0,
           std::string(exact ? "exact match" : "MISMATCH") + " on " +
               std::to_string(instances) + " instances, " + fmt(dt) + "s");
}

// ---------------------------------------------------------------------------

struct HeadlineData {
    std::vector<double> frozen_r, frozen_n, full_r, full_n, no1_r, no1_n, no2_r, no2_n;
    // seed -> (model, dataset, pairs) kept for the sensitivity criterion
    std::vector<RecommenderModel> models;
    std::vector<Dataset> datasets;
    bool density_ok = true;
    double worst_density = 0.0;
};

HeadlineData run_headline() {
    HeadlineData out;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SyntheticConfig scfg;
        scfg.seed = seed;
        Dataset ds = generate_synthetic(scfg);
        if (std::abs(ds.iid.density - 0.2576) > 0.05) out.density_ok = false;
        out.worst_density = std::max(out.worst_density, std::abs(ds.iid.density - 0.2576));

        const Histories hist =
            Histories::build(ds.n_users, ds.n_items, ds.iid.in_split(Split::train));
        ModelConfig mc;
        mc.feature_dim = ds.feature_dim;
        mc.n_users = ds.n_users;
        mc.n_items = ds.n_items;
        mc.init_seed = seed;
        RecommenderModel model = RecommenderModel::init(mc);
        PretrainConfig pc;
        pc.epochs = 3;
        pc.batch_size = 2000;
        pc.learning_rate = 2e-3;
        pc.seed = seed;
        pc.log_validation = false;
        pretrain(model, ds.user_features, ds.item_features, hist, ds.iid, pc);

        std::vector<std::pair<int, int>> pairs;
        for (const auto& tr : ds.ood.triples)
            if (tr.split == Split::test) pairs.push_back({tr.user, tr.item});

        auto eval10 = [&](const RecommenderModel& m) {
            return evaluate(m, ds.user_features_ood, ds.item_features, hist, ds.ood,
                            Split::test, {10})
                .per_k.at(10);
        };
        const auto frozen = eval10(model);
        out.frozen_r.push_back(frozen.first);
        out.frozen_n.push_back(frozen.second);

        TTTConfig tc;  // release defaults: alpha 1, tau 0.9, T 0.1, K 4,
                       // lr 1e-4, 10 epochs, batch 500
        tc.seed = seed;
        for (auto [abl, r, n] :
             {std::tuple{Ablation::none, &out.full_r, &out.full_n},
              std::tuple{Ablation::no_ssl1, &out.no1_r, &out.no1_n},
              std::tuple{Ablation::no_ssl2, &out.no2_r, &out.no2_n}}) {
            const AdaptResult res =
                adapt(model, ds.user_features_ood, ds.item_features, hist, pairs, tc, abl);
            const auto m = eval10(res.model);
            r->push_back(m.first);
            n->push_back(m.second);
        }
        out.models.push_back(std::move(model));
        out.datasets.push_back(std::move(ds));
    }
    return out;
}

void criterion_headline(const HeadlineData& h, double runtime) {
    const double fr = median(h.frozen_r), fn = median(h.frozen_n);
    const double ur = median(h.full_r), un = median(h.full_n);
    const double n1r = median(h.no1_r), n1n = median(h.no1_n);
    const double n2r = median(h.no2_r), n2n = median(h.no2_n);

    const bool beats_frozen = ur > fr && un > fn;
    const bool geq_no1 = ur >= n1r && un >= n1n;
    const bool geq_no2 = ur >= n2r && un >= n2n;
    const bool in_time = runtime < 600.0;

    std::ostringstream d;
    d.precision(4);
    d << "medians R@10 frozen=" << fr << " full=" << ur << " no_SSL1=" << n1r
      << " no_SSL2=" << n2r << "; N@10 frozen=" << fn << " full=" << un << " no_SSL1=" << n1n
      << " no_SSL2=" << n2n << "; density dev " << h.worst_density << "; " << fmt(runtime)
      << "s";
    std::ostringstream sub;
    sub << " [density " << (h.density_ok ? "ok" : "FAIL") << ", full>frozen "
        << (beats_frozen ? "ok" : "FAIL") << ", full>=no_SSL1 " << (geq_no1 ? "ok" : "FAIL")
        << ", full>=no_SSL2 " << (geq_no2 ? "ok" : "FAIL") << ", runtime "
        << (in_time ? "ok" : "FAIL") << "]";
    report("synthetic OOD headline",
           h.density_ok && beats_frozen && geq_no1 && geq_no2 && in_time, d.str() + sub.str());
}

void criterion_sensitivity(const HeadlineData& h) {
    // T = 0.1 results for seeds 1..3 come from the headline full runs; the
    // T = 0.9 arm re-adapts the same pretrained models
    std::vector<double> t01(h.full_r.begin(), h.full_r.begin() + 3);
    std::vector<double> t09;
    for (std::size_t s = 0; s < 3; ++s) {
        const Dataset& ds = h.datasets[s];
        const Histories hist =
            Histories::build(ds.n_users, ds.n_items, ds.iid.in_split(Split::train));
        std::vector<std::pair<int, int>> pairs;
        for (const auto& tr : ds.ood.triples)
            if (tr.split == Split::test) pairs.push_back({tr.user, tr.item});
        TTTConfig tc;
        tc.seed = s + 1;
        tc.temperature = 0.9;
        const AdaptResult res = adapt(h.models[s], ds.user_features_ood, ds.item_features,
                                      hist, pairs, tc);
        t09.push_back(evaluate(res.model, ds.user_features_ood, ds.item_features, hist,
                               ds.ood, Split::test, {10})
                          .per_k.at(10)
                          .first);
    }
    const double m01 = median(t01), m09 = median(t09);
    report("sensitivity direction (T)", m01 >= m09,
           "median R@10 at T=0.1: " + fmt(m01) + ", at T=0.9: " + fmt(m09));
}

// ---------------------------------------------------------------------------

std::string g_cli;
fs::path g_scratch;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " >/dev/null 2>/dev/null";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_determinism() {
    if (g_cli.empty()) {
        report("determinism", false, "CLI path not supplied (--cli)");
        return;
    }
    fs::remove_all(g_scratch);
    fs::create_directories(g_scratch);
    auto wj = [&](const char* name, const std::string& body) {
        std::ofstream f(g_scratch / name);
        f << body;
    };
    wj("gen.json", R"({"n_users": 60, "n_items": 50, "feature_dim": 6})");
    bool ok = true;
    std::string what = "all six commands byte-identical across reruns";
    auto compare = [&](const fs::path& a, const fs::path& b,
                       const std::vector<std::string>& files, const char* cmd) {
        for (const auto& f : files) {
            if (slurp(a / f) != slurp(b / f) || slurp(a / f).empty()) {
                ok = false;
                what = std::string(cmd) + ": " + f + " differs or is empty";
                return;
            }
        }
    };

    const fs::path ga = g_scratch / "gen_a", gb = g_scratch / "gen_b";
    ok = ok && run_cli("generate --config " + (g_scratch / "gen.json").string() +
                       " --seed 3 --out " + ga.string()) == 0;
    ok = ok && run_cli("generate --config " + (g_scratch / "gen.json").string() +
                       " --seed 3 --out " + gb.string()) == 0;
    if (ok)
        compare(ga, gb,
                {"meta.json", "user_features.csv", "user_features_ood.csv",
                 "item_features.csv", "interactions_iid.csv", "interactions_ood.csv",
                 "config_echo.json", "seed.txt"},
                "generate");

    wj("pre.json", "{\"dataset\": \"" + ga.string() +
                       "\", \"epochs\": 1, \"batch_size\": 64, \"embed_dim\": 8, "
                       "\"hidden_dim\": 8, \"negatives\": 20, \"log_validation\": false}");
    const fs::path pa = g_scratch / "pre_a", pb = g_scratch / "pre_b";
    ok = ok && run_cli("pretrain --config " + (g_scratch / "pre.json").string() +
                       " --seed 3 --out " + pa.string()) == 0;
    ok = ok && run_cli("pretrain --config " + (g_scratch / "pre.json").string() +
                       " --seed 3 --out " + pb.string()) == 0;
    if (ok) compare(pa, pb, {"model.ckpt", "training_log.json", "config_echo.json"}, "pretrain");

    wj("adapt.json", "{\"dataset\": \"" + ga.string() + "\", \"checkpoint\": \"" +
                         (pa / "model.ckpt").string() +
                         "\", \"clusters\": 2, \"epochs\": 2, \"batch_size\": 64, "
                         "\"tau\": 0.5, \"eval_ks\": [5]}");
    const fs::path aa = g_scratch / "adapt_a", ab = g_scratch / "adapt_b";
    ok = ok && run_cli("adapt --config " + (g_scratch / "adapt.json").string() +
                       " --seed 3 --out " + aa.string()) == 0;
    ok = ok && run_cli("adapt --config " + (g_scratch / "adapt.json").string() +
                       " --seed 3 --out " + ab.string()) == 0;
    if (ok)
        compare(aa, ab, {"model_adapted.ckpt", "adapt_report.json", "loss_curve.csv"}, "adapt");

    wj("eval.json", "{\"dataset\": \"" + ga.string() + "\", \"checkpoint\": \"" +
                        (pa / "model.ckpt").string() + "\", \"ks\": [5], \"split\": \"test_iid\"}");
    const fs::path ea = g_scratch / "eval_a", eb = g_scratch / "eval_b";
    ok = ok && run_cli("evaluate --config " + (g_scratch / "eval.json").string() +
                       " --seed 3 --out " + ea.string()) == 0;
    ok = ok && run_cli("evaluate --config " + (g_scratch / "eval.json").string() +
                       " --seed 3 --out " + eb.string()) == 0;
    if (ok) compare(ea, eb, {"metrics.json"}, "evaluate");

    wj("verify.json", R"({"trials_theorem1": 50, "trials_theorem2": 50})");
    const fs::path va = g_scratch / "verify_a", vb = g_scratch / "verify_b";
    ok = ok && run_cli("verify --config " + (g_scratch / "verify.json").string() +
                       " --seed 3 --out " + va.string()) == 0;
    ok = ok && run_cli("verify --config " + (g_scratch / "verify.json").string() +
                       " --seed 3 --out " + vb.string()) == 0;
    if (ok) compare(va, vb, {"theorem_report.json"}, "verify");

    wj("sweep.json", "{\"dataset\": \"" + ga.string() + "\", \"checkpoint\": \"" +
                         (pa / "model.ckpt").string() +
                         "\", \"clusters\": 2, \"epochs\": 1, \"batch_size\": 64, "
                         "\"eval_ks\": [5], \"grid\": {\"temperature\": [0.1, 0.9]}}");
    const fs::path sa = g_scratch / "sweep_a", sb = g_scratch / "sweep_b";
    ok = ok && run_cli("sweep --config " + (g_scratch / "sweep.json").string() +
                       " --seed 3 --out " + sa.string()) == 0;
    ok = ok && run_cli("sweep --config " + (g_scratch / "sweep.json").string() +
                       " --seed 3 --out " + sb.string()) == 0;
    if (ok) compare(sa, sb, {"sweep.csv"}, "sweep");

    report("determinism", ok, what);
}

// ---------------------------------------------------------------------------

struct TimingScenario {
    RecommenderModel model;
    Matrix uf, itf;
    Histories hist;
};

TimingScenario make_timing_scenario() {
    TimingScenario s;
    ModelConfig mc;
    mc.feature_dim = 4;
    mc.n_users = 600;
    mc.n_items = 500;
    mc.embed_dim = 16;
    mc.hidden_dim = 8;
    mc.init_seed = 33;
    s.model = RecommenderModel::init(mc);
    Rng rng(34);
    s.uf = sample_gaussian(rng, 0.0, 1.0, 600, 4);
    s.itf = sample_gaussian(rng, 0.0, 1.0, 500, 4);
    std::vector<Interaction> pos;
    for (int u = 0; u < 600; ++u)
        for (int i = 0; i < 500; ++i)
            if (rng.uniform() < 0.02) pos.push_back({u, i, 1, Split::train});
    s.hist = Histories::build(600, 500, pos);
    return s;
}

// time one loss+gradient evaluation over a constructed batch of size b with
// exactly n confidence-selected rows split across two clusters
double time_loss_eval(TimingScenario& s, int b, int n, Rng& rng) {
    std::vector<std::pair<int, int>> pairs(b);
    for (auto& p : pairs) p = {int(rng.uniform_int(600)), int(rng.uniform_int(500))};
    const Matrix centers = sample_gaussian(rng, 0.0, 0.5, 2, 16);
    TTTFixed fixed;
    fixed.p = Matrix(std::size_t(b), 2, 0.5);
    fixed.clusters.assign(2, {});
    for (int i = 0; i < n; ++i) fixed.clusters[i % 2].push_back(i);
    fixed.lc_active = true;
    TTTParams prm;
    prm.tau = 0.0;
    prm.temperature = 0.5;
    ModelGrads grads = ModelGrads::zeros_like(s.model);

    double best = std::numeric_limits<double>::max();
    for (int rep = 0; rep < 3; ++rep) {
        grads.zero();
        const auto t0 = Clock::now();
        ttt_batch_loss(s.model, s.uf, s.itf, s.hist, pairs, centers, prm, &grads, &fixed);
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

// least-squares fit t = a + b*x, returns R^2
double r_squared(const std::vector<double>& xs, const std::vector<double>& ts) {
    const std::size_t n = xs.size();
    double sx = 0, st = 0, sxx = 0, sxt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        st += ts[i];
        sxx += xs[i] * xs[i];
        sxt += xs[i] * ts[i];
    }
    const double beta = (n * sxt - sx * st) / (n * sxx - sx * sx);
    const double alpha = (st - beta * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = st / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = alpha + beta * xs[i];
        ss_res += (ts[i] - pred) * (ts[i] - pred);
        ss_tot += (ts[i] - mean) * (ts[i] - mean);
    }
    return 1.0 - ss_res / ss_tot;
}

void criterion_complexity() {
    TimingScenario s = make_timing_scenario();
    Rng rng(35);

    // linear in batch size at fixed confident count
    std::vector<double> bs{1000, 2000, 4000, 8000};
    std::vector<double> tb;
    for (double b : bs) tb.push_back(time_loss_eval(s, int(b), 200, rng));
    const double r2_b = r_squared(bs, tb);

    // quadratic in the confident count at fixed batch size
    std::vector<double> ns{400, 800, 1600, 3200};
    std::vector<double> n2s, tn;
    for (double n : ns) {
        n2s.push_back(n * n);
        tn.push_back(time_loss_eval(s, 4000, int(n), rng));
    }
    const double r2_n = r_squared(n2s, tn);

    report("complexity scaling", r2_b > 0.9 && r2_n > 0.9,
           "R^2 linear-in-B " + fmt(r2_b) + ", R^2 quadratic-in-N " + fmt(r2_n));
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; i += 2)
        if (std::string(argv[i]) == "--cli") g_cli = argv[i + 1];
    g_scratch = fs::temp_directory_path() / "ttrec_acceptance";

    criterion_kernels();
    criterion_gradient_oracle();
    criterion_theorem1();
    criterion_theorem2();
    criterion_ranking_oracle();

    const auto t0 = Clock::now();
    const HeadlineData h = run_headline();
    criterion_headline(h, seconds_since(t0));
    criterion_sensitivity(h);

    criterion_determinism();
    criterion_complexity();

    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                  : std::to_string(g_failures) + " CRITERIA FAILED")
              << "\n";
    return g_failures == 0 ? 0 : 1;
}
