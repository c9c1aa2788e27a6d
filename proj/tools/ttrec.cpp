// ttrec command-line driver: dataset generation, pretraining, test-time
// adaptation, ranking evaluation, theorem verification and parameter sweeps.
// Every command takes --config/--seed/--out, with flag > file > default
// precedence, writes config_echo.json + seed.txt next to its artifacts, and
// reports failures as a JSON object on stderr with a nonzero exit code.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttrec/datagen.hpp"
#include "ttrec/dataset.hpp"
#include "ttrec/evalrank.hpp"
#include "ttrec/pretrain.hpp"
#include "ttrec/theory.hpp"
#include "ttrec/ttt.hpp"

namespace fs = std::filesystem;
using namespace ttrec;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json load_config_file(const std::string& path, const std::set<std::string>& allowed) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json cfg = json::parse(in);
    for (const auto& [key, value] : cfg.items()) {
        if (!allowed.count(key))
            throw std::runtime_error("unknown config key: '" + key + "' in " + path);
    }
    return cfg;
}

template <typename T>
T pick(const CLI::Option* opt, const T& flag_value, const json& file, const char* key,
       const T& def) {
    if (opt != nullptr && opt->count() > 0) return flag_value;
    if (file.contains(key)) return file.at(key).get<T>();
    return def;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << text;
}

void write_provenance(const fs::path& dir, const ordered_json& echo, std::uint64_t seed) {
    fs::create_directories(dir);
    write_text(dir / "config_echo.json", echo.dump(2) + "\n");
    write_text(dir / "seed.txt", std::to_string(seed) + "\n");
}

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::pair<int, int>> test_pairs(const InteractionSet& set) {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& t : set.triples)
        if (t.split == Split::test) pairs.push_back({t.user, t.item});
    return pairs;
}

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    CLI::Option* config_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    void attach(CLI::App* cmd) {
        config_opt = cmd->add_option("--config", config_path, "JSON config file");
        seed_opt = cmd->add_option("--seed", seed, "run seed");
        out_opt = cmd->add_option("--out", out, "output directory");
    }

    std::uint64_t final_seed(const json& file) const {
        return pick<std::uint64_t>(seed_opt, seed, file, "seed", 0);
    }
    std::string final_out(const json& file) const {
        const std::string o = pick<std::string>(out_opt, out, file, "out", "");
        if (o.empty()) throw std::runtime_error("no output directory given (--out)");
        return o;
    }
};

// ---------------------------------------------------------------------------

int cmd_generate(const CommonArgs& common) {
    const std::set<std::string> allowed = {
        "command",        "seed",       "out",           "n_users",
        "n_items",        "feature_dim", "iid_user_mean", "ood_user_mean",
        "item_mean",      "feature_std", "signs",         "interaction_scale",
        "interaction_bias", "calibrate_bias", "target_density"};
    const json file = load_config_file(common.config_path, allowed);

    SyntheticConfig cfg;
    cfg.seed = common.final_seed(file);
    cfg.n_users = file.value("n_users", cfg.n_users);
    cfg.n_items = file.value("n_items", cfg.n_items);
    cfg.feature_dim = file.value("feature_dim", cfg.feature_dim);
    cfg.iid_user_mean = file.value("iid_user_mean", cfg.iid_user_mean);
    cfg.ood_user_mean = file.value("ood_user_mean", cfg.ood_user_mean);
    cfg.item_mean = file.value("item_mean", cfg.item_mean);
    cfg.feature_std = file.value("feature_std", cfg.feature_std);
    cfg.interaction_scale = file.value("interaction_scale", cfg.interaction_scale);
    cfg.interaction_bias = file.value("interaction_bias", cfg.interaction_bias);
    cfg.calibrate_bias = file.value("calibrate_bias", cfg.calibrate_bias);
    cfg.target_density = file.value("target_density", cfg.target_density);
    if (file.contains("signs")) cfg.preference_weight_signs = file.at("signs").get<std::vector<int>>();
    const fs::path out = common.final_out(file);

    const Dataset ds = generate_synthetic(cfg);
    save_dataset(ds, out);

    ordered_json echo;
    echo["command"] = "generate";
    echo["seed"] = cfg.seed;
    echo["n_users"] = cfg.n_users;
    echo["n_items"] = cfg.n_items;
    echo["feature_dim"] = cfg.feature_dim;
    echo["iid_user_mean"] = cfg.iid_user_mean;
    echo["ood_user_mean"] = cfg.ood_user_mean;
    echo["item_mean"] = cfg.item_mean;
    echo["feature_std"] = cfg.feature_std;
    echo["signs"] = cfg.effective_signs();
    echo["interaction_scale"] = cfg.interaction_scale;
    echo["interaction_bias"] = cfg.interaction_bias;
    echo["calibrate_bias"] = cfg.calibrate_bias;
    echo["target_density"] = cfg.target_density;
    write_provenance(out, echo, cfg.seed);

    ordered_json summary;
    summary["iid_interactions"] = ds.iid.size();
    summary["ood_interactions"] = ds.ood.size();
    summary["iid_density"] = ds.iid.density;
    summary["ood_density"] = ds.ood.density;
    write_text(out / "generation_summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_pretrain(const CommonArgs& common) {
    const std::set<std::string> allowed = {
        "command",    "seed",        "out",        "dataset",    "epochs",
        "batch_size", "learning_rate", "dropout",  "negatives",  "full_softmax",
        "embed_dim",  "hidden_dim",  "validation_k", "log_validation", "verbose"};
    const json file = load_config_file(common.config_path, allowed);
    const std::uint64_t seed = common.final_seed(file);
    const fs::path out = common.final_out(file);
    const std::string dataset_dir = file.value("dataset", "");
    if (dataset_dir.empty()) throw std::runtime_error("pretrain: config key 'dataset' required");

    const Dataset ds = load_dataset(dataset_dir);
    const Histories hist =
        Histories::build(ds.n_users, ds.n_items, ds.iid.in_split(Split::train));

    ModelConfig mc;
    mc.feature_dim = ds.feature_dim;
    mc.n_users = ds.n_users;
    mc.n_items = ds.n_items;
    mc.embed_dim = file.value("embed_dim", 16);
    mc.hidden_dim = file.value("hidden_dim", 64);
    mc.dropout_rate = file.value("dropout", 0.5);
    mc.init_seed = seed;

    PretrainConfig pc;
    pc.epochs = file.value("epochs", 5);
    pc.batch_size = file.value("batch_size", 1000);
    pc.learning_rate = file.value("learning_rate", 1e-4);
    pc.dropout = mc.dropout_rate;
    pc.negatives = file.value("negatives", 100);
    pc.full_softmax = file.value("full_softmax", false);
    pc.validation_k = file.value("validation_k", 10);
    pc.log_validation = file.value("log_validation", true);
    pc.verbose = file.value("verbose", false);
    pc.seed = seed;

    ordered_json echo;
    echo["command"] = "pretrain";
    echo["seed"] = seed;
    echo["dataset"] = dataset_dir;
    echo["epochs"] = pc.epochs;
    echo["batch_size"] = pc.batch_size;
    echo["learning_rate"] = pc.learning_rate;
    echo["dropout"] = pc.dropout;
    echo["negatives"] = pc.negatives;
    echo["full_softmax"] = pc.full_softmax;
    echo["embed_dim"] = mc.embed_dim;
    echo["hidden_dim"] = mc.hidden_dim;
    echo["validation_k"] = pc.validation_k;
    echo["log_validation"] = pc.log_validation;

    RecommenderModel model = RecommenderModel::init(mc);
    model.config_hash = fnv1a64(echo.dump());
    const PretrainResult res =
        pretrain(model, ds.user_features, ds.item_features, hist, ds.iid, pc);

    write_provenance(out, echo, seed);
    save_checkpoint(model, out / "model.ckpt");
    ordered_json log;
    log["epoch_loss"] = res.epoch_loss;
    if (!res.valid_recall.empty()) log["valid_recall"] = res.valid_recall;
    write_text(out / "training_log.json", log.dump(2) + "\n");
    std::cout << log.dump(2) << "\n";
    return 0;
}

int cmd_adapt(const CommonArgs& common) {
    const std::set<std::string> allowed = {
        "command",   "seed",       "out",          "dataset",   "checkpoint",
        "alpha",     "tau",        "temperature",  "clusters",  "epochs",
        "learning_rate", "batch_size", "tau_is_fraction", "kernel", "normalize",
        "adaptive_bandwidth", "bandwidth_scale", "ablate",
        "eval_ks",   "probe_alignment", "dump_clusters", "verbose"};
    const json file = load_config_file(common.config_path, allowed);
    const std::uint64_t seed = common.final_seed(file);
    const fs::path out = common.final_out(file);
    const std::string dataset_dir = file.value("dataset", "");
    const std::string checkpoint = file.value("checkpoint", "");
    if (dataset_dir.empty() || checkpoint.empty())
        throw std::runtime_error("adapt: config keys 'dataset' and 'checkpoint' required");

    const Dataset ds = load_dataset(dataset_dir);
    const Histories hist =
        Histories::build(ds.n_users, ds.n_items, ds.iid.in_split(Split::train));
    const RecommenderModel model = load_checkpoint(checkpoint);

    TTTConfig tc;
    tc.alpha = file.value("alpha", 1.0);
    tc.tau = file.value("tau", 0.9);
    tc.temperature = file.value("temperature", 0.1);
    tc.clusters = file.value("clusters", 4);
    tc.epochs = file.value("epochs", 10);
    tc.learning_rate = file.value("learning_rate", 1e-4);
    tc.batch_size = file.value("batch_size", 500);
    tc.tau_is_fraction = file.value("tau_is_fraction", false);
    tc.kernel = assign_kernel_from_name(file.value("kernel", std::string("gaussian")));
    tc.normalize = file.value("normalize", true);
    tc.adaptive_bandwidth = file.value("adaptive_bandwidth", true);
    tc.bandwidth_scale = file.value("bandwidth_scale", 12.0);
    tc.verbose = file.value("verbose", false);
    tc.seed = seed;
    const Ablation ablation = ablation_from_name(file.value("ablate", std::string("none")));
    const std::vector<int> ks = file.value("eval_ks", std::vector<int>{10, 20});
    const bool probe_alignment = file.value("probe_alignment", false);
    const bool dump_clusters = file.value("dump_clusters", false);

    const auto pairs = test_pairs(ds.ood);

    EpochProbe probe;
    if (probe_alignment) {
        Rng probe_rng = Rng(seed).fork("probe");
        auto valid = ds.iid.in_split(Split::valid);
        if (valid.size() > 500) valid.resize(500);
        const CEBatch labeled = build_ce_batch_sampled(valid, ds.n_items, 100, probe_rng);
        probe = [&, labeled](const RecommenderModel& m, int epoch) {
            Rng km = Rng(seed).fork("probe-kmeans").fork(std::to_string(epoch));
            const PairForward full =
                pair_forward(m, ds.user_features_ood, ds.item_features, hist, pairs);
            const ClusterState st = fit_soft_kmeans(
                tc.normalize ? normalize_rows(full.fused) : full.fused,
                std::size_t(tc.clusters), km, tc.kernel, tc.adaptive_bandwidth,
                tc.bandwidth_scale);
            const std::size_t n = std::min<std::size_t>(500, pairs.size());
            TTTParams prm;
            prm.alpha = tc.alpha;
            prm.tau = tc.tau;
            prm.temperature = tc.temperature;
            prm.kernel = tc.kernel;
            prm.normalize = tc.normalize;
            prm.bandwidth = st.bandwidth;
            return measure_alignment(m, ds.user_features_ood, ds.item_features, hist, labeled,
                                     std::span(pairs.data(), n), st.centers, prm);
        };
    }

    const AdaptResult res = adapt(model, ds.user_features_ood, ds.item_features, hist, pairs,
                                  tc, ablation, probe_alignment ? &probe : nullptr);

    const RankingMetrics metrics = evaluate(res.model, ds.user_features_ood, ds.item_features,
                                            hist, ds.ood, Split::test, ks);
    const ordered_json metrics_json = metrics.to_json("test_ood");

    ordered_json echo;
    echo["command"] = "adapt";
    echo["seed"] = seed;
    echo["dataset"] = dataset_dir;
    echo["checkpoint"] = checkpoint;
    echo["alpha"] = tc.alpha;
    echo["tau"] = tc.tau;
    echo["temperature"] = tc.temperature;
    echo["clusters"] = tc.clusters;
    echo["epochs"] = tc.epochs;
    echo["learning_rate"] = tc.learning_rate;
    echo["batch_size"] = tc.batch_size;
    echo["tau_is_fraction"] = tc.tau_is_fraction;
    echo["kernel"] = assign_kernel_name(tc.kernel);
    echo["normalize"] = tc.normalize;
    echo["adaptive_bandwidth"] = tc.adaptive_bandwidth;
    echo["bandwidth_scale"] = tc.bandwidth_scale;
    echo["ablate"] = ablation_name(ablation);
    echo["eval_ks"] = ks;
    echo["probe_alignment"] = probe_alignment;
    echo["dump_clusters"] = dump_clusters;
    write_provenance(out, echo, seed);

    save_checkpoint(res.model, out / "model_adapted.ckpt");
    write_text(out / "adapt_report.json",
               adapt_report_json(res, tc, ablation, echo, &metrics_json).dump(2) + "\n");

    std::string csv = "epoch,L_d,L_p,L_n,L_c,L_total\n";
    for (std::size_t e = 0; e < res.epochs.size(); ++e) {
        const auto& b = res.epochs[e];
        csv += std::to_string(e) + "," + fmt_double(b.l_d) + "," + fmt_double(b.l_p) + "," +
               fmt_double(b.l_n) + "," + fmt_double(b.l_c) + "," + fmt_double(b.l_total) + "\n";
    }
    write_text(out / "loss_curve.csv", csv);

    if (dump_clusters) {
        std::string dump = "row,label,max_prob\n";
        if (!res.last_cluster_state.empty()) {
            const Matrix& q = res.last_cluster_state.front().q;
            for (std::size_t n = 0; n < q.rows; ++n) {
                std::size_t best = 0;
                for (std::size_t k = 1; k < q.cols; ++k)
                    if (q(n, k) > q(n, best)) best = k;
                dump += std::to_string(n) + "," + std::to_string(best) + "," +
                        fmt_double(q(n, best)) + "\n";
            }
        }
        write_text(out / "clusters.csv", dump);
    }
    std::cout << metrics_json.dump(2) << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& common) {
    const std::set<std::string> allowed = {"command", "seed", "out",  "dataset",
                                           "checkpoint", "ks",  "split"};
    const json file = load_config_file(common.config_path, allowed);
    const std::uint64_t seed = common.final_seed(file);
    const fs::path out = common.final_out(file);
    const std::string dataset_dir = file.value("dataset", "");
    const std::string checkpoint = file.value("checkpoint", "");
    if (dataset_dir.empty() || checkpoint.empty())
        throw std::runtime_error("evaluate: config keys 'dataset' and 'checkpoint' required");
    const std::vector<int> ks = file.value("ks", std::vector<int>{10, 20});
    const std::string split_label = file.value("split", std::string("test_ood"));

    const Dataset ds = load_dataset(dataset_dir);
    const Histories hist =
        Histories::build(ds.n_users, ds.n_items, ds.iid.in_split(Split::train));
    const RecommenderModel model = load_checkpoint(checkpoint);

    const bool ood = split_label.ends_with("ood");
    Split target;
    if (split_label == "test_ood" || split_label == "test_iid")
        target = Split::test;
    else if (split_label == "valid_ood" || split_label == "valid_iid")
        target = Split::valid;
    else
        throw std::runtime_error("evaluate: unknown split '" + split_label +
                                 "' (use test_iid|test_ood|valid_iid|valid_ood)");

    const RankingMetrics metrics =
        evaluate(model, ood ? ds.user_features_ood : ds.user_features, ds.item_features, hist,
                 ood ? ds.ood : ds.iid, target, ks);

    ordered_json echo;
    echo["command"] = "evaluate";
    echo["seed"] = seed;
    echo["dataset"] = dataset_dir;
    echo["checkpoint"] = checkpoint;
    echo["ks"] = ks;
    echo["split"] = split_label;
    write_provenance(out, echo, seed);

    const ordered_json mj = metrics.to_json(split_label);
    write_text(out / "metrics.json", mj.dump(2) + "\n");
    std::cout << mj.dump(2) << "\n";
    return 0;
}

int cmd_verify(const CommonArgs& common) {
    const std::set<std::string> allowed = {"command", "seed",   "out",     "trials_theorem1",
                                           "trials_theorem2", "n_max", "epsilon", "trials"};
    const json file = load_config_file(common.config_path, allowed);
    const std::uint64_t seed = common.final_seed(file);
    const fs::path out = common.final_out(file);
    const int default_trials = file.value("trials", -1);
    const int trials1 =
        file.value("trials_theorem1", default_trials >= 0 ? default_trials : 1000);
    const int trials2 =
        file.value("trials_theorem2", default_trials >= 0 ? default_trials : 500);
    const int n_max = file.value("n_max", 10);
    const double epsilon = file.value("epsilon", 0.01);

    Rng root(seed);
    Rng r1 = root.fork("theorem1");
    Rng r2 = root.fork("theorem2");
    const Theorem1Report t1 = verify_theorem1(trials1, n_max, r1);
    Theorem2Config t2cfg;
    t2cfg.epsilon = epsilon;
    t2cfg.n_max = n_max;
    const Theorem2Report t2 = verify_theorem2(t2cfg, trials2, r2);

    ordered_json echo;
    echo["command"] = "verify";
    echo["seed"] = seed;
    echo["trials_theorem1"] = trials1;
    echo["trials_theorem2"] = trials2;
    echo["n_max"] = n_max;
    echo["epsilon"] = epsilon;
    write_provenance(out, echo, seed);

    ordered_json rep;
    rep["theorem1"] = t1.to_json();
    rep["theorem2"] = t2.to_json();
    write_text(out / "theorem_report.json", rep.dump(2) + "\n");
    std::cout << rep.dump(2) << "\n";
    const bool ok = t1.all_passed() && t2.all_passed();
    if (!ok) throw std::runtime_error("theorem verification failed; see theorem_report.json");
    return 0;
}

int cmd_sweep(const CommonArgs& common) {
    const std::set<std::string> allowed = {
        "command", "seed",  "out",         "dataset",  "checkpoint", "grid",
        "alpha",   "tau",   "temperature", "clusters", "epochs",     "learning_rate",
        "batch_size", "kernel", "normalize", "adaptive_bandwidth", "bandwidth_scale", "eval_ks"};
    const json file = load_config_file(common.config_path, allowed);
    const std::uint64_t seed = common.final_seed(file);
    const fs::path out = common.final_out(file);
    const std::string dataset_dir = file.value("dataset", "");
    const std::string checkpoint = file.value("checkpoint", "");
    if (dataset_dir.empty() || checkpoint.empty())
        throw std::runtime_error("sweep: config keys 'dataset' and 'checkpoint' required");

    TTTConfig base;
    base.alpha = file.value("alpha", 1.0);
    base.tau = file.value("tau", 0.9);
    base.temperature = file.value("temperature", 0.1);
    base.clusters = file.value("clusters", 4);
    base.epochs = file.value("epochs", 10);
    base.learning_rate = file.value("learning_rate", 1e-4);
    base.batch_size = file.value("batch_size", 500);
    base.kernel = assign_kernel_from_name(file.value("kernel", std::string("gaussian")));
    base.normalize = file.value("normalize", true);
    base.adaptive_bandwidth = file.value("adaptive_bandwidth", true);
    base.bandwidth_scale = file.value("bandwidth_scale", 12.0);
    base.seed = seed;
    const std::vector<int> ks = file.value("eval_ks", std::vector<int>{10, 20});

    const json grid = file.value("grid", json::object());
    for (const auto& [key, value] : grid.items()) {
        if (key != "alpha" && key != "tau" && key != "temperature" && key != "clusters")
            throw std::runtime_error("sweep: unknown grid key '" + key + "'");
    }
    auto axis = [&](const char* key, double fallback) {
        return grid.contains(key) ? grid.at(key).get<std::vector<double>>()
                                  : std::vector<double>{fallback};
    };
    const auto alphas = axis("alpha", base.alpha);
    const auto taus = axis("tau", base.tau);
    const auto temps = axis("temperature", base.temperature);
    const auto kss = grid.contains("clusters")
                         ? grid.at("clusters").get<std::vector<int>>()
                         : std::vector<int>{base.clusters};

    const Dataset ds = load_dataset(dataset_dir);
    const Histories hist =
        Histories::build(ds.n_users, ds.n_items, ds.iid.in_split(Split::train));
    const RecommenderModel model = load_checkpoint(checkpoint);
    const auto pairs = test_pairs(ds.ood);

    std::string csv = "alpha,tau,temperature,clusters";
    for (int k : ks) csv += ",recall@" + std::to_string(k) + ",ndcg@" + std::to_string(k);
    csv += "\n";
    for (double a : alphas)
        for (double t : taus)
            for (double temp : temps)
                for (int k : kss) {
                    TTTConfig tc = base;
                    tc.alpha = a;
                    tc.tau = t;
                    tc.temperature = temp;
                    tc.clusters = k;
                    const AdaptResult res = adapt(model, ds.user_features_ood,
                                                  ds.item_features, hist, pairs, tc);
                    const RankingMetrics m = evaluate(res.model, ds.user_features_ood,
                                                      ds.item_features, hist, ds.ood,
                                                      Split::test, ks);
                    csv += fmt_double(a) + "," + fmt_double(t) + "," + fmt_double(temp) + "," +
                           std::to_string(k);
                    for (int kk : ks)
                        csv += "," + fmt_double(m.per_k.at(kk).first) + "," +
                               fmt_double(m.per_k.at(kk).second);
                    csv += "\n";
                }

    ordered_json echo;
    echo["command"] = "sweep";
    echo["seed"] = seed;
    echo["dataset"] = dataset_dir;
    echo["checkpoint"] = checkpoint;
    echo["grid"] = grid;
    echo["alpha"] = base.alpha;
    echo["tau"] = base.tau;
    echo["temperature"] = base.temperature;
    echo["clusters"] = base.clusters;
    echo["epochs"] = base.epochs;
    echo["learning_rate"] = base.learning_rate;
    echo["batch_size"] = base.batch_size;
    echo["eval_ks"] = ks;
    write_provenance(out, echo, seed);
    write_text(out / "sweep.csv", csv);
    std::cout << csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"test-time-trained recommender toolkit"};
    app.require_subcommand(1);

    CommonArgs gen_args, pre_args, adapt_args, eval_args, verify_args, sweep_args;
    auto* generate = app.add_subcommand("generate", "build a synthetic IID/OOD dataset");
    gen_args.attach(generate);
    auto* pretrain_cmd = app.add_subcommand("pretrain", "supervised pretraining on the IID split");
    pre_args.attach(pretrain_cmd);
    auto* adapt_cmd = app.add_subcommand("adapt", "test-time adaptation on the OOD split");
    adapt_args.attach(adapt_cmd);
    auto* evaluate_cmd = app.add_subcommand("evaluate", "all-ranking Recall/NDCG evaluation");
    eval_args.attach(evaluate_cmd);
    auto* verify_cmd = app.add_subcommand("verify", "numerical theorem verification");
    verify_args.attach(verify_cmd);
    auto* sweep_cmd = app.add_subcommand("sweep", "hyper-parameter grid sweep");
    sweep_args.attach(sweep_cmd);

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (name == "generate") return cmd_generate(gen_args);
        if (name == "pretrain") return cmd_pretrain(pre_args);
        if (name == "adapt") return cmd_adapt(adapt_args);
        if (name == "evaluate") return cmd_evaluate(eval_args);
        if (name == "verify") return cmd_verify(verify_args);
        if (name == "sweep") return cmd_sweep(sweep_args);
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = {{"command", name}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 2;
}
