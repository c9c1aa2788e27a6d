// Interaction sets and the plain-text dataset bundle: meta.json,
// user/item feature CSVs and the IID/OOD interaction CSVs.
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttrec/matrix.hpp"
#include "ttrec/rng.hpp"

namespace ttrec {

enum class Split { train, valid, test };

inline const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        default: return "test";
    }
}

inline Split split_from_name(const std::string& s, const std::string& where) {
    if (s == "train") return Split::train;
    if (s == "valid") return Split::valid;
    if (s == "test") return Split::test;
    throw std::runtime_error(where + ": unknown split '" + s + "'");
}

struct Interaction {
    int user = 0;
    int item = 0;
    int label = 1;
    Split split = Split::train;
};

struct InteractionSet {
    std::vector<Interaction> triples;
    double density = 0.0;  // positives / (n_users * n_items), filled by the generator

    std::size_t size() const { return triples.size(); }

    std::vector<Interaction> in_split(Split s) const {
        std::vector<Interaction> out;
        for (const auto& t : triples)
            if (t.split == s) out.push_back(t);
        return out;
    }

    // user -> positive item ids inside the given splits
    std::map<int, std::vector<int>> positives_by_user(std::initializer_list<Split> splits) const {
        std::map<int, std::vector<int>> by_user;
        for (const auto& t : triples) {
            if (t.label != 1) continue;
            for (Split s : splits)
                if (t.split == s) by_user[t.user].push_back(t.item);
        }
        return by_user;
    }
};

struct Dataset {
    int n_users = 0;
    int n_items = 0;
    int feature_dim = 0;
    std::uint64_t seed = 0;
    Matrix user_features;      // n_users x feature_dim
    Matrix user_features_ood;  // n_users x feature_dim
    Matrix item_features;      // n_items x feature_dim
    InteractionSet iid;
    InteractionSet ood;
};

// ---------------------------------------------------------------------------
// 80/10/10 split. Per-user stratified for users with >= 3 positives (each of
// those users keeps at least one valid and one test triple); users with fewer
// positives stay entirely in train. Deterministic under the rng seed.
inline void split_interactions(InteractionSet& set, Rng rng, double train_ratio = 0.8,
                               double valid_ratio = 0.1, double test_ratio = 0.1) {
    if (set.triples.empty()) throw std::invalid_argument("split: empty interaction set");
    if (std::abs(train_ratio + valid_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("split: ratios must sum to 1");

    std::map<int, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < set.triples.size(); ++i)
        by_user[set.triples[i].user].push_back(i);

    for (auto& [user, idxs] : by_user) {
        rng.shuffle(idxs);
        const std::size_t n = idxs.size();
        std::size_t n_valid = 0, n_test = 0;
        if (n >= 3) {
            n_valid = std::max<std::size_t>(1, std::llround(valid_ratio * double(n)));
            n_test = std::max<std::size_t>(1, std::llround(test_ratio * double(n)));
        }
        for (std::size_t k = 0; k < n; ++k) {
            Split s = Split::train;
            if (k < n_valid)
                s = Split::valid;
            else if (k < n_valid + n_test)
                s = Split::test;
            set.triples[idxs[k]].split = s;
        }
    }
}

// ---------------------------------------------------------------------------
// On-disk bundle

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::ifstream open_or_throw(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open file: " + p.string());
    return in;
}

inline void write_features_csv(const std::filesystem::path& p, const Matrix& m) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write file: " + p.string());
    out << "id";
    for (std::size_t f = 0; f < m.cols; ++f) out << ",f" << f;
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < m.rows; ++i) {
        out << i;
        for (std::size_t f = 0; f < m.cols; ++f) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, f));
            out << ',' << buf;
        }
        out << "\n";
    }
}

inline Matrix read_features_csv(const std::filesystem::path& p, int expect_rows,
                                int expect_cols) {
    auto in = open_or_throw(p);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(p.string() + ":1: missing header");
    const auto header = split_csv_line(line);
    if (int(header.size()) != expect_cols + 1)
        throw std::runtime_error(p.string() + ":1: expected " + std::to_string(expect_cols) +
                                 " feature columns, found " + std::to_string(header.size() - 1));
    Matrix m(expect_rows, expect_cols);
    int row = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (row >= expect_rows)
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                     ": more rows than declared in meta.json");
        const auto cells = split_csv_line(line);
        if (int(cells.size()) != expect_cols + 1)
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                     ": wrong column count");
        try {
            if (std::stoi(cells[0]) != row)
                throw std::runtime_error("non-sequential id");
            for (int f = 0; f < expect_cols; ++f) m(row, f) = std::stod(cells[f + 1]);
        } catch (const std::exception& e) {
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        ++row;
    }
    if (row != expect_rows)
        throw std::runtime_error(p.string() + ": row count " + std::to_string(row) +
                                 " does not match meta.json entry " + std::to_string(expect_rows));
    return m;
}

inline void write_interactions_csv(const std::filesystem::path& p, const InteractionSet& set) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write file: " + p.string());
    out << "user,item,label,split\n";
    for (const auto& t : set.triples)
        out << t.user << ',' << t.item << ',' << t.label << ',' << split_name(t.split) << "\n";
}

inline InteractionSet read_interactions_csv(const std::filesystem::path& p, int n_users,
                                            int n_items) {
    auto in = open_or_throw(p);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(p.string() + ":1: missing header");
    InteractionSet set;
    std::set<std::pair<int, int>> seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 4)
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                     ": expected 4 columns");
        Interaction t;
        try {
            t.user = std::stoi(cells[0]);
            t.item = std::stoi(cells[1]);
            t.label = std::stoi(cells[2]);
        } catch (const std::exception& e) {
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        t.split = split_from_name(cells[3], p.string() + ":" + std::to_string(lineno));
        if (t.user < 0 || t.user >= n_users || t.item < 0 || t.item >= n_items)
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                     ": id out of range");
        if (!seen.insert({t.user, t.item}).second)
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                     ": duplicate (user,item) pair");
        set.triples.push_back(t);
    }
    set.density = double(set.triples.size()) / (double(n_users) * double(n_items));
    return set;
}

}  // namespace detail

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json meta;
    meta["n_users"] = ds.n_users;
    meta["n_items"] = ds.n_items;
    meta["feature_dim"] = ds.feature_dim;
    meta["seed"] = ds.seed;
    std::ofstream mf(dir / "meta.json");
    if (!mf) throw std::runtime_error("cannot write file: " + (dir / "meta.json").string());
    mf << meta.dump(2) << "\n";
    detail::write_features_csv(dir / "user_features.csv", ds.user_features);
    detail::write_features_csv(dir / "user_features_ood.csv", ds.user_features_ood);
    detail::write_features_csv(dir / "item_features.csv", ds.item_features);
    detail::write_interactions_csv(dir / "interactions_iid.csv", ds.iid);
    detail::write_interactions_csv(dir / "interactions_ood.csv", ds.ood);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    auto mf = detail::open_or_throw(dir / "meta.json");
    nlohmann::json meta = nlohmann::json::parse(mf);
    Dataset ds;
    ds.n_users = meta.at("n_users").get<int>();
    ds.n_items = meta.at("n_items").get<int>();
    ds.feature_dim = meta.at("feature_dim").get<int>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
    ds.user_features =
        detail::read_features_csv(dir / "user_features.csv", ds.n_users, ds.feature_dim);
    ds.user_features_ood =
        detail::read_features_csv(dir / "user_features_ood.csv", ds.n_users, ds.feature_dim);
    ds.item_features =
        detail::read_features_csv(dir / "item_features.csv", ds.n_items, ds.feature_dim);
    ds.iid = detail::read_interactions_csv(dir / "interactions_iid.csv", ds.n_users, ds.n_items);
    ds.ood = detail::read_interactions_csv(dir / "interactions_ood.csv", ds.n_users, ds.n_items);
    return ds;
}

// Rating triples (user,item,rating): ratings >= 4 become positive
// interactions, everything else is dropped.
inline InteractionSet binarize_ratings(
    const std::vector<std::tuple<int, int, double>>& ratings) {
    InteractionSet set;
    for (const auto& [u, i, r] : ratings)
        if (r >= 4.0) set.triples.push_back({u, i, 1, Split::train});
    return set;
}

inline InteractionSet load_ratings_csv(const std::filesystem::path& p) {
    auto in = detail::open_or_throw(p);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(p.string() + ":1: missing header");
    std::vector<std::tuple<int, int, double>> ratings;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 3)
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                                     ": expected 3 columns");
        try {
            ratings.emplace_back(std::stoi(cells[0]), std::stoi(cells[1]), std::stod(cells[2]));
        } catch (const std::exception& e) {
            throw std::runtime_error(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return binarize_ratings(ratings);
}

}  // namespace ttrec
