// The feature-based recommender: user encoder f and item encoder g (features
// concatenated with an L2-normalized interaction-history row), a fusion MLP
// over the concatenated embeddings, and dot-product scoring. Includes flat
// parameter access for the optimizer and the finite-difference checks, and a
// versioned binary checkpoint that round-trips bit-exactly.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "ttrec/dataset.hpp"
#include "ttrec/nn.hpp"

namespace ttrec {

struct ModelConfig {
    int feature_dim = 16;
    int n_users = 0;
    int n_items = 0;
    int embed_dim = 16;
    int hidden_dim = 64;
    double dropout_rate = 0.5;
    std::uint64_t init_seed = 0;

    int user_input_dim() const { return feature_dim + n_items; }
    int item_input_dim() const { return feature_dim + n_users; }
};

struct RecommenderModel {
    ModelConfig cfg;
    Encoder f;      // users
    Encoder g;      // items
    Fusion gamma;   // 2d -> d
    std::uint64_t config_hash = 0;

    static RecommenderModel init(const ModelConfig& cfg) {
        require(cfg.n_users > 0 && cfg.n_items > 0 && cfg.feature_dim > 0,
                "RecommenderModel: counts must be positive");
        Rng rng = Rng(cfg.init_seed).fork("init");
        RecommenderModel m;
        m.cfg = cfg;
        m.f = Encoder::init(cfg.user_input_dim(), cfg.hidden_dim, cfg.embed_dim, rng);
        m.g = Encoder::init(cfg.item_input_dim(), cfg.hidden_dim, cfg.embed_dim, rng);
        m.gamma = Fusion::init({std::size_t(2 * cfg.embed_dim), std::size_t(cfg.embed_dim)}, rng);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Interaction histories: per-user and per-item L2-normalized binary rows over
// the training positives. Cold entities keep an empty (zero) row.

struct Histories {
    std::vector<std::vector<std::pair<int, double>>> user_rows;  // item id, value
    std::vector<std::vector<std::pair<int, double>>> item_rows;  // user id, value

    static Histories build(int n_users, int n_items, const std::vector<Interaction>& positives) {
        Histories h;
        h.user_rows.resize(n_users);
        h.item_rows.resize(n_items);
        for (const auto& t : positives) {
            if (t.label != 1) continue;
            h.user_rows[t.user].push_back({t.item, 1.0});
            h.item_rows[t.item].push_back({t.user, 1.0});
        }
        auto normalize = [](std::vector<std::vector<std::pair<int, double>>>& rows) {
            for (auto& row : rows) {
                if (row.empty()) continue;
                const double inv = 1.0 / std::sqrt(double(row.size()));
                for (auto& [idx, val] : row) val = inv;
            }
        };
        normalize(h.user_rows);
        normalize(h.item_rows);
        return h;
    }
};

// Sparse encoder inputs: dense feature block followed by the history row
// shifted past the feature block.
inline SparseBatch make_user_inputs(const ModelConfig& cfg, const Matrix& user_features,
                                    const Histories& hist, std::span<const int> users) {
    require(int(user_features.cols) == cfg.feature_dim,
            "encode_users: feature dimension mismatch");
    SparseBatch batch(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
        const int u = users[i];
        auto& entries = batch[i].entries;
        entries.reserve(cfg.feature_dim + hist.user_rows[u].size());
        const double* feat = user_features.row(u);
        for (int fdim = 0; fdim < cfg.feature_dim; ++fdim) entries.push_back({fdim, feat[fdim]});
        for (const auto& [item, val] : hist.user_rows[u])
            entries.push_back({cfg.feature_dim + item, val});
    }
    return batch;
}

inline SparseBatch make_item_inputs(const ModelConfig& cfg, const Matrix& item_features,
                                    const Histories& hist, std::span<const int> items) {
    require(int(item_features.cols) == cfg.feature_dim,
            "encode_items: feature dimension mismatch");
    SparseBatch batch(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const int it = items[i];
        auto& entries = batch[i].entries;
        entries.reserve(cfg.feature_dim + hist.item_rows[it].size());
        const double* feat = item_features.row(it);
        for (int fdim = 0; fdim < cfg.feature_dim; ++fdim) entries.push_back({fdim, feat[fdim]});
        for (const auto& [user, val] : hist.item_rows[it])
            entries.push_back({cfg.feature_dim + user, val});
    }
    return batch;
}

inline Matrix encode_users(const RecommenderModel& m, const Matrix& user_features,
                           const Histories& hist, std::span<const int> users,
                           EncoderCache* cache = nullptr, double dropout = 0.0,
                           Rng* drop_rng = nullptr) {
    const SparseBatch batch = make_user_inputs(m.cfg, user_features, hist, users);
    return encoder_forward(m.f, batch, cache, dropout, drop_rng);
}

inline Matrix encode_items(const RecommenderModel& m, const Matrix& item_features,
                           const Histories& hist, std::span<const int> items,
                           EncoderCache* cache = nullptr, double dropout = 0.0,
                           Rng* drop_rng = nullptr) {
    const SparseBatch batch = make_item_inputs(m.cfg, item_features, hist, items);
    return encoder_forward(m.g, batch, cache, dropout, drop_rng);
}

// E = gamma(E_u (+) E_i), row-aligned pairs.
inline Matrix fuse(const RecommenderModel& m, const Matrix& e_u, const Matrix& e_i,
                   FusionCache* cache = nullptr) {
    require(e_u.rows == e_i.rows, "fuse: row count mismatch between user and item embeddings");
    require(e_u.cols == e_i.cols && int(e_u.cols) == m.cfg.embed_dim,
            "fuse: embedding dimension mismatch");
    Matrix cat(e_u.rows, 2 * e_u.cols);
    for (std::size_t r = 0; r < e_u.rows; ++r) {
        std::memcpy(cat.row(r), e_u.row(r), e_u.cols * sizeof(double));
        std::memcpy(cat.row(r) + e_u.cols, e_i.row(r), e_i.cols * sizeof(double));
    }
    return fusion_forward(m.gamma, cat, cache);
}

// Logits of one user row against a block of item rows.
inline Vector score_user(std::span<const double> e_u, const Matrix& e_items) {
    Vector logits(e_items.rows);
    for (std::size_t i = 0; i < e_items.rows; ++i)
        logits[i] = dot(e_u, e_items.row_span(i));
    return logits;
}

// ---------------------------------------------------------------------------
// Flat parameter access. Order: f (w1t, b1, out.w, out.b), g (same), gamma
// layers in order (w, b). Gradient buffers flatten identically.

struct ModelGrads {
    EncoderGrads f, g;
    FusionGrads gamma;

    static ModelGrads zeros_like(const RecommenderModel& m) {
        return {EncoderGrads::zeros_like(m.f), EncoderGrads::zeros_like(m.g),
                FusionGrads::zeros_like(m.gamma)};
    }

    void zero() {
        f.w1t.zero();
        std::fill(f.b1.begin(), f.b1.end(), 0.0);
        f.out.w.zero();
        std::fill(f.out.b.begin(), f.out.b.end(), 0.0);
        g.w1t.zero();
        std::fill(g.b1.begin(), g.b1.end(), 0.0);
        g.out.w.zero();
        std::fill(g.out.b.begin(), g.out.b.end(), 0.0);
        for (auto& l : gamma.layers) {
            l.w.zero();
            std::fill(l.b.begin(), l.b.end(), 0.0);
        }
    }
};

namespace detail {

template <typename Fn>
void for_each_tensor(const RecommenderModel& m, Fn&& fn) {
    fn(m.f.w1t.v);
    fn(m.f.b1);
    fn(m.f.out.w.v);
    fn(m.f.out.b);
    fn(m.g.w1t.v);
    fn(m.g.b1);
    fn(m.g.out.w.v);
    fn(m.g.out.b);
    for (const auto& l : m.gamma.layers) {
        fn(l.w.v);
        fn(l.b);
    }
}

template <typename Fn>
void for_each_tensor(RecommenderModel& m, Fn&& fn) {
    fn(m.f.w1t.v);
    fn(m.f.b1);
    fn(m.f.out.w.v);
    fn(m.f.out.b);
    fn(m.g.w1t.v);
    fn(m.g.b1);
    fn(m.g.out.w.v);
    fn(m.g.out.b);
    for (auto& l : m.gamma.layers) {
        fn(l.w.v);
        fn(l.b);
    }
}

template <typename Fn>
void for_each_tensor(const ModelGrads& g, Fn&& fn) {
    fn(g.f.w1t.v);
    fn(g.f.b1);
    fn(g.f.out.w.v);
    fn(g.f.out.b);
    fn(g.g.w1t.v);
    fn(g.g.b1);
    fn(g.g.out.w.v);
    fn(g.g.out.b);
    for (const auto& l : g.gamma.layers) {
        fn(l.w.v);
        fn(l.b);
    }
}

}  // namespace detail

inline std::size_t parameter_count(const RecommenderModel& m) {
    std::size_t n = 0;
    detail::for_each_tensor(m, [&](const Vector& v) { n += v.size(); });
    return n;
}

inline Vector flatten_parameters(const RecommenderModel& m) {
    Vector out;
    out.reserve(parameter_count(m));
    detail::for_each_tensor(m, [&](const Vector& v) { out.insert(out.end(), v.begin(), v.end()); });
    return out;
}

inline void assign_parameters(RecommenderModel& m, const Vector& flat) {
    std::size_t pos = 0;
    detail::for_each_tensor(m, [&](Vector& v) {
        require(pos + v.size() <= flat.size(), "assign_parameters: flat vector too short");
        std::copy(flat.begin() + pos, flat.begin() + pos + v.size(), v.begin());
        pos += v.size();
    });
    require(pos == flat.size(), "assign_parameters: flat vector size mismatch");
}

inline Vector flatten_gradients(const ModelGrads& g) {
    Vector out;
    detail::for_each_tensor(g, [&](const Vector& v) { out.insert(out.end(), v.begin(), v.end()); });
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint: magic + version + config + raw tensors, little-endian doubles.

namespace detail {

constexpr char kCheckpointMagic[8] = {'T', 'T', 'R', 'E', 'C', 'C', 'P', '1'};

inline void write_u64(std::ostream& os, std::uint64_t x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof x);
}
inline std::uint64_t read_u64(std::istream& is) {
    std::uint64_t x = 0;
    is.read(reinterpret_cast<char*>(&x), sizeof x);
    return x;
}
inline void write_f64(std::ostream& os, double x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof x);
}
inline double read_f64(std::istream& is) {
    double x = 0;
    is.read(reinterpret_cast<char*>(&x), sizeof x);
    return x;
}

}  // namespace detail

inline void save_checkpoint(const RecommenderModel& m, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path.string());
    os.write(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
    detail::write_u64(os, m.config_hash);
    detail::write_u64(os, std::uint64_t(m.cfg.feature_dim));
    detail::write_u64(os, std::uint64_t(m.cfg.n_users));
    detail::write_u64(os, std::uint64_t(m.cfg.n_items));
    detail::write_u64(os, std::uint64_t(m.cfg.embed_dim));
    detail::write_u64(os, std::uint64_t(m.cfg.hidden_dim));
    detail::write_f64(os, m.cfg.dropout_rate);
    detail::write_u64(os, m.cfg.init_seed);
    detail::write_u64(os, std::uint64_t(m.gamma.layers.size()));
    for (const auto& l : m.gamma.layers) {
        detail::write_u64(os, l.w.rows);
        detail::write_u64(os, l.w.cols);
    }
    detail::for_each_tensor(m, [&](const Vector& v) {
        detail::write_u64(os, v.size());
        os.write(reinterpret_cast<const char*>(v.data()),
                 std::streamsize(v.size() * sizeof(double)));
    });
    if (!os) throw std::runtime_error("checkpoint write failed: " + path.string());
}

inline RecommenderModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path.string());
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, detail::kCheckpointMagic, sizeof magic) != 0)
        throw std::runtime_error("not a checkpoint file (bad magic): " + path.string());
    RecommenderModel m;
    m.config_hash = detail::read_u64(is);
    ModelConfig cfg;
    cfg.feature_dim = int(detail::read_u64(is));
    cfg.n_users = int(detail::read_u64(is));
    cfg.n_items = int(detail::read_u64(is));
    cfg.embed_dim = int(detail::read_u64(is));
    cfg.hidden_dim = int(detail::read_u64(is));
    cfg.dropout_rate = detail::read_f64(is);
    cfg.init_seed = detail::read_u64(is);
    const auto n_fusion = detail::read_u64(is);
    m.cfg = cfg;
    m.f = Encoder{Matrix(cfg.user_input_dim(), cfg.hidden_dim), Vector(cfg.hidden_dim, 0.0),
                  Linear{Matrix(cfg.embed_dim, cfg.hidden_dim), Vector(cfg.embed_dim, 0.0)}};
    m.g = Encoder{Matrix(cfg.item_input_dim(), cfg.hidden_dim), Vector(cfg.hidden_dim, 0.0),
                  Linear{Matrix(cfg.embed_dim, cfg.hidden_dim), Vector(cfg.embed_dim, 0.0)}};
    for (std::uint64_t i = 0; i < n_fusion; ++i) {
        const auto rows = detail::read_u64(is);
        const auto cols = detail::read_u64(is);
        m.gamma.layers.push_back(Linear{Matrix(rows, cols), Vector(rows, 0.0)});
    }
    detail::for_each_tensor(m, [&](Vector& v) {
        const auto n = detail::read_u64(is);
        if (n != v.size())
            throw std::runtime_error("checkpoint tensor size mismatch: " + path.string());
        is.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
    });
    if (!is) throw std::runtime_error("truncated checkpoint: " + path.string());
    return m;
}

}  // namespace ttrec
