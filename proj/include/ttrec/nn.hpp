// Minimal feed-forward building blocks with hand-written backprop: a dense
// linear layer, a one-hidden-layer encoder whose first layer consumes sparse
// rows (feature block + normalized interaction history), and Adam. tanh is
// the hidden activation throughout.
#pragma once

#include <cmath>
#include <vector>

#include "ttrec/matrix.hpp"
#include "ttrec/rng.hpp"

namespace ttrec {

struct Linear {
    Matrix w;  // out x in
    Vector b;  // out

    static Linear init(std::size_t in, std::size_t out, Rng& rng) {
        Linear l;
        l.w = sample_gaussian(rng, 0.0, 1.0 / std::sqrt(double(in)), out, in);
        l.b.assign(out, 0.0);
        return l;
    }
};

// Z = X * W^T + b for a dense batch X (rows x in).
inline Matrix linear_forward(const Linear& l, const Matrix& x) {
    Matrix z = matmul_bt(x, l.w);
    for (std::size_t i = 0; i < z.rows; ++i) {
        double* r = z.row(i);
        for (std::size_t j = 0; j < z.cols; ++j) r[j] += l.b[j];
    }
    return z;
}

struct LinearGrads {
    Matrix w;
    Vector b;

    static LinearGrads zeros_like(const Linear& l) {
        return {Matrix(l.w.rows, l.w.cols), Vector(l.b.size(), 0.0)};
    }
};

// Accumulates dW, db; returns dX when requested.
inline void linear_backward(const Linear& l, const Matrix& x, const Matrix& dz,
                            LinearGrads& g, Matrix* dx = nullptr) {
    add_at_b(g.w, dz, x);
    for (std::size_t i = 0; i < dz.rows; ++i) {
        const double* r = dz.row(i);
        for (std::size_t j = 0; j < dz.cols; ++j) g.b[j] += r[j];
    }
    if (dx) *dx = matmul(dz, l.w);
}

inline void tanh_inplace(Matrix& m) {
    for (double& x : m.v) x = std::tanh(x);
}

// ---------------------------------------------------------------------------
// Sparse batch rows: (index, value) pairs into the encoder input space.

struct SparseRow {
    std::vector<std::pair<int, double>> entries;
};

using SparseBatch = std::vector<SparseRow>;

// One-hidden-layer encoder. The first layer's weights are stored transposed
// (in x hidden) so that a sparse input row touches contiguous weight rows.
struct Encoder {
    Matrix w1t;  // in x hidden
    Vector b1;   // hidden
    Linear out;  // embed x hidden

    std::size_t input_dim() const { return w1t.rows; }
    std::size_t hidden_dim() const { return w1t.cols; }
    std::size_t embed_dim() const { return out.w.rows; }

    static Encoder init(std::size_t in, std::size_t hidden, std::size_t embed, Rng& rng) {
        Encoder e;
        e.w1t = sample_gaussian(rng, 0.0, 1.0 / std::sqrt(double(in)), in, hidden);
        e.b1.assign(hidden, 0.0);
        e.out = Linear::init(hidden, embed, rng);
        return e;
    }
};

struct EncoderCache {
    Matrix h;        // tanh activations, rows x hidden
    Matrix h_drop;   // activations after dropout (aliases h when not training)
    Matrix mask;     // inverted-dropout mask (empty when not training)
    bool dropped = false;
};

// Forward for a sparse batch. dropout_rate > 0 with a non-null rng enables
// inverted dropout on the hidden activations (training mode).
inline Matrix encoder_forward(const Encoder& enc, const SparseBatch& batch,
                              EncoderCache* cache = nullptr, double dropout_rate = 0.0,
                              Rng* dropout_rng = nullptr) {
    const std::size_t n = batch.size();
    const std::size_t hidden = enc.hidden_dim();
    Matrix z1(n, hidden);
    for (std::size_t i = 0; i < n; ++i) {
        double* zr = z1.row(i);
        for (std::size_t j = 0; j < hidden; ++j) zr[j] = enc.b1[j];
        for (const auto& [idx, val] : batch[i].entries) {
            const double* wr = enc.w1t.row(idx);
            for (std::size_t j = 0; j < hidden; ++j) zr[j] += val * wr[j];
        }
    }
    tanh_inplace(z1);

    const bool train = dropout_rate > 0.0 && dropout_rng != nullptr;
    Matrix* active = &z1;
    Matrix dropped;
    Matrix mask;
    if (train) {
        const double keep = 1.0 - dropout_rate;
        mask = Matrix(n, hidden);
        dropped = z1;
        for (std::size_t i = 0; i < mask.v.size(); ++i) {
            mask.v[i] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
            dropped.v[i] *= mask.v[i];
        }
        active = &dropped;
    }
    Matrix e = linear_forward(enc.out, *active);
    if (cache) {
        cache->h = std::move(z1);
        cache->dropped = train;
        if (train) {
            cache->h_drop = std::move(dropped);
            cache->mask = std::move(mask);
        }
    }
    return e;
}

struct EncoderGrads {
    Matrix w1t;
    Vector b1;
    LinearGrads out;

    static EncoderGrads zeros_like(const Encoder& e) {
        return {Matrix(e.w1t.rows, e.w1t.cols), Vector(e.b1.size(), 0.0),
                LinearGrads::zeros_like(e.out)};
    }
};

inline void encoder_backward(const Encoder& enc, const SparseBatch& batch,
                             const EncoderCache& cache, const Matrix& de, EncoderGrads& g) {
    const Matrix& h_out = cache.dropped ? cache.h_drop : cache.h;
    Matrix dh;
    linear_backward(enc.out, h_out, de, g.out, &dh);
    // through dropout and tanh
    for (std::size_t i = 0; i < dh.v.size(); ++i) {
        if (cache.dropped) dh.v[i] *= cache.mask.v[i];
        const double t = cache.h.v[i];
        dh.v[i] *= 1.0 - t * t;
    }
    const std::size_t hidden = enc.hidden_dim();
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double* dr = dh.row(i);
        for (std::size_t j = 0; j < hidden; ++j) g.b1[j] += dr[j];
        for (const auto& [idx, val] : batch[i].entries) {
            double* gr = g.w1t.row(idx);
            for (std::size_t j = 0; j < hidden; ++j) gr[j] += val * dr[j];
        }
    }
}

// ---------------------------------------------------------------------------
// Fusion MLP: dense layers with tanh between them, linear output. The default
// model uses a single linear layer (2d -> d).

struct Fusion {
    std::vector<Linear> layers;

    static Fusion init(const std::vector<std::size_t>& dims, Rng& rng) {
        require(dims.size() >= 2, "Fusion: need at least input and output dims");
        Fusion f;
        for (std::size_t i = 0; i + 1 < dims.size(); ++i)
            f.layers.push_back(Linear::init(dims[i], dims[i + 1], rng));
        return f;
    }
};

struct FusionCache {
    std::vector<Matrix> acts;  // acts[0] = input, acts[i] = output of layer i-1 (post-tanh)
};

inline Matrix fusion_forward(const Fusion& f, const Matrix& x, FusionCache* cache = nullptr) {
    Matrix cur = x;
    if (cache) cache->acts = {cur};
    for (std::size_t i = 0; i < f.layers.size(); ++i) {
        cur = linear_forward(f.layers[i], cur);
        if (i + 1 < f.layers.size()) tanh_inplace(cur);
        if (cache) cache->acts.push_back(cur);
    }
    return cur;
}

struct FusionGrads {
    std::vector<LinearGrads> layers;

    static FusionGrads zeros_like(const Fusion& f) {
        FusionGrads g;
        for (const auto& l : f.layers) g.layers.push_back(LinearGrads::zeros_like(l));
        return g;
    }
};

inline void fusion_backward(const Fusion& f, const FusionCache& cache, const Matrix& dout,
                            FusionGrads& g, Matrix* dinput = nullptr) {
    Matrix dz = dout;
    for (std::size_t li = f.layers.size(); li-- > 0;) {
        if (li + 1 < f.layers.size()) {
            const Matrix& act = cache.acts[li + 1];
            for (std::size_t i = 0; i < dz.v.size(); ++i) {
                const double t = act.v[i];
                dz.v[i] *= 1.0 - t * t;
            }
        }
        Matrix dx;
        const bool need_dx = li > 0 || dinput != nullptr;
        linear_backward(f.layers[li], cache.acts[li], dz, g.layers[li],
                        need_dx ? &dx : nullptr);
        if (li == 0) {
            if (dinput) *dinput = std::move(dx);
        } else {
            dz = std::move(dx);
        }
    }
}

// ---------------------------------------------------------------------------
// Adam over flat parameter vectors.

struct Adam {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Vector m, v;
    long t = 0;

    void step(Vector& params, const Vector& grads) {
        require(params.size() == grads.size(), "Adam: size mismatch");
        if (m.empty()) {
            m.assign(params.size(), 0.0);
            v.assign(params.size(), 0.0);
        }
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, double(t));
        const double bc2 = 1.0 - std::pow(beta2, double(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
            params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
};

}  // namespace ttrec
