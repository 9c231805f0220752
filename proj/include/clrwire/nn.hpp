#pragma once

#include <string>
#include <utility>
#include <vector>

#include "clrwire/tensor.hpp"

namespace clrwire {

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

inline std::vector<Tensor> param_tensors(const NamedParams& named) {
    std::vector<Tensor> out;
    out.reserve(named.size());
    for (const auto& [name, t] : named) out.push_back(t);
    return out;
}

// ---------------------------------------------------------------------------
// Layers

struct Linear {
    Tensor w, b;  // (in x out), (1 x out)
    Linear() = default;
    Linear(int in, int out, Rng& rng) : w(Tensor::randn(in, out, rng)), b(Tensor::zeros(1, out, true)) {}
    Tensor operator()(const Tensor& x) const { return add_rowvec(matmul(x, w), b); }
    void collect(const std::string& prefix, NamedParams& out) const {
        out.push_back({prefix + ".w", w});
        out.push_back({prefix + ".b", b});
    }
};

struct LayerNorm {
    Tensor gain, bias;  // (1 x c)
    LayerNorm() = default;
    explicit LayerNorm(int c) : gain(Tensor::from_data(std::vector<double>(size_t(c), 1.0), 1, c, true)),
                                bias(Tensor::zeros(1, c, true)) {}
    Tensor operator()(const Tensor& x) const { return add_rowvec(mul_rowvec(layer_norm_rows(x), gain), bias); }
    void collect(const std::string& prefix, NamedParams& out) const {
        out.push_back({prefix + ".gain", gain});
        out.push_back({prefix + ".bias", bias});
    }
};

struct Mlp {
    Linear fc1, fc2;
    Mlp() = default;
    Mlp(int d, int hidden, Rng& rng) : fc1(d, hidden, rng), fc2(hidden, d, rng) {}
    Mlp(int in, int hidden, int out, Rng& rng) : fc1(in, hidden, rng), fc2(hidden, out, rng) {}
    Tensor operator()(const Tensor& x) const { return fc2(gelu(fc1(x))); }
    void collect(const std::string& prefix, NamedParams& out) const {
        fc1.collect(prefix + ".fc1", out);
        fc2.collect(prefix + ".fc2", out);
    }
};

// Multi-head scaled dot-product attention with learned projections.
// The key projection has no bias: a constant shift of every key adds the same
// offset to each score row, which softmax cancels, so such a bias cannot train.
struct MultiHeadAttention {
    Linear wq, wv, wo;
    Tensor wk;  // (d x d), biasless
    int heads = 1;
    MultiHeadAttention() = default;
    MultiHeadAttention(int d, int heads_, Rng& rng)
        : wq(d, d, rng), wv(d, d, rng), wo(d, d, rng), wk(Tensor::randn(d, d, rng)), heads(heads_) {
        if (d % heads_ != 0)
            throw ShapeMismatch("attention: width " + std::to_string(d) + " not divisible by " +
                                std::to_string(heads_) + " heads");
    }
    // q: (nq x d) queries, kv: (nk x d) keys/values.
    Tensor operator()(const Tensor& q, const Tensor& kv) const {
        const int d = wq.w.rows(), dh = d / heads;
        Tensor qp = wq(q), kp = matmul(kv, wk), vp = wv(kv);
        Tensor merged;
        for (int h = 0; h < heads; ++h) {
            Tensor qh = slice_cols(qp, h * dh, (h + 1) * dh);
            Tensor kh = slice_cols(kp, h * dh, (h + 1) * dh);
            Tensor vh = slice_cols(vp, h * dh, (h + 1) * dh);
            Tensor att = softmax_rows(scale(matmul_bt(qh, kh), 1.0 / std::sqrt(double(dh))));
            Tensor oh = matmul(att, vh);
            merged = h == 0 ? oh : concat_cols(merged, oh);
        }
        return wo(merged);
    }
    void collect(const std::string& prefix, NamedParams& out) const {
        wq.collect(prefix + ".wq", out);
        out.push_back({prefix + ".wk", wk});
        wv.collect(prefix + ".wv", out);
        wo.collect(prefix + ".wo", out);
    }
};

// Pre-norm residual block: x + attn(ln(x), ln(kv)), then + mlp(ln(.)).
// Self-attention is the kv == x case.
struct AttentionBlock {
    LayerNorm ln_q, ln_kv, ln_mlp;
    MultiHeadAttention attn;
    Mlp mlp;
    AttentionBlock() = default;
    AttentionBlock(int d, int heads, Rng& rng)
        : ln_q(d), ln_kv(d), ln_mlp(d), attn(d, heads, rng), mlp(d, 4 * d, rng) {}
    Tensor operator()(const Tensor& x, const Tensor& kv) const {
        Tensor h = add(x, attn(ln_q(x), ln_kv(kv)));
        return add(h, mlp(ln_mlp(h)));
    }
    Tensor operator()(const Tensor& x) const { return (*this)(x, x); }
    void collect(const std::string& prefix, NamedParams& out) const {
        ln_q.collect(prefix + ".ln_q", out);
        ln_kv.collect(prefix + ".ln_kv", out);
        ln_mlp.collect(prefix + ".ln_mlp", out);
        attn.collect(prefix + ".attn", out);
        mlp.collect(prefix + ".mlp", out);
    }
};

// Standalone functional attention (no projections); used by tests.
inline Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
    detail::require_same_shape("attention k/q width", q, q);
    Tensor att = softmax_rows(scale(matmul_bt(q, k), 1.0 / std::sqrt(double(q.cols()))));
    return matmul(att, v);
}

// ---------------------------------------------------------------------------
// Losses (all scalar, all >= 0)

inline Tensor mse(const Tensor& a, const Tensor& b) {
    Tensor d = sub(a, b);
    return mean_all(mul(d, d));
}

inline Tensor cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    Tensor picked = gather_cols(logsoftmax_rows(logits), labels);
    return affine(mean_all(picked), -1.0, 0.0);
}

// mean of -alpha_c * (1-p_c)^gamma * log p_c; empty alpha means uniform 1.
inline Tensor focal(const Tensor& logits, const std::vector<int>& labels, double gamma,
                    const std::vector<double>& alpha = {}) {
    if (!alpha.empty() && int(alpha.size()) != logits.cols())
        throw ShapeMismatch("focal: " + std::to_string(alpha.size()) + " class weights for " + logits.shape_str());
    Tensor lp = gather_cols(logsoftmax_rows(logits), labels);  // (n x 1)
    Tensor p = exp_t(lp);
    Tensor w = pow_const(affine(p, -1.0, 1.0), gamma);
    Tensor term = mul(w, lp);
    if (!alpha.empty()) {
        std::vector<double> aw(labels.size());
        for (size_t i = 0; i < labels.size(); ++i) aw[i] = alpha[size_t(labels[i])];
        term = mul(term, Tensor::from_data(std::move(aw), int(labels.size()), 1));
    }
    return affine(mean_all(term), -1.0, 0.0);
}

// KL(N(mean, exp(logvar)) || N(0,1)), averaged over elements.
inline Tensor kl_gauss(const Tensor& mean, const Tensor& logvar) {
    detail::require_same_shape("kl_gauss", mean, logvar);
    Tensor t = add(exp_t(logvar), mul(mean, mean));
    return affine(mean_all(sub(t, affine(logvar, 1.0, 1.0))), 0.5, 0.0);
}

// Numerically stable binary cross-entropy on logits; targets in [0,1].
inline Tensor bce_logits(const Tensor& logits, const Tensor& targets) {
    detail::require_same_shape("bce_logits", logits, targets);
    return mean_all(sub(softplus(logits), mul(targets, logits)));
}

// ---------------------------------------------------------------------------
// Optimizer

// Decoupled weight-decay Adam with bias correction.
struct AdamW {
    double lr = 1e-4, beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay = 0.0;
    long long t = 0;
    std::vector<std::vector<double>> m, v;

    explicit AdamW(double lr_ = 1e-4, double weight_decay_ = 0.0) : lr(lr_), weight_decay(weight_decay_) {}

    void step(std::vector<Tensor>& params) {
        if (m.empty()) {
            m.resize(params.size());
            v.resize(params.size());
            for (size_t i = 0; i < params.size(); ++i) {
                m[i].assign(params[i].size(), 0.0);
                v[i].assign(params[i].size(), 0.0);
            }
        }
        if (m.size() != params.size()) throw SizeMismatch("adam: parameter list changed size");
        ++t;
        double c1 = 1.0 - std::pow(beta1, double(t));
        double c2 = 1.0 - std::pow(beta2, double(t));
        for (size_t i = 0; i < params.size(); ++i) {
            auto& val = params[i].values();
            auto& g = params[i].gradient();
            if (m[i].size() != val.size()) throw SizeMismatch("adam: parameter " + std::to_string(i) + " resized");
            for (size_t j = 0; j < val.size(); ++j) {
                m[i][j] = beta1 * m[i][j] + (1.0 - beta1) * g[j];
                v[i][j] = beta2 * v[i][j] + (1.0 - beta2) * g[j] * g[j];
                double mhat = m[i][j] / c1;
                double vhat = v[i][j] / c2;
                val[j] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * val[j]);
            }
        }
    }

    static void zero_grads(std::vector<Tensor>& params) {
        for (auto& p : params) p.zero_grad();
    }
};

// ---------------------------------------------------------------------------
// Gradient verification

// Max relative error between reverse-mode and central-difference gradients of
// scalar f over every element of x. Denominator max(|a|,|b|,1e-8).
template <typename F>
double grad_check(F&& f, Tensor x, double h = 1e-5) {
    x.zero_grad();
    Tensor loss = f(x);
    loss.backward();
    std::vector<double> analytic = x.gradient();
    double worst = 0.0;
    NoGrad ng;
    for (size_t i = 0; i < x.size(); ++i) {
        double orig = x.values()[i];
        x.values()[i] = orig + h;
        double fp = f(x).item();
        x.values()[i] = orig - h;
        double fm = f(x).item();
        x.values()[i] = orig;
        double num = (fp - fm) / (2.0 * h);
        double err = std::abs(num - analytic[i]) / std::max({std::abs(num), std::abs(analytic[i]), 1e-8});
        worst = std::max(worst, err);
    }
    return worst;
}

// Same check across a whole parameter set; f rebuilds the loss from current values.
template <typename F>
double grad_check_params(F&& f, std::vector<Tensor>& params, double h = 1e-5) {
    for (auto& p : params) p.zero_grad();
    Tensor loss = f();
    loss.backward();
    std::vector<std::vector<double>> analytic;
    for (auto& p : params) analytic.push_back(p.gradient());
    double worst = 0.0;
    NoGrad ng;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        for (size_t i = 0; i < params[pi].size(); ++i) {
            double orig = params[pi].values()[i];
            params[pi].values()[i] = orig + h;
            double fp = f().item();
            params[pi].values()[i] = orig - h;
            double fm = f().item();
            params[pi].values()[i] = orig;
            double num = (fp - fm) / (2.0 * h);
            double err = std::abs(num - analytic[pi][i]) / std::max({std::abs(num), std::abs(analytic[pi][i]), 1e-8});
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace clrwire
