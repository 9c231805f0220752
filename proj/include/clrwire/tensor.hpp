#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "clrwire/error.hpp"
#include "clrwire/rng.hpp"

namespace clrwire {

// Runtime toggle: scan every op output for NaN/Inf (slow; on in tests).
inline bool& finite_checks() {
    static bool on = false;
    return on;
}

// Runtime toggle: record the backward graph. Off during pure inference.
inline bool& grad_enabled() {
    static bool on = true;
    return on;
}

// RAII: disable taping in scope.
struct NoGrad {
    bool prev;
    NoGrad() : prev(grad_enabled()) { grad_enabled() = false; }
    ~NoGrad() { grad_enabled() = prev; }
    NoGrad(const NoGrad&) = delete;
    NoGrad& operator=(const NoGrad&) = delete;
};

namespace detail {

struct TensorNode {
    int rows = 0, cols = 0;
    std::vector<double> val;
    std::vector<double> grad;  // sized on demand during backward
    bool needs_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void(TensorNode&)> backward;  // reads this->grad, accumulates into parents
};

inline void ensure_grad(TensorNode& n) {
    if (n.grad.size() != n.val.size()) n.grad.assign(n.val.size(), 0.0);
}

}  // namespace detail

// 2D row-major f64 tensor; a shared handle into the backward graph.
class Tensor {
public:
    std::shared_ptr<detail::TensorNode> node;

    Tensor() = default;

    static Tensor from_data(std::vector<double> data, int rows, int cols, bool needs_grad = false) {
        if (int64_t(data.size()) != int64_t(rows) * cols)
            throw ShapeMismatch("from_data: " + std::to_string(data.size()) + " values for " +
                                std::to_string(rows) + "x" + std::to_string(cols));
        Tensor t;
        t.node = std::make_shared<detail::TensorNode>();
        t.node->rows = rows;
        t.node->cols = cols;
        t.node->val = std::move(data);
        t.node->needs_grad = needs_grad;
        return t;
    }
    static Tensor zeros(int rows, int cols, bool needs_grad = false) {
        return from_data(std::vector<double>(size_t(rows) * size_t(cols), 0.0), rows, cols, needs_grad);
    }
    static Tensor full(int rows, int cols, double v) {
        return from_data(std::vector<double>(size_t(rows) * size_t(cols), v), rows, cols, false);
    }
    // Gaussian init for projection weights; trainable by default.
    static Tensor randn(int rows, int cols, Rng& rng, double stddev = 0.02, bool needs_grad = true) {
        std::vector<double> d(size_t(rows) * size_t(cols));
        for (auto& x : d) x = stddev * rng.normal();
        return from_data(std::move(d), rows, cols, needs_grad);
    }

    bool defined() const { return bool(node); }
    int rows() const { return node->rows; }
    int cols() const { return node->cols; }
    size_t size() const { return node->val.size(); }
    bool needs_grad() const { return node->needs_grad; }

    double operator()(int r, int c) const { return node->val[size_t(r) * size_t(node->cols) + size_t(c)]; }
    double item() const {
        if (size() != 1) throw ShapeMismatch("item: tensor is " + shape_str() + ", expected 1x1");
        return node->val[0];
    }
    std::vector<double>& values() { return node->val; }
    const std::vector<double>& values() const { return node->val; }
    std::vector<double>& gradient() {
        detail::ensure_grad(*node);
        return node->grad;
    }
    void zero_grad() { node->grad.assign(node->val.size(), 0.0); }

    std::string shape_str() const {
        return defined() ? std::to_string(node->rows) + "x" + std::to_string(node->cols) : "<empty>";
    }

    // Reverse pass from a scalar output; gradients accumulate into leaves.
    void backward() const {
        if (!defined()) throw Error("backward: empty tensor");
        if (size() != 1) throw ShapeMismatch("backward: output is " + shape_str() + ", expected 1x1");
        std::vector<detail::TensorNode*> order;
        std::unordered_set<detail::TensorNode*> seen;
        std::vector<std::pair<detail::TensorNode*, size_t>> stack{{node.get(), 0}};
        seen.insert(node.get());
        while (!stack.empty()) {
            auto& [n, i] = stack.back();
            if (i < n->parents.size()) {
                detail::TensorNode* p = n->parents[i++].get();
                if (p->needs_grad && seen.insert(p).second) stack.push_back({p, 0});
            } else {
                order.push_back(n);
                stack.pop_back();
            }
        }
        detail::ensure_grad(*node);
        node->grad[0] += 1.0;
        for (auto it = order.rbegin(); it != order.rend(); ++it)
            if ((*it)->backward && !(*it)->grad.empty()) (*it)->backward(**it);
    }
};

namespace detail {

inline void check_finite(const char* op, const std::vector<double>& v) {
    if (!finite_checks()) return;
    for (double x : v)
        if (!std::isfinite(x)) throw FiniteCheck(std::string(op) + " produced a non-finite value");
}

inline Tensor make_op(const char* op, int rows, int cols, std::vector<double> val,
                      std::initializer_list<Tensor> parents, std::function<void(TensorNode&)> bw) {
    check_finite(op, val);
    Tensor out = Tensor::from_data(std::move(val), rows, cols, false);
    bool needs = false;
    if (grad_enabled())
        for (const Tensor& p : parents) needs = needs || p.node->needs_grad;
    if (needs) {
        out.node->needs_grad = true;
        for (const Tensor& p : parents) out.node->parents.push_back(p.node);
        out.node->backward = std::move(bw);
    }
    return out;
}

inline void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeMismatch(std::string(op) + ": " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and broadcast ops

inline Tensor add(const Tensor& a, const Tensor& b) {
    detail::require_same_shape("add", a, b);
    std::vector<double> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] + b.values()[i];
    return detail::make_op("add", a.rows(), a.cols(), std::move(v), {a, b}, [](detail::TensorNode& self) {
        for (auto& p : self.parents) {
            if (!p->needs_grad) continue;
            detail::ensure_grad(*p);
            for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
        }
    });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    detail::require_same_shape("sub", a, b);
    std::vector<double> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] - b.values()[i];
    return detail::make_op("sub", a.rows(), a.cols(), std::move(v), {a, b}, [](detail::TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) {
            detail::ensure_grad(pa);
            for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
        }
        if (pb.needs_grad) {
            detail::ensure_grad(pb);
            for (size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
        }
    });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    detail::require_same_shape("mul", a, b);
    std::vector<double> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] * b.values()[i];
    return detail::make_op("mul", a.rows(), a.cols(), std::move(v), {a, b}, [](detail::TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) {
            detail::ensure_grad(pa);
            for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.val[i];
        }
        if (pb.needs_grad) {
            detail::ensure_grad(pb);
            for (size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.val[i];
        }
    });
}

// alpha*a + beta, elementwise.
inline Tensor affine(const Tensor& a, double alpha, double beta) {
    std::vector<double> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = alpha * a.values()[i] + beta;
    return detail::make_op("affine", a.rows(), a.cols(), std::move(v), {a}, [alpha](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += alpha * self.grad[i];
    });
}

inline Tensor scale(const Tensor& a, double s) { return affine(a, s, 0.0); }

// x (n x c) + v (1 x c), v broadcast over rows.
inline Tensor add_rowvec(const Tensor& x, const Tensor& v) {
    if (v.rows() != 1 || v.cols() != x.cols())
        throw ShapeMismatch("add_rowvec: " + x.shape_str() + " vs " + v.shape_str());
    const int n = x.rows(), c = x.cols();
    std::vector<double> out(x.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) out[size_t(i) * c + j] = x(i, j) + v(0, j);
    return detail::make_op("add_rowvec", n, c, std::move(out), {x, v}, [n, c](detail::TensorNode& self) {
        auto& px = *self.parents[0];
        auto& pv = *self.parents[1];
        if (px.needs_grad) {
            detail::ensure_grad(px);
            for (size_t i = 0; i < self.grad.size(); ++i) px.grad[i] += self.grad[i];
        }
        if (pv.needs_grad) {
            detail::ensure_grad(pv);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < c; ++j) pv.grad[size_t(j)] += self.grad[size_t(i) * c + j];
        }
    });
}

// x (n x c) * v (1 x c) elementwise per row.
inline Tensor mul_rowvec(const Tensor& x, const Tensor& v) {
    if (v.rows() != 1 || v.cols() != x.cols())
        throw ShapeMismatch("mul_rowvec: " + x.shape_str() + " vs " + v.shape_str());
    const int n = x.rows(), c = x.cols();
    std::vector<double> out(x.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) out[size_t(i) * c + j] = x(i, j) * v(0, j);
    return detail::make_op("mul_rowvec", n, c, std::move(out), {x, v}, [n, c](detail::TensorNode& self) {
        auto& px = *self.parents[0];
        auto& pv = *self.parents[1];
        if (px.needs_grad) {
            detail::ensure_grad(px);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < c; ++j) px.grad[size_t(i) * c + j] += self.grad[size_t(i) * c + j] * pv.val[size_t(j)];
        }
        if (pv.needs_grad) {
            detail::ensure_grad(pv);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < c; ++j) pv.grad[size_t(j)] += self.grad[size_t(i) * c + j] * px.val[size_t(i) * c + j];
        }
    });
}

// ---------------------------------------------------------------------------
// Matrix products

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("matmul: " + a.shape_str() + " * " + b.shape_str());
    const int n = a.rows(), k = a.cols(), m = b.cols();
    std::vector<double> out(size_t(n) * size_t(m), 0.0);
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < k; ++p) {
            double aip = a(i, p);
            if (aip == 0.0) continue;
            const double* brow = b.values().data() + size_t(p) * m;
            double* orow = out.data() + size_t(i) * m;
            for (int j = 0; j < m; ++j) orow[j] += aip * brow[j];
        }
    return detail::make_op("matmul", n, m, std::move(out), {a, b}, [n, k, m](detail::TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) {
            detail::ensure_grad(pa);
            // dA = dY * B^T
            for (int i = 0; i < n; ++i)
                for (int p = 0; p < k; ++p) {
                    double s = 0;
                    const double* gy = self.grad.data() + size_t(i) * m;
                    const double* brow = pb.val.data() + size_t(p) * m;
                    for (int j = 0; j < m; ++j) s += gy[j] * brow[j];
                    pa.grad[size_t(i) * k + p] += s;
                }
        }
        if (pb.needs_grad) {
            detail::ensure_grad(pb);
            // dB = A^T * dY
            for (int i = 0; i < n; ++i) {
                const double* gy = self.grad.data() + size_t(i) * m;
                for (int p = 0; p < k; ++p) {
                    double aip = pa.val[size_t(i) * k + p];
                    if (aip == 0.0) continue;
                    double* brow = pb.grad.data() + size_t(p) * m;
                    for (int j = 0; j < m; ++j) brow[j] += aip * gy[j];
                }
            }
        }
    });
}

// a (n x k) * b^T where b is (m x k); the attention score product.
inline Tensor matmul_bt(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) throw ShapeMismatch("matmul_bt: " + a.shape_str() + " vs " + b.shape_str());
    const int n = a.rows(), k = a.cols(), m = b.rows();
    std::vector<double> out(size_t(n) * size_t(m));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double s = 0;
            const double* ar = a.values().data() + size_t(i) * k;
            const double* br = b.values().data() + size_t(j) * k;
            for (int p = 0; p < k; ++p) s += ar[p] * br[p];
            out[size_t(i) * m + j] = s;
        }
    return detail::make_op("matmul_bt", n, m, std::move(out), {a, b}, [n, k, m](detail::TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) {
            detail::ensure_grad(pa);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    double g = self.grad[size_t(i) * m + j];
                    if (g == 0.0) continue;
                    double* ar = pa.grad.data() + size_t(i) * k;
                    const double* br = pb.val.data() + size_t(j) * k;
                    for (int p = 0; p < k; ++p) ar[p] += g * br[p];
                }
        }
        if (pb.needs_grad) {
            detail::ensure_grad(pb);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    double g = self.grad[size_t(i) * m + j];
                    if (g == 0.0) continue;
                    double* br = pb.grad.data() + size_t(j) * k;
                    const double* ar = pa.val.data() + size_t(i) * k;
                    for (int p = 0; p < k; ++p) br[p] += g * ar[p];
                }
        }
    });
}

inline Tensor transpose(const Tensor& a) {
    const int n = a.rows(), c = a.cols();
    std::vector<double> out(a.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < c; ++j) out[size_t(j) * n + i] = a(i, j);
    return detail::make_op("transpose", c, n, std::move(out), {a}, [n, c](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < c; ++j) p.grad[size_t(i) * c + j] += self.grad[size_t(j) * n + i];
    });
}

// ---------------------------------------------------------------------------
// Row-wise normalizations and nonlinearities

inline Tensor softmax_rows(const Tensor& x) {
    const int n = x.rows(), c = x.cols();
    std::vector<double> out(x.size());
    for (int i = 0; i < n; ++i) {
        const double* r = x.values().data() + size_t(i) * c;
        double m = r[0];
        for (int j = 1; j < c; ++j) m = std::max(m, r[j]);
        double s = 0;
        for (int j = 0; j < c; ++j) s += out[size_t(i) * c + j] = std::exp(r[j] - m);
        for (int j = 0; j < c; ++j) out[size_t(i) * c + j] /= s;
    }
    return detail::make_op("softmax_rows", n, c, std::move(out), {x}, [n, c](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (int i = 0; i < n; ++i) {
            const double* y = self.val.data() + size_t(i) * c;
            const double* gy = self.grad.data() + size_t(i) * c;
            double dot = 0;
            for (int j = 0; j < c; ++j) dot += gy[j] * y[j];
            double* gx = p.grad.data() + size_t(i) * c;
            for (int j = 0; j < c; ++j) gx[j] += y[j] * (gy[j] - dot);
        }
    });
}

inline Tensor logsoftmax_rows(const Tensor& x) {
    const int n = x.rows(), c = x.cols();
    std::vector<double> out(x.size());
    for (int i = 0; i < n; ++i) {
        const double* r = x.values().data() + size_t(i) * c;
        double m = r[0];
        for (int j = 1; j < c; ++j) m = std::max(m, r[j]);
        double s = 0;
        for (int j = 0; j < c; ++j) s += std::exp(r[j] - m);
        double lse = m + std::log(s);
        for (int j = 0; j < c; ++j) out[size_t(i) * c + j] = r[j] - lse;
    }
    return detail::make_op("logsoftmax_rows", n, c, std::move(out), {x}, [n, c](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (int i = 0; i < n; ++i) {
            const double* y = self.val.data() + size_t(i) * c;
            const double* gy = self.grad.data() + size_t(i) * c;
            double gsum = 0;
            for (int j = 0; j < c; ++j) gsum += gy[j];
            double* gx = p.grad.data() + size_t(i) * c;
            for (int j = 0; j < c; ++j) gx[j] += gy[j] - std::exp(y[j]) * gsum;
        }
    });
}

constexpr double kLayerNormEps = 1e-10;

// Per-row standardization to mean 0, variance 1 (gain/bias applied separately).
inline Tensor layer_norm_rows(const Tensor& x, double eps = kLayerNormEps) {
    const int n = x.rows(), c = x.cols();
    std::vector<double> out(x.size());
    std::vector<double> inv_sd(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double* r = x.values().data() + size_t(i) * c;
        double mu = 0;
        for (int j = 0; j < c; ++j) mu += r[j];
        mu /= c;
        double var = 0;
        for (int j = 0; j < c; ++j) var += (r[j] - mu) * (r[j] - mu);
        var /= c;
        inv_sd[size_t(i)] = 1.0 / std::sqrt(var + eps);
        for (int j = 0; j < c; ++j) out[size_t(i) * c + j] = (r[j] - mu) * inv_sd[size_t(i)];
    }
    return detail::make_op("layer_norm_rows", n, c, std::move(out), {x},
                           [n, c, inv_sd](detail::TensorNode& self) {
                               auto& p = *self.parents[0];
                               detail::ensure_grad(p);
                               for (int i = 0; i < n; ++i) {
                                   const double* y = self.val.data() + size_t(i) * c;
                                   const double* gy = self.grad.data() + size_t(i) * c;
                                   double mg = 0, mgy = 0;
                                   for (int j = 0; j < c; ++j) {
                                       mg += gy[j];
                                       mgy += gy[j] * y[j];
                                   }
                                   mg /= c;
                                   mgy /= c;
                                   double* gx = p.grad.data() + size_t(i) * c;
                                   for (int j = 0; j < c; ++j)
                                       gx[j] += inv_sd[size_t(i)] * (gy[j] - mg - y[j] * mgy);
                               }
                           });
}

inline Tensor gelu(const Tensor& x) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < out.size(); ++i) {
        double v = x.values()[i];
        out[i] = 0.5 * v * (1.0 + std::erf(v * 0.7071067811865476));
    }
    return detail::make_op("gelu", x.rows(), x.cols(), std::move(out), {x}, [](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < self.grad.size(); ++i) {
            double v = p.val[i];
            double cdf = 0.5 * (1.0 + std::erf(v * 0.7071067811865476));
            double pdf = 0.3989422804014327 * std::exp(-0.5 * v * v);
            p.grad[i] += self.grad[i] * (cdf + v * pdf);
        }
    });
}

inline Tensor exp_t(const Tensor& x) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::exp(x.values()[i]);
    return detail::make_op("exp", x.rows(), x.cols(), std::move(out), {x}, [](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * self.val[i];
    });
}

inline Tensor log_t(const Tensor& x) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::log(x.values()[i]);
    return detail::make_op("log", x.rows(), x.cols(), std::move(out), {x}, [](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] / p.val[i];
    });
}

// x^p elementwise; the derivative at x=0 is taken as 0 for p<1 (subgradient convention).
inline Tensor pow_const(const Tensor& x, double p) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::pow(x.values()[i], p);
    return detail::make_op("pow_const", x.rows(), x.cols(), std::move(out), {x}, [p](detail::TensorNode& self) {
        auto& par = *self.parents[0];
        detail::ensure_grad(par);
        for (size_t i = 0; i < self.grad.size(); ++i) {
            double v = par.val[i];
            double d;
            if (p == 0.0)
                d = 0.0;
            else if (v == 0.0)
                d = (p == 1.0) ? 1.0 : 0.0;
            else
                d = p * std::pow(v, p - 1.0);
            par.grad[i] += self.grad[i] * d;
        }
    });
}

inline Tensor softplus(const Tensor& x) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < out.size(); ++i) {
        double v = x.values()[i];
        out[i] = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
    }
    return detail::make_op("softplus", x.rows(), x.cols(), std::move(out), {x}, [](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < self.grad.size(); ++i) {
            double v = p.val[i];
            double sig = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
            p.grad[i] += self.grad[i] * sig;
        }
    });
}

// ---------------------------------------------------------------------------
// Shape ops

inline Tensor reshape(const Tensor& x, int rows, int cols) {
    if (int64_t(rows) * cols != int64_t(x.size()))
        throw ShapeMismatch("reshape: " + x.shape_str() + " to " + std::to_string(rows) + "x" + std::to_string(cols));
    std::vector<double> out = x.values();
    return detail::make_op("reshape", rows, cols, std::move(out), {x}, [](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
    });
}

inline Tensor concat_rows(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.cols()) throw ShapeMismatch("concat_rows: " + a.shape_str() + " vs " + b.shape_str());
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    size_t na = a.size();
    return detail::make_op("concat_rows", a.rows() + b.rows(), a.cols(), std::move(out), {a, b},
                           [na](detail::TensorNode& self) {
                               auto& pa = *self.parents[0];
                               auto& pb = *self.parents[1];
                               if (pa.needs_grad) {
                                   detail::ensure_grad(pa);
                                   for (size_t i = 0; i < na; ++i) pa.grad[i] += self.grad[i];
                               }
                               if (pb.needs_grad) {
                                   detail::ensure_grad(pb);
                                   for (size_t i = na; i < self.grad.size(); ++i) pb.grad[i - na] += self.grad[i];
                               }
                           });
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) throw ShapeMismatch("concat_cols: " + a.shape_str() + " vs " + b.shape_str());
    const int n = a.rows(), ca = a.cols(), cb = b.cols();
    std::vector<double> out(size_t(n) * size_t(ca + cb));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < ca; ++j) out[size_t(i) * (ca + cb) + j] = a(i, j);
        for (int j = 0; j < cb; ++j) out[size_t(i) * (ca + cb) + ca + j] = b(i, j);
    }
    return detail::make_op("concat_cols", n, ca + cb, std::move(out), {a, b}, [n, ca, cb](detail::TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) {
            detail::ensure_grad(pa);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < ca; ++j) pa.grad[size_t(i) * ca + j] += self.grad[size_t(i) * (ca + cb) + j];
        }
        if (pb.needs_grad) {
            detail::ensure_grad(pb);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < cb; ++j) pb.grad[size_t(i) * cb + j] += self.grad[size_t(i) * (ca + cb) + ca + j];
        }
    });
}

inline Tensor slice_rows(const Tensor& x, int r0, int r1) {
    if (r0 < 0 || r1 > x.rows() || r0 >= r1)
        throw ShapeMismatch("slice_rows: [" + std::to_string(r0) + "," + std::to_string(r1) + ") of " + x.shape_str());
    const int c = x.cols();
    std::vector<double> out(x.values().begin() + size_t(r0) * c, x.values().begin() + size_t(r1) * c);
    return detail::make_op("slice_rows", r1 - r0, c, std::move(out), {x}, [r0, c](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[size_t(r0) * c + i] += self.grad[i];
    });
}

inline Tensor slice_cols(const Tensor& x, int c0, int c1) {
    if (c0 < 0 || c1 > x.cols() || c0 >= c1)
        throw ShapeMismatch("slice_cols: [" + std::to_string(c0) + "," + std::to_string(c1) + ") of " + x.shape_str());
    const int n = x.rows(), c = x.cols(), w = c1 - c0;
    std::vector<double> out(size_t(n) * size_t(w));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < w; ++j) out[size_t(i) * w + j] = x(i, c0 + j);
    return detail::make_op("slice_cols", n, w, std::move(out), {x}, [n, c, c0, w](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j) p.grad[size_t(i) * c + c0 + j] += self.grad[size_t(i) * w + j];
    });
}

// ---------------------------------------------------------------------------
// Reductions and selections

inline Tensor sum_all(const Tensor& x) {
    double s = 0;
    for (double v : x.values()) s += v;
    return detail::make_op("sum", 1, 1, {s}, {x}, [](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (auto& g : p.grad) g += self.grad[0];
    });
}

inline Tensor mean_all(const Tensor& x) {
    double s = 0;
    for (double v : x.values()) s += v;
    double inv = 1.0 / double(x.size());
    return detail::make_op("mean", 1, 1, {s * inv}, {x}, [inv](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (auto& g : p.grad) g += self.grad[0] * inv;
    });
}

// Column-wise max over rows -> 1 x c; gradient routes to the first argmax row.
inline Tensor max_over_rows(const Tensor& x) {
    const int n = x.rows(), c = x.cols();
    std::vector<double> out(static_cast<size_t>(c));
    std::vector<int> arg(size_t(c), 0);
    for (int j = 0; j < c; ++j) {
        double best = x(0, j);
        for (int i = 1; i < n; ++i)
            if (x(i, j) > best) {
                best = x(i, j);
                arg[size_t(j)] = i;
            }
        out[size_t(j)] = best;
    }
    return detail::make_op("max_over_rows", 1, c, std::move(out), {x}, [c, arg](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (int j = 0; j < c; ++j) p.grad[size_t(arg[size_t(j)]) * c + j] += self.grad[size_t(j)];
    });
}

// Picks x[i, idx[i]] -> n x 1.
inline Tensor gather_cols(const Tensor& x, const std::vector<int>& idx) {
    const int n = x.rows(), c = x.cols();
    if (int(idx.size()) != n)
        throw ShapeMismatch("gather_cols: " + std::to_string(idx.size()) + " indices for " + x.shape_str());
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (idx[size_t(i)] < 0 || idx[size_t(i)] >= c)
            throw ClassOutOfRange("gather_cols: index " + std::to_string(idx[size_t(i)]) + " at row " +
                                  std::to_string(i) + ", class count " + std::to_string(c));
        out[size_t(i)] = x(i, idx[size_t(i)]);
    }
    return detail::make_op("gather_cols", n, 1, std::move(out), {x}, [c, idx](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i * size_t(c) + size_t(idx[i])] += self.grad[i];
    });
}

// Row lookup into an embedding table (V x c) -> n x c; gradient scatter-adds.
inline Tensor embed_rows(const Tensor& table, const std::vector<int>& idx) {
    const int v = table.rows(), c = table.cols(), n = int(idx.size());
    std::vector<double> out(size_t(n) * size_t(c));
    for (int i = 0; i < n; ++i) {
        if (idx[size_t(i)] < 0 || idx[size_t(i)] >= v)
            throw ClassOutOfRange("embed_rows: index " + std::to_string(idx[size_t(i)]) + " at row " +
                                  std::to_string(i) + ", table rows " + std::to_string(v));
        for (int j = 0; j < c; ++j) out[size_t(i) * c + j] = table(idx[size_t(i)], j);
    }
    return detail::make_op("embed_rows", n, c, std::move(out), {table}, [c, idx](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (size_t i = 0; i < idx.size(); ++i)
            for (int j = 0; j < c; ++j) p.grad[size_t(idx[i]) * c + j] += self.grad[i * size_t(c) + size_t(j)];
    });
}

// ---------------------------------------------------------------------------
// Sequence ops (rows = channels, cols = positions)

// Kernel-3 zero-padded convolution; w is (cOut x cIn*3), b is (1 x cOut).
inline Tensor conv1d_k3(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    const int ci = x.rows(), t = x.cols(), co = w.rows();
    if (w.cols() != ci * 3) throw ShapeMismatch("conv1d_k3: weight " + w.shape_str() + " for input " + x.shape_str());
    if (b.rows() != 1 || b.cols() != co) throw ShapeMismatch("conv1d_k3: bias " + b.shape_str());
    if (stride != 1 && stride != 2) throw Error("conv1d_k3: stride must be 1 or 2");
    const int to = (t - 1) / stride + 1;
    std::vector<double> out(size_t(co) * size_t(to));
    for (int o = 0; o < co; ++o)
        for (int j = 0; j < to; ++j) {
            double s = b(0, o);
            for (int c = 0; c < ci; ++c)
                for (int dk = 0; dk < 3; ++dk) {
                    int src = j * stride + dk - 1;
                    if (src < 0 || src >= t) continue;
                    s += w(o, c * 3 + dk) * x(c, src);
                }
            out[size_t(o) * to + j] = s;
        }
    return detail::make_op("conv1d_k3", co, to, std::move(out), {x, w, b},
                           [ci, t, co, to, stride](detail::TensorNode& self) {
                               auto& px = *self.parents[0];
                               auto& pw = *self.parents[1];
                               auto& pb = *self.parents[2];
                               if (px.needs_grad) detail::ensure_grad(px);
                               if (pw.needs_grad) detail::ensure_grad(pw);
                               if (pb.needs_grad) detail::ensure_grad(pb);
                               for (int o = 0; o < co; ++o)
                                   for (int j = 0; j < to; ++j) {
                                       double g = self.grad[size_t(o) * to + j];
                                       if (g == 0.0) continue;
                                       if (pb.needs_grad) pb.grad[size_t(o)] += g;
                                       for (int c = 0; c < ci; ++c)
                                           for (int dk = 0; dk < 3; ++dk) {
                                               int src = j * stride + dk - 1;
                                               if (src < 0 || src >= t) continue;
                                               if (pw.needs_grad)
                                                   pw.grad[size_t(o) * (ci * 3) + c * 3 + dk] +=
                                                       g * px.val[size_t(c) * t + src];
                                               if (px.needs_grad)
                                                   px.grad[size_t(c) * t + src] +=
                                                       g * pw.val[size_t(o) * (ci * 3) + c * 3 + dk];
                                           }
                                   }
                           });
}

// Nearest-neighbor doubling along positions: (c x t) -> (c x 2t).
inline Tensor upsample2_cols(const Tensor& x) {
    const int c = x.rows(), t = x.cols();
    std::vector<double> out(size_t(c) * size_t(2 * t));
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < t; ++j) out[size_t(i) * 2 * t + 2 * j] = out[size_t(i) * 2 * t + 2 * j + 1] = x(i, j);
    return detail::make_op("upsample2_cols", c, 2 * t, std::move(out), {x}, [c, t](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        detail::ensure_grad(p);
        for (int i = 0; i < c; ++i)
            for (int j = 0; j < t; ++j)
                p.grad[size_t(i) * t + j] += self.grad[size_t(i) * 2 * t + 2 * j] + self.grad[size_t(i) * 2 * t + 2 * j + 1];
    });
}

// ---------------------------------------------------------------------------
// Fourier position features

// [sin(2*pi*2^k*t) for k < d/2] ++ [cos(...)]; constant wrt the graph.
inline Tensor fourier_embed_batch(const std::vector<double>& ts, int d) {
    if (d % 2 != 0) throw OddDimension("fourier_embed: dimension " + std::to_string(d));
    const int half = d / 2;
    std::vector<double> out(ts.size() * size_t(d));
    for (size_t i = 0; i < ts.size(); ++i) {
        double f = 1.0;
        for (int k = 0; k < half; ++k, f *= 2.0) {
            double ang = 6.283185307179586 * f * ts[i];
            out[i * size_t(d) + size_t(k)] = std::sin(ang);
            out[i * size_t(d) + size_t(half + k)] = std::cos(ang);
        }
    }
    return Tensor::from_data(std::move(out), int(ts.size()), d, false);
}

inline Tensor fourier_embed(double t, int d) { return fourier_embed_batch({t}, d); }

}  // namespace clrwire
