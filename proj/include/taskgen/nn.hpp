#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "taskgen/errors.hpp"
#include "taskgen/rng.hpp"

namespace taskgen::nn {

/// One learnable tensor: flat weights plus a same-shaped gradient accumulator.
struct Param {
    std::vector<double> w;
    std::vector<double> g;

    Param() = default;
    explicit Param(std::size_t n) : w(n, 0.0), g(n, 0.0) {}

    std::size_t size() const { return w.size(); }
    void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

inline std::size_t param_count(const std::vector<Param*>& ps) {
    std::size_t n = 0;
    for (const Param* p : ps) n += p->size();
    return n;
}

/// Weight coordinate `i` across the concatenation of all params.
inline double& param_coord(const std::vector<Param*>& ps, std::size_t i) {
    for (Param* p : ps) {
        if (i < p->size()) return p->w[i];
        i -= p->size();
    }
    throw std::out_of_range("parameter coordinate");
}

inline double grad_coord(const std::vector<Param*>& ps, std::size_t i) {
    for (const Param* p : ps) {
        if (i < p->size()) return p->g[i];
        i -= p->size();
    }
    throw std::out_of_range("parameter coordinate");
}

inline void zero_grads(const std::vector<Param*>& ps) {
    for (Param* p : ps) p->zero_grad();
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

inline void init_uniform(std::vector<double>& w, double scale, Rng& rng) {
    for (double& x : w) x = (rng.next_double() * 2.0 - 1.0) * scale;
}

/// Orthogonal rows (or columns when rows > cols) from a Gaussian draw via
/// modified Gram-Schmidt, scaled by `gain`.
inline void init_orthogonal(std::vector<double>& w, int rows, int cols, Rng& rng, double gain = 1.0) {
    if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != w.size())
        throw std::invalid_argument("orthogonal init shape mismatch");
    const bool wide = rows <= cols;
    const int r = wide ? rows : cols;
    const int c = wide ? cols : rows;
    std::vector<std::vector<double>> q(static_cast<std::size_t>(r), std::vector<double>(static_cast<std::size_t>(c)));
    for (auto& row : q) {
        for (;;) {
            for (double& x : row) x = rng.next_normal();
            for (const auto& prev : q) {
                if (&prev == &row) break;
                double dot = 0.0;
                for (int j = 0; j < c; ++j) dot += prev[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
                for (int j = 0; j < c; ++j) row[static_cast<std::size_t>(j)] -= dot * prev[static_cast<std::size_t>(j)];
            }
            double norm = 0.0;
            for (double x : row) norm += x * x;
            if (norm > 1e-12) {
                const double inv = 1.0 / std::sqrt(norm);
                for (double& x : row) x *= inv;
                break;
            }
        }
    }
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const double v = wide ? q[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                                  : q[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            w[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)] = gain * v;
        }
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

/// Affine layer y = Wx + b with W stored row-major (out x in).
struct Dense {
    int in = 0;
    int out = 0;
    Param W;
    Param b;

    Dense() = default;
    Dense(int inDim, int outDim, Rng& rng) : in(inDim), out(outDim), W(static_cast<std::size_t>(inDim) * outDim), b(static_cast<std::size_t>(outDim)) {
        init_orthogonal(W.w, out, in, rng);
    }

    std::vector<double> forward(const std::vector<double>& x) const {
        std::vector<double> y(static_cast<std::size_t>(out));
        for (int o = 0; o < out; ++o) {
            double s = b.w[static_cast<std::size_t>(o)];
            const double* row = W.w.data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += row[i] * x[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(o)] = s;
        }
        return y;
    }

    /// Accumulates parameter gradients and returns dLoss/dx.
    std::vector<double> backward(const std::vector<double>& x, const std::vector<double>& dy) {
        std::vector<double> dx(static_cast<std::size_t>(in), 0.0);
        for (int o = 0; o < out; ++o) {
            const double d = dy[static_cast<std::size_t>(o)];
            if (d == 0.0) continue;
            b.g[static_cast<std::size_t>(o)] += d;
            const double* row = W.w.data() + static_cast<std::size_t>(o) * in;
            double* grow = W.g.data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) {
                grow[i] += d * x[static_cast<std::size_t>(i)];
                dx[static_cast<std::size_t>(i)] += d * row[i];
            }
        }
        return dx;
    }

    std::vector<Param*> params() { return {&W, &b}; }
};

// ---------------------------------------------------------------------------
// Embedding
// ---------------------------------------------------------------------------

/// Lookup table (n x dim); forward copies a row, backward scatters into it.
struct Embedding {
    int n = 0;
    int dim = 0;
    Param table;

    Embedding() = default;
    Embedding(int count, int d, Rng& rng) : n(count), dim(d), table(static_cast<std::size_t>(count) * d) {
        init_uniform(table.w, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    }

    std::vector<double> forward(int idx) const {
        if (idx < 0 || idx >= n) throw std::out_of_range("embedding index");
        const double* row = table.w.data() + static_cast<std::size_t>(idx) * dim;
        return std::vector<double>(row, row + dim);
    }

    void backward(int idx, const std::vector<double>& dy) {
        double* grow = table.g.data() + static_cast<std::size_t>(idx) * dim;
        for (int i = 0; i < dim; ++i) grow[i] += dy[static_cast<std::size_t>(i)];
    }

    std::vector<Param*> params() { return {&table}; }
};

// ---------------------------------------------------------------------------
// ReLU
// ---------------------------------------------------------------------------

inline std::vector<double> relu(const std::vector<double>& x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

inline std::vector<double> relu_backward(const std::vector<double>& x, const std::vector<double>& dy) {
    std::vector<double> dx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
    return dx;
}

// ---------------------------------------------------------------------------
// Conv 3x3, stride 1, zero padding 1 (spatial size preserved)
// ---------------------------------------------------------------------------

struct Conv3x3 {
    int inC = 0;
    int outC = 0;
    Param W;  ///< outC x inC x 3 x 3
    Param b;

    Conv3x3() = default;
    Conv3x3(int cin, int cout, Rng& rng) : inC(cin), outC(cout), W(static_cast<std::size_t>(cout) * cin * 9), b(static_cast<std::size_t>(cout)) {
        init_orthogonal(W.w, cout, cin * 9, rng);
    }

    std::vector<double> forward(const std::vector<double>& x, int h, int w) const {
        std::vector<double> y(static_cast<std::size_t>(outC) * h * w);
        for (int oc = 0; oc < outC; ++oc)
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    double s = b.w[static_cast<std::size_t>(oc)];
                    for (int ic = 0; ic < inC; ++ic) {
                        const double* plane = x.data() + static_cast<std::size_t>(ic) * h * w;
                        const double* k = W.w.data() + ((static_cast<std::size_t>(oc) * inC + ic) * 9);
                        for (int dr = -1; dr <= 1; ++dr) {
                            const int rr = r + dr;
                            if (rr < 0 || rr >= h) continue;
                            for (int dc = -1; dc <= 1; ++dc) {
                                const int cc = c + dc;
                                if (cc < 0 || cc >= w) continue;
                                s += k[(dr + 1) * 3 + (dc + 1)] * plane[rr * w + cc];
                            }
                        }
                    }
                    y[(static_cast<std::size_t>(oc) * h + r) * w + c] = s;
                }
        return y;
    }

    std::vector<double> backward(const std::vector<double>& x, int h, int w, const std::vector<double>& dy) {
        std::vector<double> dx(static_cast<std::size_t>(inC) * h * w, 0.0);
        for (int oc = 0; oc < outC; ++oc)
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    const double d = dy[(static_cast<std::size_t>(oc) * h + r) * w + c];
                    if (d == 0.0) continue;
                    b.g[static_cast<std::size_t>(oc)] += d;
                    for (int ic = 0; ic < inC; ++ic) {
                        const double* plane = x.data() + static_cast<std::size_t>(ic) * h * w;
                        double* dplane = dx.data() + static_cast<std::size_t>(ic) * h * w;
                        const double* k = W.w.data() + ((static_cast<std::size_t>(oc) * inC + ic) * 9);
                        double* gk = W.g.data() + ((static_cast<std::size_t>(oc) * inC + ic) * 9);
                        for (int dr = -1; dr <= 1; ++dr) {
                            const int rr = r + dr;
                            if (rr < 0 || rr >= h) continue;
                            for (int dc = -1; dc <= 1; ++dc) {
                                const int cc = c + dc;
                                if (cc < 0 || cc >= w) continue;
                                gk[(dr + 1) * 3 + (dc + 1)] += d * plane[rr * w + cc];
                                dplane[rr * w + cc] += d * k[(dr + 1) * 3 + (dc + 1)];
                            }
                        }
                    }
                }
        return dx;
    }

    std::vector<Param*> params() { return {&W, &b}; }
};

// ---------------------------------------------------------------------------
// 2x2 max pooling, stride 2 (h and w must be even)
// ---------------------------------------------------------------------------

inline std::vector<double> maxpool2(const std::vector<double>& x, int channels, int h, int w) {
    if (h % 2 != 0 || w % 2 != 0) throw std::invalid_argument("maxpool2 needs even spatial dims");
    const int oh = h / 2;
    const int ow = w / 2;
    std::vector<double> y(static_cast<std::size_t>(channels) * oh * ow);
    for (int c = 0; c < channels; ++c)
        for (int r = 0; r < oh; ++r)
            for (int q = 0; q < ow; ++q) {
                const double* plane = x.data() + static_cast<std::size_t>(c) * h * w;
                double best = plane[(2 * r) * w + 2 * q];
                best = std::max(best, plane[(2 * r) * w + 2 * q + 1]);
                best = std::max(best, plane[(2 * r + 1) * w + 2 * q]);
                best = std::max(best, plane[(2 * r + 1) * w + 2 * q + 1]);
                y[(static_cast<std::size_t>(c) * oh + r) * ow + q] = best;
            }
    return y;
}

/// Routes each output gradient to the first cell attaining the block maximum.
inline std::vector<double> maxpool2_backward(const std::vector<double>& x, int channels, int h, int w,
                                             const std::vector<double>& dy) {
    const int oh = h / 2;
    const int ow = w / 2;
    std::vector<double> dx(x.size(), 0.0);
    for (int c = 0; c < channels; ++c)
        for (int r = 0; r < oh; ++r)
            for (int q = 0; q < ow; ++q) {
                const double* plane = x.data() + static_cast<std::size_t>(c) * h * w;
                double* dplane = dx.data() + static_cast<std::size_t>(c) * h * w;
                const int cells[4] = {(2 * r) * w + 2 * q, (2 * r) * w + 2 * q + 1,
                                      (2 * r + 1) * w + 2 * q, (2 * r + 1) * w + 2 * q + 1};
                int arg = cells[0];
                for (int i = 1; i < 4; ++i)
                    if (plane[cells[i]] > plane[arg]) arg = cells[i];
                dplane[arg] += dy[(static_cast<std::size_t>(c) * oh + r) * ow + q];
            }
    return dx;
}

// ---------------------------------------------------------------------------
// LSTM layer
// ---------------------------------------------------------------------------

/// Single LSTM layer; gate order i, f, g, o. Forget-gate bias starts at 1.
struct LstmLayer {
    int in = 0;
    int hid = 0;
    Param Wih;  ///< 4H x in
    Param Whh;  ///< 4H x H
    Param bias; ///< 4H

    struct Cache {
        std::vector<double> x, hPrev, cPrev;
        std::vector<double> i, f, g, o;  ///< post-activation gates
        std::vector<double> c, tc, h;    ///< new cell, tanh(new cell), new hidden
    };

    LstmLayer() = default;
    LstmLayer(int inDim, int hidden, Rng& rng)
        : in(inDim), hid(hidden), Wih(static_cast<std::size_t>(4) * hidden * inDim),
          Whh(static_cast<std::size_t>(4) * hidden * hidden), bias(static_cast<std::size_t>(4) * hidden) {
        for (int gate = 0; gate < 4; ++gate) {
            std::vector<double> blk(static_cast<std::size_t>(hidden) * inDim);
            init_orthogonal(blk, hidden, inDim, rng);
            std::copy(blk.begin(), blk.end(), Wih.w.begin() + static_cast<std::size_t>(gate) * hidden * inDim);
            std::vector<double> blk2(static_cast<std::size_t>(hidden) * hidden);
            init_orthogonal(blk2, hidden, hidden, rng);
            std::copy(blk2.begin(), blk2.end(), Whh.w.begin() + static_cast<std::size_t>(gate) * hidden * hidden);
        }
        for (int j = 0; j < hid; ++j) bias.w[static_cast<std::size_t>(hid + j)] = 1.0;
    }

    static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

    void forward(const std::vector<double>& x, const std::vector<double>& hPrev,
                 const std::vector<double>& cPrev, Cache& cc) const {
        cc.x = x;
        cc.hPrev = hPrev;
        cc.cPrev = cPrev;
        std::vector<double> z(static_cast<std::size_t>(4) * hid);
        for (int j = 0; j < 4 * hid; ++j) {
            double s = bias.w[static_cast<std::size_t>(j)];
            const double* ri = Wih.w.data() + static_cast<std::size_t>(j) * in;
            for (int k = 0; k < in; ++k) s += ri[k] * x[static_cast<std::size_t>(k)];
            const double* rh = Whh.w.data() + static_cast<std::size_t>(j) * hid;
            for (int k = 0; k < hid; ++k) s += rh[k] * hPrev[static_cast<std::size_t>(k)];
            z[static_cast<std::size_t>(j)] = s;
        }
        cc.i.resize(static_cast<std::size_t>(hid));
        cc.f.resize(static_cast<std::size_t>(hid));
        cc.g.resize(static_cast<std::size_t>(hid));
        cc.o.resize(static_cast<std::size_t>(hid));
        cc.c.resize(static_cast<std::size_t>(hid));
        cc.tc.resize(static_cast<std::size_t>(hid));
        cc.h.resize(static_cast<std::size_t>(hid));
        for (int j = 0; j < hid; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            cc.i[sj] = sigmoid(z[sj]);
            cc.f[sj] = sigmoid(z[static_cast<std::size_t>(hid) + sj]);
            cc.g[sj] = std::tanh(z[static_cast<std::size_t>(2 * hid) + sj]);
            cc.o[sj] = sigmoid(z[static_cast<std::size_t>(3 * hid) + sj]);
            cc.c[sj] = cc.f[sj] * cPrev[sj] + cc.i[sj] * cc.g[sj];
            cc.tc[sj] = std::tanh(cc.c[sj]);
            cc.h[sj] = cc.o[sj] * cc.tc[sj];
        }
    }

    /// Consumes dLoss/dh and dLoss/dc of this step, emits the previous step's.
    void backward(const Cache& cc, const std::vector<double>& dh, const std::vector<double>& dc,
                  std::vector<double>& dx, std::vector<double>& dhPrev, std::vector<double>& dcPrev) {
        std::vector<double> dz(static_cast<std::size_t>(4) * hid);
        dcPrev.assign(static_cast<std::size_t>(hid), 0.0);
        for (int j = 0; j < hid; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            const double dcTot = dc[sj] + dh[sj] * cc.o[sj] * (1.0 - cc.tc[sj] * cc.tc[sj]);
            const double dO = dh[sj] * cc.tc[sj];
            const double dI = dcTot * cc.g[sj];
            const double dF = dcTot * cc.cPrev[sj];
            const double dG = dcTot * cc.i[sj];
            dcPrev[sj] = dcTot * cc.f[sj];
            dz[sj] = dI * cc.i[sj] * (1.0 - cc.i[sj]);
            dz[static_cast<std::size_t>(hid) + sj] = dF * cc.f[sj] * (1.0 - cc.f[sj]);
            dz[static_cast<std::size_t>(2 * hid) + sj] = dG * (1.0 - cc.g[sj] * cc.g[sj]);
            dz[static_cast<std::size_t>(3 * hid) + sj] = dO * cc.o[sj] * (1.0 - cc.o[sj]);
        }
        dx.assign(static_cast<std::size_t>(in), 0.0);
        dhPrev.assign(static_cast<std::size_t>(hid), 0.0);
        for (int j = 0; j < 4 * hid; ++j) {
            const double d = dz[static_cast<std::size_t>(j)];
            if (d == 0.0) continue;
            bias.g[static_cast<std::size_t>(j)] += d;
            const double* ri = Wih.w.data() + static_cast<std::size_t>(j) * in;
            double* gi = Wih.g.data() + static_cast<std::size_t>(j) * in;
            for (int k = 0; k < in; ++k) {
                gi[k] += d * cc.x[static_cast<std::size_t>(k)];
                dx[static_cast<std::size_t>(k)] += d * ri[k];
            }
            const double* rh = Whh.w.data() + static_cast<std::size_t>(j) * hid;
            double* gh = Whh.g.data() + static_cast<std::size_t>(j) * hid;
            for (int k = 0; k < hid; ++k) {
                gh[k] += d * cc.hPrev[static_cast<std::size_t>(k)];
                dhPrev[static_cast<std::size_t>(k)] += d * rh[k];
            }
        }
    }

    std::vector<Param*> params() { return {&Wih, &Whh, &bias}; }
};

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Softmax restricted to `legal`, returned aligned with `legal`.
inline std::vector<double> softmax_masked(const std::vector<double>& logits, const std::vector<int>& legal) {
    if (legal.empty()) throw std::invalid_argument("softmax over an empty legal set");
    double mx = logits[static_cast<std::size_t>(legal[0])];
    for (int t : legal) mx = std::max(mx, logits[static_cast<std::size_t>(t)]);
    std::vector<double> p(legal.size());
    double tot = 0.0;
    for (std::size_t i = 0; i < legal.size(); ++i) {
        p[i] = std::exp(logits[static_cast<std::size_t>(legal[i])] - mx);
        tot += p[i];
    }
    for (double& v : p) v /= tot;
    return p;
}

struct LossGrad {
    double loss = 0.0;
    std::vector<double> dlogits;  ///< gradient over the full logit vector
};

/// Negative log-likelihood of `target` under the legal-set softmax.
inline LossGrad masked_cross_entropy(const std::vector<double>& logits, const std::vector<int>& legal,
                                     int target) {
    const std::vector<double> p = softmax_masked(logits, legal);
    LossGrad out;
    out.dlogits.assign(logits.size(), 0.0);
    bool found = false;
    for (std::size_t i = 0; i < legal.size(); ++i) {
        const bool hit = legal[i] == target;
        found = found || hit;
        out.dlogits[static_cast<std::size_t>(legal[i])] = p[i] - (hit ? 1.0 : 0.0);
        if (hit) out.loss = -std::log(std::max(p[i], 1e-300));
    }
    if (!found) throw std::invalid_argument("cross entropy target outside the legal set");
    return out;
}

/// Log-probability of `pick` under the legal-set softmax, with d/dlogits.
inline LossGrad masked_log_prob(const std::vector<double>& logits, const std::vector<int>& legal, int pick) {
    LossGrad ce = masked_cross_entropy(logits, legal, pick);
    ce.loss = -ce.loss;
    for (double& d : ce.dlogits) d = -d;
    return ce;
}

/// Huber loss with unit transition point; returns d/dpred.
inline std::pair<double, double> smooth_l1(double pred, double target) {
    const double d = pred - target;
    if (std::abs(d) < 1.0) return {0.5 * d * d, d};
    return {std::abs(d) - 0.5, d > 0.0 ? 1.0 : -1.0};
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
  public:
    Adam() = default;
    Adam(std::vector<Param*> ps, AdamConfig cfg = {}) : cfg_(cfg), params_(std::move(ps)) {
        for (Param* p : params_) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
    }

    /// One update from the accumulated gradients; gradients are then cleared.
    void step() {
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            Param& p = *params_[k];
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double g = p.g[i];
                m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g;
                v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g * g;
                p.w[i] -= cfg_.lr * (m_[k][i] / c1) / (std::sqrt(v_[k][i] / c2) + cfg_.eps);
            }
            p.zero_grad();
        }
    }

  private:
    AdamConfig cfg_;
    std::vector<Param*> params_;
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
};

inline void scale_grads(const std::vector<Param*>& ps, double factor) {
    for (Param* p : ps)
        for (double& g : p->g) g *= factor;
}

/// Rescales all gradients so their joint L2 norm is at most `maxNorm`.
inline void clip_grad_norm(const std::vector<Param*>& ps, double maxNorm) {
    double sq = 0.0;
    for (const Param* p : ps)
        for (double g : p->g) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm <= maxNorm || norm == 0.0) return;
    const double scale = maxNorm / norm;
    for (Param* p : ps)
        for (double& g : p->g) g *= scale;
}

// ---------------------------------------------------------------------------
// Parameter serialization
// ---------------------------------------------------------------------------

using Json = nlohmann::json;

inline Json params_to_json(const std::vector<std::pair<std::string, const Param*>>& named) {
    Json j = Json::object();
    for (const auto& [name, p] : named) j[name] = p->w;
    return j;
}

inline void params_from_json(const Json& j, const std::vector<std::pair<std::string, Param*>>& named) {
    for (const auto& [name, p] : named) {
        if (!j.contains(name)) throw CheckpointError("missing tensor " + name);
        const auto& arr = j.at(name);
        if (!arr.is_array() || arr.size() != p->size())
            throw CheckpointError("tensor " + name + " has the wrong shape");
        for (std::size_t i = 0; i < p->size(); ++i) p->w[i] = arr[i].get<double>();
    }
}

}  // namespace taskgen::nn
