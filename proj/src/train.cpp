#include "natlas/train.hpp"

#include <cmath>
#include <cstdio>

#include "natlas/common.hpp"
#include "natlas/tokenizer.hpp"

namespace natlas {

namespace {

double dsilu(double z) {  // d/dz z*sigmoid(z)
    double s = 1.0 / (1.0 + std::exp(-z));
    return s * (1.0 + z * (1.0 - s));
}

// y = x * w / rms(x); returns rms for the backward pass
double rms_forward(const double* x, const double* w, double* y, int n, double eps) {
    double ss = 0;
    for (int i = 0; i < n; ++i) ss += x[i] * x[i];
    double r = std::sqrt(ss / n + eps);
    for (int i = 0; i < n; ++i) y[i] = x[i] * w[i] / r;
    return r;
}

void rms_backward(const double* x, const double* w, const double* dy, double r, int n,
                  double* dx, double* dw) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += dy[i] * w[i] * x[i];
    s /= n * r * r;
    for (int i = 0; i < n; ++i) {
        dx[i] += (dy[i] * w[i] - x[i] * s) / r;
        dw[i] += dy[i] * x[i] / r;
    }
}

}  // namespace

struct Trainer::Cache {
    int T = 0;
    struct LayerCache {
        std::vector<double> x0, h1, qr, kr, v, att, x1, h2;  // T x d each
        std::vector<double> gpre, up, act;                   // T x d_ff
        std::vector<double> probs;                           // heads x T x T
        std::vector<double> r1, r2;                          // rms denominators
    };
    std::vector<LayerCache> layers;
    std::vector<double> xfinal, hn;  // T x d
    std::vector<double> rF;          // T
    std::vector<double> logits, sm;  // T x vocab
};

Trainer::Trainer(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    int d = cfg_.d_model, f = cfg_.d_ff, v = cfg_.vocab_size;
    embed_.init(v, d);
    layers_.resize(cfg_.n_layers);
    for (auto& l : layers_) {
        l.attn_norm.init(1, d);
        l.wq.init(d, d);
        l.wk.init(d, d);
        l.wv.init(d, d);
        l.wo.init(d, d);
        l.ffn_norm.init(1, d);
        l.w_gate.init(f, d);
        l.w_up.init(f, d);
        l.w_down.init(d, f);
    }
    final_norm_.init(1, d);
    unembed_.init(v, d);

    Rng rng(splitmix64(seed ^ 0x747261696e696eull));
    const double scale = 0.02;
    const double res_scale = scale / std::sqrt(2.0 * cfg_.n_layers);
    auto fill = [&](P& p, double s) {
        for (auto& x : p.w) x = rng.gauss() * s;
    };
    fill(embed_, scale);
    for (auto& l : layers_) {
        for (auto& x : l.attn_norm.w) x = 1.0;
        for (auto& x : l.ffn_norm.w) x = 1.0;
        fill(l.wq, scale);
        fill(l.wk, scale);
        fill(l.wv, scale);
        fill(l.wo, res_scale);
        fill(l.w_gate, scale);
        fill(l.w_up, scale);
        fill(l.w_down, res_scale);
    }
    for (auto& x : final_norm_.w) x = 1.0;
    fill(unembed_, scale);
}

namespace {
// checkpoint tensors come in two flavors
const std::vector<float>& floats_of(const Mat& m) { return m.v; }
const std::vector<float>& floats_of(const std::vector<float>& v) { return v; }
std::vector<float>& floats_of(Mat& m) { return m.v; }
std::vector<float>& floats_of(std::vector<float>& v) { return v; }
}  // namespace

Trainer::Trainer(const Checkpoint& ckpt) : Trainer(ckpt.config, 0) {
    auto widen = [](P& p, const auto& m) {
        const auto& src = floats_of(m);
        for (size_t i = 0; i < src.size(); ++i) p.w[i] = src[i];
    };
    widen(embed_, ckpt.tok_embed);
    for (int i = 0; i < cfg_.n_layers; ++i) {
        const auto& src = ckpt.layers[i];
        auto& dst = layers_[i];
        widen(dst.attn_norm, src.attn_norm);
        widen(dst.wq, src.wq);
        widen(dst.wk, src.wk);
        widen(dst.wv, src.wv);
        widen(dst.wo, src.wo);
        widen(dst.ffn_norm, src.ffn_norm);
        widen(dst.w_gate, src.w_gate);
        widen(dst.w_up, src.w_up);
        widen(dst.w_down, src.w_down);
    }
    widen(final_norm_, ckpt.final_norm);
    widen(unembed_, ckpt.unembed);
}

Checkpoint Trainer::to_checkpoint() const {
    Checkpoint c = Checkpoint::zeros(cfg_);
    auto narrow = [](auto& m, const P& p) {
        auto& dst = floats_of(m);
        for (size_t i = 0; i < dst.size(); ++i) dst[i] = float(p.w[i]);
    };
    narrow(c.tok_embed, embed_);
    for (int i = 0; i < cfg_.n_layers; ++i) {
        auto& dst = c.layers[i];
        const auto& src = layers_[i];
        narrow(dst.attn_norm, src.attn_norm);
        narrow(dst.wq, src.wq);
        narrow(dst.wk, src.wk);
        narrow(dst.wv, src.wv);
        narrow(dst.wo, src.wo);
        narrow(dst.ffn_norm, src.ffn_norm);
        narrow(dst.w_gate, src.w_gate);
        narrow(dst.w_up, src.w_up);
        narrow(dst.w_down, src.w_down);
    }
    narrow(c.final_norm, final_norm_);
    narrow(c.unembed, unembed_);
    return c;
}

std::vector<Trainer::P*> Trainer::all_params() {
    std::vector<P*> out{&embed_};
    for (auto& l : layers_) {
        out.push_back(&l.attn_norm);
        out.push_back(&l.wq);
        out.push_back(&l.wk);
        out.push_back(&l.wv);
        out.push_back(&l.wo);
        out.push_back(&l.ffn_norm);
        out.push_back(&l.w_gate);
        out.push_back(&l.w_up);
        out.push_back(&l.w_down);
    }
    out.push_back(&final_norm_);
    out.push_back(&unembed_);
    return out;
}

std::vector<const Trainer::P*> Trainer::all_params() const {
    auto mut = const_cast<Trainer*>(this)->all_params();
    return {mut.begin(), mut.end()};
}

size_t Trainer::n_params() const {
    size_t n = 0;
    for (const P* p : all_params()) n += p->w.size();
    return n;
}

double& Trainer::param(size_t i) {
    for (P* p : all_params()) {
        if (i < p->w.size()) return p->w[i];
        i -= p->w.size();
    }
    throw ValidationError("parameter index out of range");
}

double Trainer::grad(size_t i) const {
    for (const P* p : all_params()) {
        if (i < p->g.size()) return p->g[i];
        i -= p->g.size();
    }
    throw ValidationError("gradient index out of range");
}

void Trainer::zero_grads() {
    for (P* p : all_params())
        for (auto& g : p->g) g = 0.0;
}

double Trainer::forward(std::span<const int> tokens, Cache* cc) {
    if (tokens.size() < 2) throw ValidationError("training sample needs at least two tokens");
    const int T = int(tokens.size());
    const int d = cfg_.d_model, f = cfg_.d_ff, V = cfg_.vocab_size;
    const int H = cfg_.n_heads, hd = cfg_.head_dim();
    if (T > cfg_.max_seq_len) throw ValidationError("training sample longer than max_seq_len");
    for (int t : tokens)
        if (t < 0 || t >= V) throw ValidationError("token id out of range in training sample");

    cc->T = T;
    cc->layers.resize(layers_.size());
    std::vector<double> x(size_t(T) * d);
    for (int t = 0; t < T; ++t) {
        const double* e = embed_.row(tokens[t]);
        for (int i = 0; i < d; ++i) x[size_t(t) * d + i] = e[i];
    }

    const double inv_sqrt_hd = 1.0 / std::sqrt(double(hd));
    for (size_t li = 0; li < layers_.size(); ++li) {
        auto& L = layers_[li];
        auto& C = cc->layers[li];
        C.x0 = x;
        C.h1.assign(size_t(T) * d, 0);
        C.r1.resize(T);
        for (int t = 0; t < T; ++t)
            C.r1[t] = rms_forward(&C.x0[size_t(t) * d], L.attn_norm.w.data(),
                                  &C.h1[size_t(t) * d], d, cfg_.norm_eps);

        C.qr.assign(size_t(T) * d, 0);
        C.kr.assign(size_t(T) * d, 0);
        C.v.assign(size_t(T) * d, 0);
        for (int t = 0; t < T; ++t) {
            const double* h = &C.h1[size_t(t) * d];
            for (int i = 0; i < d; ++i) {
                double q = 0, k = 0, vv = 0;
                const double* wq = L.wq.row(i);
                const double* wk = L.wk.row(i);
                const double* wv = L.wv.row(i);
                for (int j = 0; j < d; ++j) {
                    q += wq[j] * h[j];
                    k += wk[j] * h[j];
                    vv += wv[j] * h[j];
                }
                C.qr[size_t(t) * d + i] = q;
                C.kr[size_t(t) * d + i] = k;
                C.v[size_t(t) * d + i] = vv;
            }
            // rotary positions, pairwise within each head
            for (int h0 = 0; h0 < H; ++h0) {
                double* qh = &C.qr[size_t(t) * d + size_t(h0) * hd];
                double* kh = &C.kr[size_t(t) * d + size_t(h0) * hd];
                for (int p = 0; p < hd / 2; ++p) {
                    double ang = t * std::pow(double(cfg_.rope_base), -2.0 * p / hd);
                    double cs = std::cos(ang), sn = std::sin(ang);
                    double q0 = qh[2 * p], q1 = qh[2 * p + 1];
                    qh[2 * p] = q0 * cs - q1 * sn;
                    qh[2 * p + 1] = q0 * sn + q1 * cs;
                    double k0 = kh[2 * p], k1 = kh[2 * p + 1];
                    kh[2 * p] = k0 * cs - k1 * sn;
                    kh[2 * p + 1] = k0 * sn + k1 * cs;
                }
            }
        }

        C.probs.assign(size_t(H) * T * T, 0);
        C.att.assign(size_t(T) * d, 0);
        std::vector<double> scores(T);
        for (int h0 = 0; h0 < H; ++h0) {
            for (int t = 0; t < T; ++t) {
                const double* qh = &C.qr[size_t(t) * d + size_t(h0) * hd];
                double mx = -1e300;
                for (int u = 0; u <= t; ++u) {
                    const double* kh = &C.kr[size_t(u) * d + size_t(h0) * hd];
                    double s = 0;
                    for (int i = 0; i < hd; ++i) s += qh[i] * kh[i];
                    scores[u] = s * inv_sqrt_hd;
                    mx = std::max(mx, scores[u]);
                }
                double Z = 0;
                for (int u = 0; u <= t; ++u) Z += std::exp(scores[u] - mx);
                double* pr = &C.probs[(size_t(h0) * T + t) * T];
                double* at = &C.att[size_t(t) * d + size_t(h0) * hd];
                for (int u = 0; u <= t; ++u) {
                    double p = std::exp(scores[u] - mx) / Z;
                    pr[u] = p;
                    const double* vh = &C.v[size_t(u) * d + size_t(h0) * hd];
                    for (int i = 0; i < hd; ++i) at[i] += p * vh[i];
                }
            }
        }

        C.x1.assign(size_t(T) * d, 0);
        for (int t = 0; t < T; ++t) {
            const double* at = &C.att[size_t(t) * d];
            double* xo = &C.x1[size_t(t) * d];
            const double* xi = &C.x0[size_t(t) * d];
            for (int i = 0; i < d; ++i) {
                double s = 0;
                const double* wo = L.wo.row(i);
                for (int j = 0; j < d; ++j) s += wo[j] * at[j];
                xo[i] = xi[i] + s;
            }
        }

        C.h2.assign(size_t(T) * d, 0);
        C.r2.resize(T);
        for (int t = 0; t < T; ++t)
            C.r2[t] = rms_forward(&C.x1[size_t(t) * d], L.ffn_norm.w.data(),
                                  &C.h2[size_t(t) * d], d, cfg_.norm_eps);

        C.gpre.assign(size_t(T) * f, 0);
        C.up.assign(size_t(T) * f, 0);
        C.act.assign(size_t(T) * f, 0);
        for (int t = 0; t < T; ++t) {
            const double* h = &C.h2[size_t(t) * d];
            for (int j = 0; j < f; ++j) {
                double g = 0, u = 0;
                const double* wg = L.w_gate.row(j);
                const double* wu = L.w_up.row(j);
                for (int i = 0; i < d; ++i) {
                    g += wg[i] * h[i];
                    u += wu[i] * h[i];
                }
                C.gpre[size_t(t) * f + j] = g;
                C.up[size_t(t) * f + j] = u;
                C.act[size_t(t) * f + j] = g / (1.0 + std::exp(-g)) * u;
            }
        }
        for (int t = 0; t < T; ++t) {
            const double* a = &C.act[size_t(t) * f];
            double* xo = &x[size_t(t) * d];
            const double* xi = &C.x1[size_t(t) * d];
            for (int i = 0; i < d; ++i) {
                double s = 0;
                const double* wd = L.w_down.row(i);
                for (int j = 0; j < f; ++j) s += wd[j] * a[j];
                xo[i] = xi[i] + s;
            }
        }
    }

    cc->xfinal = x;
    cc->hn.assign(size_t(T) * d, 0);
    cc->rF.resize(T);
    for (int t = 0; t < T; ++t)
        cc->rF[t] = rms_forward(&cc->xfinal[size_t(t) * d], final_norm_.w.data(),
                                &cc->hn[size_t(t) * d], d, cfg_.norm_eps);

    cc->logits.assign(size_t(T) * V, 0);
    cc->sm.assign(size_t(T) * V, 0);
    double loss = 0;
    const int n_pred = T - 1;
    for (int t = 0; t < T; ++t) {
        const double* h = &cc->hn[size_t(t) * d];
        double* lg = &cc->logits[size_t(t) * V];
        for (int i = 0; i < V; ++i) {
            double s = 0;
            const double* w = unembed_.row(i);
            for (int j = 0; j < d; ++j) s += w[j] * h[j];
            lg[i] = s;
        }
        double mx = lg[0];
        for (int i = 1; i < V; ++i) mx = std::max(mx, lg[i]);
        double Z = 0;
        for (int i = 0; i < V; ++i) Z += std::exp(lg[i] - mx);
        double* p = &cc->sm[size_t(t) * V];
        for (int i = 0; i < V; ++i) p[i] = std::exp(lg[i] - mx) / Z;
        if (t < n_pred) loss -= std::log(std::max(p[tokens[t + 1]], 1e-300));
    }
    return loss / n_pred;
}

void Trainer::backward(std::span<const int> tokens, const Cache& cc, double weight) {
    const int T = cc.T;
    const int d = cfg_.d_model, f = cfg_.d_ff, V = cfg_.vocab_size;
    const int H = cfg_.n_heads, hd = cfg_.head_dim();
    const int n_pred = T - 1;
    const double inv_sqrt_hd = 1.0 / std::sqrt(double(hd));

    // dlogits -> unembed + final norm
    std::vector<double> dx(size_t(T) * d, 0);
    std::vector<double> dh(d);
    for (int t = 0; t < n_pred; ++t) {
        const double* p = &cc.sm[size_t(t) * V];
        const double* h = &cc.hn[size_t(t) * d];
        std::fill(dh.begin(), dh.end(), 0.0);
        int tgt = tokens[t + 1];
        for (int i = 0; i < V; ++i) {
            double dlg = (p[i] - (i == tgt ? 1.0 : 0.0)) * weight / n_pred;
            if (dlg == 0.0) continue;
            double* gw = unembed_.grow(i);
            const double* w = unembed_.row(i);
            for (int j = 0; j < d; ++j) {
                gw[j] += dlg * h[j];
                dh[j] += dlg * w[j];
            }
        }
        rms_backward(&cc.xfinal[size_t(t) * d], final_norm_.w.data(), dh.data(), cc.rF[t], d,
                     &dx[size_t(t) * d], final_norm_.g.data());
    }

    std::vector<double> dact(f), dh2(d), datt(size_t(T) * d), dqr(size_t(T) * d),
        dkr(size_t(T) * d), dv(size_t(T) * d), dh1(d);
    for (int li = int(layers_.size()) - 1; li >= 0; --li) {
        auto& L = layers_[li];
        const auto& C = cc.layers[li];

        // FFN: x2 = x1 + w_down . act(h2)
        std::vector<double> dx1(size_t(T) * d, 0);
        for (int t = 0; t < T; ++t) {
            const double* dxt = &dx[size_t(t) * d];
            const double* a = &C.act[size_t(t) * f];
            std::fill(dact.begin(), dact.end(), 0.0);
            for (int i = 0; i < d; ++i) {
                double g = dxt[i];
                if (g == 0.0) continue;
                double* gw = L.w_down.grow(i);
                const double* w = L.w_down.row(i);
                for (int j = 0; j < f; ++j) {
                    gw[j] += g * a[j];
                    dact[j] += g * w[j];
                }
            }
            std::fill(dh2.begin(), dh2.end(), 0.0);
            const double* h2 = &C.h2[size_t(t) * d];
            for (int j = 0; j < f; ++j) {
                double gp = C.gpre[size_t(t) * f + j];
                double silu_g = gp / (1.0 + std::exp(-gp));
                double dgp = dact[j] * C.up[size_t(t) * f + j] * dsilu(gp);
                double dup = dact[j] * silu_g;
                double* gg = L.w_gate.grow(j);
                double* gu = L.w_up.grow(j);
                const double* wg = L.w_gate.row(j);
                const double* wu = L.w_up.row(j);
                for (int i = 0; i < d; ++i) {
                    gg[i] += dgp * h2[i];
                    gu[i] += dup * h2[i];
                    dh2[i] += dgp * wg[i] + dup * wu[i];
                }
            }
            // residual skip plus the norm path
            double* dx1t = &dx1[size_t(t) * d];
            for (int i = 0; i < d; ++i) dx1t[i] += dxt[i];
            rms_backward(&C.x1[size_t(t) * d], L.ffn_norm.w.data(), dh2.data(), C.r2[t], d, dx1t,
                         L.ffn_norm.g.data());
        }

        // attention output: x1 = x0 + wo . att
        std::fill(datt.begin(), datt.end(), 0.0);
        std::vector<double> dx0(size_t(T) * d, 0);
        for (int t = 0; t < T; ++t) {
            const double* dxt = &dx1[size_t(t) * d];
            const double* at = &C.att[size_t(t) * d];
            double* da = &datt[size_t(t) * d];
            for (int i = 0; i < d; ++i) {
                double g = dxt[i];
                if (g == 0.0) continue;
                double* gw = L.wo.grow(i);
                const double* w = L.wo.row(i);
                for (int j = 0; j < d; ++j) {
                    gw[j] += g * at[j];
                    da[j] += g * w[j];
                }
            }
            for (int i = 0; i < d; ++i) dx0[size_t(t) * d + i] += dxt[i];
        }

        // attention core
        std::fill(dqr.begin(), dqr.end(), 0.0);
        std::fill(dkr.begin(), dkr.end(), 0.0);
        std::fill(dv.begin(), dv.end(), 0.0);
        std::vector<double> dprobs(T);
        for (int h0 = 0; h0 < H; ++h0) {
            for (int t = 0; t < T; ++t) {
                const double* da = &datt[size_t(t) * d + size_t(h0) * hd];
                const double* pr = &C.probs[(size_t(h0) * T + t) * T];
                double dot_pd = 0;
                for (int u = 0; u <= t; ++u) {
                    const double* vh = &C.v[size_t(u) * d + size_t(h0) * hd];
                    double s = 0;
                    for (int i = 0; i < hd; ++i) s += da[i] * vh[i];
                    dprobs[u] = s;
                    dot_pd += pr[u] * s;
                    double* dvh = &dv[size_t(u) * d + size_t(h0) * hd];
                    for (int i = 0; i < hd; ++i) dvh[i] += pr[u] * da[i];
                }
                const double* qh = &C.qr[size_t(t) * d + size_t(h0) * hd];
                double* dqh = &dqr[size_t(t) * d + size_t(h0) * hd];
                for (int u = 0; u <= t; ++u) {
                    double ds = pr[u] * (dprobs[u] - dot_pd) * inv_sqrt_hd;
                    if (ds == 0.0) continue;
                    const double* kh = &C.kr[size_t(u) * d + size_t(h0) * hd];
                    double* dkh = &dkr[size_t(u) * d + size_t(h0) * hd];
                    for (int i = 0; i < hd; ++i) {
                        dqh[i] += ds * kh[i];
                        dkh[i] += ds * qh[i];
                    }
                }
            }
        }

        // undo rotation, then project back through wq/wk/wv
        for (int t = 0; t < T; ++t) {
            for (int h0 = 0; h0 < H; ++h0) {
                double* dqh = &dqr[size_t(t) * d + size_t(h0) * hd];
                double* dkh = &dkr[size_t(t) * d + size_t(h0) * hd];
                for (int p = 0; p < hd / 2; ++p) {
                    double ang = t * std::pow(double(cfg_.rope_base), -2.0 * p / hd);
                    double cs = std::cos(ang), sn = std::sin(ang);
                    double a = dqh[2 * p], b = dqh[2 * p + 1];
                    dqh[2 * p] = a * cs + b * sn;
                    dqh[2 * p + 1] = -a * sn + b * cs;
                    a = dkh[2 * p];
                    b = dkh[2 * p + 1];
                    dkh[2 * p] = a * cs + b * sn;
                    dkh[2 * p + 1] = -a * sn + b * cs;
                }
            }
            const double* h1 = &C.h1[size_t(t) * d];
            std::fill(dh1.begin(), dh1.end(), 0.0);
            for (int i = 0; i < d; ++i) {
                double gq = dqr[size_t(t) * d + i];
                double gk = dkr[size_t(t) * d + i];
                double gv = dv[size_t(t) * d + i];
                double* gwq = L.wq.grow(i);
                double* gwk = L.wk.grow(i);
                double* gwv = L.wv.grow(i);
                const double* wq = L.wq.row(i);
                const double* wk = L.wk.row(i);
                const double* wv = L.wv.row(i);
                for (int j = 0; j < d; ++j) {
                    gwq[j] += gq * h1[j];
                    gwk[j] += gk * h1[j];
                    gwv[j] += gv * h1[j];
                    dh1[j] += gq * wq[j] + gk * wk[j] + gv * wv[j];
                }
            }
            rms_backward(&C.x0[size_t(t) * d], L.attn_norm.w.data(), dh1.data(), C.r1[t], d,
                         &dx0[size_t(t) * d], L.attn_norm.g.data());
        }
        dx = std::move(dx0);
    }

    for (int t = 0; t < T; ++t) {
        double* ge = embed_.grow(tokens[t]);
        const double* dxt = &dx[size_t(t) * d];
        for (int i = 0; i < d; ++i) ge[i] += dxt[i];
    }
}

double Trainer::loss(std::span<const int> tokens) {
    Cache cc;
    return forward(tokens, &cc);
}

double Trainer::backward_batch(const std::vector<std::vector<int>>& batch) {
    if (batch.empty()) throw ValidationError("empty training batch");
    Cache cc;
    double total = 0;
    double w = 1.0 / batch.size();
    for (const auto& sample : batch) {
        total += forward(sample, &cc) * w;
        backward(sample, cc, w);
    }
    return total;
}

void Trainer::adam_step(double lr, double beta1, double beta2, double eps, int t) {
    double bc1 = 1.0 - std::pow(beta1, t);
    double bc2 = 1.0 - std::pow(beta2, t);
    for (P* p : all_params()) {
        for (size_t i = 0; i < p->w.size(); ++i) {
            double g = p->g[i];
            p->m[i] = beta1 * p->m[i] + (1.0 - beta1) * g;
            p->v[i] = beta2 * p->v[i] + (1.0 - beta2) * g * g;
            double mhat = p->m[i] / bc1;
            double vhat = p->v[i] / bc2;
            p->w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

std::vector<double> Trainer::reference_logits(std::span<const int> tokens) {
    Cache cc;
    forward(tokens, &cc);
    return cc.logits;
}

TrainResult train_tiny(const TrainConfig& cfg, const Corpus& corpus) {
    if (cfg.steps < 1) throw ValidationError("train: steps must be positive");
    if (cfg.batch < 1) throw ValidationError("train: batch must be positive");
    if (cfg.seq_len < 2) throw ValidationError("train: seq_len must be at least 2");
    if (cfg.seq_len + 1 > cfg.model.max_seq_len)
        throw ValidationError("train: seq_len + 1 exceeds model max_seq_len");
    if (corpus.docs.empty()) throw ValidationError("train: empty corpus");

    // one contiguous token stream per language: [bos] doc [eos] ...
    std::vector<std::vector<int>> streams;
    for (const auto& [lid, docs] : corpus.docs) {
        std::vector<int> s;
        for (const auto& doc : docs) {
            s.push_back(tok::kBos);
            for (unsigned char b : doc) s.push_back(b);
            s.push_back(tok::kEos);
        }
        if (int(s.size()) < cfg.seq_len + 1)
            throw ValidationError("train: language " + lid +
                                  " has fewer tokens than one training sample");
        streams.push_back(std::move(s));
    }

    Trainer tr(cfg.model, cfg.seed);
    Rng rng(splitmix64(cfg.seed ^ 0x62617463686573ull));
    TrainResult out;
    out.loss_curve.reserve(cfg.steps);

    std::vector<std::vector<int>> batch(cfg.batch);
    const int warmup = std::max(1, std::min(cfg.warmup, cfg.steps));
    for (int step = 0; step < cfg.steps; ++step) {
        for (int b = 0; b < cfg.batch; ++b) {
            const auto& s = streams[(size_t(step) * cfg.batch + b) % streams.size()];
            size_t off = rng.below(uint64_t(s.size() - cfg.seq_len));
            batch[b].assign(s.begin() + off, s.begin() + off + cfg.seq_len + 1);
        }
        tr.zero_grads();
        double loss = tr.backward_batch(batch);
        if (!std::isfinite(loss))
            throw RuntimeError("training loss became non-finite at step " + std::to_string(step));

        double lr;
        if (step < warmup) {
            lr = cfg.lr * (step + 1) / warmup;
        } else {
            double prog = double(step - warmup) / std::max(1, cfg.steps - warmup);
            lr = cfg.lr * (0.1 + 0.9 * 0.5 * (1.0 + std::cos(prog * 3.14159265358979323846)));
        }
        tr.adam_step(lr, cfg.beta1, cfg.beta2, cfg.adam_eps, step + 1);

        out.loss_curve.push_back(loss);
        if (step == 0) out.initial_loss = loss;
        out.final_loss = loss;
    }
    out.ckpt = tr.to_checkpoint();
    return out;
}

}  // namespace natlas
