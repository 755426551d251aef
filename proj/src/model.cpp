#include "natlas/model.hpp"

#include <cmath>
#include <cstring>

#include "natlas/common.hpp"
#include "natlas/tokenizer.hpp"

namespace natlas {

void ModelConfig::validate() const {
    auto bad = [](const std::string& what) { throw ValidationError("model config: " + what); };
    if (n_layers < 1) bad("n_layers must be >= 1");
    if (d_model < 1) bad("d_model must be >= 1");
    if (n_heads < 1) bad("n_heads must be >= 1");
    if (d_model % n_heads != 0) bad("d_model must be divisible by n_heads");
    if (head_dim() % 2 != 0) bad("head dim must be even for rotary embedding");
    if (d_ff < 1) bad("d_ff must be >= 1");
    if (vocab_size < 1) bad("vocab_size must be >= 1");
    if (max_seq_len < 1) bad("max_seq_len must be >= 1");
    if (!(norm_eps > 0)) bad("norm_eps must be > 0");
    if (!(rope_base > 0)) bad("rope_base must be > 0");
}

Checkpoint Checkpoint::zeros(const ModelConfig& cfg) {
    cfg.validate();
    Checkpoint c;
    c.config = cfg;
    c.tok_embed = Mat(cfg.vocab_size, cfg.d_model);
    c.layers.resize(cfg.n_layers);
    for (auto& l : c.layers) {
        l.attn_norm.assign(cfg.d_model, 1.f);
        l.wq = Mat(cfg.d_model, cfg.d_model);
        l.wk = Mat(cfg.d_model, cfg.d_model);
        l.wv = Mat(cfg.d_model, cfg.d_model);
        l.wo = Mat(cfg.d_model, cfg.d_model);
        l.ffn_norm.assign(cfg.d_model, 1.f);
        l.w_gate = Mat(cfg.d_ff, cfg.d_model);
        l.w_up = Mat(cfg.d_ff, cfg.d_model);
        l.w_down = Mat(cfg.d_model, cfg.d_ff);
    }
    c.final_norm.assign(cfg.d_model, 1.f);
    c.unembed = Mat(cfg.vocab_size, cfg.d_model);
    return c;
}

const char* mode_name(TapDirective::Mode m) {
    switch (m) {
        case TapDirective::Mode::add: return "add";
        case TapDirective::Mode::multiply: return "multiply";
        case TapDirective::Mode::set: return "set";
    }
    return "?";
}

TapDirective TapDirective::add_sparse(int layer, std::vector<int> neurons,
                                      std::vector<float> values) {
    return {layer, Mode::add, std::move(neurons), std::move(values)};
}
TapDirective TapDirective::add_dense(int layer, std::vector<float> values) {
    return {layer, Mode::add, {}, std::move(values)};
}
TapDirective TapDirective::mul(int layer, std::vector<int> neurons, float scalar) {
    return {layer, Mode::multiply, std::move(neurons), {scalar}};
}
TapDirective TapDirective::set(int layer, std::vector<int> neurons, float value) {
    return {layer, Mode::set, std::move(neurons), {value}};
}
TapDirective TapDirective::set_dense(int layer, std::vector<float> values) {
    return {layer, Mode::set, {}, std::move(values)};
}

void validate_directives(const ModelConfig& cfg, std::span<const TapDirective> ds) {
    for (size_t i = 0; i < ds.size(); i++) {
        const auto& d = ds[i];
        auto bad = [&](const std::string& what) {
            throw ValidationError("directive " + std::to_string(i) + " (" + mode_name(d.mode) +
                                  ", layer " + std::to_string(d.layer) + "): " + what);
        };
        if (d.layer < 0 || d.layer >= cfg.n_layers) bad("layer out of range");
        for (int n : d.neurons)
            if (n < 0 || n >= cfg.d_ff) bad("neuron index " + std::to_string(n) + " out of range");
        size_t targets = d.neurons.empty() ? size_t(cfg.d_ff) : d.neurons.size();
        if (d.mode == TapDirective::Mode::multiply) {
            if (d.values.size() != 1) bad("multiply takes a single scalar");
        } else if (d.values.size() != 1 && d.values.size() != targets) {
            bad("values must be a scalar or match the target count");
        }
    }
}

InferenceSession::InferenceSession(const Checkpoint& ckpt,
                                   std::span<const TapDirective> directives, int max_positions)
    : m_(ckpt) {
    const ModelConfig& c = m_.config;
    c.validate();
    validate_directives(c, directives);
    if (int(m_.layers.size()) != c.n_layers) throw ValidationError("checkpoint layer count mismatch");
    cap_ = max_positions > 0 ? std::min(max_positions, c.max_seq_len) : c.max_seq_len;
    directives_.assign(directives.begin(), directives.end());
    kcache_.assign(c.n_layers, Mat(cap_, c.d_model));
    vcache_.assign(c.n_layers, Mat(cap_, c.d_model));
    taps_.assign(c.n_layers, Mat(cap_, c.d_ff));
    hidden_.assign(c.n_layers, Mat(cap_, c.d_model));
    x_.resize(c.d_model);
    xb_.resize(c.d_model);
    q_.resize(c.d_model);
    k_.resize(c.d_model);
    v_.resize(c.d_model);
    att_.resize(cap_);
    tap_.resize(c.d_ff);
    logits_.resize(c.vocab_size);
}

void InferenceSession::apply_taps(int layer, float* tap) {
    auto run = [&](TapDirective::Mode mode) {
        for (const auto& d : directives_) {
            if (d.layer != layer || d.mode != mode) continue;
            size_t n = d.neurons.empty() ? size_t(m_.config.d_ff) : d.neurons.size();
            bool scalar = d.values.size() == 1;
            for (size_t i = 0; i < n; i++) {
                int j = d.neurons.empty() ? int(i) : d.neurons[i];
                float val = scalar ? d.values[0] : d.values[i];
                switch (mode) {
                    case TapDirective::Mode::multiply: tap[j] *= val; break;
                    case TapDirective::Mode::add: tap[j] += val; break;
                    case TapDirective::Mode::set: tap[j] = val; break;
                }
            }
        }
    };
    run(TapDirective::Mode::multiply);
    run(TapDirective::Mode::add);
    run(TapDirective::Mode::set);
}

const float* InferenceSession::step(int token) {
    const ModelConfig& c = m_.config;
    if (token < 0 || token >= c.vocab_size)
        throw ValidationError("token id " + std::to_string(token) + " out of range");
    if (pos_ >= cap_) throw RuntimeError("sequence exceeds max_seq_len");
    int pos = pos_;
    int hd = c.head_dim();
    std::memcpy(x_.data(), m_.tok_embed.row(token), sizeof(float) * c.d_model);

    for (int l = 0; l < c.n_layers; l++) {
        const LayerWeights& w = m_.layers[l];
        // attention
        rmsnorm(x_.data(), w.attn_norm.data(), xb_.data(), c.d_model, c.norm_eps);
        matvec(w.wq, xb_.data(), q_.data());
        matvec(w.wk, xb_.data(), k_.data());
        matvec(w.wv, xb_.data(), v_.data());
        // rotary embedding on q and k, pairwise within each head
        for (int h = 0; h < c.n_heads; h++) {
            float* qh = q_.data() + h * hd;
            float* kh = k_.data() + h * hd;
            for (int i = 0; i < hd; i += 2) {
                double freq = std::pow(double(c.rope_base), -double(i) / double(hd));
                double ang = double(pos) * freq;
                float cs = float(std::cos(ang)), sn = float(std::sin(ang));
                float q0 = qh[i], q1 = qh[i + 1];
                qh[i] = q0 * cs - q1 * sn;
                qh[i + 1] = q0 * sn + q1 * cs;
                float k0 = kh[i], k1 = kh[i + 1];
                kh[i] = k0 * cs - k1 * sn;
                kh[i + 1] = k0 * sn + k1 * cs;
            }
        }
        std::memcpy(kcache_[l].row(pos), k_.data(), sizeof(float) * c.d_model);
        std::memcpy(vcache_[l].row(pos), v_.data(), sizeof(float) * c.d_model);
        float inv_sqrt = 1.f / std::sqrt(float(hd));
        for (int h = 0; h < c.n_heads; h++) {
            const float* qh = q_.data() + h * hd;
            for (int t = 0; t <= pos; t++)
                att_[t] = dotf(qh, kcache_[l].row(t) + h * hd, hd) * inv_sqrt;
            softmax_inplace(att_.data(), pos + 1);
            float* out = xb_.data() + h * hd;
            std::memset(out, 0, sizeof(float) * hd);
            for (int t = 0; t <= pos; t++) {
                const float* vh = vcache_[l].row(t) + h * hd;
                float a = att_[t];
                for (int i = 0; i < hd; i++) out[i] += a * vh[i];
            }
        }
        matvec(w.wo, xb_.data(), v_.data());  // reuse v_ as scratch
        for (int i = 0; i < c.d_model; i++) x_[i] += v_[i];

        // gated FFN with tap
        rmsnorm(x_.data(), w.ffn_norm.data(), xb_.data(), c.d_model, c.norm_eps);
        for (int j = 0; j < c.d_ff; j++) {
            float g = dotf(w.w_gate.row(j), xb_.data(), c.d_model);
            float u = dotf(w.w_up.row(j), xb_.data(), c.d_model);
            tap_[j] = silu(g) * u;
        }
        apply_taps(l, tap_.data());
        std::memcpy(taps_[l].row(pos), tap_.data(), sizeof(float) * c.d_ff);
        for (int i = 0; i < c.d_model; i++) x_[i] += dotf(m_.layers[l].w_down.row(i), tap_.data(), c.d_ff);
        std::memcpy(hidden_[l].row(pos), x_.data(), sizeof(float) * c.d_model);
    }

    rmsnorm(x_.data(), m_.final_norm.data(), xb_.data(), c.d_model, c.norm_eps);
    matvec(m_.unembed, xb_.data(), logits_.data());
    pos_++;
    return logits_.data();
}

ForwardResult forward(const Checkpoint& ckpt, std::span<const int> tokens,
                      std::span<const TapDirective> directives) {
    if (tokens.empty()) throw ValidationError("forward: empty token sequence");
    InferenceSession s(ckpt, directives, int(tokens.size()));
    ForwardResult r;
    int T = int(tokens.size());
    const ModelConfig& c = ckpt.config;
    r.logits = Mat(T, c.vocab_size);
    for (int t = 0; t < T; t++) {
        const float* lg = s.step(tokens[t]);
        std::memcpy(r.logits.row(t), lg, sizeof(float) * c.vocab_size);
    }
    r.taps.reserve(c.n_layers);
    r.hidden.reserve(c.n_layers);
    for (int l = 0; l < c.n_layers; l++) {
        Mat tp(T, c.d_ff), hd(T, c.d_model);
        std::memcpy(tp.v.data(), s.taps(l).v.data(), tp.v.size() * sizeof(float));
        std::memcpy(hd.v.data(), s.hidden(l).v.data(), hd.v.size() * sizeof(float));
        r.taps.push_back(std::move(tp));
        r.hidden.push_back(std::move(hd));
    }
    return r;
}

GenResult generate(const Checkpoint& ckpt, std::span<const int> prompt,
                   std::span<const TapDirective> directives, const GenSettings& gs) {
    if (prompt.empty()) throw ValidationError("generate: empty prompt");
    if (gs.max_tokens < 0) throw ValidationError("generate: max_tokens must be >= 0");
    if (gs.temperature < 0) throw ValidationError("generate: temperature must be >= 0");
    if (gs.repetition_penalty <= 0) throw ValidationError("generate: repetition_penalty must be > 0");
    const ModelConfig& c = ckpt.config;
    InferenceSession s(ckpt, directives);
    std::vector<char> seen(c.vocab_size, 0);  // prompt + generated (vLLM convention)
    const float* lg = nullptr;
    for (int t : prompt) {
        lg = s.step(t);
        if (t >= 0 && t < c.vocab_size) seen[t] = 1;
    }
    std::vector<float> logits(c.vocab_size);
    Rng rng(gs.seed);
    GenResult out;
    // prompt + generated never exceeds the context window
    int budget = std::min(gs.max_tokens, c.max_seq_len - int(prompt.size()));
    for (int n = 0; n < budget; n++) {
        std::memcpy(logits.data(), lg, sizeof(float) * c.vocab_size);
        if (gs.repetition_penalty != 1.f) {
            for (int t = 0; t < c.vocab_size; t++) {
                if (!seen[t]) continue;
                if (logits[t] > 0) logits[t] /= gs.repetition_penalty;
                else logits[t] *= gs.repetition_penalty;
            }
        }
        int next;
        if (gs.temperature == 0.f) {
            next = 0;
            for (int t = 1; t < c.vocab_size; t++)
                if (logits[t] > logits[next]) next = t;
        } else {
            for (int t = 0; t < c.vocab_size; t++) logits[t] /= gs.temperature;
            softmax_inplace(logits.data(), c.vocab_size);
            double u = rng.uniform(), acc = 0;
            next = c.vocab_size - 1;
            for (int t = 0; t < c.vocab_size; t++) {
                acc += logits[t];
                if (u < acc) { next = t; break; }
            }
        }
        bool stop = false;
        for (int sid : gs.stop_ids)
            if (next == sid) { stop = true; break; }
        if (stop) break;
        out.tokens.push_back(next);
        seen[next] = 1;
        if (n + 1 < budget) lg = s.step(next);
    }
    out.text = tok::detokenize(out.tokens);
    return out;
}

}  // namespace natlas
