#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "natlas/language.hpp"
#include "natlas/model.hpp"

namespace natlas {

struct TrainConfig {
    ModelConfig model;
    int steps = 800;
    int batch = 8;
    int seq_len = 48;  // tokens per sample; targets are the shifted inputs
    double lr = 1.5e-3;
    double beta1 = 0.9, beta2 = 0.95, adam_eps = 1e-8;
    int warmup = 40;       // linear warmup steps, then cosine decay to lr/10
    uint64_t seed = 0;     // init + batch sampling
};

struct TrainResult {
    Checkpoint ckpt;
    std::vector<double> loss_curve;  // per step, mean next-token CE
    double initial_loss = 0, final_loss = 0;
};

// Next-token training on the concatenated per-language byte streams
// ([bos] doc [eos] per document). Deterministic for a fixed seed on one
// machine: all math in double, no threading, fixed sampling order.
// Throws RuntimeError naming the step if the loss stops being finite.
TrainResult train_tiny(const TrainConfig& cfg, const Corpus& corpus);

// Double-precision mirror of the inference model. Used by train_tiny and by
// tests: loss/gradients for finite-difference checks, and reference logits to
// cross-check the float32 inference path.
class Trainer {
public:
    Trainer(const ModelConfig& cfg, uint64_t seed);  // random init
    explicit Trainer(const Checkpoint& ckpt);        // widen an existing checkpoint

    const ModelConfig& config() const { return cfg_; }

    // Mean next-token cross-entropy of one sample (tokens.size() >= 2).
    double loss(std::span<const int> tokens);
    // Accumulates gradients of the mean batch loss; returns it.
    double backward_batch(const std::vector<std::vector<int>>& batch);
    void zero_grads();
    void adam_step(double lr, double beta1, double beta2, double eps, int t);

    Checkpoint to_checkpoint() const;
    // Logits of every position, row-major [tokens.size() x vocab].
    std::vector<double> reference_logits(std::span<const int> tokens);

    // Flat parameter/gradient access for finite-difference tests.
    size_t n_params() const;
    double& param(size_t i);
    double grad(size_t i) const;

private:
    struct P {  // one parameter tensor with grad + Adam state
        int rows = 0, cols = 0;
        std::vector<double> w, g, m, v;
        void init(int r, int c) { rows = r; cols = c; w.assign(size_t(r) * c, 0.0); g = m = v = w; }
        double* row(int r) { return w.data() + size_t(r) * cols; }
        const double* row(int r) const { return w.data() + size_t(r) * cols; }
        double* grow(int r) { return g.data() + size_t(r) * cols; }
    };
    struct Layer {
        P attn_norm, wq, wk, wv, wo, ffn_norm, w_gate, w_up, w_down;
    };

    ModelConfig cfg_;
    P embed_;
    std::vector<Layer> layers_;
    P final_norm_, unembed_;

    std::vector<P*> all_params();
    std::vector<const P*> all_params() const;

    // forward cache for one sample
    struct Cache;
    double forward(std::span<const int> tokens, Cache* cache);
    void backward(std::span<const int> tokens, const Cache& cache, double weight);
};

}  // namespace natlas
