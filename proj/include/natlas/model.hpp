#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "natlas/tensor.hpp"

namespace natlas {

struct ModelConfig {
    int n_layers = 0;
    int d_model = 0;
    int n_heads = 0;
    int d_ff = 0;
    int vocab_size = 0;
    int max_seq_len = 0;
    float norm_eps = 1e-5f;
    float rope_base = 10000.f;

    int head_dim() const { return d_model / n_heads; }
    void validate() const;  // throws ValidationError with the offending field
    bool operator==(const ModelConfig&) const = default;
};

struct LayerWeights {
    std::vector<float> attn_norm;  // [d_model]
    Mat wq, wk, wv, wo;            // [d_model, d_model]
    std::vector<float> ffn_norm;   // [d_model]
    Mat w_gate, w_up;              // [d_ff, d_model]
    Mat w_down;                    // [d_model, d_ff]
};

struct Checkpoint {
    ModelConfig config;
    Mat tok_embed;  // [vocab, d_model]
    std::vector<LayerWeights> layers;
    std::vector<float> final_norm;  // [d_model]
    Mat unembed;                    // [vocab, d_model]

    static Checkpoint zeros(const ModelConfig& cfg);
};

// Binary container: magic, length-prefixed JSON header (config + tensor
// table), then a raw little-endian float32 blob.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
// FNV-1a fingerprint of the serialized form; used for stats provenance.
std::string checkpoint_hash(const Checkpoint& ckpt);

// Intervention on the FFN tap a = silu(W_gate x) * (W_up x), applied before
// the down projection, at every sequence position. Empty `neurons` targets
// the whole tap (dense). `values` holds one value per targeted neuron or a
// single broadcast scalar; multiply always takes a single scalar.
// Directives are grouped by mode and applied multiply -> add -> set, in list
// order within a mode.
struct TapDirective {
    enum class Mode { add, multiply, set };
    int layer = 0;
    Mode mode = Mode::add;
    std::vector<int> neurons;
    std::vector<float> values;

    static TapDirective add_sparse(int layer, std::vector<int> neurons, std::vector<float> values);
    static TapDirective add_dense(int layer, std::vector<float> values);
    static TapDirective mul(int layer, std::vector<int> neurons, float scalar);
    static TapDirective set(int layer, std::vector<int> neurons, float value);
    static TapDirective set_dense(int layer, std::vector<float> values);
};

const char* mode_name(TapDirective::Mode m);

// Incremental decoder state: feed tokens one position at a time; logits for
// the newest position come back. Taps (post-intervention) and the post-block
// residual stream are recorded for every position so identification and the
// logit lens read the exact values the model used.
class InferenceSession {
public:
    InferenceSession(const Checkpoint& ckpt, std::span<const TapDirective> directives,
                     int max_positions = 0);
    // Processes one token; returns the logits row (vocab_size floats).
    const float* step(int token);
    int pos() const { return pos_; }
    const Mat& taps(int layer) const { return taps_[layer]; }      // [pos, d_ff]
    const Mat& hidden(int layer) const { return hidden_[layer]; }  // [pos, d_model]

private:
    const Checkpoint& m_;
    std::vector<TapDirective> directives_;
    int cap_, pos_ = 0;
    std::vector<Mat> kcache_, vcache_;  // per layer, [cap, d_model]
    std::vector<Mat> taps_, hidden_;
    std::vector<float> x_, xb_, q_, k_, v_, att_, tap_, logits_;
    void apply_taps(int layer, float* tap);
};

struct ForwardResult {
    Mat logits;               // [seq, vocab]
    std::vector<Mat> taps;    // per layer [seq, d_ff]
    std::vector<Mat> hidden;  // per layer [seq, d_model], residual after block
};

ForwardResult forward(const Checkpoint& ckpt, std::span<const int> tokens,
                      std::span<const TapDirective> directives = {});

struct GenSettings {
    int max_tokens = 256;
    float temperature = 0.f;          // 0 = greedy argmax, lowest index on ties
    float repetition_penalty = 1.f;   // >1 discourages tokens already seen
    std::vector<int> stop_ids;        // stop before emitting any of these
    uint64_t seed = 0;                // sampling stream when temperature > 0
};

struct GenResult {
    std::vector<int> tokens;  // generated only, stop id excluded
    std::string text;         // detokenized bytes
};

GenResult generate(const Checkpoint& ckpt, std::span<const int> prompt,
                   std::span<const TapDirective> directives, const GenSettings& gs);

void validate_directives(const ModelConfig& cfg, std::span<const TapDirective> directives);

}  // namespace natlas
