#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "natlas/language.hpp"
#include "natlas/model.hpp"
#include "natlas/sketch.hpp"

namespace natlas {

// Fixed-point accumulator (2^-30 resolution, 128-bit). Integer addition is
// associative, so value sums come out identical no matter how a corpus is
// split and merged; a plain double fold would drift with the split point.
struct FixedSum {
    __int128 v = 0;

    void add(float x);
    void add(const FixedSum& o) { v += o.v; }
    double value() const;
    bool operator==(const FixedSum&) const = default;
};

struct AccumulateOptions {
    int context_len = 256;  // clamped to the model's max_seq_len
    int stride = 0;         // 0 = context_len (no overlap)
};

// Per (language, layer, neuron) activation statistics at the FFN tap.
// "Active" means tap > 0. Sums and sketches cover every tap value, signed.
struct ActivationStats {
    int n_layers = 0, d_ff = 0;
    std::vector<std::string> langs;  // sorted ids
    std::string provenance;          // checkpoint fingerprint + language ids
    int context_len = 0, stride = 0;
    std::vector<uint64_t> totals;          // tokens processed per language
    std::vector<uint64_t> active;          // [lang][layer*d_ff + j]
    std::vector<FixedSum> sums;            // same layout
    std::vector<QuantileSketch> sketches;  // same layout

    size_t n_neurons() const { return size_t(n_layers) * size_t(d_ff); }
    size_t idx(int lang, int layer, int j) const {
        return (size_t(lang) * n_layers + layer) * size_t(d_ff) + size_t(j);
    }
    int lang_index(const std::string& id) const;

    // activation probability; 0 when the language saw no tokens
    double prob(int lang, int layer, int j) const;
    // mean tap value over all tokens of the language
    double mean(int lang, int layer, int j) const;

    // Fails on mismatched shape, language set, or provenance.
    void merge(const ActivationStats& other);

    void save(const std::string& path) const;
    static ActivationStats load(const std::string& path);
    std::string serialize() const;
    static ActivationStats deserialize(const std::string& bytes);
};

std::string stats_provenance(const Checkpoint& ckpt, const std::vector<std::string>& sorted_langs);

// Runs the model over every document (no interventions) and tallies tap
// statistics per language. Documents are windowed to context_len with the
// given stride; overlapping windows count positions once per window.
ActivationStats accumulate(const Checkpoint& ckpt, const Corpus& corpus,
                           const std::vector<LanguageSpec>& specs,
                           const AccumulateOptions& opt = {});

}  // namespace natlas
