#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "natlas/stats.hpp"

namespace natlas {

// Entropy of a normalized activation-probability vector. Zero terms drop out
// (0 * ln 0 = 0). An all-zero vector maps to ln(n), the maximum, so dead
// neurons sort last; callers flag them separately.
double lape_entropy(std::span<const double> p);

// Nearest-rank percentile: rank = ceil(pct/100 * n), 1-based.
double nearest_rank_percentile(std::vector<double> values, double pct);

struct LapeTable {
    int n_layers = 0, d_ff = 0;
    std::vector<std::string> langs;
    std::string provenance;
    std::vector<std::vector<double>> p;       // [neuron][lang], raw probabilities
    std::vector<std::vector<double>> p_norm;  // rows sum to 1 (or 0 if inactive)
    std::vector<std::vector<double>> mean;    // mean tap values (value-filter variant)
    std::vector<double> entropy;
    std::vector<uint8_t> inactive;
    // filled by select():
    std::vector<uint8_t> passed_filter;
    std::vector<std::vector<uint8_t>> passed_threshold;  // [neuron][lang]

    size_t n_neurons() const { return size_t(n_layers) * size_t(d_ff); }
    int layer_of(size_t flat) const { return int(flat / size_t(d_ff)); }
    int neuron_of(size_t flat) const { return int(flat % size_t(d_ff)); }
};

LapeTable compute_lape(const ActivationStats& stats);

struct SelectOptions {
    double k_percent = 1.0;
    double filter_percentile = 95.0;
    double threshold_percentile = 95.0;
    bool filter_on_values = false;  // default filters on probabilities
};

struct NeuronSet {
    std::string lang;
    std::vector<std::pair<int, int>> neurons;  // sorted (layer, neuron)
};

struct SelectionResult {
    int schema_version = 1;
    std::string provenance;
    double k_percent = 0, filter_percentile = 0, threshold_percentile = 0;
    std::string filter_population;  // "prob" or "value"
    size_t quota = 0;               // floor(k/100 * n_neurons)
    size_t kept = 0;                // after tie extension at the cutoff entropy
    double entropy_cutoff = 0;      // entropy of the last kept neuron (0 if none)
    double filter_cutoff = 0;
    std::map<std::string, double> thresholds;
    std::map<std::string, NeuronSet> sets;
    std::vector<std::pair<int, int>> kept_neurons;  // sorted (layer, neuron)
    std::vector<int> multiplicity;  // index m: kept neurons with m languages
    int unassigned = 0;

    std::string to_json() const;
    static SelectionResult from_json(const std::string& text);
    void save(const std::string& path) const;
    static SelectionResult load(const std::string& path);
};

// Bottom-k% by entropy among neurons passing the filter gate, tie-inclusive
// at the cutoff so equal-entropy neurons are never split arbitrarily; then
// per-language assignment by the activation-probability threshold gate.
// Annotates `table` with the gate flags.
SelectionResult select(LapeTable& table, const SelectOptions& opt);

struct OverlapMatrix {
    std::vector<std::string> langs;
    std::vector<std::vector<int>> count;  // |set_i intersect set_j|
};

OverlapMatrix overlap_matrix(const SelectionResult& sel);

// Per-language layer distribution of selected neurons; vectors sum to the
// set sizes.
std::map<std::string, std::vector<int>> layer_histogram(const SelectionResult& sel, int n_layers);

struct CountTable {
    std::vector<double> ks;           // ascending
    std::vector<std::string> langs;
    std::vector<std::vector<int>> counts;  // [lang][k]
};

CountTable neuron_count_table(const ActivationStats& stats, std::vector<double> ks,
                              SelectOptions opt = {});

}  // namespace natlas
