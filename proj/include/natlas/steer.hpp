#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "natlas/lape.hpp"
#include "natlas/model.hpp"
#include "natlas/stats.hpp"

namespace natlas {

// Additive boost per selected neuron: its mean tap value over the language's
// reference tokens.
struct BoostVector {
    std::string lang;
    std::string provenance;
    std::vector<std::tuple<int, int, float>> boosts;  // (layer, neuron, value)
};

BoostVector compute_boosts(const ActivationStats& stats, const NeuronSet& set);

struct InterventionPlan {
    int schema_version = 1;
    std::string recipe;  // human-readable, e.g. "deactivate:aa(multiply 0) + activate:ab(add 8 neurons)"
    std::vector<TapDirective> directives;

    std::string to_json() const;
    static InterventionPlan from_json(const std::string& text);
    void save(const std::string& path) const;
    static InterventionPlan load(const std::string& path);
};

// a[:, i] += b_i on the language's selected neurons.
InterventionPlan plan_activate(const BoostVector& boosts);
// value == 0 compiles to multiply(0) (keeps later adds additive on a clean
// slate); any other value compiles to set(value).
InterventionPlan plan_deactivate(const NeuronSet& set, float value);
// Replacement baseline: pin each selected neuron to its mean or median tap.
InterventionPlan plan_replace(const ActivationStats& stats, const NeuronSet& set, bool median);

// Dense per-layer steering direction: mean tap of the target language minus
// the pooled mean of all other languages, times scale.
struct DiffMeanVector {
    std::string lang;
    std::string provenance;
    double scale = 1.0;
    std::vector<std::vector<float>> per_layer;  // [n_layers][d_ff]
};

DiffMeanVector compute_diffmean(const ActivationStats& stats, const std::string& target,
                                double scale);
// Empty `layers` applies every layer; otherwise only the listed ones.
InterventionPlan plan_diffmean(const DiffMeanVector& dm, const std::vector<int>& layers = {});

// Concatenates plans in argument order (callers put deactivations first).
// Two set directives touching the same (layer, neuron) with different values
// are a contradiction and fail; identical values are allowed (idempotent).
InterventionPlan compose(const std::vector<InterventionPlan>& plans);

}  // namespace natlas
