#include "natlas/steer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace natlas {

namespace {
std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}
}  // namespace

BoostVector compute_boosts(const ActivationStats& stats, const NeuronSet& set) {
    int li = stats.lang_index(set.lang);
    if (li < 0) throw ValidationError("boosts: language " + set.lang + " not in stats");
    BoostVector b;
    b.lang = set.lang;
    b.provenance = stats.provenance;
    for (auto [layer, j] : set.neurons) {
        if (layer < 0 || layer >= stats.n_layers || j < 0 || j >= stats.d_ff)
            throw ValidationError("boosts: neuron out of range");
        b.boosts.emplace_back(layer, j, float(stats.mean(li, layer, j)));
    }
    return b;
}

InterventionPlan plan_activate(const BoostVector& b) {
    InterventionPlan p;
    // group by layer, keeping neuron order
    std::map<int, std::pair<std::vector<int>, std::vector<float>>> by_layer;
    for (auto [layer, j, val] : b.boosts) {
        by_layer[layer].first.push_back(j);
        by_layer[layer].second.push_back(val);
    }
    for (auto& [layer, nv] : by_layer)
        p.directives.push_back(TapDirective::add_sparse(layer, std::move(nv.first), std::move(nv.second)));
    p.recipe = "activate:" + b.lang + "(add " + std::to_string(b.boosts.size()) + " neurons)";
    return p;
}

InterventionPlan plan_deactivate(const NeuronSet& set, float value) {
    InterventionPlan p;
    std::map<int, std::vector<int>> by_layer;
    for (auto [layer, j] : set.neurons) by_layer[layer].push_back(j);
    for (auto& [layer, ns] : by_layer) {
        if (value == 0.f) p.directives.push_back(TapDirective::mul(layer, std::move(ns), 0.f));
        else p.directives.push_back(TapDirective::set(layer, std::move(ns), value));
    }
    p.recipe = "deactivate:" + set.lang +
               (value == 0.f ? "(multiply 0)" : "(set " + fmt_g(value) + ")");
    return p;
}

InterventionPlan plan_replace(const ActivationStats& stats, const NeuronSet& set, bool median) {
    int li = stats.lang_index(set.lang);
    if (li < 0) throw ValidationError("replace: language " + set.lang + " not in stats");
    InterventionPlan p;
    std::map<int, std::pair<std::vector<int>, std::vector<float>>> by_layer;
    for (auto [layer, j] : set.neurons) {
        float v;
        if (median) {
            const auto& sk = stats.sketches[stats.idx(li, layer, j)];
            if (sk.empty()) throw ValidationError("replace: no samples for neuron");
            v = sk.quantile(0.5);
        } else {
            v = float(stats.mean(li, layer, j));
        }
        by_layer[layer].first.push_back(j);
        by_layer[layer].second.push_back(v);
    }
    for (auto& [layer, nv] : by_layer) {
        TapDirective d;
        d.layer = layer;
        d.mode = TapDirective::Mode::set;
        d.neurons = std::move(nv.first);
        d.values = std::move(nv.second);
        p.directives.push_back(std::move(d));
    }
    p.recipe = "replace:" + set.lang + (median ? "(set median)" : "(set mean)");
    return p;
}

DiffMeanVector compute_diffmean(const ActivationStats& stats, const std::string& target,
                                double scale) {
    int ti = stats.lang_index(target);
    if (ti < 0) throw ValidationError("diffmean: language " + target + " not in stats");
    if (stats.langs.size() < 2) throw ValidationError("diffmean: need at least two languages");
    DiffMeanVector dm;
    dm.lang = target;
    dm.provenance = stats.provenance;
    dm.scale = scale;
    dm.per_layer.assign(stats.n_layers, std::vector<float>(stats.d_ff, 0.f));
    size_t L = stats.langs.size();
    for (int layer = 0; layer < stats.n_layers; layer++) {
        for (int j = 0; j < stats.d_ff; j++) {
            double others = 0;
            for (size_t l = 0; l < L; l++)
                if (int(l) != ti) others += stats.mean(int(l), layer, j);
            others /= double(L - 1);
            dm.per_layer[layer][j] = float((stats.mean(ti, layer, j) - others) * scale);
        }
    }
    return dm;
}

InterventionPlan plan_diffmean(const DiffMeanVector& dm, const std::vector<int>& layers) {
    InterventionPlan p;
    std::vector<int> which = layers;
    if (which.empty())
        for (int l = 0; l < int(dm.per_layer.size()); l++) which.push_back(l);
    std::sort(which.begin(), which.end());
    which.erase(std::unique(which.begin(), which.end()), which.end());
    for (int l : which) {
        if (l < 0 || l >= int(dm.per_layer.size()))
            throw ValidationError("diffmean plan: layer out of range");
        p.directives.push_back(TapDirective::add_dense(l, dm.per_layer[l]));
    }
    p.recipe = "diffmean:" + dm.lang + "(scale " + fmt_g(dm.scale) + ", " +
               std::to_string(which.size()) + " layers)";
    return p;
}

InterventionPlan compose(const std::vector<InterventionPlan>& plans) {
    InterventionPlan out;
    std::map<std::pair<int, int>, float> set_values;
    for (const auto& p : plans) {
        for (const auto& d : p.directives) {
            if (d.mode == TapDirective::Mode::set) {
                size_t n = d.neurons.empty() ? d.values.size() : d.neurons.size();
                for (size_t i = 0; i < n; i++) {
                    int j = d.neurons.empty() ? int(i) : d.neurons[i];
                    float v = d.values.size() == 1 ? d.values[0] : d.values[i];
                    auto key = std::make_pair(d.layer, j);
                    auto it = set_values.find(key);
                    if (it != set_values.end() && it->second != v)
                        throw ValidationError(
                            "compose: conflicting set values on layer " + std::to_string(d.layer) +
                            " neuron " + std::to_string(j) + " (" + fmt_g(it->second) + " vs " +
                            fmt_g(v) + ")");
                    set_values[key] = v;
                }
            }
            out.directives.push_back(d);
        }
        if (!p.recipe.empty()) {
            if (!out.recipe.empty()) out.recipe += " + ";
            out.recipe += p.recipe;
        }
    }
    return out;
}

std::string InterventionPlan::to_json() const {
    json ds = json::array();
    for (const auto& d : directives) {
        ds.push_back({{"layer", d.layer},
                      {"mode", mode_name(d.mode)},
                      {"neurons", d.neurons},
                      {"values", d.values}});
    }
    json root = {{"schema_version", schema_version}, {"recipe", recipe}, {"directives", ds}};
    return root.dump(2) + "\n";
}

InterventionPlan InterventionPlan::from_json(const std::string& text) {
    InterventionPlan p;
    try {
        json root = json::parse(text);
        p.schema_version = root.value("schema_version", 1);
        p.recipe = root.value("recipe", std::string());
        for (const auto& j : root.at("directives")) {
            TapDirective d;
            d.layer = j.at("layer").get<int>();
            std::string mode = j.at("mode").get<std::string>();
            if (mode == "add") d.mode = TapDirective::Mode::add;
            else if (mode == "multiply") d.mode = TapDirective::Mode::multiply;
            else if (mode == "set") d.mode = TapDirective::Mode::set;
            else throw ValidationError("plan: unknown mode " + mode);
            d.neurons = j.at("neurons").get<std::vector<int>>();
            d.values = j.at("values").get<std::vector<float>>();
            p.directives.push_back(std::move(d));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("plan: bad JSON: ") + e.what());
    }
    return p;
}

void InterventionPlan::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write plan " + path);
    out << to_json();
}

InterventionPlan InterventionPlan::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open plan " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace natlas
