#include "natlas/planted.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "natlas/tokenizer.hpp"

using nlohmann::json;

namespace natlas {

std::string PlantLedger::to_json() const {
    json sets = json::object();
    for (const auto& [lang, v] : neurons) {
        json arr = json::array();
        for (auto [layer, j] : v) arr.push_back(json::array({layer, j}));
        sets[lang] = arr;
    }
    json root = {{"schema_version", 1}, {"planted", sets}};
    return root.dump(2) + "\n";
}

PlantLedger PlantLedger::from_json(const std::string& text) {
    PlantLedger led;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("plant ledger: bad JSON: ") + e.what());
    }
    try {
        for (const auto& [lang, arr] : root.at("planted").items()) {
            auto& v = led.neurons[lang];
            for (const auto& p : arr) v.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
            std::sort(v.begin(), v.end());
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("plant ledger: bad JSON: ") + e.what());
    }
    return led;
}

void PlantLedger::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write plant ledger " + path);
    out << to_json();
}

PlantLedger PlantLedger::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open plant ledger " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::pair<Checkpoint, PlantLedger> plant_model(const std::vector<LanguageSpec>& specs,
                                               const PlantOptions& opt) {
    const ModelConfig& cfg = opt.config;
    cfg.validate();
    int n = int(specs.size());
    if (n < 1) throw ValidationError("plant_model: no languages");
    if (cfg.vocab_size < tok::kVocab)
        throw ValidationError("plant_model: vocab_size must cover the byte tokenizer");
    // coordinate budget: n indicators + n outputs + bias + at least 3 noise coords
    if (cfg.d_model < 2 * n + 4)
        throw ValidationError("plant_model: d_model too small, need at least 2*n_langs+4 (" +
                              std::to_string(2 * n + 4) + ")");
    // token == ASCII byte is what makes the ledger exact ground truth
    std::set<uint32_t> claimed;
    for (const auto& s : specs) {
        for (uint32_t cp : s.alphabet) {
            if (cp > 0x7f)
                throw ValidationError("plant_model: alphabet of " + s.id +
                                      " has non-ASCII codepoint " + std::to_string(cp));
            if (!claimed.insert(cp).second)
                throw ValidationError("plant_model: alphabets overlap on codepoint " +
                                      std::to_string(cp) + " (must be disjoint)");
        }
    }

    // slots
    auto order = priority_order(specs);
    std::map<std::string, std::vector<std::pair<int, int>>> slots = opt.slots;
    if (slots.empty()) {
        int layer = opt.plant_layer >= 0 ? opt.plant_layer : cfg.n_layers / 2;
        for (int r = 0; r < n; r++) {
            auto& v = slots[order[r]->id];
            for (int i = 0; i < opt.per_lang; i++) v.emplace_back(layer, r + i * n);
        }
    }
    std::set<std::pair<int, int>> used;
    for (const auto& [lang, v] : slots) {
        if (!find_lang(specs, lang)) throw ValidationError("plant_model: slot for unknown language " + lang);
        for (auto [layer, j] : v) {
            if (layer < 0 || layer >= cfg.n_layers) throw ValidationError("plant_model: slot layer out of range");
            if (j < 0 || j >= cfg.d_ff) throw ValidationError("plant_model: slot neuron out of range");
            if (!used.insert({layer, j}).second)
                throw ValidationError("plant_model: duplicate slot (" + std::to_string(layer) + "," +
                                      std::to_string(j) + ")");
        }
    }

    Checkpoint c = Checkpoint::zeros(cfg);
    int d = cfg.d_model;
    int coord_ind = 0;       // + lang index
    int coord_out = n;       // + lang index
    int coord_bias = 2 * n;
    int noise_lo = 2 * n + 1;
    float s = std::sqrt(1.f + cfg.norm_eps);  // undoes the rmsnorm of a unit-RMS vector

    // language index by id, rank (1-based priority position) by id
    std::map<std::string, int> lidx, lrank;
    for (int i = 0; i < n; i++) lidx[specs[i].id] = i;
    for (int r = 0; r < n; r++) lrank[order[r]->id] = r + 1;

    // embeddings: indicator + bias + noise rescaled so sum of squares == d
    // exactly, hence RMS == 1 for every token and the planted pre-activations
    // land on kPlantZOn / kPlantZOff.
    for (int t = 0; t < cfg.vocab_size; t++) {
        float* e = c.tok_embed.row(t);
        int ind = -1;
        if (t < 256) {
            for (int i = 0; i < n; i++)
                if (specs[i].contains(uint32_t(t))) { ind = i; break; }
        }
        if (ind >= 0) e[coord_ind + ind] = 1.f;
        e[coord_bias] = 1.f;
        Rng rng(splitmix64(opt.seed ^ (0x9000 + uint64_t(t))));
        double ss = 0;
        std::vector<double> z(d - noise_lo);
        for (auto& v : z) { v = rng.gauss(); ss += v * v; }
        double target = double(d) - 1.0 - (ind >= 0 ? 1.0 : 0.0);
        double scale = std::sqrt(target / ss);
        for (int i = noise_lo; i < d; i++) e[i] = float(z[i - noise_lo] * scale);
    }

    // ffn weights: planted rows are exact, everything else is small noise
    // confined to the noise coords so indicators/outputs/bias stay clean.
    std::set<std::pair<int, int>> planted(used);
    for (int l = 0; l < cfg.n_layers; l++) {
        LayerWeights& w = c.layers[l];
        Rng rng(splitmix64(opt.seed ^ (0xff00 + uint64_t(l))));
        for (int j = 0; j < cfg.d_ff; j++) {
            if (planted.count({l, j})) continue;
            for (int i = noise_lo; i < d; i++) {
                w.w_gate.at(j, i) = float(kPlantNoiseScale * rng.gauss());
                w.w_up.at(j, i) = float(kPlantNoiseScale * rng.gauss());
                w.w_down.at(i, j) = float(kPlantNoiseScale * rng.gauss());
            }
        }
    }
    for (const auto& [lang, v] : slots) {
        int li = lidx[lang];
        float leak = plant_leak(lrank[lang]);
        for (auto [l, j] : v) {
            LayerWeights& w = c.layers[l];
            w.w_gate.at(j, coord_ind + li) = (kPlantZOn - kPlantZOff) * s;
            w.w_gate.at(j, coord_bias) = kPlantZOff * s;
            w.w_up.at(j, coord_bias) = s;
            w.w_down.at(coord_out + li, j) = leak;
        }
    }

    // unembedding reads the language output coord plus a small bias so every
    // in-alphabet byte stays ahead of specials and frame bytes.
    for (int t = 0; t < 256; t++) {
        for (int i = 0; i < n; i++) {
            if (!specs[i].contains(uint32_t(t))) continue;
            float* r = c.unembed.row(t);
            r[coord_out + i] = kPlantReadout;
            r[coord_bias] = kPlantBiasRead;
        }
    }

    PlantLedger led;
    for (auto& [lang, v] : slots) {
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        led.neurons[lang] = std::move(sorted);
    }
    return {std::move(c), std::move(led)};
}

}  // namespace natlas
