#include "natlas/lape.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace natlas {

double lape_entropy(std::span<const double> p) {
    double sum = 0;
    for (double v : p) {
        if (v < 0) throw ValidationError("lape_entropy: negative probability");
        sum += v;
    }
    if (sum == 0) return std::log(double(p.size()));
    double h = 0;
    for (double v : p) {
        if (v == 0) continue;
        double q = v / sum;
        h -= q * std::log(q);
    }
    return h;
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw ValidationError("percentile of empty population");
    if (pct < 0 || pct > 100) throw ValidationError("percentile out of [0,100]");
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    size_t rank = size_t(std::ceil(pct / 100.0 * double(n)));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return values[rank - 1];
}

LapeTable compute_lape(const ActivationStats& st) {
    LapeTable t;
    t.n_layers = st.n_layers;
    t.d_ff = st.d_ff;
    t.langs = st.langs;
    t.provenance = st.provenance;
    size_t D = t.n_neurons(), L = t.langs.size();
    t.p.assign(D, std::vector<double>(L, 0.0));
    t.p_norm.assign(D, std::vector<double>(L, 0.0));
    t.mean.assign(D, std::vector<double>(L, 0.0));
    t.entropy.assign(D, 0.0);
    t.inactive.assign(D, 0);
    t.passed_filter.assign(D, 0);
    t.passed_threshold.assign(D, std::vector<uint8_t>(L, 0));
    for (size_t f = 0; f < D; f++) {
        int layer = t.layer_of(f), j = t.neuron_of(f);
        double sum = 0;
        for (size_t l = 0; l < L; l++) {
            double v = st.prob(int(l), layer, j);
            t.p[f][l] = v;
            t.mean[f][l] = st.mean(int(l), layer, j);
            sum += v;
        }
        if (sum == 0) {
            t.inactive[f] = 1;
        } else {
            for (size_t l = 0; l < L; l++) t.p_norm[f][l] = t.p[f][l] / sum;
        }
        t.entropy[f] = lape_entropy(t.p[f]);
    }
    return t;
}

SelectionResult select(LapeTable& t, const SelectOptions& opt) {
    if (opt.k_percent <= 0 || opt.k_percent > 100)
        throw ValidationError("select: k_percent out of (0,100]");
    size_t D = t.n_neurons(), L = t.langs.size();
    SelectionResult r;
    r.provenance = t.provenance;
    r.k_percent = opt.k_percent;
    r.filter_percentile = opt.filter_percentile;
    r.threshold_percentile = opt.threshold_percentile;
    r.filter_population = opt.filter_on_values ? "value" : "prob";
    std::fill(t.passed_filter.begin(), t.passed_filter.end(), 0);
    for (auto& row : t.passed_threshold) std::fill(row.begin(), row.end(), 0);

    // gate 1: pooled-population filter on the per-neuron maximum
    std::vector<double> pooled;
    pooled.reserve(D * L);
    for (size_t f = 0; f < D; f++)
        for (size_t l = 0; l < L; l++)
            pooled.push_back(opt.filter_on_values ? t.mean[f][l] : t.p[f][l]);
    r.filter_cutoff = nearest_rank_percentile(pooled, opt.filter_percentile);
    std::vector<size_t> survivors;
    for (size_t f = 0; f < D; f++) {
        if (t.inactive[f]) continue;
        double mx = -1e300;
        for (size_t l = 0; l < L; l++)
            mx = std::max(mx, opt.filter_on_values ? t.mean[f][l] : t.p[f][l]);
        if (mx >= r.filter_cutoff) {
            t.passed_filter[f] = 1;
            survivors.push_back(f);
        }
    }

    // gate 2: bottom-k by entropy with tie inclusion at the cutoff
    std::sort(survivors.begin(), survivors.end(), [&](size_t a, size_t b) {
        if (t.entropy[a] != t.entropy[b]) return t.entropy[a] < t.entropy[b];
        return a < b;  // flat index == (layer, neuron) order
    });
    r.quota = size_t(std::floor(opt.k_percent / 100.0 * double(D)));
    size_t m = std::min(r.quota, survivors.size());
    if (m > 0) {
        double cutoff = t.entropy[survivors[m - 1]];
        while (m < survivors.size() && t.entropy[survivors[m]] == cutoff) m++;
        r.entropy_cutoff = cutoff;
    }
    r.kept = m;

    // gate 3: per-language threshold over the full probability column
    std::vector<double> thr(L);
    for (size_t l = 0; l < L; l++) {
        std::vector<double> col(D);
        for (size_t f = 0; f < D; f++) col[f] = t.p[f][l];
        thr[l] = nearest_rank_percentile(std::move(col), opt.threshold_percentile);
        r.thresholds[t.langs[l]] = thr[l];
    }
    for (const auto& lang : t.langs) r.sets[lang] = NeuronSet{lang, {}};
    r.multiplicity.assign(L + 1, 0);
    for (size_t i = 0; i < m; i++) {
        size_t f = survivors[i];
        int layer = t.layer_of(f), j = t.neuron_of(f);
        r.kept_neurons.emplace_back(layer, j);
        int hits = 0;
        for (size_t l = 0; l < L; l++) {
            if (t.p[f][l] >= thr[l] && t.p[f][l] > 0) {
                t.passed_threshold[f][l] = 1;
                r.sets[t.langs[l]].neurons.emplace_back(layer, j);
                hits++;
            }
        }
        r.multiplicity[hits]++;
        if (hits == 0) r.unassigned++;
    }
    std::sort(r.kept_neurons.begin(), r.kept_neurons.end());
    for (auto& [_, s] : r.sets) std::sort(s.neurons.begin(), s.neurons.end());
    return r;
}

std::string SelectionResult::to_json() const {
    json sets_j = json::object();
    for (const auto& [lang, s] : sets) {
        json arr = json::array();
        for (auto [layer, j] : s.neurons) arr.push_back(json::array({layer, j}));
        sets_j[lang] = arr;
    }
    json kept_j = json::array();
    for (auto [layer, j] : kept_neurons) kept_j.push_back(json::array({layer, j}));
    json root = {{"schema_version", schema_version},
                 {"provenance", provenance},
                 {"k_percent", k_percent},
                 {"filter_percentile", filter_percentile},
                 {"threshold_percentile", threshold_percentile},
                 {"filter_population", filter_population},
                 {"quota", quota},
                 {"kept", kept},
                 {"entropy_cutoff", entropy_cutoff},
                 {"filter_cutoff", filter_cutoff},
                 {"thresholds", thresholds},
                 {"sets", sets_j},
                 {"kept_neurons", kept_j},
                 {"multiplicity", multiplicity},
                 {"unassigned", unassigned}};
    return root.dump(2) + "\n";
}

SelectionResult SelectionResult::from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("selection: bad JSON: ") + e.what());
    }
    SelectionResult r;
    try {
        r.schema_version = root.value("schema_version", 1);
        r.provenance = root.value("provenance", std::string());
        r.k_percent = root.value("k_percent", 0.0);
        r.filter_percentile = root.value("filter_percentile", 0.0);
        r.threshold_percentile = root.value("threshold_percentile", 0.0);
        r.filter_population = root.value("filter_population", std::string("prob"));
        r.quota = root.value("quota", size_t(0));
        r.kept = root.value("kept", size_t(0));
        r.entropy_cutoff = root.value("entropy_cutoff", 0.0);
        r.filter_cutoff = root.value("filter_cutoff", 0.0);
        if (root.contains("thresholds"))
            for (const auto& [k, v] : root["thresholds"].items()) r.thresholds[k] = v.get<double>();
        for (const auto& [lang, arr] : root.at("sets").items()) {
            NeuronSet s{lang, {}};
            for (const auto& p : arr) s.neurons.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
            std::sort(s.neurons.begin(), s.neurons.end());
            r.sets[lang] = std::move(s);
        }
        if (root.contains("kept_neurons"))
            for (const auto& p : root["kept_neurons"])
                r.kept_neurons.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        if (root.contains("multiplicity")) r.multiplicity = root["multiplicity"].get<std::vector<int>>();
        r.unassigned = root.value("unassigned", 0);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("selection: bad JSON: ") + e.what());
    }
    return r;
}

void SelectionResult::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write selection " + path);
    out << to_json();
}

SelectionResult SelectionResult::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open selection " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

OverlapMatrix overlap_matrix(const SelectionResult& sel) {
    OverlapMatrix m;
    for (const auto& [lang, _] : sel.sets) m.langs.push_back(lang);
    size_t n = m.langs.size();
    m.count.assign(n, std::vector<int>(n, 0));
    for (size_t i = 0; i < n; i++) {
        const auto& a = sel.sets.at(m.langs[i]).neurons;
        for (size_t j = 0; j < n; j++) {
            const auto& b = sel.sets.at(m.langs[j]).neurons;
            size_t x = 0, y = 0;
            int c = 0;
            while (x < a.size() && y < b.size()) {
                if (a[x] < b[y]) x++;
                else if (b[y] < a[x]) y++;
                else { c++; x++; y++; }
            }
            m.count[i][j] = c;
        }
    }
    return m;
}

std::map<std::string, std::vector<int>> layer_histogram(const SelectionResult& sel, int n_layers) {
    std::map<std::string, std::vector<int>> h;
    for (const auto& [lang, s] : sel.sets) {
        auto& v = h[lang];
        v.assign(n_layers, 0);
        for (auto [layer, _] : s.neurons) {
            if (layer < 0 || layer >= n_layers) throw ValidationError("layer_histogram: layer out of range");
            v[layer]++;
        }
    }
    return h;
}

CountTable neuron_count_table(const ActivationStats& stats, std::vector<double> ks,
                              SelectOptions opt) {
    std::sort(ks.begin(), ks.end());
    CountTable ct;
    ct.ks = ks;
    ct.langs = stats.langs;
    ct.counts.assign(ct.langs.size(), std::vector<int>(ks.size(), 0));
    LapeTable t = compute_lape(stats);
    for (size_t ki = 0; ki < ks.size(); ki++) {
        opt.k_percent = ks[ki];
        SelectionResult sel = select(t, opt);
        for (size_t l = 0; l < ct.langs.size(); l++)
            ct.counts[l][ki] = int(sel.sets.at(ct.langs[l]).neurons.size());
    }
    return ct;
}

}  // namespace natlas
