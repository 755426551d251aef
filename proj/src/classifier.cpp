#include "natlas/classifier.hpp"

#include <cmath>

namespace natlas {

Classifier::Classifier(std::vector<LanguageSpec> specs) : specs_(std::move(specs)) {
    if (specs_.empty()) throw ValidationError("classifier: no languages registered");
    for (const auto& s : specs_) {
        chains_.push_back(BigramChain::build(int(s.alphabet.size()), s.bigram_seed));
        std::map<uint32_t, int> idx;
        for (size_t i = 0; i < s.alphabet.size(); i++) idx[s.alphabet[i]] = int(i);
        index_.push_back(std::move(idx));
    }
}

Classification Classifier::classify(std::string_view text) const {
    Classification out;
    std::vector<uint32_t> cps = decode_utf8_lossy(text);
    size_t n_langs = specs_.size();

    auto all_unknown = [&] {
        for (const auto& s : specs_) out.probs[s.id] = 0.0;
        out.probs["unknown"] = 1.0;
        out.top1 = "unknown";
        out.unknown_rate = 1.0;
        return out;
    };
    if (cps.empty()) return all_unknown();

    std::vector<double> member(n_langs, 0.0);
    double unknown_cnt = 0;
    for (uint32_t cp : cps) {
        bool any = false;
        for (size_t l = 0; l < n_langs; l++)
            if (index_[l].count(cp)) { member[l] += 1; any = true; }
        if (!any) unknown_cnt += 1;
    }
    double total = double(cps.size());
    out.unknown_rate = unknown_cnt / total;
    if (unknown_cnt == total) return all_unknown();

    std::vector<double> score(n_langs);
    for (size_t l = 0; l < n_langs; l++) score[l] = kMembershipWeight * member[l] / total;

    if (cps.size() >= 4) {
        double log_floor = std::log(kFloorProb);
        size_t n_bigrams = cps.size() - 1;
        for (size_t l = 0; l < n_langs; l++) {
            double llr = 0;
            for (size_t i = 0; i + 1 < cps.size(); i++) {
                auto a = index_[l].find(cps[i]);
                auto b = index_[l].find(cps[i + 1]);
                double p = (a != index_[l].end() && b != index_[l].end())
                               ? chains_[l].prob(a->second, b->second)
                               : kFloorProb;
                llr += std::log(p) - log_floor;
            }
            score[l] += kBigramWeight * llr / double(n_bigrams);
        }
    }
    double unknown_score = kMembershipWeight * out.unknown_rate;

    double mx = unknown_score;
    for (double s : score) mx = std::max(mx, s);
    double z = std::exp(unknown_score - mx);
    double sum = z;
    std::vector<double> e(n_langs);
    for (size_t l = 0; l < n_langs; l++) { e[l] = std::exp(score[l] - mx); sum += e[l]; }
    for (size_t l = 0; l < n_langs; l++) out.probs[specs_[l].id] = e[l] / sum;
    out.probs["unknown"] = z / sum;

    out.top1 = "unknown";
    double best = -1;
    for (const auto& [id, p] : out.probs)
        if (p > best) { best = p; out.top1 = id; }
    return out;
}

}  // namespace natlas
