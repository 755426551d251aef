#include "natlas/lens.hpp"

#include <algorithm>
#include <cmath>

#include "natlas/tensor.hpp"
#include "natlas/tokenizer.hpp"

namespace natlas {

LensResult lens_distributions(const Checkpoint& ckpt, std::span<const int> tokens,
                              std::span<const TapDirective> directives) {
    if (tokens.empty()) throw ValidationError("lens: empty prompt");
    const ModelConfig& c = ckpt.config;
    ForwardResult fr = forward(ckpt, tokens, directives);
    int last = int(tokens.size()) - 1;
    LensResult r;
    r.dist.assign(c.n_layers, std::vector<float>(c.vocab_size, 0.f));
    std::vector<float> normed(c.d_model);
    for (int l = 0; l < c.n_layers; l++) {
        rmsnorm(fr.hidden[l].row(last), ckpt.final_norm.data(), normed.data(), c.d_model,
                c.norm_eps);
        matvec(ckpt.unembed, normed.data(), r.dist[l].data());
        softmax_inplace(r.dist[l].data(), c.vocab_size);
    }
    return r;
}

namespace {

// byte token -> indices of languages whose alphabet holds that codepoint
std::vector<std::vector<int>> byte_members(const std::vector<LanguageSpec>& specs) {
    std::vector<std::vector<int>> m(256);
    for (int b = 0; b < 128; b++) {  // single-byte UTF-8 == ASCII
        for (size_t l = 0; l < specs.size(); l++)
            if (specs[l].contains(uint32_t(b))) m[b].push_back(int(l));
    }
    return m;
}

}  // namespace

LayerLanguageProfile language_profile(const LensResult& lens,
                                      const std::vector<LanguageSpec>& specs,
                                      const std::string& target, const std::string& pivot,
                                      LensMode mode, int top_n) {
    if (!find_lang(specs, target)) throw ValidationError("lens: target language not registered: " + target);
    if (!find_lang(specs, pivot)) throw ValidationError("lens: pivot language not registered: " + pivot);
    auto members = byte_members(specs);
    LayerLanguageProfile prof;
    prof.langs = lang_ids(specs);
    // map spec order -> sorted-id order used in outputs
    std::vector<int> sorted_of(specs.size());
    for (size_t i = 0; i < specs.size(); i++)
        sorted_of[i] = int(std::lower_bound(prof.langs.begin(), prof.langs.end(), specs[i].id) -
                           prof.langs.begin());

    size_t L = prof.langs.size();
    for (const auto& dist : lens.dist) {
        std::vector<double> mass(L + 1, 0.0);  // + unknown
        auto attribute = [&](int tokid, double p) {
            if (tokid < 256 && !members[tokid].empty()) {
                double share = p / double(members[tokid].size());
                for (int li : members[tokid]) mass[sorted_of[li]] += share;
            } else {
                mass[L] += p;
            }
        };
        if (mode == LensMode::mass) {
            for (int t = 0; t < int(dist.size()); t++) attribute(t, double(dist[t]));
        } else {
            int best = 0;
            for (int t = 1; t < int(dist.size()); t++)
                if (dist[t] > dist[best]) best = t;
            attribute(best, 1.0);
        }
        std::map<std::string, double> mm;
        for (size_t l = 0; l < L; l++) mm[prof.langs[l]] = mass[l];
        mm["unknown"] = mass[L];
        double h = 0;
        for (double v : mass)
            if (v > 0) h -= v * std::log(v);
        prof.entropy.push_back(h);
        prof.target_prob.push_back(mm.at(target));
        prof.pivot_prob.push_back(mm.at(pivot));
        prof.lang_mass.push_back(std::move(mm));

        std::vector<int> order(dist.size());
        for (size_t i = 0; i < dist.size(); i++) order[i] = int(i);
        std::partial_sort(order.begin(), order.begin() + std::min<size_t>(top_n, order.size()),
                          order.end(), [&](int a, int b) {
                              if (dist[a] != dist[b]) return dist[a] > dist[b];
                              return a < b;
                          });
        std::vector<std::pair<int, double>> top;
        for (int i = 0; i < top_n && i < int(order.size()); i++)
            top.emplace_back(order[i], double(dist[order[i]]));
        prof.top_tokens.push_back(std::move(top));
    }
    return prof;
}

ProfileSuite profile_suite(const Checkpoint& ckpt, const std::vector<LanguageSpec>& specs,
                           const std::map<std::string, std::vector<std::string>>& prompts,
                           const std::string& pivot, LensMode mode) {
    ProfileSuite out;
    out.pivot = pivot;
    out.n_layers = ckpt.config.n_layers;
    int per_lang = -1;
    for (const auto& [lang, ps] : prompts) {
        if (!find_lang(specs, lang)) throw ValidationError("lens suite: language not registered: " + lang);
        if (ps.empty()) throw ValidationError("lens suite: no prompts for " + lang);
        if (per_lang < 0) per_lang = int(ps.size());
        out.langs.push_back(lang);
        auto& tp = out.target_prob[lang];
        auto& pp = out.pivot_prob[lang];
        auto& en = out.entropy[lang];
        tp.assign(out.n_layers, 0.0);
        pp.assign(out.n_layers, 0.0);
        en.assign(out.n_layers, 0.0);
        for (const auto& text : ps) {
            std::vector<int> toks = tok::tokenize(text);
            LensResult lr = lens_distributions(ckpt, toks);
            LayerLanguageProfile prof = language_profile(lr, specs, lang, pivot, mode);
            for (int l = 0; l < out.n_layers; l++) {
                tp[l] += prof.target_prob[l];
                pp[l] += prof.pivot_prob[l];
                en[l] += prof.entropy[l];
            }
        }
        for (int l = 0; l < out.n_layers; l++) {
            tp[l] /= double(ps.size());
            pp[l] /= double(ps.size());
            en[l] /= double(ps.size());
        }
    }
    out.prompts_per_lang = std::max(per_lang, 0);
    out.mean_target.assign(out.n_layers, 0.0);
    for (const auto& lang : out.langs)
        for (int l = 0; l < out.n_layers; l++) out.mean_target[l] += out.target_prob[lang][l];
    if (!out.langs.empty())
        for (int l = 0; l < out.n_layers; l++) out.mean_target[l] /= double(out.langs.size());
    return out;
}

}  // namespace natlas
