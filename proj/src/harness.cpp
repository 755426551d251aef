#include "natlas/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "natlas/tokenizer.hpp"

using nlohmann::json;

namespace natlas {

std::string frame_prompt(const std::string& question) { return "Q: " + question + " A:"; }

std::vector<std::string> synth_prompts(const LanguageSpec& spec, int count, int len,
                                       uint64_t seed) {
    std::vector<std::string> out;
    Fnv1a fh;
    fh.update(spec.id);
    for (int i = 0; i < count; i++) {
        std::string q = synth_doc(spec, len, splitmix64(seed ^ splitmix64(fh.h) ^ (0x51000ull + i)));
        out.push_back(frame_prompt(q + "?"));
    }
    return out;
}

std::map<std::string, std::vector<std::string>> synth_questions(
    const std::vector<LanguageSpec>& specs, int per_lang, int len, uint64_t seed) {
    std::map<std::string, std::vector<std::string>> qs;
    for (const auto& s : specs) qs[s.id] = synth_prompts(s, per_lang, len, seed);
    return qs;
}

GenSettings make_gen_settings(int max_tokens) {
    GenSettings g;
    g.max_tokens = max_tokens;
    g.temperature = 0.f;
    g.repetition_penalty = 1.1f;
    g.stop_ids = {tok::kEos};
    return g;
}

namespace {

BoostVector boosts_for(const ActivationStats& stats, const NeuronSet& set, bool active_only) {
    int li = stats.lang_index(set.lang);
    if (li < 0) throw ValidationError("boosts: language " + set.lang + " not in stats");
    if (stats.totals[li] == 0) throw ValidationError("boosts: zero token count for " + set.lang);
    BoostVector b = compute_boosts(stats, set);
    if (active_only) {
        for (auto& [layer, j, v] : b.boosts) {
            size_t i = stats.idx(li, layer, j);
            uint64_t n = stats.active[i];
            v = n == 0 ? 0.f : float(stats.sums[i].value() / double(n));
        }
    }
    return b;
}

// Activation side of a forcing plan, per intervention family.
InterventionPlan activation_plan(const ActivationStats& stats, const SelectionResult& sel,
                                 const std::string& tgt, const ForcingOptions& opt) {
    const NeuronSet& set = sel.sets.at(tgt);
    if (opt.family == "additive")
        return plan_activate(boosts_for(stats, set, opt.boosts_active_only));
    if (opt.family == "replace-mean") return plan_replace(stats, set, false);
    if (opt.family == "replace-median") return plan_replace(stats, set, true);
    if (opt.family == "diffmean") {
        std::vector<int> layers;
        if (!opt.diffmean_all_layers) {
            for (auto [layer, _] : set.neurons) layers.push_back(layer);
            std::sort(layers.begin(), layers.end());
            layers.erase(std::unique(layers.begin(), layers.end()), layers.end());
            if (layers.empty())
                throw ValidationError("diffmean: target set for " + tgt +
                                      " is empty; use all-layers mode");
        }
        return plan_diffmean(compute_diffmean(stats, tgt, opt.diffmean_scale), layers);
    }
    throw ValidationError("unknown intervention family: " + opt.family);
}

}  // namespace

ForcingReport run_forcing(const Checkpoint& ckpt, const ActivationStats& stats,
                          const SelectionResult& sel, const std::vector<LanguageSpec>& specs,
                          const std::map<std::string, std::vector<std::string>>& questions,
                          const ForcingOptions& opt) {
    if (opt.strategy != "activate" && opt.strategy != "deact+act")
        throw ValidationError("forcing: unknown strategy " + opt.strategy);
    ForcingReport rep;
    rep.strategy = opt.strategy;
    rep.family = opt.family;
    rep.provenance = sel.provenance;
    rep.k_percent = sel.k_percent;
    rep.deact_value = opt.deact_value;
    for (const auto& [lang, _] : sel.sets) {
        if (!find_lang(specs, lang))
            throw ValidationError("forcing: selection language " + lang + " not registered");
        rep.langs.push_back(lang);
    }
    std::sort(rep.langs.begin(), rep.langs.end());
    for (const auto& lang : rep.langs)
        if (!questions.count(lang) || questions.at(lang).empty())
            throw ValidationError("forcing: no questions for source language " + lang);

    Classifier clf(specs);
    size_t n = rep.langs.size();
    rep.rate.assign(n, std::vector<double>(n, 0.0));
    double off_sum = 0, off_cnt = 0, unk_sum = 0;
    for (size_t si = 0; si < n; si++) {
        const std::string& src = rep.langs[si];
        for (size_t ti = 0; ti < n; ti++) {
            const std::string& tgt = rep.langs[ti];
            InterventionPlan plan = activation_plan(stats, sel, tgt, opt);
            if (opt.strategy == "deact+act")
                plan = compose({plan_deactivate(sel.sets.at(src), opt.deact_value), plan});
            int wins = 0;
            const auto& qs = questions.at(src);
            for (size_t qi = 0; qi < qs.size(); qi++) {
                std::vector<int> prompt = tok::tokenize(qs[qi]);
                GenResult gen = generate(ckpt, prompt, plan.directives, opt.gen);
                Classification c = clf.classify(gen.text);
                ForcingCell cell;
                cell.src = src;
                cell.tgt = tgt;
                cell.question = int(qi);
                cell.top1 = c.top1;
                cell.unknown = c.top1 == "unknown";
                cell.success = !cell.unknown && c.top1 == tgt;
                cell.answer = gen.text;
                if (cell.success) wins++;
                if (si != ti) {
                    off_sum += cell.success ? 1 : 0;
                    unk_sum += cell.unknown ? 1 : 0;
                    off_cnt += 1;
                }
                rep.cells.push_back(std::move(cell));
            }
            rep.rate[si][ti] = double(wins) / double(qs.size());
        }
    }
    rep.overall = off_cnt > 0 ? off_sum / off_cnt : 0.0;
    rep.unknown_rate = off_cnt > 0 ? unk_sum / off_cnt : 0.0;
    return rep;
}

FallbackReport run_fallback(const Checkpoint& ckpt, const SelectionResult& sel,
                            const std::vector<LanguageSpec>& specs,
                            const std::vector<std::string>& order,
                            const std::vector<std::string>& prompts,
                            const FallbackOptions& opt) {
    if (prompts.empty()) throw ValidationError("fallback: no prompts");
    {
        std::set<std::string> seen;
        for (const auto& lang : order) {
            if (!find_lang(specs, lang)) throw ValidationError("fallback: unknown language " + lang);
            if (!sel.sets.count(lang)) throw ValidationError("fallback: no selection for " + lang);
            if (!seen.insert(lang).second)
                throw ValidationError("fallback: duplicate language " + lang + " in order");
        }
    }
    FallbackReport rep;
    rep.provenance = sel.provenance;
    rep.deact_value = opt.deact_value;
    rep.order = order;
    rep.n_prompts = int(prompts.size());
    Classifier clf(specs);
    for (size_t s = 0; s <= order.size(); s++) {
        FallbackStep step;
        std::vector<InterventionPlan> plans;
        for (size_t i = 0; i < s; i++) {
            step.deactivated.push_back(order[i]);
            plans.push_back(plan_deactivate(sel.sets.at(order[i]), opt.deact_value));
        }
        InterventionPlan plan = compose(plans);
        std::map<std::string, int> votes;
        for (const auto& p : prompts) {
            std::vector<int> toks = tok::tokenize(p);
            GenResult gen = generate(ckpt, toks, plan.directives, opt.gen);
            votes[clf.classify(gen.text).top1]++;
        }
        for (const auto& spec : specs) step.distribution[spec.id] = 0.0;
        step.distribution["unknown"] = 0.0;
        for (const auto& [lang, cnt] : votes)
            step.distribution[lang] = double(cnt) / double(prompts.size());
        step.top = "unknown";
        double best = -1;
        for (const auto& [lang, share] : step.distribution)
            if (share > best) { best = share; step.top = lang; }
        step.top_share = best;
        rep.steps.push_back(std::move(step));
    }
    return rep;
}

std::string normalize_answer(std::string_view s) {
    std::string out;
    bool in_space = true;  // leading whitespace folds away
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (ws) {
            if (!in_space) out.push_back(' ');
            in_space = true;
        } else {
            out.push_back(char(std::tolower(c)));
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

double char_f1(std::string_view reference, std::string_view prediction) {
    std::vector<uint32_t> r = decode_utf8_lossy(reference);
    std::vector<uint32_t> p = decode_utf8_lossy(prediction);
    if (r.empty() && p.empty()) return 1.0;
    if (r.empty() || p.empty()) return 0.0;
    std::map<uint32_t, int> rc;
    for (uint32_t c : r) rc[c]++;
    int common = 0;
    for (uint32_t c : p) {
        auto it = rc.find(c);
        if (it != rc.end() && it->second > 0) { it->second--; common++; }
    }
    if (common == 0) return 0.0;
    double prec = double(common) / double(p.size());
    double rec = double(common) / double(r.size());
    return 2 * prec * rec / (prec + rec);
}

EvalTask load_eval_task(const std::string& path, const std::string& id,
                        const std::string& metric) {
    if (metric != "exact_match" && metric != "char_f1")
        throw ValidationError("eval: unknown metric " + metric);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open task file " + path);
    EvalTask task;
    task.id = id;
    task.metric = metric;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) continue;
        EvalItem item;
        try {
            json j = json::parse(line);
            item.prompt = j.at("prompt").get<std::string>();
            item.reference = j.at("reference").get<std::string>();
            item.max_tokens = j.value("max_tokens", 32);
        } catch (const json::exception& e) {
            throw ValidationError("task file line " + std::to_string(lineno) + ": " + e.what());
        }
        if (item.prompt.empty()) throw ValidationError("task file line " + std::to_string(lineno) + ": empty prompt");
        task.items.push_back(std::move(item));
    }
    if (task.items.empty()) throw ValidationError("task file has no items: " + path);
    return task;
}

EvalResult run_eval(const Checkpoint& ckpt, const EvalTask& task,
                    const InterventionPlan& plan, const GenSettings& base) {
    EvalResult res;
    res.task_id = task.id;
    res.metric = task.metric;
    double sum = 0;
    for (const auto& item : task.items) {
        GenSettings gs = base;
        gs.max_tokens = item.max_tokens;
        std::vector<int> toks = tok::tokenize(item.prompt);
        GenResult gen = generate(ckpt, toks, plan.directives, gs);
        double score;
        if (task.metric == "exact_match")
            score = normalize_answer(gen.text) == normalize_answer(item.reference) ? 1.0 : 0.0;
        else
            score = char_f1(item.reference, gen.text);
        res.predictions.push_back(gen.text);
        res.scores.push_back(score);
        sum += score;
    }
    res.aggregate = sum / double(task.items.size());
    return res;
}

std::string ForcingReport::to_json() const {
    json rate_j = json::array();
    for (const auto& row : rate) rate_j.push_back(row);
    json cells_j = json::array();
    for (const auto& c : cells)
        cells_j.push_back({{"src", c.src},
                           {"tgt", c.tgt},
                           {"question", c.question},
                           {"top1", c.top1},
                           {"success", c.success},
                           {"unknown", c.unknown},
                           {"answer", c.answer}});
    json root = {{"schema_version", schema_version},
                 {"strategy", strategy},
                 {"family", family},
                 {"provenance", provenance},
                 {"k_percent", k_percent},
                 {"deact_value", deact_value},
                 {"langs", langs},
                 {"rate", rate_j},
                 {"overall", overall},
                 {"unknown_rate", unknown_rate},
                 {"cells", cells_j}};
    // generated answers may be arbitrary bytes; replace invalid UTF-8
    return root.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string FallbackReport::to_json() const {
    json steps_j = json::array();
    for (const auto& s : steps)
        steps_j.push_back({{"deactivated", s.deactivated},
                           {"distribution", s.distribution},
                           {"top", s.top},
                           {"top_share", s.top_share}});
    json root = {{"schema_version", schema_version},
                 {"provenance", provenance},
                 {"deact_value", deact_value},
                 {"order", order},
                 {"n_prompts", n_prompts},
                 {"steps", steps_j}};
    return root.dump(2) + "\n";
}

std::string EvalResult::to_json(const EvalTask& task) const {
    json items_j = json::array();
    for (size_t i = 0; i < scores.size(); i++)
        items_j.push_back({{"prompt", task.items[i].prompt},
                           {"reference", task.items[i].reference},
                           {"prediction", predictions[i]},
                           {"score", scores[i]}});
    json root = {{"schema_version", schema_version},
                 {"task_id", task_id},
                 {"metric", metric},
                 {"aggregate", aggregate},
                 {"items", items_j}};
    return root.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

}  // namespace natlas
