// End-to-end acceptance checks for the whole toolkit. Each criterion prints
// exactly one PASS/FAIL line; the exit code is the number of failures. The
// CLI-level criteria need the natlas binary path in NATLAS_CLI.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "natlas/harness.hpp"
#include "natlas/lape.hpp"
#include "natlas/lens.hpp"
#include "natlas/planted.hpp"
#include "natlas/report.hpp"
#include "natlas/stats.hpp"
#include "natlas/steer.hpp"
#include "natlas/tokenizer.hpp"
#include "natlas/train.hpp"

using namespace natlas;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int n, bool ok, const std::string& what) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, what.c_str());
    std::fflush(stdout);
    if (!ok) g_failures++;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---- planted fixture shared by criteria 1 and 4-8 ----------------------------

std::vector<LanguageSpec> planted_specs() {
    std::vector<LanguageSpec> specs(4);
    specs[0] = {"aa", "P", 1, 101, {'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'}};
    specs[1] = {"ab", "P", 2, 102, {'i', 'j', 'k', 'l', 'm', 'n', 'o', 'p'}};
    specs[2] = {"ba", "Q", 3, 103, {'q', 'r', 's', 't', 'u', 'v', 'w', 'x'}};
    specs[3] = {"bb", "Q", 4, 104, {'0', '1', '2', '3', '4', '5', 'y', 'z'}};
    return specs;
}

struct Planted {
    std::vector<LanguageSpec> specs = planted_specs();
    Checkpoint ckpt;
    PlantLedger ledger;
    Corpus corpus;
    ActivationStats stats;
    LapeTable table;
    SelectionResult sel;
    double identify_seconds = 0;

    Planted() {
        PlantOptions opt;
        opt.config.n_layers = 4;
        opt.config.d_model = 32;
        opt.config.n_heads = 4;
        opt.config.d_ff = 256;
        opt.config.vocab_size = tok::kVocab;
        opt.config.max_seq_len = 64;
        opt.per_lang = 8;
        opt.seed = 12;
        std::tie(ckpt, ledger) = plant_model(specs, opt);
        corpus = synth_corpus(specs, 24, 120, 7);
        auto t0 = std::chrono::steady_clock::now();
        stats = accumulate(ckpt, corpus, specs);
        table = compute_lape(stats);
        SelectOptions sopt;  // k = 1%, both percentiles 95
        sel = select(table, sopt);
        identify_seconds = seconds_since(t0);
    }
};

void criterion1(const Planted& fx) {
    bool exact = fx.sel.sets.size() == fx.ledger.neurons.size();
    size_t planted_total = 0;
    for (const auto& [lang, v] : fx.ledger.neurons) {
        planted_total += v.size();
        auto it = fx.sel.sets.find(lang);
        exact = exact && it != fx.sel.sets.end() && it->second.neurons == v;
    }
    bool fast = fx.identify_seconds < 60.0;
    report(1, exact && fast,
           fmt("planted-oracle recovery: %zu kept vs %zu planted, exact sets %s, identify %.2fs",
               fx.sel.kept, planted_total, exact ? "yes" : "NO", fx.identify_seconds));
}

// ---- criterion 2: entropy vs long-double oracle -------------------------------

long double entropy_oracle(const std::vector<double>& p) {
    long double sum = 0;
    for (double x : p) sum += x;
    if (sum == 0) return std::log((long double)p.size());
    long double h = 0;
    for (double x : p) {
        if (x == 0) continue;
        long double q = (long double)x / sum;
        h -= q * std::log(q);
    }
    return h;
}

void criterion2() {
    const int kVectors = 1000, kLangs = 4;
    ActivationStats st;
    st.n_layers = 1;
    st.d_ff = kVectors;
    for (int l = 0; l < kLangs; l++) st.langs.push_back(std::string(1, char('a' + l)));
    st.provenance = "acceptance";
    st.context_len = st.stride = 8;
    st.totals.assign(kLangs, 1000);
    st.active.assign(size_t(kLangs) * kVectors, 0);
    st.sums.assign(size_t(kLangs) * kVectors, {});
    st.sketches.assign(size_t(kLangs) * kVectors, QuantileSketch());
    std::mt19937_64 rng(2024);
    for (size_t i = 0; i < st.active.size(); i++) st.active[i] = rng() % 1001;

    LapeTable t = compute_lape(st);
    double worst = 0;
    for (int j = 0; j < kVectors; j++) {
        std::vector<double> p(kLangs);
        for (int l = 0; l < kLangs; l++) p[l] = double(st.active[size_t(l) * kVectors + j]) / 1000.0;
        worst = std::max(worst, double(std::fabs((long double)t.entropy[j] - entropy_oracle(p))));
    }
    bool random_ok = worst <= 1e-12;

    bool corners_ok = true;
    double corner_worst = 0;
    for (int n = 2; n <= 6; n++) {
        std::vector<double> onehot(n, 0.0);
        onehot[0] = 0.37;
        corners_ok = corners_ok && lape_entropy(onehot) == 0.0;
        std::vector<double> uniform(n, 0.25);
        double err = std::fabs(lape_entropy(uniform) - std::log(double(n)));
        corner_worst = std::max(corner_worst, err);
        corners_ok = corners_ok && err <= 1e-15;
    }
    report(2, random_ok && corners_ok,
           fmt("entropy oracle: max |err| %.2e over %d vectors, corner |err| %.2e", worst,
               kVectors, corner_worst));
}

// ---- criterion 3: merge equivalence -------------------------------------------

std::vector<LanguageSpec> merge_specs() {
    std::vector<LanguageSpec> specs(3);
    specs[0] = {"aa", "P", 1, 31, {'a', 'b', 'c', 'd', 'e', 'f'}};
    specs[1] = {"ab", "P", 2, 32, {'g', 'h', 'i', 'j', 'k', 'l'}};
    specs[2] = {"ba", "Q", 3, 33, {'m', 'n', 'o', 'p', 'q', 'r'}};
    return specs;
}

bool stats_counts_equal(const ActivationStats& a, const ActivationStats& b) {
    if (a.langs != b.langs || a.totals != b.totals || a.active != b.active) return false;
    if (a.sums.size() != b.sums.size()) return false;
    for (size_t i = 0; i < a.sums.size(); i++)
        if (!(a.sums[i] == b.sums[i])) return false;
    return true;
}

void criterion3() {
    ModelConfig cfg;
    cfg.n_layers = 2;
    cfg.d_model = 16;
    cfg.n_heads = 2;
    cfg.d_ff = 24;
    cfg.vocab_size = tok::kVocab;
    cfg.max_seq_len = 32;
    Checkpoint ckpt = Trainer(cfg, 41).to_checkpoint();
    auto specs = merge_specs();
    Corpus corpus = synth_corpus(specs, 8, 60, 13);
    ActivationStats full = accumulate(ckpt, corpus, specs);

    // exact tap streams, mirroring the accumulator's windowing
    int context = std::min(256, cfg.max_seq_len);
    std::map<std::string, std::vector<std::vector<float>>> streams;  // lang -> [neuron][values]
    for (const auto& [lang, docs] : corpus.docs) {
        auto& vals = streams[lang];
        vals.assign(size_t(cfg.n_layers) * cfg.d_ff, {});
        for (const auto& doc : docs) {
            std::vector<int> toks = tok::tokenize(doc);
            for (size_t start = 0; start < toks.size(); start += size_t(context)) {
                size_t end = std::min(start + size_t(context), toks.size());
                std::vector<int> win(toks.begin() + start, toks.begin() + end);
                ForwardResult fr = forward(ckpt, win);
                for (int l = 0; l < cfg.n_layers; l++)
                    for (int p = 0; p < int(win.size()); p++)
                        for (int j = 0; j < cfg.d_ff; j++)
                            vals[size_t(l) * cfg.d_ff + j].push_back(fr.taps[l].at(p, j));
            }
        }
    }

    auto sketch_rank_ok = [&](const ActivationStats& st) {
        std::mt19937_64 pick(99);
        for (int trial = 0; trial < 6; trial++) {
            int li = int(pick() % st.langs.size());
            size_t nid = pick() % st.n_neurons();
            auto sorted = streams.at(st.langs[li])[nid];
            std::sort(sorted.begin(), sorted.end());
            size_t n = sorted.size();
            const auto& sk = st.sketches[st.idx(li, 0, 0) + nid];
            for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
                float est = sk.quantile(q);
                size_t lo = std::lower_bound(sorted.begin(), sorted.end(), est) - sorted.begin();
                size_t hi = std::upper_bound(sorted.begin(), sorted.end(), est) - sorted.begin();
                size_t target = std::max<size_t>(1, size_t(std::ceil(q * double(n))));
                size_t err = target < lo ? lo - target : (target > hi ? target - hi : 0);
                if (double(err) / double(n) > 0.01) return false;
            }
        }
        return true;
    };

    std::mt19937_64 rng(555);
    int split_fail = -1;
    bool sketches_ok = sketch_rank_ok(full);
    for (int s = 0; s < 100 && split_fail < 0; s++) {
        Corpus a, b;
        for (const auto& [lang, docs] : corpus.docs) {
            auto& da = a.docs[lang];
            auto& db = b.docs[lang];
            for (const auto& d : docs) (rng() % 2 ? da : db).push_back(d);
            if (da.empty()) { da.push_back(db.back()); db.pop_back(); }
            if (db.empty()) { db.push_back(da.back()); da.pop_back(); }
        }
        ActivationStats sa = accumulate(ckpt, a, specs);
        ActivationStats sb = accumulate(ckpt, b, specs);
        sa.merge(sb);
        if (!stats_counts_equal(sa, full)) split_fail = s;
        if (s == 0) sketches_ok = sketches_ok && sketch_rank_ok(sa);
    }
    report(3, split_fail < 0 && sketches_ok,
           fmt("merge equivalence: 100 splits %s, sketch rank error %s 1%%",
               split_fail < 0 ? "exact" : fmt("FAILED at split %d", split_fail).c_str(),
               sketches_ok ? "within" : "EXCEEDS"));
}

// ---- criterion 4: intervention identities -------------------------------------

bool logits_bitwise_equal(const Mat& a, const Mat& b) {
    return a.rows == b.rows && a.cols == b.cols &&
           std::memcmp(a.row(0), b.row(0), size_t(a.rows) * a.cols * sizeof(float)) == 0;
}

void criterion4(const Planted& fx) {
    const NeuronSet& aa = fx.sel.sets.at("aa");
    std::mt19937_64 rng(808);
    int identical = 0, taps_exact = 0;
    const int kPrompts = 50;

    InterventionPlan empty;
    InterventionPlan add0;
    {
        std::map<int, std::vector<int>> by_layer;
        for (auto [l, j] : aa.neurons) by_layer[l].push_back(j);
        for (auto& [l, js] : by_layer)
            add0.directives.push_back(TapDirective::add_sparse(l, js, {0.f}));
    }
    DiffMeanVector dm = compute_diffmean(fx.stats, "aa", 0.0);
    InterventionPlan dm0 = plan_diffmean(dm);

    BoostVector boosts = compute_boosts(fx.stats, aa);
    InterventionPlan force = compose({plan_deactivate(aa, 0.f), plan_activate(boosts)});
    std::map<std::pair<int, int>, float> want;
    for (auto [l, j, v] : boosts.boosts) want[{l, j}] = v;

    for (int i = 0; i < kPrompts; i++) {
        int len = 4 + int(rng() % 37);
        std::vector<int> toks(len);
        for (auto& t : toks) t = int(rng() % 256);
        ForwardResult base = forward(fx.ckpt, toks);
        bool same =
            logits_bitwise_equal(base.logits, forward(fx.ckpt, toks, empty.directives).logits) &&
            logits_bitwise_equal(base.logits, forward(fx.ckpt, toks, add0.directives).logits) &&
            logits_bitwise_equal(base.logits, forward(fx.ckpt, toks, dm0.directives).logits);
        identical += same;

        ForwardResult forced = forward(fx.ckpt, toks, force.directives);
        bool exact = true;
        for (const auto& [lj, v] : want)
            for (int p = 0; p < len; p++)
                exact = exact && forced.taps[lj.first].at(p, lj.second) == v;
        taps_exact += exact;
    }
    report(4, identical == kPrompts && taps_exact == kPrompts,
           fmt("intervention identities: %d/%d baselines bit-exact, %d/%d forced taps exact",
               identical, kPrompts, taps_exact, kPrompts));
}

// ---- criterion 5: selection monotonicity + count table ------------------------

void criterion5(const Planted& fx) {
    std::vector<double> ks{1, 2, 3, 4, 5};
    bool nested = true;
    std::vector<SelectionResult> sels;
    for (double k : ks) {
        SelectOptions o;
        o.k_percent = k;
        LapeTable t = fx.table;  // select() annotates the table, work on a copy
        sels.push_back(select(t, o));
    }
    for (size_t i = 1; i < sels.size(); i++) {
        std::set<std::pair<int, int>> prev(sels[i - 1].kept_neurons.begin(),
                                           sels[i - 1].kept_neurons.end());
        std::set<std::pair<int, int>> next(sels[i].kept_neurons.begin(),
                                           sels[i].kept_neurons.end());
        nested = nested && std::includes(next.begin(), next.end(), prev.begin(), prev.end());
        for (const auto& [lang, s] : sels[i - 1].sets) {
            if (!sels[i].sets.count(lang)) {
                nested = nested && s.neurons.empty();
                continue;
            }
            const auto& wide = sels[i].sets.at(lang).neurons;
            std::set<std::pair<int, int>> w(wide.begin(), wide.end());
            for (auto& nj : s.neurons) nested = nested && w.count(nj);
        }
    }

    CountTable ct = neuron_count_table(fx.stats, ks);
    std::string csv = count_table_csv(ct);
    std::vector<std::string> lines;
    for (size_t p = 0; p < csv.size();) {
        size_t e = csv.find('\n', p);
        if (e == std::string::npos) {
            lines.push_back(csv.substr(p));
            break;
        }
        lines.push_back(csv.substr(p, e - p));
        p = e + 1;
    }
    auto fields = [](const std::string& s) {
        return int(std::count(s.begin(), s.end(), ',')) + 1;
    };
    bool layout = lines.size() == 1 + fx.specs.size() && lines[0].rfind("language,", 0) == 0;
    for (const auto& l : lines) layout = layout && fields(l) == int(1 + ks.size());
    report(5, nested && layout,
           fmt("selection monotonicity: k 1..5 nested %s, count table %zu langs x %zu ks %s",
               nested ? "yes" : "NO", fx.specs.size(), ks.size(),
               layout ? "well-formed" : "MALFORMED"));
}

// ---- criterion 6: lens consistency --------------------------------------------

void criterion6(const Planted& fx) {
    int agree = 0, mass_bad = 0;
    const int kPrompts = 100;
    for (int i = 0; i < kPrompts; i++) {
        const auto& sp = fx.specs[i % fx.specs.size()];
        std::string prompt = synth_prompts(sp, 1, 6 + i % 5, 900 + uint64_t(i))[0];
        std::vector<int> toks = tok::tokenize(prompt);
        LensResult lr = lens_distributions(fx.ckpt, toks);
        const auto& last = lr.dist.back();
        int best = 0;
        for (int t = 1; t < int(last.size()); t++)
            if (last[t] > last[best]) best = t;
        GenSettings gs;
        gs.max_tokens = 1;
        GenResult g = generate(fx.ckpt, toks, {}, gs);
        agree += !g.tokens.empty() && g.tokens[0] == best;

        auto prof = language_profile(lr, fx.specs, sp.id, fx.specs[(i + 1) % 4].id);
        for (const auto& mm : prof.lang_mass) {
            double total = 0;
            for (const auto& [k, v] : mm) total += v;
            mass_bad += std::fabs(total - 1.0) > 1e-6;
        }
    }
    report(6, agree == kPrompts && mass_bad == 0,
           fmt("lens consistency: argmax agreement %d/%d, %d layer masses off by > 1e-6", agree,
               kPrompts, mass_bad));
}

// ---- criterion 7: planted forcing ---------------------------------------------

void criterion7(const Planted& fx) {
    auto questions = synth_questions(fx.specs, 6, 10, 77);
    ForcingOptions opt;
    opt.gen = make_gen_settings(24);
    ForcingReport deact = run_forcing(fx.ckpt, fx.stats, fx.sel, fx.specs, questions, opt);
    ForcingOptions act = opt;
    act.strategy = "activate";
    ForcingReport actonly = run_forcing(fx.ckpt, fx.stats, fx.sel, fx.specs, questions, act);

    bool all_cells = true;
    for (size_t s = 0; s < deact.rate.size(); s++)
        for (size_t t = 0; t < deact.rate.size(); t++)
            if (s != t) all_cells = all_cells && deact.rate[s][t] == 1.0;
    bool dominance = actonly.overall <= deact.overall;
    report(7, all_cells && dominance,
           fmt("planted forcing: deact+act %.1f%% over 12 pairs x 6 questions, activate-only "
               "%.1f%% (dominance %s)",
               100 * deact.overall, 100 * actonly.overall, dominance ? "holds" : "VIOLATED"));
}

// ---- criterion 8: planted fallback --------------------------------------------

void criterion8(const Planted& fx) {
    std::vector<std::string> prompts;
    for (int i = 0; i < 70; i++)
        prompts.push_back(
            synth_prompts(fx.specs[i % fx.specs.size()], 1, 8, 500 + uint64_t(i))[0]);
    std::vector<std::string> order{"aa", "ab", "ba", "bb"};
    FallbackOptions opt;
    opt.gen = make_gen_settings(16);
    FallbackReport rep = run_fallback(fx.ckpt, fx.sel, fx.specs, order, prompts, opt);

    std::vector<std::string> expect{"aa", "ab", "ba", "bb", "unknown"};
    bool chain = rep.steps.size() == expect.size();
    double min_share = 1.0;
    for (size_t s = 0; chain && s < rep.steps.size(); s++) {
        chain = rep.steps[s].top == expect[s] && rep.steps[s].top_share >= 0.95;
        min_share = std::min(min_share, rep.steps[s].top_share);
    }
    report(8, chain, fmt("planted fallback: priority chain over %zu steps, min top share %.1f%%",
                         rep.steps.size(), 100 * min_share));
}

// ---- criteria 9 and 10: CLI runs ----------------------------------------------

const char* cli_path() { return std::getenv("NATLAS_CLI"); }

int run_cli(const std::string& args) {
    std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

nlohmann::json parse_file(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

void criterion9(const fs::path& work) {
    if (!cli_path()) {
        report(9, false, "trained-model direction: NATLAS_CLI not set");
        return;
    }
    bool ok = true;
    std::string detail;
    for (int seed = 1; seed <= 3 && ok; seed++) {
        fs::path dir = work / ("train_s" + std::to_string(seed));
        auto t0 = std::chrono::steady_clock::now();
        int rc = run_cli(fmt("--seed %d --out-dir %s train --steps 1500", seed, dir.c_str()));
        double train_s = seconds_since(t0);
        rc |= run_cli(fmt("--seed %d --out-dir %s identify --model %s/model.natlas --registry "
                          "%s/registry.json --corpus %s/corpus --k 3",
                          seed, dir.c_str(), dir.c_str(), dir.c_str(), dir.c_str()));
        if (rc != 0 || train_s > 300) {
            ok = false;
            detail = fmt("seed %d: rc %d, train %.0fs", seed, rc, train_s);
            break;
        }
        nlohmann::json selj = parse_file(dir / "selection.json");
        nlohmann::json regj = parse_file(dir / "registry.json");
        std::map<std::string, std::string> family;
        for (const auto& l : regj.at("languages"))
            family[l.at("id").get<std::string>()] = l.at("family").get<std::string>();

        std::map<std::string, std::set<std::pair<int, int>>> sets;
        for (const auto& [lang, arr] : selj.at("sets").items())
            for (const auto& p : arr) sets[lang].insert({p.at(0).get<int>(), p.at(1).get<int>()});
        double win = 0, cross = 0;
        int wn = 0, cn = 0;
        for (auto a = sets.begin(); a != sets.end(); ++a)
            for (auto b = std::next(a); b != sets.end(); ++b) {
                std::vector<std::pair<int, int>> inter, uni;
                std::set_intersection(a->second.begin(), a->second.end(), b->second.begin(),
                                      b->second.end(), std::back_inserter(inter));
                std::set_union(a->second.begin(), a->second.end(), b->second.begin(),
                               b->second.end(), std::back_inserter(uni));
                double jac = uni.empty() ? 0.0 : double(inter.size()) / double(uni.size());
                if (family[a->first] == family[b->first]) {
                    win += jac;
                    wn++;
                } else {
                    cross += jac;
                    cn++;
                }
            }
        win /= std::max(wn, 1);
        cross /= std::max(cn, 1);

        int late = 0, total = 0;
        for (const auto& p : selj.at("kept_neurons")) {
            total++;
            late += p.at(0).get<int>() >= 2;  // top half of the 4 layers
        }
        double late_share = total ? double(late) / total : 0.0;
        bool seed_ok = win > cross && late_share >= 0.5;
        ok = ok && seed_ok;
        detail += fmt("%sseed %d: within %.3f vs cross %.3f, late %.0f%% (%.0fs)",
                      seed > 1 ? "; " : "", seed, win, cross, 100 * late_share, train_s);
    }
    report(9, ok, "trained-model direction: " + detail);
}

void criterion10(const fs::path& work) {
    if (!cli_path()) {
        report(10, false, "determinism: NATLAS_CLI not set");
        return;
    }
    fs::path plant_in = work / "det_plant_a";  // shared input artifacts, run A
    std::string model = (plant_in / "model.natlas").string();
    std::string reg = (plant_in / "registry.json").string();
    std::string selp = (work / "det_identify_a" / "selection.json").string();
    std::string stp = (work / "det_identify_a" / "stats.natstat").string();

    fs::path task = work / "task.jsonl";
    {
        std::ofstream out(task);
        out << R"({"prompt":"Q: abcd? A:","reference":"abab","max_tokens":8})" << "\n";
        out << R"({"prompt":"Q: ijkl? A:","reference":"ij","max_tokens":6})" << "\n";
    }

    // every subcommand, args identical across the two runs except --out-dir
    std::vector<std::pair<std::string, std::string>> cmds{
        {"plant", "--seed 5 --out-dir %s plant"},
        {"identify", "--seed 5 --out-dir %s identify --model " + model + " --registry " + reg +
                         " --corpus " + (plant_in / "corpus").string()},
        {"overlap", "--seed 5 --out-dir %s overlap --selection " + selp},
        {"lens", "--seed 5 --out-dir %s lens --model " + model + " --registry " + reg +
                     " --pivot ab --per-lang 2 --len 8"},
        {"force", "--seed 5 --out-dir %s force --model " + model + " --registry " + reg +
                      " --selection " + selp + " --stats " + stp +
                      " --questions 1 --max-tokens 12"},
        {"fallback", "--seed 5 --out-dir %s fallback --model " + model + " --registry " + reg +
                         " --selection " + selp + " --prompts 6 --max-tokens 12"},
        {"train", "--seed 3 --out-dir %s train --steps 40 --docs 8 --doc-len 80"},
        {"eval", "--seed 5 --out-dir %s eval --model " + model + " --task " + task.string() +
                     " --metric char_f1"},
        {"steer-generate", "--seed 5 --out-dir %s steer-generate --model " + model +
                               " --prompt \"Q: abcd? A:\" --max-tokens 8"},
    };

    bool ok = true;
    std::string bad;
    for (const auto& [name, tmpl] : cmds) {
        fs::path da = work / ("det_" + name + "_a");
        fs::path db = work / ("det_" + name + "_b");
        for (const fs::path& d : {da, db}) {
            std::string args = tmpl;
            args.replace(args.find("%s"), 2, d.string());
            if (run_cli(args) != 0) {
                ok = false;
                bad = name + " exited nonzero";
                break;
            }
        }
        if (!ok) break;

        auto slurp = [](const fs::path& root, std::map<std::string, std::string>& out) {
            for (const auto& e : fs::recursive_directory_iterator(root)) {
                if (!e.is_regular_file()) continue;
                std::ifstream in(e.path(), std::ios::binary);
                std::string rel = fs::relative(e.path(), root).string();
                out[rel] = std::string(std::istreambuf_iterator<char>(in), {});
            }
        };
        std::map<std::string, std::string> fa, fb;
        slurp(da, fa);
        slurp(db, fb);
        if (fa.empty() || fa.size() != fb.size()) {
            ok = false;
            bad = name + " produced differing file sets";
            break;
        }
        for (const auto& [rel, bytes] : fa)
            if (!fb.count(rel) || fb.at(rel) != bytes) {
                ok = false;
                bad = name + ": " + rel + " differs between runs";
                break;
            }
        if (!ok) break;
    }
    report(10, ok,
           ok ? fmt("determinism: %zu subcommands byte-identical across two runs", cmds.size())
              : "determinism: " + bad);
}

}  // namespace

int main() {
    fs::path work = fs::temp_directory_path() / "natlas_acceptance";
    std::error_code ec;
    fs::remove_all(work, ec);
    fs::create_directories(work);

    std::unique_ptr<Planted> fx;
    try {
        fx = std::make_unique<Planted>();
    } catch (const std::exception& e) {
        for (int n : {1, 4, 5, 6, 7, 8})
            report(n, false, std::string("planted fixture failed: ") + e.what());
    }
    if (fx) {
        try { criterion1(*fx); } catch (const std::exception& e) { report(1, false, e.what()); }
    }
    try { criterion2(); } catch (const std::exception& e) { report(2, false, e.what()); }
    try { criterion3(); } catch (const std::exception& e) { report(3, false, e.what()); }
    if (fx) {
        try { criterion4(*fx); } catch (const std::exception& e) { report(4, false, e.what()); }
        try { criterion5(*fx); } catch (const std::exception& e) { report(5, false, e.what()); }
        try { criterion6(*fx); } catch (const std::exception& e) { report(6, false, e.what()); }
        try { criterion7(*fx); } catch (const std::exception& e) { report(7, false, e.what()); }
        try { criterion8(*fx); } catch (const std::exception& e) { report(8, false, e.what()); }
    }
    try { criterion9(work); } catch (const std::exception& e) { report(9, false, e.what()); }
    try { criterion10(work); } catch (const std::exception& e) { report(10, false, e.what()); }

    std::printf("%d of 10 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
