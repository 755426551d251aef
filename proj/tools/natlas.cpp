// natlas command line: plant/train a tiny byte-level model, identify
// language-specific FFN neurons, probe layers with the logit lens, and run
// the steering experiments (forcing, fallback, evals). Every subcommand
// writes deterministic report files into --out-dir.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "natlas/classifier.hpp"
#include "natlas/common.hpp"
#include "natlas/harness.hpp"
#include "natlas/lape.hpp"
#include "natlas/lens.hpp"
#include "natlas/model.hpp"
#include "natlas/planted.hpp"
#include "natlas/report.hpp"
#include "natlas/stats.hpp"
#include "natlas/steer.hpp"
#include "natlas/tokenizer.hpp"
#include "natlas/train.hpp"

namespace fs = std::filesystem;
using namespace natlas;
using nlohmann::json;

namespace {

struct Globals {
    uint64_t seed = 0;
    std::string out_dir = "out";
};

std::string lang_id_for(int family, int index) {
    return {char('a' + family), char('a' + index)};
}

// Assign ids/priorities across families: priority follows creation order, so
// the first language of the first family is the fallback winner.
std::vector<LanguageSpec> build_registry(int families, int langs_per_family,
                                         double shared_fraction, int alphabet, uint64_t seed) {
    CodepointPool pool;
    std::vector<LanguageSpec> all;
    for (int f = 0; f < families; ++f) {
        std::string fam(1, char('A' + f));
        auto specs = synth_family(fam, langs_per_family, shared_fraction, alphabet,
                                  splitmix64(seed + uint64_t(f) * 0x9e3779b97f4a7c15ull), pool);
        for (int i = 0; i < int(specs.size()); ++i) {
            specs[i].id = lang_id_for(f, i);
            specs[i].priority = int(all.size()) + 1;
            all.push_back(std::move(specs[i]));
        }
    }
    return all;
}

void dump_corpus(const Corpus& corpus, const std::string& dir) {
    for (const auto& [lang, docs] : corpus.docs) {
        fs::create_directories(fs::path(dir) / lang);
        for (size_t i = 0; i < docs.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "%03zu.txt", i);
            write_text_file((fs::path(dir) / lang / name).string(), docs[i]);
        }
    }
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        try {
            out.push_back(std::stod(s.substr(pos, comma - pos)));
        } catch (const std::exception&) {
            throw ValidationError("bad numeric list: " + s);
        }
        pos = comma + 1;
    }
    if (out.empty()) throw ValidationError("empty numeric list");
    return out;
}

std::vector<std::string> parse_id_list(const std::string& s) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        std::string item = s.substr(pos, comma - pos);
        if (!item.empty()) out.push_back(item);
        pos = comma + 1;
    }
    return out;
}

// ---- plant ----------------------------------------------------------------

struct PlantArgs {
    int languages = 4, per_lang = 8, layers = 4, heads = 4, d_ff = 256;
    int d_model = 0;  // 0: smallest width that fits the planted coordinates
    int max_seq = 128, alphabet = 16, docs = 24, doc_len = 120;
};

void cmd_plant(const Globals& g, const PlantArgs& a) {
    fs::create_directories(g.out_dir);
    auto specs = build_registry(1, a.languages, 0.0, a.alphabet, g.seed);
    int d_model = a.d_model;
    if (d_model == 0) {
        int need = 2 * a.languages * a.per_lang + 4;
        int step = 2 * a.heads;  // even head_dim
        d_model = (need + step - 1) / step * step;
    }
    PlantOptions opt;
    opt.config = ModelConfig{a.layers, d_model, a.heads, a.d_ff, tok::kVocab, a.max_seq};
    opt.seed = g.seed;
    opt.per_lang = a.per_lang;
    auto [ckpt, ledger] = plant_model(specs, opt);

    save_registry(specs, (fs::path(g.out_dir) / "registry.json").string());
    save_checkpoint(ckpt, (fs::path(g.out_dir) / "model.natlas").string());
    ledger.save((fs::path(g.out_dir) / "ledger.json").string());
    Corpus corpus = synth_corpus(specs, a.docs, a.doc_len, splitmix64(g.seed ^ 0xc0a95ull));
    dump_corpus(corpus, (fs::path(g.out_dir) / "corpus").string());
    std::printf("planted %d languages x %d neurons into layer %d (d_model %d)\n", a.languages,
                a.per_lang, opt.plant_layer < 0 ? a.layers / 2 : opt.plant_layer, d_model);
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
    int families = 2, langs = 3, alphabet = 24, docs = 24, doc_len = 160;
    double shared = 0.6;
    int layers = 4, d_model = 48, heads = 4, d_ff = 192, max_seq = 64;
    int steps = 900, batch = 8, seq_len = 48, warmup = 40;
    double lr = 1.5e-3;
};

void cmd_train(const Globals& g, const TrainArgs& a) {
    fs::create_directories(g.out_dir);
    auto specs = build_registry(a.families, a.langs, a.shared, a.alphabet, g.seed);
    Corpus corpus = synth_corpus(specs, a.docs, a.doc_len, splitmix64(g.seed ^ 0xd0c5ull));

    TrainConfig cfg;
    cfg.model = ModelConfig{a.layers, a.d_model, a.heads, a.d_ff, tok::kVocab, a.max_seq};
    cfg.steps = a.steps;
    cfg.batch = a.batch;
    cfg.seq_len = a.seq_len;
    cfg.lr = a.lr;
    cfg.warmup = a.warmup;
    cfg.seed = g.seed;
    TrainResult res = train_tiny(cfg, corpus);

    save_registry(specs, (fs::path(g.out_dir) / "registry.json").string());
    dump_corpus(corpus, (fs::path(g.out_dir) / "corpus").string());
    save_checkpoint(res.ckpt, (fs::path(g.out_dir) / "model.natlas").string());
    std::string csv = "step,loss\n";
    char buf[64];
    for (size_t i = 0; i < res.loss_curve.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i, res.loss_curve[i]);
        csv += buf;
    }
    write_text_file((fs::path(g.out_dir) / "losses.csv").string(), csv);
    std::printf("trained %d steps, loss %.4f -> %.4f\n", a.steps, res.initial_loss,
                res.final_loss);
}

// ---- identify ---------------------------------------------------------------

struct IdentifyArgs {
    std::string model, registry, corpus;
    double k = 1.0, filter_pct = 95.0, threshold_pct = 95.0;
    int context = 256, stride = 0;
    bool filter_on_values = false;
    size_t max_bytes = 0;
    std::string ks = "1,2,3,4,5";
};

void cmd_identify(const Globals& g, const IdentifyArgs& a) {
    fs::create_directories(g.out_dir);
    Checkpoint ckpt = load_checkpoint(a.model);
    auto specs = load_registry(a.registry);
    Corpus corpus = load_corpus_dir(a.corpus, specs, a.max_bytes);

    AccumulateOptions acc;
    acc.context_len = a.context;
    acc.stride = a.stride;
    ActivationStats stats = accumulate(ckpt, corpus, specs, acc);
    stats.save((fs::path(g.out_dir) / "stats.natstat").string());

    LapeTable table = compute_lape(stats);
    SelectOptions opt;
    opt.k_percent = a.k;
    opt.filter_percentile = a.filter_pct;
    opt.threshold_percentile = a.threshold_pct;
    opt.filter_on_values = a.filter_on_values;
    SelectionResult sel = select(table, opt);

    sel.save((fs::path(g.out_dir) / "selection.json").string());
    write_text_file((fs::path(g.out_dir) / "lape.csv").string(), lape_csv(table));
    write_text_file((fs::path(g.out_dir) / "sets.csv").string(), selection_sets_csv(sel));
    CountTable ct = neuron_count_table(stats, parse_double_list(a.ks), opt);
    write_text_file((fs::path(g.out_dir) / "counts.csv").string(), count_table_csv(ct));
    auto hist = layer_histogram(sel, stats.n_layers);
    write_text_file((fs::path(g.out_dir) / "layer_hist.csv").string(),
                    layer_histogram_csv(hist, stats.n_layers));
    std::printf("kept %zu neurons (quota %zu) across %zu languages\n", sel.kept, sel.quota,
                sel.sets.size());
}

// ---- overlap ----------------------------------------------------------------

struct OverlapArgs {
    std::string selection;
    int layers = 0;  // 0: inferred from the sets
};

void cmd_overlap(const Globals& g, const OverlapArgs& a) {
    fs::create_directories(g.out_dir);
    SelectionResult sel = SelectionResult::load(a.selection);
    int n_layers = a.layers;
    if (n_layers == 0) {
        for (const auto& [lang, set] : sel.sets)
            for (auto [layer, j] : set.neurons) n_layers = std::max(n_layers, layer + 1);
    }
    OverlapMatrix m = overlap_matrix(sel);
    write_text_file((fs::path(g.out_dir) / "overlap.csv").string(), overlap_csv(m));
    std::vector<std::vector<double>> vals(m.langs.size(),
                                          std::vector<double>(m.langs.size(), 0));
    for (size_t i = 0; i < m.langs.size(); ++i)
        for (size_t j = 0; j < m.langs.size(); ++j) vals[i][j] = m.count[i][j];
    write_text_file((fs::path(g.out_dir) / "overlap.svg").string(),
                    heatmap_svg("neuron set overlap", m.langs, m.langs, vals));
    auto hist = layer_histogram(sel, n_layers);
    write_text_file((fs::path(g.out_dir) / "layer_hist.csv").string(),
                    layer_histogram_csv(hist, n_layers));
    std::printf("overlap matrix for %zu languages, %d layers\n", m.langs.size(), n_layers);
}

// ---- lens -------------------------------------------------------------------

struct LensArgs {
    std::string model, registry, prompts, target, pivot;
    std::string mode = "mass";
    int per_lang = 4, len = 40;
};

void cmd_lens(const Globals& g, const LensArgs& a) {
    fs::create_directories(g.out_dir);
    Checkpoint ckpt = load_checkpoint(a.model);
    auto specs = load_registry(a.registry);
    if (!find_lang(specs, a.pivot)) throw ValidationError("lens: unknown pivot " + a.pivot);
    LensMode mode;
    if (a.mode == "mass")
        mode = LensMode::mass;
    else if (a.mode == "top1")
        mode = LensMode::top1;
    else
        throw ValidationError("lens: mode must be mass or top1");

    std::map<std::string, std::vector<std::string>> prompts;
    if (!a.prompts.empty()) {
        Classifier cls(specs);
        for (const auto& line : read_lines(a.prompts)) {
            auto c = cls.classify(line);
            if (c.top1 != "unknown") prompts[c.top1].push_back(line);
        }
        if (prompts.empty())
            throw ValidationError("lens: no prompt line classified as a registered language");
    } else {
        for (const auto& s : specs) {
            Fnv1a h;
            h.update(s.id);
            for (int i = 0; i < a.per_lang; ++i)
                prompts[s.id].push_back(synth_doc(s, a.len, splitmix64(g.seed ^ h.h ^ uint64_t(i))));
        }
    }
    if (!a.target.empty() && !prompts.count(a.target))
        throw ValidationError("lens: no prompts for target " + a.target);

    ProfileSuite suite = profile_suite(ckpt, specs, prompts, a.pivot, mode);
    write_text_file((fs::path(g.out_dir) / "lens.csv").string(), suite_csv(suite));

    std::vector<std::pair<std::string, std::vector<double>>> series;
    if (!a.target.empty()) {
        series.emplace_back(a.target + " target", suite.target_prob.at(a.target));
        series.emplace_back("pivot under " + a.target, suite.pivot_prob.at(a.target));
    } else {
        for (const auto& lang : suite.langs)
            series.emplace_back(lang, suite.target_prob.at(lang));
    }
    series.emplace_back("mean target", suite.mean_target);
    write_text_file((fs::path(g.out_dir) / "lens.svg").string(),
                    line_chart_svg("language mass by layer", "layer", series));
    std::vector<std::pair<std::string, std::vector<double>>> ent;
    for (const auto& lang : suite.langs) ent.emplace_back(lang, suite.entropy.at(lang));
    write_text_file((fs::path(g.out_dir) / "lens_entropy.svg").string(),
                    line_chart_svg("language entropy by layer", "layer", ent));
    std::printf("lens on %zu languages, %d layers\n", suite.langs.size(), suite.n_layers);
}

// ---- force ------------------------------------------------------------------

struct ForceArgs {
    std::string model, registry, selection, stats;
    std::string strategy = "deact+act", family = "additive";
    double deact_value = 0.0, diffmean_scale = 1.0;
    bool diffmean_all_layers = false, boosts_active_only = false;
    int questions = 6, len = 24, max_tokens = 256;
};

void cmd_force(const Globals& g, const ForceArgs& a) {
    fs::create_directories(g.out_dir);
    Checkpoint ckpt = load_checkpoint(a.model);
    auto specs = load_registry(a.registry);
    SelectionResult sel = SelectionResult::load(a.selection);
    ActivationStats stats = ActivationStats::load(a.stats);

    auto questions = synth_questions(specs, a.questions, a.len, splitmix64(g.seed ^ 0x70ull));
    ForcingOptions opt;
    opt.strategy = a.strategy;
    opt.family = a.family;
    opt.deact_value = float(a.deact_value);
    opt.diffmean_scale = a.diffmean_scale;
    opt.diffmean_all_layers = a.diffmean_all_layers;
    opt.boosts_active_only = a.boosts_active_only;
    opt.gen = make_gen_settings(a.max_tokens);
    ForcingReport rep = run_forcing(ckpt, stats, sel, specs, questions, opt);

    write_text_file((fs::path(g.out_dir) / "forcing.json").string(), rep.to_json());
    write_text_file((fs::path(g.out_dir) / "forcing_matrix.csv").string(),
                    forcing_matrix_csv(rep));
    write_text_file((fs::path(g.out_dir) / "forcing_cells.csv").string(), forcing_cells_csv(rep));
    write_text_file((fs::path(g.out_dir) / "forcing.svg").string(),
                    heatmap_svg("forcing success rate (src rows, tgt cols)", rep.langs, rep.langs,
                                rep.rate));
    std::printf("forcing overall %.4f (%s, %s)\n", rep.overall, a.strategy.c_str(),
                a.family.c_str());
}

// ---- fallback ---------------------------------------------------------------

struct FallbackArgs {
    std::string model, registry, selection, order;
    int prompts = 70, len = 24, max_tokens = 48;
    double deact_value = -1.0;
};

void cmd_fallback(const Globals& g, const FallbackArgs& a) {
    fs::create_directories(g.out_dir);
    Checkpoint ckpt = load_checkpoint(a.model);
    auto specs = load_registry(a.registry);
    SelectionResult sel = SelectionResult::load(a.selection);

    std::vector<std::string> order = parse_id_list(a.order);
    if (order.empty())
        for (const LanguageSpec* s : priority_order(specs))
            if (sel.sets.count(s->id)) order.push_back(s->id);

    std::vector<std::string> prompts;
    for (int i = 0; i < a.prompts; ++i) {
        const LanguageSpec& s = specs[size_t(i) % specs.size()];
        prompts.push_back(frame_prompt(
            synth_doc(s, a.len, splitmix64(g.seed ^ 0xfbull ^ uint64_t(i))) + "?"));
    }
    FallbackOptions opt;
    opt.deact_value = float(a.deact_value);
    opt.gen = make_gen_settings(a.max_tokens);
    FallbackReport rep = run_fallback(ckpt, sel, specs, order, prompts, opt);

    write_text_file((fs::path(g.out_dir) / "fallback.json").string(), rep.to_json());
    write_text_file((fs::path(g.out_dir) / "fallback.csv").string(), fallback_csv(rep));
    std::printf("fallback over %zu steps, baseline top %s\n", rep.steps.size(),
                rep.steps.empty() ? "-" : rep.steps[0].top.c_str());
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
    std::string model, task, task_id, plan;
    std::string metric = "exact_match";
    int max_tokens = 32;
};

void cmd_eval(const Globals& g, const EvalArgs& a) {
    fs::create_directories(g.out_dir);
    Checkpoint ckpt = load_checkpoint(a.model);
    std::string id = a.task_id.empty() ? fs::path(a.task).stem().string() : a.task_id;
    EvalTask task = load_eval_task(a.task, id, a.metric);
    InterventionPlan plan;
    if (!a.plan.empty()) plan = InterventionPlan::load(a.plan);
    EvalResult res = run_eval(ckpt, task, plan, make_gen_settings(a.max_tokens));
    write_text_file((fs::path(g.out_dir) / "eval.json").string(), res.to_json(task));
    std::printf("eval %s: %s = %.4f over %zu items\n", id.c_str(), a.metric.c_str(),
                res.aggregate, task.items.size());
}

// ---- steer-generate -----------------------------------------------------------

struct SteerArgs {
    std::string model, plan, prompts_file;
    std::vector<std::string> prompts;
    int max_tokens = 64;
    double temperature = 0.0, penalty = 1.1;
};

void cmd_steer_generate(const Globals& g, const SteerArgs& a) {
    fs::create_directories(g.out_dir);
    Checkpoint ckpt = load_checkpoint(a.model);
    InterventionPlan plan;
    if (!a.plan.empty()) plan = InterventionPlan::load(a.plan);

    std::vector<std::string> prompts = a.prompts;
    if (!a.prompts_file.empty())
        for (auto& line : read_lines(a.prompts_file)) prompts.push_back(line);
    if (prompts.empty()) throw ValidationError("steer-generate: no prompts given");

    GenSettings gs = make_gen_settings(a.max_tokens);
    gs.temperature = float(a.temperature);
    gs.repetition_penalty = float(a.penalty);
    gs.seed = g.seed;

    json out;
    out["schema_version"] = 1;
    out["recipe"] = plan.recipe;
    out["generations"] = json::array();
    for (const auto& p : prompts) {
        auto toks = tok::tokenize(p);
        GenResult r = generate(ckpt, toks, plan.directives, gs);
        json item;
        item["prompt"] = p;
        item["text"] = r.text;
        item["tokens"] = r.tokens;
        out["generations"].push_back(item);
        std::printf("%s => %s\n", p.c_str(), r.text.c_str());
    }
    write_text_file((fs::path(g.out_dir) / "generations.json").string(),
                    out.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"language-neuron identification and steering workbench"};
    app.require_subcommand(1);
    app.set_config("--config", "", "plain key=value config file");

    Globals g;
    app.add_option("--seed", g.seed, "global random seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "report output directory")->capture_default_str();

    PlantArgs pa;
    auto* plant = app.add_subcommand("plant", "build a planted-oracle model + registry + corpus");
    plant->fallthrough();
    plant->add_option("--languages", pa.languages)->capture_default_str();
    plant->add_option("--per-lang", pa.per_lang, "planted neurons per language")
        ->capture_default_str();
    plant->add_option("--layers", pa.layers)->capture_default_str();
    plant->add_option("--heads", pa.heads)->capture_default_str();
    plant->add_option("--d-ff", pa.d_ff)->capture_default_str();
    plant->add_option("--d-model", pa.d_model, "0 = fit planted coordinates")
        ->capture_default_str();
    plant->add_option("--max-seq", pa.max_seq)->capture_default_str();
    plant->add_option("--alphabet", pa.alphabet, "codepoints per language")
        ->capture_default_str();
    plant->add_option("--docs", pa.docs, "corpus documents per language")->capture_default_str();
    plant->add_option("--doc-len", pa.doc_len, "codepoints per document")->capture_default_str();

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "train a tiny byte model on a synthetic registry");
    train->fallthrough();
    train->add_option("--families", ta.families)->capture_default_str();
    train->add_option("--langs", ta.langs, "languages per family")->capture_default_str();
    train->add_option("--shared", ta.shared, "within-family shared alphabet fraction")
        ->capture_default_str();
    train->add_option("--alphabet", ta.alphabet)->capture_default_str();
    train->add_option("--docs", ta.docs)->capture_default_str();
    train->add_option("--doc-len", ta.doc_len)->capture_default_str();
    train->add_option("--layers", ta.layers)->capture_default_str();
    train->add_option("--d-model", ta.d_model)->capture_default_str();
    train->add_option("--heads", ta.heads)->capture_default_str();
    train->add_option("--d-ff", ta.d_ff)->capture_default_str();
    train->add_option("--max-seq", ta.max_seq)->capture_default_str();
    train->add_option("--steps", ta.steps)->capture_default_str();
    train->add_option("--batch", ta.batch)->capture_default_str();
    train->add_option("--seq-len", ta.seq_len)->capture_default_str();
    train->add_option("--warmup", ta.warmup)->capture_default_str();
    train->add_option("--lr", ta.lr)->capture_default_str();

    IdentifyArgs ia;
    auto* identify = app.add_subcommand("identify", "accumulate tap stats and select neurons");
    identify->fallthrough();
    identify->add_option("--model", ia.model)->required();
    identify->add_option("--registry", ia.registry)->required();
    identify->add_option("--corpus", ia.corpus, "corpus directory")->required();
    identify->add_option("--k", ia.k, "bottom-k%% by entropy")->capture_default_str();
    identify->add_option("--filter-pct", ia.filter_pct)->capture_default_str();
    identify->add_option("--threshold-pct", ia.threshold_pct)->capture_default_str();
    identify->add_option("--context", ia.context)->capture_default_str();
    identify->add_option("--stride", ia.stride, "0 = context length")->capture_default_str();
    identify->add_flag("--filter-on-values", ia.filter_on_values,
                       "gate on mean tap values instead of probabilities");
    identify->add_option("--max-bytes", ia.max_bytes, "per-language corpus cap, 0 = none")
        ->capture_default_str();
    identify->add_option("--ks", ia.ks, "k%% columns for the count table")
        ->capture_default_str();

    OverlapArgs oa;
    auto* overlap = app.add_subcommand("overlap", "overlap matrix + layer histogram of a selection");
    overlap->fallthrough();
    overlap->add_option("--selection", oa.selection)->required();
    overlap->add_option("--layers", oa.layers, "0 = infer")->capture_default_str();

    LensArgs la;
    auto* lens = app.add_subcommand("lens", "per-layer language mass via the logit lens");
    lens->fallthrough();
    lens->add_option("--model", la.model)->required();
    lens->add_option("--registry", la.registry)->required();
    lens->add_option("--prompts", la.prompts, "prompt file, one per line (default: synthesized)");
    lens->add_option("--target", la.target, "focus language for the chart");
    lens->add_option("--pivot", la.pivot, "pivot language id")->required();
    lens->add_option("--mode", la.mode, "mass|top1")->capture_default_str();
    lens->add_option("--per-lang", la.per_lang, "synthesized prompts per language")
        ->capture_default_str();
    lens->add_option("--len", la.len, "synthesized prompt codepoints")->capture_default_str();

    ForceArgs fa;
    auto* force = app.add_subcommand("force", "language forcing matrix");
    force->fallthrough();
    force->add_option("--model", fa.model)->required();
    force->add_option("--registry", fa.registry)->required();
    force->add_option("--selection", fa.selection)->required();
    force->add_option("--stats", fa.stats)->required();
    force->add_option("--strategy", fa.strategy, "deact+act|activate")->capture_default_str();
    force->add_option("--family", fa.family, "additive|replace-mean|replace-median|diffmean")
        ->capture_default_str();
    force->add_option("--deact-value", fa.deact_value, "0 = multiply by 0")
        ->capture_default_str();
    force->add_option("--diffmean-scale", fa.diffmean_scale)->capture_default_str();
    force->add_flag("--diffmean-all-layers", fa.diffmean_all_layers);
    force->add_flag("--boosts-active-only", fa.boosts_active_only,
                    "mean over active tokens instead of all tokens");
    force->add_option("--questions", fa.questions, "questions per source language")
        ->capture_default_str();
    force->add_option("--len", fa.len, "question codepoints")->capture_default_str();
    force->add_option("--max-tokens", fa.max_tokens)->capture_default_str();

    FallbackArgs ba;
    auto* fallback = app.add_subcommand("fallback", "progressive deactivation cascade");
    fallback->fallthrough();
    fallback->add_option("--model", ba.model)->required();
    fallback->add_option("--registry", ba.registry)->required();
    fallback->add_option("--selection", ba.selection)->required();
    fallback->add_option("--order", ba.order, "comma id list (default: priority order)");
    fallback->add_option("--prompts", ba.prompts)->capture_default_str();
    fallback->add_option("--len", ba.len)->capture_default_str();
    fallback->add_option("--deact-value", ba.deact_value)->capture_default_str();
    fallback->add_option("--max-tokens", ba.max_tokens)->capture_default_str();

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "prompted eval from a JSON-lines task file");
    eval->fallthrough();
    eval->add_option("--model", ea.model)->required();
    eval->add_option("--task", ea.task, "JSON-lines {prompt, reference, max_tokens}")->required();
    eval->add_option("--task-id", ea.task_id, "default: task file stem");
    eval->add_option("--metric", ea.metric, "exact_match|char_f1")->capture_default_str();
    eval->add_option("--plan", ea.plan, "optional intervention plan JSON");
    eval->add_option("--max-tokens", ea.max_tokens, "default when an item omits it")
        ->capture_default_str();

    SteerArgs sa;
    auto* steer = app.add_subcommand("steer-generate", "generate under an intervention plan");
    steer->fallthrough();
    steer->add_option("--model", sa.model)->required();
    steer->add_option("--plan", sa.plan, "intervention plan JSON (empty = baseline)");
    steer->add_option("--prompt", sa.prompts, "prompt text (repeatable)");
    steer->add_option("--prompts-file", sa.prompts_file);
    steer->add_option("--max-tokens", sa.max_tokens)->capture_default_str();
    steer->add_option("--temperature", sa.temperature)->capture_default_str();
    steer->add_option("--penalty", sa.penalty, "repetition penalty")->capture_default_str();

    plant->callback([&] { cmd_plant(g, pa); });
    train->callback([&] { cmd_train(g, ta); });
    identify->callback([&] { cmd_identify(g, ia); });
    overlap->callback([&] { cmd_overlap(g, oa); });
    lens->callback([&] { cmd_lens(g, la); });
    force->callback([&] { cmd_force(g, fa); });
    fallback->callback([&] { cmd_fallback(g, ba); });
    eval->callback([&] { cmd_eval(g, ea); });
    steer->callback([&] { cmd_steer_generate(g, sa); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const RuntimeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
