#pragma once

#include <map>
#include <string>
#include <vector>

#include "natlas/classifier.hpp"
#include "natlas/lape.hpp"
#include "natlas/model.hpp"
#include "natlas/steer.hpp"

namespace natlas {

// Question-shaped prompts per language, sampled from each language's bigram
// chain and framed "Q: <sample>? A:".
std::map<std::string, std::vector<std::string>> synth_questions(
    const std::vector<LanguageSpec>& specs, int per_lang, int len, uint64_t seed);
std::string frame_prompt(const std::string& question);
std::vector<std::string> synth_prompts(const LanguageSpec& spec, int count, int len,
                                       uint64_t seed);

struct ForcingOptions {
    std::string strategy = "deact+act";  // or "activate"
    std::string family = "additive";     // or "replace-mean", "replace-median", "diffmean"
    float deact_value = 0.f;             // 0 compiles to multiply(0)
    double diffmean_scale = 1.0;
    bool diffmean_all_layers = false;    // default restricts to the target set's layers
    bool boosts_active_only = false;     // boost denominator: active tokens instead of all
    GenSettings gen;                     // defaults set by make_gen_settings
};

GenSettings make_gen_settings(int max_tokens);  // temp 0, penalty 1.1, stop at eos

struct ForcingCell {
    std::string src, tgt;
    int question = 0;
    std::string top1;
    bool success = false;
    bool unknown = false;
    std::string answer;  // generated text
};

struct ForcingReport {
    int schema_version = 1;
    std::string strategy, family, provenance;
    double k_percent = 0;
    float deact_value = 0;
    std::vector<std::string> langs;        // sorted
    std::vector<std::vector<double>> rate; // [src][tgt], diagonal included
    std::vector<ForcingCell> cells;        // lexicographic (src, tgt, question)
    double overall = 0;                    // mean over off-diagonal cells
    double unknown_rate = 0;               // over off-diagonal cells

    std::string to_json() const;
};

ForcingReport run_forcing(const Checkpoint& ckpt, const ActivationStats& stats,
                          const SelectionResult& sel, const std::vector<LanguageSpec>& specs,
                          const std::map<std::string, std::vector<std::string>>& questions,
                          const ForcingOptions& opt);

struct FallbackOptions {
    float deact_value = -1.f;
    GenSettings gen;
};

struct FallbackStep {
    std::vector<std::string> deactivated;        // cumulative
    std::map<std::string, double> distribution;  // classifier top1 shares, + "unknown"
    std::string top;                             // majority language
    double top_share = 0;
};

struct FallbackReport {
    int schema_version = 1;
    std::string provenance;
    float deact_value = 0;
    std::vector<std::string> order;
    int n_prompts = 0;
    std::vector<FallbackStep> steps;  // size order.size() + 1; step s deactivates order[0..s)

    std::string to_json() const;
};

FallbackReport run_fallback(const Checkpoint& ckpt, const SelectionResult& sel,
                            const std::vector<LanguageSpec>& specs,
                            const std::vector<std::string>& order,
                            const std::vector<std::string>& prompts,
                            const FallbackOptions& opt);

// Generic prompted eval. Task files are JSON-lines: {"prompt", "reference",
// "max_tokens"} per line.
struct EvalItem {
    std::string prompt, reference;
    int max_tokens = 32;
};

struct EvalTask {
    std::string id;
    std::string metric;  // "exact_match" or "char_f1"
    std::vector<EvalItem> items;
};

EvalTask load_eval_task(const std::string& path, const std::string& id,
                        const std::string& metric);

struct EvalResult {
    int schema_version = 1;
    std::string task_id, metric;
    std::vector<std::string> predictions;
    std::vector<double> scores;
    double aggregate = 0;

    std::string to_json(const EvalTask& task) const;
};

EvalResult run_eval(const Checkpoint& ckpt, const EvalTask& task,
                    const InterventionPlan& plan, const GenSettings& base);

// Metric helpers (exposed for oracle tests).
std::string normalize_answer(std::string_view s);  // trim, collapse spaces, ascii-lower
double char_f1(std::string_view reference, std::string_view prediction);  // codepoint multisets

}  // namespace natlas
