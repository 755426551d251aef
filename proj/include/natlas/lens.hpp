#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "natlas/language.hpp"
#include "natlas/model.hpp"

namespace natlas {

// Next-token distribution read at every layer: the post-block residual of the
// final prompt position goes through the final norm and unembedding. The last
// layer follows the exact same code path as the model head, so its argmax is
// the greedy next token bit for bit.
struct LensResult {
    std::vector<std::vector<float>> dist;  // [n_layers][vocab], softmax
};

LensResult lens_distributions(const Checkpoint& ckpt, std::span<const int> tokens,
                              std::span<const TapDirective> directives = {});

enum class LensMode { mass, top1 };

// Per-layer language view of a lens read. Language mass attributes each byte
// token to the languages whose alphabet contains it (1/k each when k share
// it); specials, non-ASCII lead/continuation bytes, and unclaimed bytes feed
// the "unknown" mass. top1 mode assigns all mass by the argmax token instead.
// Entropy is over the induced language distribution, unknown included.
struct LayerLanguageProfile {
    std::vector<std::string> langs;  // sorted ids, then implicit "unknown"
    std::vector<std::map<std::string, double>> lang_mass;          // per layer
    std::vector<double> target_prob, pivot_prob, entropy;          // per layer
    std::vector<std::vector<std::pair<int, double>>> top_tokens;   // per layer, (id, prob)
};

LayerLanguageProfile language_profile(const LensResult& lens,
                                      const std::vector<LanguageSpec>& specs,
                                      const std::string& target, const std::string& pivot,
                                      LensMode mode = LensMode::mass, int top_n = 5);

// Aggregated per-language curves over a prompt suite (each prompt's target is
// its own language; pivot is shared).
struct ProfileSuite {
    std::vector<std::string> langs;  // languages with prompts, sorted
    std::string pivot;
    int n_layers = 0;
    // [lang][layer] means over that language's prompts
    std::map<std::string, std::vector<double>> target_prob, pivot_prob, entropy;
    std::vector<double> mean_target;  // [layer], mean across languages
    int prompts_per_lang = 0;
};

ProfileSuite profile_suite(const Checkpoint& ckpt, const std::vector<LanguageSpec>& specs,
                           const std::map<std::string, std::vector<std::string>>& prompts,
                           const std::string& pivot, LensMode mode = LensMode::mass);

}  // namespace natlas
