#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "natlas/language.hpp"

namespace natlas {

struct Classification {
    std::map<std::string, double> probs;  // language ids + "unknown", sums to 1
    std::string top1;                     // argmax of probs (lowest id on ties)
    double unknown_rate = 0;              // fraction of codepoints in no alphabet
};

// Alphabet-membership + bigram-likelihood scorer over the registered
// languages. Raw score per language is
//   0.7 * membership_rate + 0.3 * mean_bigram_llr
// where the llr baseline is a floor probability (so out-of-alphabet bigrams
// contribute zero). Scores go through a softmax that includes an "unknown"
// pseudo-class scored on the unknown-codepoint rate alone. Texts shorter than
// 4 codepoints skip the bigram term; empty or fully out-of-alphabet text is
// classified as unknown with probability 1.
class Classifier {
public:
    explicit Classifier(std::vector<LanguageSpec> specs);
    Classification classify(std::string_view text) const;

    static constexpr double kMembershipWeight = 0.7;
    static constexpr double kBigramWeight = 0.3;
    static constexpr double kFloorProb = 1e-8;

private:
    std::vector<LanguageSpec> specs_;
    std::vector<BigramChain> chains_;
    std::vector<std::map<uint32_t, int>> index_;  // codepoint -> alphabet index
};

}  // namespace natlas
