#include "doctest.h"
#include "natlas/classifier.hpp"

using namespace natlas;

namespace {

std::vector<LanguageSpec> two_disjoint_langs() {
    CodepointPool pool;
    auto specs = synth_family("fam", 2, 0.0, 8, 71, pool);
    specs[0].id = "aa";
    specs[0].priority = 1;
    specs[1].id = "ab";
    specs[1].priority = 2;
    return specs;
}

}  // namespace

TEST_CASE("pure-language text is classified confidently") {
    auto specs = two_disjoint_langs();
    Classifier cls(specs);
    for (const auto& s : specs) {
        std::string doc = synth_doc(s, 40, 5);
        auto c = cls.classify(doc);
        CHECK(c.top1 == s.id);
        CHECK(c.probs.at(s.id) > 0.9);
        CHECK(c.unknown_rate == 0.0);
        double total = 0;
        for (const auto& [k, v] : c.probs) total += v;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("a 50/50 short mix scores the two languages identically") {
    auto specs = two_disjoint_langs();
    Classifier cls(specs);
    // one codepoint of each language: below the bigram minimum, so scoring is
    // pure membership and perfectly symmetric
    std::string text = encode_utf8(specs[0].alphabet[0]) + encode_utf8(specs[1].alphabet[0]);
    auto c = cls.classify(text);
    CHECK(c.probs.at("aa") == doctest::Approx(c.probs.at("ab")).epsilon(1e-9));
    CHECK(c.unknown_rate == 0.0);
}

TEST_CASE("unclassifiable text goes to unknown") {
    auto specs = two_disjoint_langs();
    Classifier cls(specs);
    auto empty = cls.classify("");
    CHECK(empty.top1 == "unknown");
    CHECK(empty.probs.at("unknown") == 1.0);
    CHECK(empty.unknown_rate == 1.0);

    auto punct = cls.classify("???  ??");
    CHECK(punct.top1 == "unknown");
    CHECK(punct.probs.at("unknown") == 1.0);

    auto invalid = cls.classify("\xff\xff\xff");
    CHECK(invalid.top1 == "unknown");
}

TEST_CASE("membership dominates on short texts, bigrams sharpen longer ones") {
    auto specs = two_disjoint_langs();
    Classifier cls(specs);
    std::string shorttext = synth_doc(specs[0], 3, 9);  // below the bigram cutoff
    auto s = cls.classify(shorttext);
    CHECK(s.top1 == "aa");
    std::string longtext = synth_doc(specs[0], 60, 9);
    auto l = cls.classify(longtext);
    CHECK(l.top1 == "aa");
    CHECK(l.probs.at("aa") >= s.probs.at("aa") - 1e-9);
}

TEST_CASE("mixed text with a clear majority picks the majority language") {
    auto specs = two_disjoint_langs();
    Classifier cls(specs);
    std::string text = synth_doc(specs[0], 30, 4) + synth_doc(specs[1], 5, 4);
    auto c = cls.classify(text);
    CHECK(c.top1 == "aa");
    CHECK(c.probs.at("aa") > c.probs.at("ab"));
}
