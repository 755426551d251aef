#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "natlas/language.hpp"

using namespace natlas;
namespace fs = std::filesystem;

TEST_CASE("utf-8 encode/decode round trip and edge cases") {
    for (uint32_t cp : {0x24u, 0xe9u, 0x20acu, 0x1d11eu}) {
        std::vector<uint32_t> out;
        REQUIRE(decode_utf8(encode_utf8(cp), out));
        REQUIRE(out.size() == 1);
        CHECK(out[0] == cp);
    }
    std::vector<uint32_t> out;
    CHECK_FALSE(decode_utf8("\x80", out));              // lone continuation
    CHECK_FALSE(decode_utf8("\xc0\xaf", out));          // overlong '/'
    CHECK_FALSE(decode_utf8("\xed\xa0\x80", out));      // surrogate
    CHECK_FALSE(decode_utf8("\xf5\x80\x80\x80", out));  // above U+10FFFF
    CHECK_FALSE(decode_utf8("\xe2\x82", out));          // truncated

    auto lossy = decode_utf8_lossy("a\x80\x80z");
    REQUIRE(lossy.size() == 4);
    CHECK(lossy[0] == 'a');
    CHECK(lossy[1] == kInvalidCp);
    CHECK(lossy[2] == kInvalidCp);
    CHECK(lossy[3] == 'z');
}

TEST_CASE("synth_family shares exactly the shared block") {
    CodepointPool pool;
    auto fam1 = synth_family("one", 3, 0.5, 8, 42, pool);
    auto fam2 = synth_family("two", 2, 0.0, 6, 43, pool);
    REQUIRE(fam1.size() == 3);
    for (const auto& s : fam1) CHECK(s.alphabet.size() == 8);

    // shared block: intersection of all three = floor(0.5 * 8) = 4 codepoints
    std::vector<uint32_t> common;
    for (uint32_t cp : fam1[0].alphabet) {
        bool everywhere = fam1[1].contains(cp) && fam1[2].contains(cp);
        if (everywhere) common.push_back(cp);
    }
    CHECK(common.size() == 4);

    // non-shared parts are pairwise disjoint
    for (size_t i = 0; i < fam1.size(); ++i)
        for (size_t j = i + 1; j < fam1.size(); ++j) {
            int inter = 0;
            for (uint32_t cp : fam1[i].alphabet) inter += fam1[j].contains(cp) ? 1 : 0;
            CHECK(inter == 4);
        }

    // the pool never hands out a codepoint twice
    for (const auto& a : fam1)
        for (uint32_t cp : a.alphabet)
            for (const auto& b : fam2) CHECK_FALSE(b.contains(cp));

    // distinct bigram seeds per member
    CHECK(fam1[0].bigram_seed != fam1[1].bigram_seed);
    CHECK(fam1[1].bigram_seed != fam1[2].bigram_seed);

    // reserved frame characters are never claimed
    for (uint32_t cp : reserved_codepoints())
        for (const auto& s : fam1) CHECK_FALSE(s.contains(cp));
}

TEST_CASE("registry json round trip") {
    CodepointPool pool;
    auto specs = synth_family("fam", 2, 0.25, 9, 7, pool);
    specs[0].id = "aa";
    specs[0].priority = 1;
    specs[1].id = "ab";
    specs[1].priority = 2;
    auto back = registry_from_json(registry_to_json(specs));
    REQUIRE(back.size() == specs.size());
    for (size_t i = 0; i < specs.size(); ++i) {
        CHECK(back[i].id == specs[i].id);
        CHECK(back[i].family == specs[i].family);
        CHECK(back[i].priority == specs[i].priority);
        CHECK(back[i].bigram_seed == specs[i].bigram_seed);
        CHECK(back[i].alphabet == specs[i].alphabet);
    }
    CHECK(registry_to_json(back) == registry_to_json(specs));

    auto dup = specs;
    dup[1].id = "aa";
    CHECK_THROWS_AS((void)registry_from_json(registry_to_json(dup)), ValidationError);
}

TEST_CASE("bigram chain is stochastic and sampling follows it") {
    BigramChain c = BigramChain::build(6, 2024);
    for (int i = 0; i < 6; ++i) {
        double row = 0;
        for (int j = 0; j < 6; ++j) {
            CHECK(c.prob(i, j) > 0);
            row += c.prob(i, j);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }

    // long-run symbol frequencies approach the stationary distribution
    auto pi = c.stationary();
    double sum_pi = 0;
    for (double x : pi) sum_pi += x;
    CHECK(sum_pi == doctest::Approx(1.0).epsilon(1e-9));

    Rng rng(5);
    auto seq = c.sample(rng, 200000);
    std::vector<double> freq(6, 0);
    for (int ix : seq) freq[ix] += 1.0 / seq.size();
    for (int i = 0; i < 6; ++i) CHECK(freq[i] == doctest::Approx(pi[i]).epsilon(0.05));
}

TEST_CASE("synth_doc is deterministic and stays in the alphabet") {
    CodepointPool pool;
    auto specs = synth_family("fam", 1, 0.0, 5, 11, pool);
    std::string a = synth_doc(specs[0], 64, 99);
    std::string b = synth_doc(specs[0], 64, 99);
    CHECK(a == b);
    std::vector<uint32_t> cps;
    REQUIRE(decode_utf8(a, cps));
    CHECK(cps.size() == 64);
    for (uint32_t cp : cps) CHECK(specs[0].contains(cp));
    CHECK(synth_doc(specs[0], 64, 100) != a);
}

TEST_CASE("corpus directory loader") {
    CodepointPool pool;
    auto specs = synth_family("fam", 2, 0.0, 5, 3, pool);
    specs[0].id = "aa";
    specs[1].id = "ab";

    fs::path dir = fs::temp_directory_path() / "natlas_corpus_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "aa");
    fs::create_directories(dir / "ab");
    auto put = [](const fs::path& p, const std::string& content) {
        std::ofstream(p, std::ios::binary) << content;
    };
    put(dir / "aa" / "01.txt", synth_doc(specs[0], 20, 1));
    put(dir / "aa" / "02.txt", "\xff\xfe broken");  // invalid utf-8, skipped
    put(dir / "aa" / "03.txt", "");                 // empty, skipped
    put(dir / "ab" / "01.txt", synth_doc(specs[1], 20, 2));

    Corpus c = load_corpus_dir(dir.string(), specs);
    CHECK(c.docs.at("aa").size() == 1);
    CHECK(c.docs.at("ab").size() == 1);
    CHECK(c.skipped.at("aa") == 2);
    CHECK(c.total_docs() == 2);

    // byte cap cuts at a document boundary and counts the remainder
    put(dir / "ab" / "02.txt", synth_doc(specs[1], 20, 3));
    Corpus capped = load_corpus_dir(dir.string(), specs, 25);
    CHECK(capped.docs.at("ab").size() == 1);
    CHECK(capped.skipped.at("ab") == 1);

    fs::create_directories(dir / "zz");
    put(dir / "zz" / "01.txt", "x");
    CHECK_THROWS_AS((void)load_corpus_dir(dir.string(), specs), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("priority order sorts by priority then id") {
    std::vector<LanguageSpec> specs(3);
    specs[0] = {"cc", "f", 2, 0, {'x'}};
    specs[1] = {"aa", "f", 1, 0, {'y'}};
    specs[2] = {"bb", "f", 2, 0, {'z'}};
    auto order = priority_order(specs);
    REQUIRE(order.size() == 3);
    CHECK(order[0]->id == "aa");
    CHECK(order[1]->id == "bb");
    CHECK(order[2]->id == "cc");
}
