#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "natlas/common.hpp"

namespace natlas {

// Codepoint value used for bytes that do not decode as UTF-8. Never appears in
// an alphabet.
inline constexpr uint32_t kInvalidCp = 0xffffffffu;

std::string encode_utf8(uint32_t cp);
// Strict decode; returns false at the first invalid sequence.
bool decode_utf8(std::string_view s, std::vector<uint32_t>& out);
// Lossy decode; invalid bytes come out as kInvalidCp, one per byte.
std::vector<uint32_t> decode_utf8_lossy(std::string_view s);

struct LanguageSpec {
    std::string id;
    std::string family;
    int priority = 0;              // 1 = first in the fallback order
    uint64_t bigram_seed = 0;
    std::vector<uint32_t> alphabet;  // sorted, unique

    bool contains(uint32_t cp) const;
};

// Characters reserved for the prompt frame ("Q: ... ? A:") and therefore kept
// out of every synthesized alphabet.
const std::vector<uint32_t>& reserved_codepoints();

// Hands out codepoints no language has claimed yet, starting at '!' (0x21),
// skipping reserved frame characters. Shared by all synth_family calls of one
// registry build so families stay disjoint.
class CodepointPool {
public:
    CodepointPool();
    uint32_t take();
    std::vector<uint32_t> take(int n);

private:
    uint32_t next_;
    bool reserved(uint32_t cp) const;
};

// One family of n_langs languages. floor(shared_fraction * alphabet_size)
// codepoints are common to all members, the rest are per-language unique.
// Each member gets a distinct bigram_seed derived from seed; ids/priorities
// are left for the caller to assign.
std::vector<LanguageSpec> synth_family(const std::string& family, int n_langs,
                                       double shared_fraction, int alphabet_size,
                                       uint64_t seed, CodepointPool& pool);

// Registry (de)serialization. Alphabets are stored as inclusive [lo,hi] ranges.
std::string registry_to_json(const std::vector<LanguageSpec>& specs);
std::vector<LanguageSpec> registry_from_json(const std::string& json_text);
std::vector<LanguageSpec> load_registry(const std::string& path);
void save_registry(const std::vector<LanguageSpec>& specs, const std::string& path);

// Row-stochastic first-order chain over alphabet indices. Seeded construction:
// identical (n, seed) gives the identical matrix regardless of which alphabet
// the indices map into.
struct BigramChain {
    int n = 0;
    std::vector<double> trans;  // n*n, rows sum to 1

    static BigramChain build(int n, uint64_t seed);
    double prob(int from, int to) const { return trans[size_t(from) * n + to]; }
    // Sample `len` indices; first index uniform, then chain steps.
    std::vector<int> sample(Rng& rng, int len) const;
    // Stationary distribution by power iteration (test oracle and sanity checks).
    std::vector<double> stationary(int iters = 512) const;
};

// UTF-8 text of doc_len codepoints drawn from the language's bigram chain.
std::string synth_doc(const LanguageSpec& spec, int doc_len, uint64_t stream_seed);

struct Corpus {
    std::map<std::string, std::vector<std::string>> docs;  // lang id -> documents
    std::map<std::string, int> skipped;                    // loader: rejected docs per lang

    size_t total_docs() const;
};

Corpus synth_corpus(const std::vector<LanguageSpec>& specs, int n_docs, int doc_len,
                    uint64_t seed);

// Reads <dir>/<lang id>/*.txt (sorted by filename). Unknown subdirectory names
// are an error; invalid-UTF-8 or empty files are skipped and counted. If
// max_bytes_per_lang > 0, documents stop being added at the first one that
// would push a language past the cap.
Corpus load_corpus_dir(const std::string& dir, const std::vector<LanguageSpec>& specs,
                       size_t max_bytes_per_lang = 0);

// Helpers shared by several modules.
const LanguageSpec* find_lang(const std::vector<LanguageSpec>& specs, const std::string& id);
std::vector<std::string> lang_ids(const std::vector<LanguageSpec>& specs);
// Specs sorted by priority (1 first). Ties broken by id.
std::vector<const LanguageSpec*> priority_order(const std::vector<LanguageSpec>& specs);

}  // namespace natlas
