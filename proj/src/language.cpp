#include "natlas/language.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace natlas {

std::string encode_utf8(uint32_t cp) {
    std::string s;
    if (cp < 0x80) {
        s.push_back(char(cp));
    } else if (cp < 0x800) {
        s.push_back(char(0xc0 | (cp >> 6)));
        s.push_back(char(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        s.push_back(char(0xe0 | (cp >> 12)));
        s.push_back(char(0x80 | ((cp >> 6) & 0x3f)));
        s.push_back(char(0x80 | (cp & 0x3f)));
    } else {
        s.push_back(char(0xf0 | (cp >> 18)));
        s.push_back(char(0x80 | ((cp >> 12) & 0x3f)));
        s.push_back(char(0x80 | ((cp >> 6) & 0x3f)));
        s.push_back(char(0x80 | (cp & 0x3f)));
    }
    return s;
}

namespace {

// Decodes one codepoint at s[i]; advances i. Returns kInvalidCp on bad input,
// advancing past exactly one byte so lossy decoding makes progress.
uint32_t decode_one(std::string_view s, size_t& i) {
    unsigned char c = s[i];
    int extra;
    uint32_t cp;
    if (c < 0x80) { i++; return c; }
    else if ((c & 0xe0) == 0xc0) { extra = 1; cp = c & 0x1f; }
    else if ((c & 0xf0) == 0xe0) { extra = 2; cp = c & 0x0f; }
    else if ((c & 0xf8) == 0xf0) { extra = 3; cp = c & 0x07; }
    else { i++; return kInvalidCp; }
    if (i + extra >= s.size()) { i++; return kInvalidCp; }
    uint32_t acc = cp;
    for (int k = 1; k <= extra; k++) {
        unsigned char cc = s[i + k];
        if ((cc & 0xc0) != 0x80) { i++; return kInvalidCp; }
        acc = (acc << 6) | (cc & 0x3f);
    }
    // reject overlong forms, surrogates, out-of-range
    static const uint32_t min_for[4] = {0, 0x80, 0x800, 0x10000};
    if (acc < min_for[extra] || acc > 0x10ffff || (acc >= 0xd800 && acc <= 0xdfff)) {
        i++;
        return kInvalidCp;
    }
    i += extra + 1;
    return acc;
}

}  // namespace

bool decode_utf8(std::string_view s, std::vector<uint32_t>& out) {
    out.clear();
    size_t i = 0;
    while (i < s.size()) {
        uint32_t cp = decode_one(s, i);
        if (cp == kInvalidCp) return false;
        out.push_back(cp);
    }
    return true;
}

std::vector<uint32_t> decode_utf8_lossy(std::string_view s) {
    std::vector<uint32_t> out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) out.push_back(decode_one(s, i));
    return out;
}

bool LanguageSpec::contains(uint32_t cp) const {
    return std::binary_search(alphabet.begin(), alphabet.end(), cp);
}

const std::vector<uint32_t>& reserved_codepoints() {
    static const std::vector<uint32_t> r = {' ', 'Q', 'A', ':', '?'};
    return r;
}

CodepointPool::CodepointPool() : next_(0x21) {}

bool CodepointPool::reserved(uint32_t cp) const {
    for (uint32_t r : reserved_codepoints())
        if (r == cp) return true;
    return false;
}

uint32_t CodepointPool::take() {
    while (next_ <= 0x10ffff) {
        uint32_t cp = next_++;
        if (cp == 0x7f) { next_ = 0xa1; continue; }  // skip DEL and C1 range
        if (reserved(cp)) continue;
        if (cp >= 0xd800 && cp <= 0xdfff) { next_ = 0xe000; continue; }
        return cp;
    }
    throw RuntimeError("codepoint pool exhausted");
}

std::vector<uint32_t> CodepointPool::take(int n) {
    std::vector<uint32_t> v;
    v.reserve(n);
    for (int i = 0; i < n; i++) v.push_back(take());
    return v;
}

std::vector<LanguageSpec> synth_family(const std::string& family, int n_langs,
                                       double shared_fraction, int alphabet_size,
                                       uint64_t seed, CodepointPool& pool) {
    if (n_langs < 1) throw ValidationError("synth_family: n_langs must be >= 1");
    if (alphabet_size < 2) throw ValidationError("synth_family: alphabet_size must be >= 2");
    if (shared_fraction < 0.0 || shared_fraction > 1.0)
        throw ValidationError("synth_family: shared_fraction must be in [0,1]");
    int n_shared = int(shared_fraction * alphabet_size);
    if (n_shared >= alphabet_size && n_langs > 1) n_shared = alphabet_size - 1;
    std::vector<uint32_t> shared = pool.take(n_shared);
    std::vector<LanguageSpec> specs;
    Fnv1a fh;
    fh.update(family);
    for (int g = 0; g < n_langs; g++) {
        LanguageSpec s;
        s.family = family;
        s.alphabet = shared;
        for (uint32_t cp : pool.take(alphabet_size - n_shared)) s.alphabet.push_back(cp);
        std::sort(s.alphabet.begin(), s.alphabet.end());
        s.bigram_seed = splitmix64(seed ^ splitmix64(fh.h + uint64_t(g)));
        specs.push_back(std::move(s));
    }
    return specs;
}

std::string registry_to_json(const std::vector<LanguageSpec>& specs) {
    json langs = json::array();
    for (const auto& s : specs) {
        json ranges = json::array();
        size_t i = 0;
        while (i < s.alphabet.size()) {
            uint32_t lo = s.alphabet[i], hi = lo;
            while (i + 1 < s.alphabet.size() && s.alphabet[i + 1] == hi + 1) { hi++; i++; }
            ranges.push_back(json::array({lo, hi}));
            i++;
        }
        langs.push_back({{"id", s.id},
                         {"family", s.family},
                         {"priority", s.priority},
                         {"bigram_seed", s.bigram_seed},
                         {"alphabet", ranges}});
    }
    json root = {{"schema_version", 1}, {"languages", langs}};
    return root.dump(2) + "\n";
}

std::vector<LanguageSpec> registry_from_json(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("registry: bad JSON: ") + e.what());
    }
    if (!root.contains("languages") || !root["languages"].is_array())
        throw ValidationError("registry: missing languages array");
    std::vector<LanguageSpec> specs;
    std::set<std::string> seen;
    for (const auto& j : root["languages"]) {
        LanguageSpec s;
        try {
            s.id = j.at("id").get<std::string>();
            s.family = j.value("family", std::string());
            s.priority = j.value("priority", 0);
            s.bigram_seed = j.value("bigram_seed", uint64_t(0));
            for (const auto& r : j.at("alphabet")) {
                uint32_t lo, hi;
                if (r.is_array()) { lo = r.at(0).get<uint32_t>(); hi = r.at(1).get<uint32_t>(); }
                else { lo = hi = r.get<uint32_t>(); }
                if (hi < lo) throw ValidationError("registry: bad alphabet range for " + s.id);
                for (uint32_t cp = lo; cp <= hi; cp++) s.alphabet.push_back(cp);
            }
        } catch (const json::exception& e) {
            throw ValidationError(std::string("registry: bad language entry: ") + e.what());
        }
        std::sort(s.alphabet.begin(), s.alphabet.end());
        s.alphabet.erase(std::unique(s.alphabet.begin(), s.alphabet.end()), s.alphabet.end());
        if (s.id.empty()) throw ValidationError("registry: empty language id");
        if (s.alphabet.empty()) throw ValidationError("registry: empty alphabet for " + s.id);
        if (!seen.insert(s.id).second)
            throw ValidationError("registry: duplicate language id " + s.id);
        specs.push_back(std::move(s));
    }
    return specs;
}

std::vector<LanguageSpec> load_registry(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open registry " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return registry_from_json(ss.str());
}

void save_registry(const std::vector<LanguageSpec>& specs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write registry " + path);
    out << registry_to_json(specs);
}

BigramChain BigramChain::build(int n, uint64_t seed) {
    BigramChain c;
    c.n = n;
    c.trans.resize(size_t(n) * n);
    Rng rng(splitmix64(seed ^ 0xb16b16ull));
    for (int i = 0; i < n; i++) {
        double sum = 0;
        for (int j = 0; j < n; j++) {
            double u = rng.uniform();
            double w = 0.05 + u * u;  // squaring sharpens the peaks
            c.trans[size_t(i) * n + j] = w;
            sum += w;
        }
        for (int j = 0; j < n; j++) c.trans[size_t(i) * n + j] /= sum;
    }
    return c;
}

std::vector<int> BigramChain::sample(Rng& rng, int len) const {
    std::vector<int> out;
    out.reserve(len);
    int cur = int(rng.below(uint64_t(n)));
    out.push_back(cur);
    for (int t = 1; t < len; t++) {
        double u = rng.uniform(), acc = 0;
        int next = n - 1;
        for (int j = 0; j < n; j++) {
            acc += prob(cur, j);
            if (u < acc) { next = j; break; }
        }
        cur = next;
        out.push_back(cur);
    }
    return out;
}

std::vector<double> BigramChain::stationary(int iters) const {
    std::vector<double> p(n, 1.0 / n), q(n);
    for (int it = 0; it < iters; it++) {
        std::fill(q.begin(), q.end(), 0.0);
        for (int i = 0; i < n; i++)
            for (int j = 0; j < n; j++) q[j] += p[i] * prob(i, j);
        p.swap(q);
    }
    return p;
}

std::string synth_doc(const LanguageSpec& spec, int doc_len, uint64_t stream_seed) {
    if (doc_len < 1) throw ValidationError("synth_doc: doc_len must be >= 1");
    BigramChain chain = BigramChain::build(int(spec.alphabet.size()), spec.bigram_seed);
    Rng rng(stream_seed);
    std::string s;
    for (int idx : chain.sample(rng, doc_len)) s += encode_utf8(spec.alphabet[idx]);
    return s;
}

size_t Corpus::total_docs() const {
    size_t n = 0;
    for (const auto& [_, d] : docs) n += d.size();
    return n;
}

Corpus synth_corpus(const std::vector<LanguageSpec>& specs, int n_docs, int doc_len,
                    uint64_t seed) {
    if (n_docs < 1) throw ValidationError("synth_corpus: n_docs must be >= 1");
    Corpus c;
    for (const auto& spec : specs) {
        Fnv1a fh;
        fh.update(spec.id);
        auto& docs = c.docs[spec.id];
        for (int d = 0; d < n_docs; d++)
            docs.push_back(synth_doc(spec, doc_len, splitmix64(seed ^ splitmix64(fh.h) ^ (uint64_t(d) << 20))));
    }
    return c;
}

Corpus load_corpus_dir(const std::string& dir, const std::vector<LanguageSpec>& specs,
                       size_t max_bytes_per_lang) {
    fs::path root(dir);
    if (!fs::is_directory(root)) throw ValidationError("corpus dir not found: " + dir);
    Corpus c;
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) subdirs.push_back(e.path());
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs) {
        std::string id = sub.filename().string();
        if (!find_lang(specs, id))
            throw ValidationError("corpus dir: unregistered language id " + id);
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(sub))
            if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        auto& docs = c.docs[id];
        size_t bytes = 0;
        bool capped = false;
        for (const auto& f : files) {
            std::ifstream in(f, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            std::string text = ss.str();
            std::vector<uint32_t> cps;
            if (text.empty() || !decode_utf8(text, cps)) {
                c.skipped[id]++;
                continue;
            }
            if (capped) { c.skipped[id]++; continue; }
            if (max_bytes_per_lang && bytes + text.size() > max_bytes_per_lang) {
                capped = true;  // truncate at a document boundary
                c.skipped[id]++;
                continue;
            }
            bytes += text.size();
            docs.push_back(std::move(text));
        }
    }
    return c;
}

const LanguageSpec* find_lang(const std::vector<LanguageSpec>& specs, const std::string& id) {
    for (const auto& s : specs)
        if (s.id == id) return &s;
    return nullptr;
}

std::vector<std::string> lang_ids(const std::vector<LanguageSpec>& specs) {
    std::vector<std::string> ids;
    for (const auto& s : specs) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<const LanguageSpec*> priority_order(const std::vector<LanguageSpec>& specs) {
    std::vector<const LanguageSpec*> v;
    for (const auto& s : specs) v.push_back(&s);
    std::sort(v.begin(), v.end(), [](const LanguageSpec* a, const LanguageSpec* b) {
        if (a->priority != b->priority) return a->priority < b->priority;
        return a->id < b->id;
    });
    return v;
}

}  // namespace natlas
