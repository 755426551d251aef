#include "natlas/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "natlas/tokenizer.hpp"

using nlohmann::json;

namespace natlas {

void FixedSum::add(float x) {
    // values are finite and << 2^33, so the product fits a long long
    v += (__int128)llroundl((long double)x * 1073741824.0L);
}

double FixedSum::value() const { return double((long double)v / 1073741824.0L); }

int ActivationStats::lang_index(const std::string& id) const {
    auto it = std::lower_bound(langs.begin(), langs.end(), id);
    if (it == langs.end() || *it != id) return -1;
    return int(it - langs.begin());
}

double ActivationStats::prob(int lang, int layer, int j) const {
    uint64_t t = totals[lang];
    if (t == 0) return 0.0;
    return double(active[idx(lang, layer, j)]) / double(t);
}

double ActivationStats::mean(int lang, int layer, int j) const {
    uint64_t t = totals[lang];
    if (t == 0) return 0.0;
    return sums[idx(lang, layer, j)].value() / double(t);
}

void ActivationStats::merge(const ActivationStats& o) {
    if (n_layers != o.n_layers || d_ff != o.d_ff)
        throw ValidationError("stats merge: shape mismatch");
    if (langs != o.langs) throw ValidationError("stats merge: language set mismatch");
    if (provenance != o.provenance)
        throw ValidationError("stats merge: provenance mismatch (" + provenance + " vs " +
                              o.provenance + ")");
    for (size_t i = 0; i < totals.size(); i++) totals[i] += o.totals[i];
    for (size_t i = 0; i < active.size(); i++) active[i] += o.active[i];
    for (size_t i = 0; i < sums.size(); i++) sums[i].add(o.sums[i]);
    for (size_t i = 0; i < sketches.size(); i++) sketches[i].merge(o.sketches[i]);
}

std::string stats_provenance(const Checkpoint& ckpt, const std::vector<std::string>& sorted_langs) {
    Fnv1a h;
    std::string bytes = serialize_checkpoint(ckpt);
    h.update(bytes.data(), bytes.size());
    for (const auto& id : sorted_langs) { h.update(id); h.update("\x1f", 1); }
    return h.hex();
}

ActivationStats accumulate(const Checkpoint& ckpt, const Corpus& corpus,
                           const std::vector<LanguageSpec>& specs,
                           const AccumulateOptions& opt) {
    const ModelConfig& cfg = ckpt.config;
    cfg.validate();
    if (opt.context_len < 1) throw ValidationError("accumulate: context_len must be >= 1");
    int context = std::min(opt.context_len, cfg.max_seq_len);
    int stride = opt.stride > 0 ? opt.stride : context;
    if (stride > context) throw ValidationError("accumulate: stride must be <= context_len");

    ActivationStats st;
    st.n_layers = cfg.n_layers;
    st.d_ff = cfg.d_ff;
    st.context_len = context;
    st.stride = stride;
    for (const auto& [lang, _] : corpus.docs) {
        if (!find_lang(specs, lang))
            throw ValidationError("accumulate: corpus language " + lang + " not registered");
        st.langs.push_back(lang);
    }
    std::sort(st.langs.begin(), st.langs.end());
    if (st.langs.empty()) throw ValidationError("accumulate: empty corpus");
    st.provenance = stats_provenance(ckpt, st.langs);
    size_t nn = st.n_neurons();
    st.totals.assign(st.langs.size(), 0);
    st.active.assign(st.langs.size() * nn, 0);
    st.sums.assign(st.langs.size() * nn, FixedSum{});
    st.sketches.assign(st.langs.size() * nn, QuantileSketch());

    for (size_t li = 0; li < st.langs.size(); li++) {
        const auto& docs = corpus.docs.at(st.langs[li]);
        for (const auto& doc : docs) {
            std::vector<int> toks = tok::tokenize(doc);
            if (toks.empty()) throw ValidationError("accumulate: empty document");
            for (size_t start = 0; start < toks.size(); start += size_t(stride)) {
                size_t end = std::min(start + size_t(context), toks.size());
                InferenceSession sess(ckpt, {}, int(end - start));
                for (size_t t = start; t < end; t++) sess.step(toks[t]);
                int T = sess.pos();
                st.totals[li] += uint64_t(T);
                for (int l = 0; l < cfg.n_layers; l++) {
                    const Mat& taps = sess.taps(l);
                    for (int p = 0; p < T; p++) {
                        const float* row = taps.row(p);
                        size_t base = st.idx(int(li), l, 0);
                        for (int j = 0; j < cfg.d_ff; j++) {
                            float v = row[j];
                            if (v > 0.f) st.active[base + j]++;
                            st.sums[base + j].add(v);
                            st.sketches[base + j].add(v);
                        }
                    }
                }
                if (end == toks.size()) break;
            }
        }
    }
    return st;
}

namespace {
constexpr char kMagic[8] = {'N', 'A', 'T', 'S', 'T', 'A', 'T', '1'};

void put_u64(std::string& s, uint64_t v) {
    for (int i = 0; i < 8; i++) s.push_back(char((v >> (8 * i)) & 0xff));
}
uint64_t get_u64(const std::string& s, size_t& off) {
    if (off + 8 > s.size()) throw RuntimeError("stats: truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= uint64_t(static_cast<unsigned char>(s[off + i])) << (8 * i);
    off += 8;
    return v;
}
}  // namespace

std::string ActivationStats::serialize() const {
    json header = {{"schema_version", 1}, {"n_layers", n_layers},   {"d_ff", d_ff},
                   {"langs", langs},      {"provenance", provenance}, {"context_len", context_len},
                   {"stride", stride}};
    std::string hj = header.dump();
    std::string out(kMagic, 8);
    put_u64(out, hj.size());
    out += hj;
    for (uint64_t t : totals) put_u64(out, t);
    for (uint64_t a : active) put_u64(out, a);
    for (const FixedSum& f : sums) {
        put_u64(out, uint64_t(f.v & ~uint64_t(0)));
        put_u64(out, uint64_t((f.v >> 64) & ~uint64_t(0)));
    }
    for (const auto& sk : sketches) sk.serialize(out);
    return out;
}

ActivationStats ActivationStats::deserialize(const std::string& bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw RuntimeError("stats: bad magic");
    size_t off = 8;
    uint64_t hlen = get_u64(bytes, off);
    if (off + hlen > bytes.size()) throw RuntimeError("stats: truncated header");
    json header;
    try {
        header = json::parse(bytes.substr(off, hlen));
    } catch (const json::exception& e) {
        throw RuntimeError(std::string("stats: bad header: ") + e.what());
    }
    off += hlen;
    ActivationStats st;
    try {
        st.n_layers = header.at("n_layers").get<int>();
        st.d_ff = header.at("d_ff").get<int>();
        st.langs = header.at("langs").get<std::vector<std::string>>();
        st.provenance = header.at("provenance").get<std::string>();
        st.context_len = header.value("context_len", 0);
        st.stride = header.value("stride", 0);
    } catch (const json::exception& e) {
        throw RuntimeError(std::string("stats: bad header: ") + e.what());
    }
    if (st.n_layers < 1 || st.d_ff < 1 || st.langs.empty())
        throw RuntimeError("stats: bad header fields");
    size_t nl = st.langs.size(), nn = st.n_neurons();
    st.totals.resize(nl);
    for (auto& t : st.totals) t = get_u64(bytes, off);
    st.active.resize(nl * nn);
    for (auto& a : st.active) a = get_u64(bytes, off);
    st.sums.resize(nl * nn);
    for (auto& f : st.sums) {
        uint64_t lo = get_u64(bytes, off), hi = get_u64(bytes, off);
        f.v = ((__int128)(int64_t)hi << 64) | (__int128)lo;
    }
    st.sketches.reserve(nl * nn);
    for (size_t i = 0; i < nl * nn; i++)
        st.sketches.push_back(QuantileSketch::deserialize(bytes, off));
    if (off != bytes.size()) throw RuntimeError("stats: trailing bytes");
    return st;
}

void ActivationStats::save(const std::string& path) const {
    std::string bytes = serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write stats " + path);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw RuntimeError("short write on stats " + path);
}

ActivationStats ActivationStats::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open stats " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

}  // namespace natlas
