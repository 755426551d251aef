#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "natlas/common.hpp"
#include "natlas/model.hpp"

using nlohmann::json;

namespace natlas {

namespace {

constexpr char kMagic[8] = {'N', 'A', 'T', 'L', 'A', 'S', '0', '1'};

struct TensorRef {
    std::string name;
    std::vector<int> shape;
    float* data;
    size_t count() const {
        size_t n = 1;
        for (int d : shape) n *= size_t(d);
        return n;
    }
};

// Canonical tensor enumeration; both serialization directions use it, so the
// on-disk order is pinned.
std::vector<TensorRef> tensor_table(Checkpoint& c) {
    const ModelConfig& g = c.config;
    std::vector<TensorRef> t;
    t.push_back({"tok_embed", {g.vocab_size, g.d_model}, c.tok_embed.v.data()});
    for (int l = 0; l < g.n_layers; l++) {
        std::string p = "layers." + std::to_string(l) + ".";
        LayerWeights& w = c.layers[l];
        t.push_back({p + "attn_norm", {g.d_model}, w.attn_norm.data()});
        t.push_back({p + "wq", {g.d_model, g.d_model}, w.wq.v.data()});
        t.push_back({p + "wk", {g.d_model, g.d_model}, w.wk.v.data()});
        t.push_back({p + "wv", {g.d_model, g.d_model}, w.wv.v.data()});
        t.push_back({p + "wo", {g.d_model, g.d_model}, w.wo.v.data()});
        t.push_back({p + "ffn_norm", {g.d_model}, w.ffn_norm.data()});
        t.push_back({p + "w_gate", {g.d_ff, g.d_model}, w.w_gate.v.data()});
        t.push_back({p + "w_up", {g.d_ff, g.d_model}, w.w_up.v.data()});
        t.push_back({p + "w_down", {g.d_model, g.d_ff}, w.w_down.v.data()});
    }
    t.push_back({"final_norm", {g.d_model}, c.final_norm.data()});
    t.push_back({"unembed", {g.vocab_size, g.d_model}, c.unembed.v.data()});
    return t;
}

void put_u64(std::string& s, uint64_t v) {
    for (int i = 0; i < 8; i++) s.push_back(char((v >> (8 * i)) & 0xff));
}

uint64_t get_u64(const char* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

json config_to_json(const ModelConfig& g) {
    return {{"n_layers", g.n_layers},   {"d_model", g.d_model},
            {"n_heads", g.n_heads},     {"d_ff", g.d_ff},
            {"vocab_size", g.vocab_size}, {"max_seq_len", g.max_seq_len},
            {"norm_eps", double(g.norm_eps)}, {"rope_base", double(g.rope_base)}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig g;
    g.n_layers = j.at("n_layers").get<int>();
    g.d_model = j.at("d_model").get<int>();
    g.n_heads = j.at("n_heads").get<int>();
    g.d_ff = j.at("d_ff").get<int>();
    g.vocab_size = j.at("vocab_size").get<int>();
    g.max_seq_len = j.at("max_seq_len").get<int>();
    g.norm_eps = float(j.at("norm_eps").get<double>());
    g.rope_base = float(j.at("rope_base").get<double>());
    return g;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
    ckpt.config.validate();
    auto table = tensor_table(const_cast<Checkpoint&>(ckpt));
    json tensors = json::array();
    size_t offset = 0;  // in float32 elements
    for (const auto& t : table) {
        tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
        offset += t.count();
    }
    json header = {{"config", config_to_json(ckpt.config)}, {"tensors", tensors}};
    std::string hj = header.dump();
    std::string out(kMagic, 8);
    put_u64(out, hj.size());
    out += hj;
    // float32 little-endian blob; this code assumes a little-endian host
    size_t blob_off = out.size();
    out.resize(blob_off + offset * 4);
    for (const auto& t : table) {
        std::memcpy(out.data() + blob_off, t.data, t.count() * 4);
        blob_off += t.count() * 4;
    }
    return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
    auto corrupt = [](const std::string& what) { throw RuntimeError("checkpoint: " + what); };
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        corrupt("bad magic");
    uint64_t hlen = get_u64(bytes.data() + 8);
    if (16 + hlen > bytes.size()) corrupt("truncated header");
    json header;
    try {
        header = json::parse(bytes.substr(16, hlen));
    } catch (const json::exception& e) {
        corrupt(std::string("bad header JSON: ") + e.what());
    }
    ModelConfig cfg;
    try {
        cfg = config_from_json(header.at("config"));
    } catch (const json::exception& e) {
        corrupt(std::string("bad config: ") + e.what());
    }
    cfg.validate();
    Checkpoint c = Checkpoint::zeros(cfg);
    auto table = tensor_table(c);
    try {
        const auto& jt = header.at("tensors");
        if (!jt.is_array() || jt.size() != table.size()) corrupt("tensor table size mismatch");
        size_t blob = 16 + size_t(hlen);
        size_t blob_floats = (bytes.size() - blob) / 4;
        size_t expect_off = 0;
        for (size_t i = 0; i < table.size(); i++) {
            const auto& j = jt[i];
            std::string name = j.at("name").get<std::string>();
            if (name != table[i].name) corrupt("unexpected tensor '" + name + "' (want '" + table[i].name + "')");
            std::vector<int> shape = j.at("shape").get<std::vector<int>>();
            if (shape != table[i].shape) corrupt("tensor '" + name + "' has wrong shape");
            size_t off = j.at("offset").get<size_t>();
            if (off != expect_off) corrupt("tensor '" + name + "' has unexpected offset");
            if (off + table[i].count() > blob_floats) corrupt("tensor '" + name + "' overruns blob");
            std::memcpy(table[i].data, bytes.data() + blob + off * 4, table[i].count() * 4);
            expect_off += table[i].count();
        }
        if (blob + expect_off * 4 != bytes.size()) corrupt("blob size mismatch");
    } catch (const json::exception& e) {
        corrupt(std::string("bad tensor table: ") + e.what());
    }
    return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::string bytes = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write checkpoint " + path);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw RuntimeError("short write on checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open checkpoint " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string bytes = ss.str();
    return deserialize_checkpoint(bytes);
}

std::string checkpoint_hash(const Checkpoint& ckpt) {
    std::string bytes = serialize_checkpoint(ckpt);
    Fnv1a h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

}  // namespace natlas
