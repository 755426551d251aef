#include "natlas/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "natlas/common.hpp"

namespace natlas {

QuantileSketch::QuantileSketch(int k) : k_(std::max(k, 8)) { levels_.resize(1); }

size_t QuantileSketch::cap(size_t h, size_t H) const {
    double c = double(k_) * std::pow(2.0 / 3.0, double(H - 1 - h));
    return std::max(size_t(2), size_t(std::ceil(c)));
}

size_t QuantileSketch::total_size() const {
    size_t s = 0;
    for (const auto& lv : levels_) s += lv.size();
    return s;
}

size_t QuantileSketch::total_cap() const {
    size_t s = 0;
    for (size_t h = 0; h < levels_.size(); h++) s += cap(h, levels_.size());
    return s;
}

void QuantileSketch::add(float v) {
    levels_[0].push_back(v);
    n_++;
    compress();
}

void QuantileSketch::compress() {
    while (total_size() > total_cap()) compact_lowest();
}

void QuantileSketch::compact_lowest() {
    size_t H = levels_.size();
    size_t h = 0;
    bool found = false;
    for (; h < H; h++)
        if (levels_[h].size() >= cap(h, H)) { found = true; break; }
    if (!found) {  // over total but no single level over: compact the fullest
        size_t best = 0;
        for (size_t i = 0; i < H; i++)
            if (levels_[i].size() > levels_[best].size()) best = i;
        h = best;
    }
    if (h + 1 >= levels_.size()) levels_.emplace_back();
    auto& lv = levels_[h];
    std::sort(lv.begin(), lv.end());
    size_t begin = lv.size() % 2;  // odd count: smallest item stays behind
    std::vector<float> promoted;
    promoted.reserve((lv.size() - begin) / 2);
    for (size_t i = begin + (parity_ ? 1 : 0); i < lv.size(); i += 2)
        promoted.push_back(lv[i]);
    parity_ = !parity_;
    std::vector<float> rest(lv.begin(), lv.begin() + begin);
    lv = std::move(rest);
    auto& up = levels_[h + 1];
    up.insert(up.end(), promoted.begin(), promoted.end());
}

void QuantileSketch::merge(const QuantileSketch& other) {
    if (other.levels_.size() > levels_.size()) levels_.resize(other.levels_.size());
    for (size_t h = 0; h < other.levels_.size(); h++)
        levels_[h].insert(levels_[h].end(), other.levels_[h].begin(), other.levels_[h].end());
    n_ += other.n_;
    compress();
}

float QuantileSketch::quantile(double q) const {
    if (n_ == 0) throw ValidationError("quantile of empty sketch");
    q = std::clamp(q, 0.0, 1.0);
    std::vector<std::pair<float, uint64_t>> items;
    uint64_t w_total = 0;
    for (size_t h = 0; h < levels_.size(); h++) {
        uint64_t w = uint64_t(1) << h;
        for (float v : levels_[h]) { items.push_back({v, w}); w_total += w; }
    }
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // nearest rank over the retained (weighted) population
    uint64_t target = uint64_t(std::ceil(q * double(w_total)));
    if (target < 1) target = 1;
    uint64_t cum = 0;
    for (const auto& [v, w] : items) {
        cum += w;
        if (cum >= target) return v;
    }
    return items.back().first;
}

void QuantileSketch::serialize(std::string& out) const {
    auto put32 = [&](uint32_t v) { for (int i = 0; i < 4; i++) out.push_back(char((v >> (8 * i)) & 0xff)); };
    auto put64 = [&](uint64_t v) { for (int i = 0; i < 8; i++) out.push_back(char((v >> (8 * i)) & 0xff)); };
    put32(uint32_t(k_));
    put64(n_);
    put32(uint32_t(levels_.size()));
    out.push_back(parity_ ? 1 : 0);
    for (const auto& lv : levels_) {
        put32(uint32_t(lv.size()));
        size_t at = out.size();
        out.resize(at + lv.size() * 4);
        std::memcpy(out.data() + at, lv.data(), lv.size() * 4);
    }
}

QuantileSketch QuantileSketch::deserialize(const std::string& bytes, size_t& off) {
    auto need = [&](size_t n) {
        if (off + n > bytes.size()) throw RuntimeError("sketch: truncated data");
    };
    auto get32 = [&]() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; i++) v |= uint32_t(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
        off += 4;
        return v;
    };
    auto get64 = [&]() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; i++) v |= uint64_t(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
        off += 8;
        return v;
    };
    int k = int(get32());
    QuantileSketch s(k);
    s.n_ = get64();
    uint32_t H = get32();
    if (H == 0 || H > 64) throw RuntimeError("sketch: bad level count");
    need(1);
    s.parity_ = bytes[off++] != 0;
    s.levels_.assign(H, {});
    for (uint32_t h = 0; h < H; h++) {
        uint32_t c = get32();
        need(size_t(c) * 4);
        s.levels_[h].resize(c);
        std::memcpy(s.levels_[h].data(), bytes.data() + off, size_t(c) * 4);
        off += size_t(c) * 4;
    }
    return s;
}

bool QuantileSketch::state_equal(const QuantileSketch& o) const {
    return k_ == o.k_ && n_ == o.n_ && parity_ == o.parity_ && levels_ == o.levels_;
}

}  // namespace natlas
