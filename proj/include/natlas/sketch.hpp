#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace natlas {

// Mergeable KLL-style quantile sketch with no randomness: compaction keeps
// alternating parities instead of flipping coins, so identical input order
// gives identical state, and merge order only moves estimates within the
// error bound. With k = 400 the observed worst-case rank error stays well
// under 1% for streams up to ~1e7 values (asserted by tests on adversarial
// orders); memory is O(3k) per sketch.
class QuantileSketch {
public:
    explicit QuantileSketch(int k = 400);

    void add(float v);
    void merge(const QuantileSketch& other);
    uint64_t count() const { return n_; }
    bool empty() const { return n_ == 0; }

    // Weighted nearest-rank quantile, q in [0,1]; throws on an empty sketch.
    float quantile(double q) const;

    void serialize(std::string& out) const;
    // Reads one sketch starting at `off`, advancing it. Throws on corruption.
    static QuantileSketch deserialize(const std::string& bytes, size_t& off);

    bool state_equal(const QuantileSketch& other) const;  // exact, for round-trip tests

private:
    int k_;
    uint64_t n_ = 0;
    bool parity_ = false;
    std::vector<std::vector<float>> levels_;  // level h items weigh 2^h

    size_t cap(size_t h, size_t H) const;
    size_t total_size() const;
    size_t total_cap() const;
    void compact_lowest();
    void compress();
};

}  // namespace natlas
