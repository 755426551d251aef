#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace natlas {

// Bad input or precondition violation. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Failure while running (I/O, divergence, corrupt file). CLI exit code 3.
struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64, used to whiten seeds before feeding streams.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic RNG wrapper. std::mt19937_64 is pinned by the standard, but the
// distributions on top of it are not, so the few draws we need are spelled out
// here to keep outputs identical across standard libraries.
struct Rng {
    uint64_t s0, s1;

    explicit Rng(uint64_t seed) {
        s0 = splitmix64(seed);
        s1 = splitmix64(s0 ^ 0xdeadbeefcafef00dull);
        if (s1 == 0) s1 = 1;
    }
    // xoroshiro128++
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    uint64_t next() {
        uint64_t a = s0, b = s1;
        uint64_t r = rotl(a + b, 17) + a;
        b ^= a;
        s0 = rotl(a, 49) ^ b ^ (b << 21);
        s1 = rotl(b, 28);
        return r;
    }
    // uniform in [0, 1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    // uniform integer in [0, n)
    uint64_t below(uint64_t n) { return next() % n; }
    // standard normal via Box-Muller (one value per call, cached pair dropped
    // on purpose: simpler and still deterministic)
    double gauss() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
};

// FNV-1a over raw bytes, for provenance fingerprints.
struct Fnv1a {
    uint64_t h = 0xcbf29ce484222325ull;
    void update(const void* data, size_t n) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; i++) { h ^= p[i]; h *= 0x100000001b3ull; }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    std::string hex() const;
};

std::string to_hex(uint64_t v);

inline std::string Fnv1a::hex() const { return to_hex(h); }

}  // namespace natlas
