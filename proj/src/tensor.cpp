#include "natlas/tensor.hpp"

#include <cmath>

#include "natlas/common.hpp"

namespace natlas {

std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; i--) { s[i] = digits[v & 0xf]; v >>= 4; }
    return s;
}

float dotf(const float* a, const float* b, int n) {
    float acc = 0.f;
    for (int i = 0; i < n; i++) acc += a[i] * b[i];
    return acc;
}

void matvec(const Mat& w, const float* x, float* out) {
    for (int i = 0; i < w.rows; i++) out[i] = dotf(w.row(i), x, w.cols);
}

void rmsnorm(const float* x, const float* weight, float* y, int n, float eps) {
    float ss = 0.f;
    for (int i = 0; i < n; i++) ss += x[i] * x[i];
    float scale = 1.f / std::sqrt(ss / n + eps);
    for (int i = 0; i < n; i++) y[i] = x[i] * scale * weight[i];
}

void softmax_inplace(float* x, int n) {
    float mx = x[0];
    for (int i = 1; i < n; i++) mx = std::max(mx, x[i]);
    double sum = 0.0;  // double normalizer keeps the outputs summing to 1 tightly
    for (int i = 0; i < n; i++) { x[i] = std::exp(x[i] - mx); sum += x[i]; }
    float inv = float(1.0 / sum);
    for (int i = 0; i < n; i++) x[i] *= inv;
}

float silu(float x) { return x / (1.f + std::exp(-x)); }

}  // namespace natlas
