#pragma once

#include <cstddef>
#include <vector>

namespace natlas {

// Row-major float matrix. Vectors are 1 x n.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<float> v;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), v(size_t(r) * size_t(c), 0.f) {}

    float* row(int r) { return v.data() + size_t(r) * cols; }
    const float* row(int r) const { return v.data() + size_t(r) * cols; }
    float& at(int r, int c) { return v[size_t(r) * cols + c]; }
    float at(int r, int c) const { return v[size_t(r) * cols + c]; }
    size_t size() const { return v.size(); }
};

// out[i] = dot(w.row(i), x), i in [0, w.rows)
void matvec(const Mat& w, const float* x, float* out);

// y = x / sqrt(mean(x^2) + eps) * weight
void rmsnorm(const float* x, const float* weight, float* y, int n, float eps);

// in-place stable softmax
void softmax_inplace(float* x, int n);

float silu(float x);

float dotf(const float* a, const float* b, int n);

}  // namespace natlas
