#include <algorithm>
#include <random>

#include "doctest.h"
#include "natlas/common.hpp"
#include "natlas/sketch.hpp"

using namespace natlas;

namespace {

// worst |estimated rank - target rank| / n over a grid of quantiles
double max_rank_error(const QuantileSketch& s, std::vector<float> data) {
    std::sort(data.begin(), data.end());
    double worst = 0;
    for (int i = 1; i <= 99; ++i) {
        double q = i / 100.0;
        float est = s.quantile(q);
        // rank range of est in the data (handles duplicates)
        auto lo = std::lower_bound(data.begin(), data.end(), est) - data.begin();
        auto hi = std::upper_bound(data.begin(), data.end(), est) - data.begin();
        double target = q * double(data.size());
        double err = 0;
        if (target < double(lo))
            err = double(lo) - target;
        else if (target > double(hi))
            err = target - double(hi);
        worst = std::max(worst, err / double(data.size()));
    }
    return worst;
}

}  // namespace

TEST_CASE("small streams are exact") {
    QuantileSketch s;
    std::vector<float> data;
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        float v = float(rng.uniform() * 100.0 - 50.0);
        s.add(v);
        data.push_back(v);
    }
    std::sort(data.begin(), data.end());
    for (int i = 1; i <= 100; ++i) {
        double q = i / 100.0;
        size_t rank = size_t(std::ceil(q * data.size()));
        rank = std::max<size_t>(rank, 1);
        CHECK(s.quantile(q) == data[rank - 1]);
    }
    CHECK(s.count() == 300);
}

TEST_CASE("rank error stays under 1% on large streams") {
    std::vector<float> data(100000);
    for (size_t i = 0; i < data.size(); ++i) data[i] = float(i);  // sorted: adversarial for kll

    QuantileSketch asc;
    for (float v : data) asc.add(v);
    CHECK(max_rank_error(asc, data) < 0.01);

    QuantileSketch desc;
    for (size_t i = data.size(); i-- > 0;) desc.add(data[i]);
    CHECK(max_rank_error(desc, data) < 0.01);

    std::mt19937_64 mt(7);
    std::vector<float> shuffled = data;
    std::shuffle(shuffled.begin(), shuffled.end(), mt);
    QuantileSketch rnd;
    for (float v : shuffled) rnd.add(v);
    CHECK(max_rank_error(rnd, data) < 0.01);
}

TEST_CASE("merge keeps the bound") {
    Rng rng(11);
    std::vector<float> all;
    QuantileSketch a, b;
    for (int i = 0; i < 50000; ++i) {
        float v = float(rng.gauss());
        a.add(v);
        all.push_back(v);
    }
    for (int i = 0; i < 30000; ++i) {
        float v = float(rng.gauss() * 3.0 + 1.0);
        b.add(v);
        all.push_back(v);
    }
    a.merge(b);
    CHECK(a.count() == 80000);
    CHECK(max_rank_error(a, all) < 0.01);
}

TEST_CASE("identical input gives identical state; serialization round-trips") {
    QuantileSketch a, b;
    Rng r1(21), r2(21);
    for (int i = 0; i < 12345; ++i) a.add(float(r1.uniform()));
    for (int i = 0; i < 12345; ++i) b.add(float(r2.uniform()));
    CHECK(a.state_equal(b));

    std::string bytes;
    a.serialize(bytes);
    size_t off = 0;
    QuantileSketch back = QuantileSketch::deserialize(bytes, off);
    CHECK(off == bytes.size());
    CHECK(back.state_equal(a));
    CHECK(back.quantile(0.5) == a.quantile(0.5));

    std::string truncated = bytes.substr(0, bytes.size() / 2);
    size_t off2 = 0;
    CHECK_THROWS_AS((void)QuantileSketch::deserialize(truncated, off2), RuntimeError);
}

TEST_CASE("empty sketch refuses quantiles") {
    QuantileSketch s;
    CHECK(s.empty());
    CHECK_THROWS_AS((void)s.quantile(0.5), ValidationError);
}
