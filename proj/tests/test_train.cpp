#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "natlas/model.hpp"
#include "natlas/tokenizer.hpp"
#include "natlas/train.hpp"

using namespace natlas;

namespace {

ModelConfig tiny_config() {
    ModelConfig c;
    c.n_layers = 2;
    c.d_model = 8;
    c.n_heads = 2;
    c.d_ff = 12;
    c.vocab_size = tok::kVocab;
    c.max_seq_len = 16;
    return c;
}

std::vector<std::vector<int>> gradcheck_batch() {
    return {
        {tok::kBos, 'a', 'b', 'c', 'a', 'b'},
        {tok::kBos, 'x', 'y', 'x', 'z', tok::kEos},
    };
}

double batch_loss(Trainer& tr, const std::vector<std::vector<int>>& batch) {
    double total = 0;
    for (const auto& s : batch) total += tr.loss(s);
    return total / double(batch.size());
}

}  // namespace

TEST_CASE("analytic gradients agree with central differences") {
    Trainer tr(tiny_config(), 3);
    auto batch = gradcheck_batch();

    tr.zero_grads();
    double base = tr.backward_batch(batch);
    CHECK(base == doctest::Approx(batch_loss(tr, batch)).epsilon(1e-12));

    // the 48 largest-magnitude gradients plus a uniform stride across the rest
    size_t n = tr.n_params();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t(0));
    std::partial_sort(idx.begin(), idx.begin() + 48, idx.end(), [&](size_t a, size_t b) {
        return std::fabs(tr.grad(a)) > std::fabs(tr.grad(b));
    });
    std::vector<size_t> picks(idx.begin(), idx.begin() + 48);
    for (size_t i = 0; i < n; i += n / 16) picks.push_back(i);

    REQUIRE(std::fabs(tr.grad(picks[0])) > 1e-6);  // the check must not be vacuous

    const double eps = 1e-5;
    for (size_t i : picks) {
        double saved = tr.param(i);
        tr.param(i) = saved + eps;
        double up = batch_loss(tr, batch);
        tr.param(i) = saved - eps;
        double down = batch_loss(tr, batch);
        tr.param(i) = saved;
        double numeric = (up - down) / (2 * eps);
        double analytic = tr.grad(i);
        CHECK(std::fabs(numeric - analytic) <=
              1e-8 + 1e-5 * std::max(std::fabs(numeric), std::fabs(analytic)));
    }
}

TEST_CASE("double reference logits track the float inference path") {
    Trainer init(tiny_config(), 7);
    Checkpoint ckpt = init.to_checkpoint();
    Trainer widened(ckpt);

    std::vector<int> toks = {tok::kBos, 'h', 'e', 'l', 'l', 'o'};
    std::vector<double> ref = widened.reference_logits(toks);
    ForwardResult fr = forward(ckpt, toks);
    REQUIRE(ref.size() == toks.size() * size_t(tok::kVocab));

    double worst = 0;
    for (size_t t = 0; t < toks.size(); t++)
        for (int v = 0; v < tok::kVocab; v++)
            worst = std::max(worst,
                             std::fabs(ref[t * tok::kVocab + v] - double(fr.logits.row(int(t))[v])));
    CHECK(worst < 2e-3);
}

TEST_CASE("fresh init scores close to the uniform baseline") {
    Trainer tr(tiny_config(), 11);
    std::vector<int> toks = {tok::kBos, 'q', 'r', 's', 't', 'u', 'v', 'w'};
    CHECK(tr.loss(toks) == doctest::Approx(std::log(double(tok::kVocab))).epsilon(0.02));
}

namespace {

Corpus train_corpus() {
    std::vector<LanguageSpec> specs(2);
    specs[0] = {"aa", "P", 1, 21, {'a', 'b', 'c', 'd', 'e', 'f'}};
    specs[1] = {"ab", "P", 2, 22, {'g', 'h', 'i', 'j', 'k', 'l'}};
    return synth_corpus(specs, 4, 80, 5);
}

TrainConfig short_run() {
    TrainConfig cfg;
    cfg.model = tiny_config();
    cfg.steps = 10;
    cfg.batch = 4;
    cfg.seq_len = 12;
    cfg.warmup = 4;
    cfg.seed = 17;
    return cfg;
}

}  // namespace

TEST_CASE("short training runs are deterministic end to end") {
    Corpus corpus = train_corpus();
    TrainResult a = train_tiny(short_run(), corpus);
    TrainResult b = train_tiny(short_run(), corpus);

    REQUIRE(a.loss_curve.size() == 10);
    CHECK(a.initial_loss == a.loss_curve.front());
    CHECK(a.final_loss == a.loss_curve.back());
    CHECK(a.initial_loss == doctest::Approx(std::log(double(tok::kVocab))).epsilon(0.02));
    CHECK(a.loss_curve == b.loss_curve);
    CHECK(serialize_checkpoint(a.ckpt) == serialize_checkpoint(b.ckpt));
}

TEST_CASE("training rejects bad configs and reports divergence by step") {
    Corpus corpus = train_corpus();

    TrainConfig cfg = short_run();
    cfg.steps = 0;
    CHECK_THROWS_AS(train_tiny(cfg, corpus), ValidationError);

    cfg = short_run();
    cfg.seq_len = 16;  // sample needs seq_len + 1 <= max_seq_len
    CHECK_THROWS_AS(train_tiny(cfg, corpus), ValidationError);

    cfg = short_run();
    cfg.lr = 1e150;  // one update this size overflows the next forward pass
    CHECK_THROWS_WITH_AS(train_tiny(cfg, corpus), doctest::Contains("step"), RuntimeError);
}
