#include "doctest.h"
#include "natlas/steer.hpp"
#include "natlas/tokenizer.hpp"
#include "natlas/train.hpp"

using namespace natlas;

namespace {

// hand-built stats: 1 layer, 4 neurons, langs a (2 tokens) and b (4 tokens)
ActivationStats hand_stats() {
    ActivationStats st;
    st.n_layers = 1;
    st.d_ff = 4;
    st.langs = {"a", "b"};
    st.provenance = "hand";
    st.context_len = 8;
    st.stride = 8;
    st.totals = {3, 4};
    st.active.assign(2 * 4, 0);
    st.sums.assign(2 * 4, FixedSum{});
    st.sketches.assign(2 * 4, QuantileSketch());
    auto put = [&](int lang, int j, std::vector<float> vals) {
        for (float v : vals) {
            st.sums[st.idx(lang, 0, j)].add(v);
            st.sketches[st.idx(lang, 0, j)].add(v);
            if (v > 0) st.active[st.idx(lang, 0, j)]++;
        }
    };
    put(0, 0, {1.f, 2.f, 3.f});   // mean 2.0, median 2
    put(0, 1, {6.f, 0.f, 0.f});   // mean 2.0
    put(1, 0, {1.f, 1.f, 1.f, 1.f});  // mean 1.0
    put(1, 1, {0.f, 0.f, 0.f, 4.f});  // mean 1.0
    return st;
}

}  // namespace

TEST_CASE("boosts are mean taps over the language's tokens") {
    ActivationStats st = hand_stats();
    NeuronSet set;
    set.lang = "a";
    set.neurons = {{0, 0}, {0, 1}};
    BoostVector bv = compute_boosts(st, set);
    REQUIRE(bv.boosts.size() == 2);
    CHECK(std::get<2>(bv.boosts[0]) == doctest::Approx(2.0));
    CHECK(std::get<2>(bv.boosts[1]) == doctest::Approx(2.0));

    InterventionPlan plan = plan_activate(bv);
    REQUIRE(plan.directives.size() == 1);
    CHECK(plan.directives[0].mode == TapDirective::Mode::add);
    CHECK(plan.directives[0].neurons == std::vector<int>{0, 1});

    NeuronSet bad;
    bad.lang = "zz";
    bad.neurons = {{0, 0}};
    CHECK_THROWS_AS((void)compute_boosts(st, bad), ValidationError);
    NeuronSet oob;
    oob.lang = "a";
    oob.neurons = {{3, 0}};
    CHECK_THROWS_AS((void)compute_boosts(st, oob), ValidationError);
}

TEST_CASE("deactivation compiles to multiply(0) or set(value)") {
    NeuronSet set;
    set.lang = "a";
    set.neurons = {{0, 2}, {0, 3}};
    InterventionPlan zero = plan_deactivate(set, 0.f);
    REQUIRE(zero.directives.size() == 1);
    CHECK(zero.directives[0].mode == TapDirective::Mode::multiply);
    CHECK(zero.directives[0].values == std::vector<float>{0.f});

    InterventionPlan neg = plan_deactivate(set, -1.f);
    REQUIRE(neg.directives.size() == 1);
    CHECK(neg.directives[0].mode == TapDirective::Mode::set);
    CHECK(neg.directives[0].values == std::vector<float>{-1.f});
}

TEST_CASE("replacement pins neurons to mean or median") {
    ActivationStats st = hand_stats();
    NeuronSet set;
    set.lang = "a";
    set.neurons = {{0, 0}};
    InterventionPlan mean = plan_replace(st, set, false);
    REQUIRE(mean.directives.size() == 1);
    CHECK(mean.directives[0].mode == TapDirective::Mode::set);
    CHECK(mean.directives[0].values[0] == doctest::Approx(2.0f));
    InterventionPlan median = plan_replace(st, set, true);
    CHECK(median.directives[0].values[0] == 2.0f);  // exact: small sketch is lossless
}

TEST_CASE("diffmean is the target mean minus the pooled rest, and antisymmetric for two languages") {
    ActivationStats st = hand_stats();
    DiffMeanVector da = compute_diffmean(st, "a", 1.0);
    // neuron 0: mean_a 2.0, mean_b 1.0 -> +1; neuron 1: same sums -> +1
    CHECK(da.per_layer[0][0] == doctest::Approx(1.0f));
    CHECK(da.per_layer[0][1] == doctest::Approx(1.0f));
    CHECK(da.per_layer[0][2] == doctest::Approx(0.0f));

    DiffMeanVector db = compute_diffmean(st, "b", 1.0);
    for (int j = 0; j < 4; ++j)
        CHECK(da.per_layer[0][j] == doctest::Approx(-db.per_layer[0][j]));

    DiffMeanVector scaled = compute_diffmean(st, "a", 2.5);
    CHECK(scaled.per_layer[0][0] == doctest::Approx(2.5f));

    InterventionPlan plan = plan_diffmean(da);
    REQUIRE(plan.directives.size() == 1);
    CHECK(plan.directives[0].mode == TapDirective::Mode::add);
    CHECK(plan.directives[0].neurons.empty());  // dense
    CHECK(plan.directives[0].values.size() == 4);

    CHECK_THROWS_AS((void)plan_diffmean(da, std::vector<int>{5}), ValidationError);
}

TEST_CASE("compose rejects contradictory sets and keeps order") {
    NeuronSet set;
    set.lang = "a";
    set.neurons = {{0, 1}};
    InterventionPlan p1 = plan_deactivate(set, -1.f);
    InterventionPlan p2 = plan_deactivate(set, -2.f);
    CHECK_THROWS_AS((void)compose({p1, p2}), ValidationError);
    InterventionPlan same = compose({p1, p1});  // idempotent: same value is fine
    CHECK(same.directives.size() == 2);

    ActivationStats st = hand_stats();
    NeuronSet other;
    other.lang = "b";
    other.neurons = {{0, 0}};
    InterventionPlan act = plan_activate(compute_boosts(st, other));
    InterventionPlan both = compose({p1, act});
    REQUIRE(both.directives.size() == 2);
    CHECK(both.directives[0].mode == TapDirective::Mode::set);
    CHECK(both.directives[1].mode == TapDirective::Mode::add);
    CHECK(both.recipe.find(p1.recipe) != std::string::npos);
}

TEST_CASE("plans survive a json round trip") {
    ActivationStats st = hand_stats();
    NeuronSet set;
    set.lang = "a";
    set.neurons = {{0, 0}, {0, 1}};
    InterventionPlan plan = compose({plan_deactivate(set, 0.f), plan_activate(compute_boosts(st, set))});
    InterventionPlan back = InterventionPlan::from_json(plan.to_json());
    CHECK(back.to_json() == plan.to_json());
    REQUIRE(back.directives.size() == plan.directives.size());
    for (size_t i = 0; i < plan.directives.size(); ++i) {
        CHECK(back.directives[i].mode == plan.directives[i].mode);
        CHECK(back.directives[i].layer == plan.directives[i].layer);
        CHECK(back.directives[i].neurons == plan.directives[i].neurons);
        CHECK(back.directives[i].values == plan.directives[i].values);
    }
    CHECK_THROWS_AS((void)InterventionPlan::from_json("{\"schema_version\":1}"), ValidationError);
}

TEST_CASE("replacement plans are idempotent on a live model") {
    ModelConfig cfg;
    cfg.n_layers = 1;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.d_ff = 4;
    cfg.vocab_size = tok::kVocab;
    cfg.max_seq_len = 8;
    Checkpoint ckpt = Trainer(cfg, 3).to_checkpoint();

    ActivationStats st = hand_stats();
    NeuronSet set;
    set.lang = "a";
    set.neurons = {{0, 0}, {0, 1}};
    InterventionPlan rep = plan_replace(st, set, false);

    std::vector<int> toks{'x', 'y', 'z'};
    ForwardResult once = forward(ckpt, toks, rep.directives);
    std::vector<TapDirective> twice = rep.directives;
    for (const auto& d : rep.directives) twice.push_back(d);
    ForwardResult again = forward(ckpt, toks, twice);
    CHECK(once.logits.v == again.logits.v);
}
