#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cr/errors.hpp"
#include "cr/theory.hpp"

using namespace cr;
using namespace cr::theory;

namespace {

double combined_se(const Estimate& a, const Estimate& b) {
    return std::sqrt(a.std_err * a.std_err + b.std_err * b.std_err);
}

}  // namespace

TEST_CASE("closed forms match direct substitution") {
    CHECK(p_cot_sc(0.5, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p_cot_sc(0.0, 100) == doctest::Approx(0.0));
    CHECK(p_cot_sc(0.25, 2) == doctest::Approx(0.4375).epsilon(1e-15));

    CHECK(p_tot(0.5, 0.5, 2) == doctest::Approx(0.5625).epsilon(1e-15));
    CHECK(p_tot(0.3, 0.7, 1) == doctest::Approx(0.21).epsilon(1e-15));
    CHECK(p_tot(1.0, 1.0, 7) == doctest::Approx(1.0));

    CHECK_THROWS_AS(p_cot_sc(1.5, 2), ConfigError);
    CHECK_THROWS_AS(p_cot_sc(0.5, 0), ConfigError);
    CHECK_THROWS_AS(p_tot(-0.1, 0.5, 2), ConfigError);
}

TEST_CASE("product-vs-stages bound holds on the exhaustive grid") {
    int violations = 0;
    int equality_misses = 0;
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            const double p1 = i / 20.0;
            const double p2 = j / 20.0;
            for (int n = 1; n <= 20; ++n) {
                const Lemma1Result r = check_lemma1(p1, p2, n);
                if (!r.holds) violations++;
                if (n == 1 && std::fabs(r.lhs - r.rhs) > 1e-12) equality_misses++;
            }
        }
    }
    CHECK(violations == 0);
    CHECK(equality_misses == 0);

    const Lemma1Result r = check_lemma1(0.5, 0.5, 2);
    CHECK(r.lhs == doctest::Approx(0.4375).epsilon(1e-15));
    CHECK(r.rhs == doctest::Approx(0.5625).epsilon(1e-15));
    CHECK(r.holds);
}

TEST_CASE("parameter and schedule validation") {
    CHECK_THROWS_AS(StageParams::two_stage(1.2, 0.5, 4), ConfigError);
    CHECK_THROWS_AS(StageParams::two_stage(0.5, 0.5, 0), ConfigError);
    const StageParams params = StageParams::two_stage(0.4, 0.6, 3);
    CHECK(params.p == doctest::Approx(0.24));

    CHECK_NOTHROW(CrBoostSchedule::flat(params).validate(params));
    CHECK_NOTHROW(CrBoostSchedule{{0.4, 0.5, 0.9}, {0.6, 0.6}}.validate(params));
    // decreasing
    CHECK_THROWS_AS(CrBoostSchedule({{0.5, 0.4}, {0.6}}).validate(params), ConfigError);
    // below the base stage probability
    CHECK_THROWS_AS(CrBoostSchedule({{0.3}, {0.6}}).validate(params), ConfigError);
    CHECK_THROWS_AS(CrBoostSchedule({{0.4}, {}}).validate(params), ConfigError);
    CHECK_THROWS_AS(CrBoostSchedule({{0.4}, {1.2}}).validate(params), ConfigError);

    CHECK_THROWS_AS(
        simulate(Method::ToT, params, CrBoostSchedule::flat(params), 0, 1), ConfigError);
    CHECK_THROWS_AS(
        simulate(Method::CR, params, CrBoostSchedule({{0.3}, {0.6}}), 1000, 1), ConfigError);
    // the schedule is not consulted for the baselines
    CHECK_NOTHROW(simulate(Method::CoTSC, params, CrBoostSchedule{}, 10, 1));
}

TEST_CASE("schedule lookup clamps at the last entry") {
    const CrBoostSchedule boosts{{0.2, 0.4, 0.8}, {0.5}};
    CHECK(boosts.s1(0) == 0.2);
    CHECK(boosts.s1(1) == 0.4);
    CHECK(boosts.s1(2) == 0.8);
    CHECK(boosts.s1(9) == 0.8);
    CHECK(boosts.s2(3) == 0.5);
}

TEST_CASE("tree-search estimate converges to its closed form") {
    const StageParams params = StageParams::two_stage(0.5, 0.5, 2);
    const Estimate est =
        simulate(Method::ToT, params, CrBoostSchedule::flat(params), 100000, 7);
    const double expected = p_tot(0.5, 0.5, 2);
    CHECK(std::fabs(est.value - expected) <= 4.0 * est.std_err);
    CHECK(est.std_err == doctest::Approx(std::sqrt(est.value * (1 - est.value) / 100000.0)));
    CHECK(est.trials == 100000);
}

TEST_CASE("flat schedule reduces the cumulative method to tree search") {
    const StageParams params = StageParams::two_stage(0.35, 0.55, 3);
    const CrBoostSchedule flat = CrBoostSchedule::flat(params);
    const Estimate cr = simulate(Method::CR, params, flat, 100000, 21);
    const Estimate tot = simulate(Method::ToT, params, flat, 100000, 22);
    CHECK(std::fabs(cr.value - tot.value) <= 3.0 * combined_se(cr, tot));
}

TEST_CASE("arrival ordering holds across a boosted sweep") {
    Rng sweep_rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const double p1 = 0.05 + 0.85 * sweep_rng.next_double();
        const double p2 = 0.05 + 0.85 * sweep_rng.next_double();
        const int n = 1 + static_cast<int>(sweep_rng.next_below(6));
        const StageParams params = StageParams::two_stage(p1, p2, n);
        CrBoostSchedule boosts;
        const double d1 = 0.3 * sweep_rng.next_double();
        const double d2 = 0.3 * sweep_rng.next_double();
        for (int h = 0; h <= n; ++h) {
            boosts.stage1.push_back(std::min(1.0, p1 + d1 * h));
            boosts.stage2.push_back(std::min(1.0, p2 + d2 * h));
        }
        const long trials = 20000;
        const Estimate cot = simulate(Method::CoTSC, params, boosts, trials, 100 + trial);
        const Estimate tot = simulate(Method::ToT, params, boosts, trials, 200 + trial);
        const Estimate cr = simulate(Method::CR, params, boosts, trials, 300 + trial);
        CAPTURE(p1);
        CAPTURE(p2);
        CAPTURE(n);
        CHECK(cot.value <= tot.value + 3.0 * combined_se(cot, tot));
        CHECK(tot.value <= cr.value + 3.0 * combined_se(tot, cr));
    }
}

TEST_CASE("raising any boost entry never hurts (within noise)") {
    const StageParams params = StageParams::two_stage(0.3, 0.4, 4);
    CrBoostSchedule low;
    low.stage1 = {0.3, 0.4, 0.5};
    low.stage2 = {0.4, 0.5};
    CrBoostSchedule high = low;
    high.stage1[2] = 0.9;
    const Estimate a = simulate(Method::CR, params, low, 50000, 5);
    const Estimate b = simulate(Method::CR, params, high, 50000, 5);
    CHECK(a.value <= b.value + 3.0 * combined_se(a, b));

    CrBoostSchedule higher = high;
    higher.stage2.push_back(0.95);
    const Estimate c = simulate(Method::CR, params, higher, 50000, 5);
    CHECK(b.value <= c.value + 3.0 * combined_se(b, c));
}

TEST_CASE("simulation replays bit-identically under a fixed seed") {
    const StageParams params = StageParams::two_stage(0.42, 0.58, 3);
    const CrBoostSchedule boosts = CrBoostSchedule::flat(params);
    for (const Method m : {Method::CoTSC, Method::ToT, Method::CR}) {
        const Estimate a = simulate(m, params, boosts, 20000, 99);
        const Estimate b = simulate(m, params, boosts, 20000, 99);
        CHECK(a.value == b.value);
        CHECK(a.std_err == b.std_err);
    }
    CHECK(std::string(method_name(Method::CoTSC)) == "CoT-SC");
    CHECK(std::string(method_name(Method::ToT)) == "ToT");
    CHECK(std::string(method_name(Method::CR)) == "CR");
}

TEST_CASE("stage decomposition on a real puzzle is internally consistent") {
    const ConceptualResult res = conceptual_experiment({2, 7, 12, 13}, 2000, 17);
    CHECK(res.p1_hat.value > 0.0);
    CHECK(res.p1_hat.value < 1.0);
    CHECK(res.p2_hat.value > 0.0);
    // a single-shot success requires an extendable first step
    CHECK(res.p_hat.value <=
          res.p1_hat.value + 3.0 * combined_se(res.p_hat, res.p1_hat));
    // product of stage estimates vs the independently-run pipeline
    const double prod_se = std::sqrt(
        res.p2_hat.value * res.p2_hat.value * res.p1_hat.std_err * res.p1_hat.std_err +
        res.p1_hat.value * res.p1_hat.value * res.p2_hat.std_err * res.p2_hat.std_err +
        res.pipeline_hat.std_err * res.pipeline_hat.std_err);
    CHECK(std::fabs(res.product - res.pipeline_hat.value) <= 3.0 * prod_se);

    const ConceptualResult replay = conceptual_experiment({2, 7, 12, 13}, 2000, 17);
    CHECK(replay.p_hat.value == res.p_hat.value);
    CHECK(replay.pipeline_hat.value == res.pipeline_hat.value);

    CHECK_THROWS_AS(conceptual_experiment({1, 1, 1, 1}, 100, 1), ConfigError);
    CHECK_THROWS_AS(conceptual_experiment({2, 7, 12, 13}, 0, 1), ConfigError);
}
