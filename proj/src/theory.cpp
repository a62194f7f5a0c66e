#include "cr/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cr/errors.hpp"
#include "cr/game24.hpp"

namespace cr::theory {

namespace {

void check_prob(double value, const char* name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ConfigError(std::string(name) + " must be in [0,1]");
    }
}

Estimate finish(long hits, long trials, std::uint64_t seed) {
    Estimate e;
    e.trials = trials;
    e.seed = seed;
    e.value = static_cast<double>(hits) / static_cast<double>(trials);
    e.std_err = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
    return e;
}

}  // namespace

StageParams StageParams::two_stage(double p1, double p2, int n) {
    StageParams params;
    params.p1 = p1;
    params.p2 = p2;
    params.p = p1 * p2;
    params.n = n;
    params.validate();
    return params;
}

void StageParams::validate() const {
    check_prob(p1, "p1");
    check_prob(p2, "p2");
    check_prob(p, "p");
    if (n < 1) throw ConfigError("n must be >= 1");
}

CrBoostSchedule CrBoostSchedule::flat(const StageParams& params) {
    return {{params.p1}, {params.p2}};
}

double CrBoostSchedule::s1(int history) const {
    const std::size_t i = std::min<std::size_t>(history, stage1.size() - 1);
    return stage1[i];
}

double CrBoostSchedule::s2(int history) const {
    const std::size_t i = std::min<std::size_t>(history, stage2.size() - 1);
    return stage2[i];
}

void CrBoostSchedule::validate(const StageParams& params) const {
    if (stage1.empty() || stage2.empty()) throw ConfigError("boost schedule empty");
    auto check_stage = [](const std::vector<double>& v, double base, const char* name) {
        double prev = base;
        for (const double value : v) {
            check_prob(value, name);
            if (value + 1e-15 < prev) {
                throw ConfigError(std::string(name) +
                                  " must be non-decreasing and at least the base probability");
            }
            prev = value;
        }
    };
    check_stage(stage1, params.p1, "stage1 schedule");
    check_stage(stage2, params.p2, "stage2 schedule");
}

const char* method_name(Method method) {
    switch (method) {
        case Method::CoTSC: return "CoT-SC";
        case Method::ToT: return "ToT";
        case Method::CR: return "CR";
    }
    return "?";
}

double p_cot_sc(double p, int n) {
    check_prob(p, "p");
    if (n < 1) throw ConfigError("n must be >= 1");
    return 1.0 - std::pow(1.0 - p, n);
}

double p_tot(double p1, double p2, int n) {
    check_prob(p1, "p1");
    check_prob(p2, "p2");
    if (n < 1) throw ConfigError("n must be >= 1");
    return (1.0 - std::pow(1.0 - p1, n)) * (1.0 - std::pow(1.0 - p2, n));
}

Lemma1Result check_lemma1(double p1, double p2, int n) {
    Lemma1Result r;
    r.lhs = p_cot_sc(p1 * p2, n);
    r.rhs = p_tot(p1, p2, n);
    r.holds = r.lhs <= r.rhs + 1e-12;
    return r;
}

Estimate simulate(Method method, const StageParams& params, const CrBoostSchedule& boosts,
                  long trials, std::uint64_t seed) {
    params.validate();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (method == Method::CR) boosts.validate(params);

    Rng rng(seed);
    long hits = 0;
    for (long t = 0; t < trials; ++t) {
        bool success = false;
        switch (method) {
            case Method::CoTSC:
                // n independent full chains; each must get both stages right
                for (int i = 0; i < params.n && !success; ++i) {
                    success = rng.bernoulli(params.p1) && rng.bernoulli(params.p2);
                }
                break;
            case Method::ToT: {
                // n first-stage attempts filtered by a perfect verifier, then n
                // second-stage attempts from a surviving correct node
                bool stage1 = false;
                for (int i = 0; i < params.n; ++i) stage1 |= rng.bernoulli(params.p1);
                bool stage2 = false;
                for (int i = 0; i < params.n; ++i) stage2 |= rng.bernoulli(params.p2);
                success = stage1 && stage2;
                break;
            }
            case Method::CR: {
                // validated first-stage propositions accumulate and condition
                // every later attempt
                int history = 0;
                for (int i = 0; i < params.n; ++i) {
                    if (rng.bernoulli(boosts.s1(history))) history++;
                }
                bool stage2 = false;
                for (int i = 0; i < params.n; ++i) {
                    stage2 |= rng.bernoulli(boosts.s2(history));
                }
                success = history > 0 && stage2;
                break;
            }
        }
        if (success) hits++;
    }
    return finish(hits, trials, seed);
}

ConceptualResult conceptual_experiment(const std::array<int, 4>& puzzle, long trials,
                                       std::uint64_t seed) {
    using game24::Game24State;
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!game24::oracle_solvable(puzzle)) {
        throw ConfigError("conceptual experiment requires a solvable puzzle");
    }
    const Rational target(24);
    const Game24State start = game24::initial_state(puzzle);

    auto extendable = [&target](const Game24State& state) {
        return game24::reachable_values(state.numbers()).count(target) > 0;
    };
    auto random_descent = [&target](Game24State state, Rng& rng) {
        while (state.slots.size() > 1) {
            state = game24::apply_step(state, game24::propose_random(state, rng));
        }
        return state.slots[0].value == target;
    };
    auto random_correct_first = [&](Rng& rng) {
        // rejection-sample a uniformly random extendable first step; the puzzle
        // is solvable, so one exists
        while (true) {
            const Game24State next =
                game24::apply_step(start, game24::propose_random(start, rng));
            if (extendable(next)) return next;
        }
    };

    // one independent stream per counter, so the estimates are uncorrelated
    const Rng rng(seed);
    Rng rng_single = rng.derive(0);
    Rng rng_stage1 = rng.derive(1);
    Rng rng_stage2 = rng.derive(2);
    Rng rng_pipeline = rng.derive(3);

    long hit_single = 0, hit_stage1 = 0, hit_stage2 = 0, hit_pipeline = 0;
    for (long t = 0; t < trials; ++t) {
        if (random_descent(start, rng_single)) hit_single++;

        const Game24State first =
            game24::apply_step(start, game24::propose_random(start, rng_stage1));
        if (extendable(first)) hit_stage1++;

        if (random_descent(random_correct_first(rng_stage2), rng_stage2)) hit_stage2++;

        const Game24State pipe =
            game24::apply_step(start, game24::propose_random(start, rng_pipeline));
        if (extendable(pipe) && random_descent(pipe, rng_pipeline)) hit_pipeline++;
    }

    ConceptualResult result;
    result.p_hat = finish(hit_single, trials, seed);
    result.p1_hat = finish(hit_stage1, trials, seed);
    result.p2_hat = finish(hit_stage2, trials, seed);
    result.pipeline_hat = finish(hit_pipeline, trials, seed);
    result.product = result.p1_hat.value * result.p2_hat.value;
    return result;
}

}  // namespace cr::theory
