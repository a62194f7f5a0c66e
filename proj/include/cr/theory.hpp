#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cr/rng.hpp"

namespace cr::theory {

// Two-stage success model: p1 first-step success, p2 second-stage success given a
// correct first step, p direct single-shot success, n attempts per stage.
struct StageParams {
    double p1 = 0.0;
    double p2 = 0.0;
    double p = 0.0;
    int n = 1;

    static StageParams two_stage(double p1, double p2, int n);  // sets p = p1*p2
    void validate() const;  // throws ConfigError
};

// Conditional success probabilities as a function of accumulated history size;
// entry h applies when h propositions have been validated so far. Clamped at the
// last entry. Consistency: non-decreasing, and entry 0 at least the base value.
struct CrBoostSchedule {
    std::vector<double> stage1;
    std::vector<double> stage2;

    static CrBoostSchedule flat(const StageParams& params);
    double s1(int history) const;
    double s2(int history) const;
    void validate(const StageParams& params) const;  // throws ConfigError
};

struct Estimate {
    double value = 0.0;
    double std_err = 0.0;
    long trials = 0;
    std::uint64_t seed = 0;
};

enum class Method { CoTSC, ToT, CR };
const char* method_name(Method method);

// Closed forms.
double p_cot_sc(double p, int n);             // 1 - (1-p)^n
double p_tot(double p1, double p2, int n);    // (1-(1-p1)^n) * (1-(1-p2)^n)

struct Lemma1Result {
    double lhs = 0.0;  // 1 - (1 - p1*p2)^n
    double rhs = 0.0;  // p_tot
    bool holds = false;
};
Lemma1Result check_lemma1(double p1, double p2, int n);

// Monte Carlo arrival-probability estimate for one method; seed-replayable.
// The schedule is consulted (and validated) only for Method::CR.
Estimate simulate(Method method, const StageParams& params, const CrBoostSchedule& boosts,
                  long trials, std::uint64_t seed);

// Random-strategy stage decomposition on one solvable puzzle: single-shot success,
// first-step success, second-stage success given a correct first step, and the
// two-stage pipeline run as its own independent counter.
struct ConceptualResult {
    Estimate p_hat;
    Estimate p1_hat;
    Estimate p2_hat;
    Estimate pipeline_hat;
    double product = 0.0;  // p1_hat * p2_hat
};
ConceptualResult conceptual_experiment(const std::array<int, 4>& puzzle, long trials,
                                       std::uint64_t seed);

}  // namespace cr::theory
