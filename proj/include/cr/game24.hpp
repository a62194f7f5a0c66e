#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cr/rational.hpp"
#include "cr/rng.hpp"
#include "cr/session.hpp"

namespace cr::game24 {

enum class ArithOp { Add, Sub, Mul, Div };

char op_char(ArithOp op);

struct ArithStep {
    Rational lhs;
    Rational rhs;
    ArithOp op = ArithOp::Add;
    Rational result;

    std::string str() const;  // "14 - 10 = 4"
    bool operator==(const ArithStep& o) const {
        return lhs == o.lhs && rhs == o.rhs && op == o.op && result == o.result;
    }
};

// One remaining number: its exact value, the expression that produced it, and the
// bitmask of original inputs consumed by that expression. prec records the
// expression's top-level operator precedence (0 literal, 1 additive,
// 2 multiplicative) so composition can parenthesize minimally yet correctly.
struct NumberSlot {
    Rational value;
    std::string expr;
    std::uint8_t leaves = 0;
    int prec = 0;

    bool operator<(const NumberSlot& o) const {
        if (value != o.value) return value < o.value;
        return expr < o.expr;
    }
};

struct Game24State {
    std::vector<NumberSlot> slots;  // kept sorted (canonical order)
    std::vector<ArithStep> steps;   // ordered history; slots.size() == 4 - steps.size()

    std::vector<Rational> numbers() const;
    std::vector<std::string> exprs() const;

    std::string serialize() const;            // stable JSON payload
    static Game24State deserialize(const std::string& payload);  // throws LoadError

    // Canonical key of the remaining-number multiset; states reached by different
    // step orders but holding the same numbers coincide under this key.
    std::string canonical_key() const;
};

Game24State initial_state(const std::array<int, 4>& puzzle);

// Deterministic move enumeration: slots sorted ascending; distinct value pairs in
// index order; per pair (x <= y) ops in fixed order Add, Sub (both orientations,
// negative results skipped, so y-x survives and x-y only when equal), Mul, Div
// (both orientations, zero divisors skipped, listed once for equal operands).
std::vector<ArithStep> enumerate_steps(const Game24State& state);

// Uniform draw over enumerate_steps. Throws std::logic_error on singleton states.
ArithStep propose_random(const Game24State& state, Rng& rng);

// Successor state; throws LookupError if the step's operands are not drawable.
Game24State apply_step(const Game24State& state, const ArithStep& step);

// Validated iff both operands are jointly drawable from the state and the declared
// result is arithmetically exact. Rejections carry machine-readable reasons.
Verdict verify_step(const Game24State& state, const ArithStep& step);

// All values reachable by combining the whole multiset under the enumerate_steps
// move space; memoized. Pruning asks whether the target is a member.
std::set<Rational> reachable_values(std::vector<Rational> numbers);

// Solved-state equation: exactly one slot, value == target, every original input
// consumed exactly once. Otherwise none.
std::optional<std::string> solution_equation(const Game24State& state,
                                             const Rational& target);

// Independent brute-force oracle: exhaustive search over operand orderings,
// operator choices and parenthesization shapes with exact arithmetic (negative
// and fractional intermediates allowed). Returns a witness equation or none.
std::optional<std::string> oracle_solvable(const std::array<int, 4>& puzzle,
                                           const Rational& target = Rational(24));

// All values attainable using every input exactly once (oracle-side move space).
std::set<Rational> oracle_values(const std::array<int, 4>& puzzle);

enum class ProposerMode { Exhaustive, Random };

struct Game24Options {
    ProposerMode mode = ProposerMode::Exhaustive;
    bool prune = true;  // verifier rejects states whose reachable set misses target
    Rational target = Rational(24);
};

struct Game24Result {
    std::array<int, 4> puzzle{};
    bool solved = false;
    std::string equation;  // empty when unsolved
    SessionResult session;
};

RoleBundle make_role_bundle(const Game24Options& options);

// Full CR run on one puzzle: the initial state is the sole root premise.
Game24Result run_cr_24(const std::array<int, 4>& puzzle, const SessionConfig& config,
                       const Game24Options& options = {}, EventSink sink = nullptr,
                       int session_index = 0);

// CSV: one puzzle per line, four comma-separated integers. Throws LoadError with
// the offending line number.
std::vector<std::array<int, 4>> load_puzzles_csv(const std::string& path);

}  // namespace cr::game24
