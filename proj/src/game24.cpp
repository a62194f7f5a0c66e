#include "cr/game24.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "cr/errors.hpp"

namespace cr::game24 {

using nlohmann::json;

char op_char(ArithOp op) {
    switch (op) {
        case ArithOp::Add: return '+';
        case ArithOp::Sub: return '-';
        case ArithOp::Mul: return '*';
        case ArithOp::Div: return '/';
    }
    return '?';
}

static ArithOp op_from_char(char c) {
    switch (c) {
        case '+': return ArithOp::Add;
        case '-': return ArithOp::Sub;
        case '*': return ArithOp::Mul;
        case '/': return ArithOp::Div;
    }
    throw LoadError(std::string("unknown operator '") + c + "'");
}

static Rational rational_from_string(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(text));
        return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
    } catch (const std::exception&) {
        throw LoadError("bad rational literal '" + text + "'");
    }
}

std::string ArithStep::str() const {
    return lhs.str() + " " + op_char(op) + " " + rhs.str() + " = " + result.str();
}

std::vector<Rational> Game24State::numbers() const {
    std::vector<Rational> out;
    out.reserve(slots.size());
    for (const auto& s : slots) out.push_back(s.value);
    return out;
}

std::vector<std::string> Game24State::exprs() const {
    std::vector<std::string> out;
    out.reserve(slots.size());
    for (const auto& s : slots) out.push_back(s.expr);
    return out;
}

std::string Game24State::serialize() const {
    json j;
    json slot_arr = json::array();
    for (const auto& s : slots) {
        slot_arr.push_back({{"value", s.value.str()},
                            {"expr", s.expr},
                            {"leaves", s.leaves},
                            {"prec", s.prec}});
    }
    j["slots"] = slot_arr;
    json step_arr = json::array();
    for (const auto& st : steps) {
        step_arr.push_back({{"lhs", st.lhs.str()},
                            {"op", std::string(1, op_char(st.op))},
                            {"rhs", st.rhs.str()},
                            {"result", st.result.str()}});
    }
    j["steps"] = step_arr;
    return j.dump();
}

Game24State Game24State::deserialize(const std::string& payload) {
    json j;
    try {
        j = json::parse(payload);
    } catch (const json::exception& e) {
        throw LoadError(std::string("bad state payload: ") + e.what());
    }
    if (!j.is_object() || !j.contains("slots") || !j.contains("steps")) {
        throw LoadError("bad state payload: missing slots/steps");
    }
    Game24State st;
    try {
        for (const auto& s : j.at("slots")) {
            NumberSlot slot;
            slot.value = rational_from_string(s.at("value").get<std::string>());
            slot.expr = s.at("expr").get<std::string>();
            slot.leaves = static_cast<std::uint8_t>(s.at("leaves").get<int>());
            slot.prec = s.at("prec").get<int>();
            st.slots.push_back(std::move(slot));
        }
        for (const auto& s : j.at("steps")) {
            ArithStep step;
            step.lhs = rational_from_string(s.at("lhs").get<std::string>());
            step.op = op_from_char(s.at("op").get<std::string>().at(0));
            step.rhs = rational_from_string(s.at("rhs").get<std::string>());
            step.result = rational_from_string(s.at("result").get<std::string>());
            st.steps.push_back(step);
        }
    } catch (const json::exception& e) {
        throw LoadError(std::string("bad state payload: ") + e.what());
    }
    return st;
}

std::string Game24State::canonical_key() const {
    std::string key;
    for (const auto& s : slots) {
        if (!key.empty()) key += '|';
        key += s.value.str();
    }
    return key;
}

Game24State initial_state(const std::array<int, 4>& puzzle) {
    Game24State st;
    for (std::size_t i = 0; i < puzzle.size(); ++i) {
        NumberSlot slot;
        slot.value = Rational(puzzle[i]);
        slot.expr = slot.value.str();
        slot.leaves = static_cast<std::uint8_t>(1u << i);
        slot.prec = 0;
        st.slots.push_back(std::move(slot));
    }
    std::sort(st.slots.begin(), st.slots.end());
    return st;
}

// Shared move space over a sorted value multiset; enumerate_steps, the random
// proposer and the pruning closure all draw from this single definition.
static std::vector<ArithStep> steps_of_values(const std::vector<Rational>& sorted_vals) {
    std::vector<ArithStep> out;
    std::vector<std::pair<Rational, Rational>> seen;
    const std::size_t n = sorted_vals.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Rational x = sorted_vals[i];  // x <= y
            const Rational y = sorted_vals[j];
            if (std::find(seen.begin(), seen.end(), std::make_pair(x, y)) != seen.end()) {
                continue;
            }
            seen.emplace_back(x, y);
            out.push_back({x, y, ArithOp::Add, x + y});
            // Both subtraction orientations are considered; a negative difference
            // is skipped, so y-x survives and x-y only coincides when equal.
            out.push_back({y, x, ArithOp::Sub, y - x});
            out.push_back({y, x, ArithOp::Mul, y * x});
            if (!y.is_zero()) out.push_back({x, y, ArithOp::Div, x / y});
            if (!x.is_zero() && x != y) out.push_back({y, x, ArithOp::Div, y / x});
        }
    }
    return out;
}

std::vector<ArithStep> enumerate_steps(const Game24State& state) {
    return steps_of_values(state.numbers());  // slots already sorted
}

ArithStep propose_random(const Game24State& state, Rng& rng) {
    if (state.slots.size() < 2) {
        throw std::logic_error("propose_random on a state with fewer than two numbers");
    }
    const auto steps = enumerate_steps(state);
    return steps[rng.index(steps.size())];
}

// First slot index whose value matches, excluding `skip`.
static std::optional<std::size_t> find_slot(const Game24State& state, const Rational& v,
                                            std::optional<std::size_t> skip = std::nullopt) {
    for (std::size_t i = 0; i < state.slots.size(); ++i) {
        if (skip && *skip == i) continue;
        if (state.slots[i].value == v) return i;
    }
    return std::nullopt;
}

static Rational eval_op(const Rational& a, ArithOp op, const Rational& b) {
    switch (op) {
        case ArithOp::Add: return a + b;
        case ArithOp::Sub: return a - b;
        case ArithOp::Mul: return a * b;
        case ArithOp::Div: return a / b;  // throws std::domain_error on zero
    }
    throw std::logic_error("bad op");
}

Verdict verify_step(const Game24State& state, const ArithStep& step) {
    const auto i = find_slot(state, step.lhs);
    if (!i) return Verdict::rejected("operand-not-available");
    const auto j = find_slot(state, step.rhs, i);
    if (!j) return Verdict::rejected("operand-not-available");
    if (step.op == ArithOp::Div && step.rhs.is_zero()) {
        return Verdict::rejected("division-by-zero");
    }
    if (eval_op(step.lhs, step.op, step.rhs) != step.result) {
        return Verdict::rejected("arithmetic-incorrect");
    }
    return Verdict::validated();
}

static int op_prec(ArithOp op) {
    return (op == ArithOp::Mul || op == ArithOp::Div) ? 2 : 1;
}

// Minimal parenthesization that reproduces left-to-right derivation order: the
// left operand keeps its text unless its operator binds looser than the new one;
// the right operand is wrapped whenever it is itself a combination.
static std::string compose_expr(const NumberSlot& lhs, ArithOp op, const NumberSlot& rhs) {
    const int prec = op_prec(op);
    std::string left = (lhs.prec != 0 && lhs.prec < prec) ? "(" + lhs.expr + ")" : lhs.expr;
    std::string right = rhs.prec != 0 ? "(" + rhs.expr + ")" : rhs.expr;
    return left + " " + op_char(op) + " " + right;
}

Game24State apply_step(const Game24State& state, const ArithStep& step) {
    const auto i = find_slot(state, step.lhs);
    if (!i) throw LookupError("apply_step: lhs not drawable");
    const auto j = find_slot(state, step.rhs, i);
    if (!j) throw LookupError("apply_step: rhs not drawable");
    if (eval_op(step.lhs, step.op, step.rhs) != step.result) {
        throw LookupError("apply_step: inexact result");
    }
    const NumberSlot& ls = state.slots[*i];
    const NumberSlot& rs = state.slots[*j];
    NumberSlot merged;
    merged.value = step.result;
    merged.expr = compose_expr(ls, step.op, rs);
    merged.leaves = static_cast<std::uint8_t>(ls.leaves | rs.leaves);
    merged.prec = op_prec(step.op);
    Game24State next;
    for (std::size_t k = 0; k < state.slots.size(); ++k) {
        if (k != *i && k != *j) next.slots.push_back(state.slots[k]);
    }
    next.slots.push_back(std::move(merged));
    std::sort(next.slots.begin(), next.slots.end());
    next.steps = state.steps;
    next.steps.push_back(step);
    return next;
}

static std::string values_key(std::vector<Rational> vals) {
    std::sort(vals.begin(), vals.end());
    std::string key;
    for (const auto& v : vals) {
        if (!key.empty()) key += '|';
        key += v.str();
    }
    return key;
}

std::set<Rational> reachable_values(std::vector<Rational> numbers) {
    static std::mutex mu;
    static std::map<std::string, std::set<Rational>> cache;
    std::sort(numbers.begin(), numbers.end());
    const std::string key = values_key(numbers);
    {
        std::lock_guard<std::mutex> lock(mu);
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    std::set<Rational> acc;
    if (numbers.size() <= 1) {
        acc.insert(numbers.begin(), numbers.end());
    } else {
        for (const auto& step : steps_of_values(numbers)) {
            std::vector<Rational> rest;
            bool took_lhs = false;
            bool took_rhs = false;
            for (const auto& v : numbers) {
                if (!took_lhs && v == step.lhs) {
                    took_lhs = true;
                    continue;
                }
                if (!took_rhs && v == step.rhs) {
                    took_rhs = true;
                    continue;
                }
                rest.push_back(v);
            }
            rest.push_back(step.result);
            const auto sub = reachable_values(std::move(rest));
            acc.insert(sub.begin(), sub.end());
        }
    }
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, std::move(acc)).first->second;
}

std::optional<std::string> solution_equation(const Game24State& state, const Rational& target) {
    if (state.slots.size() != 1) return std::nullopt;
    const NumberSlot& s = state.slots.front();
    if (s.value != target) return std::nullopt;
    if (s.leaves != 0x0f) return std::nullopt;  // every original input exactly once
    return s.expr + " = " + target.str();
}

// ---- independent oracle ----------------------------------------------------
// Distinct search route from the engine: index-ordered pair choice, the full
// signed operation space (negative differences allowed), plain recursion.

namespace {

struct OracleItem {
    Rational value;
    std::string expr;
    bool compound = false;
};

std::string oracle_wrap(const OracleItem& it) {
    return it.compound ? "(" + it.expr + ")" : it.expr;
}

std::optional<std::string> oracle_search(const std::vector<OracleItem>& items,
                                         const Rational& target) {
    if (items.size() == 1) {
        if (items[0].value == target) return items[0].expr + " = " + target.str();
        return std::nullopt;
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            const OracleItem& a = items[i];
            const OracleItem& b = items[j];
            std::vector<std::pair<Rational, std::string>> combos;
            combos.emplace_back(a.value + b.value, oracle_wrap(a) + " + " + oracle_wrap(b));
            combos.emplace_back(a.value - b.value, oracle_wrap(a) + " - " + oracle_wrap(b));
            combos.emplace_back(b.value - a.value, oracle_wrap(b) + " - " + oracle_wrap(a));
            combos.emplace_back(a.value * b.value, oracle_wrap(a) + " * " + oracle_wrap(b));
            if (!b.value.is_zero()) {
                combos.emplace_back(a.value / b.value, oracle_wrap(a) + " / " + oracle_wrap(b));
            }
            if (!a.value.is_zero()) {
                combos.emplace_back(b.value / a.value, oracle_wrap(b) + " / " + oracle_wrap(a));
            }
            for (auto& [value, expr] : combos) {
                std::vector<OracleItem> rest;
                for (std::size_t k = 0; k < items.size(); ++k) {
                    if (k != i && k != j) rest.push_back(items[k]);
                }
                rest.push_back({value, std::move(expr), true});
                if (auto found = oracle_search(rest, target)) return found;
            }
        }
    }
    return std::nullopt;
}

void oracle_collect(const std::vector<Rational>& values, std::set<Rational>& out) {
    if (values.size() == 1) {
        out.insert(values[0]);
        return;
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            const Rational a = values[i];
            const Rational b = values[j];
            std::vector<Rational> results{a + b, a - b, b - a, a * b};
            if (!b.is_zero()) results.push_back(a / b);
            if (!a.is_zero()) results.push_back(b / a);
            for (const auto& r : results) {
                std::vector<Rational> rest;
                for (std::size_t k = 0; k < values.size(); ++k) {
                    if (k != i && k != j) rest.push_back(values[k]);
                }
                rest.push_back(r);
                oracle_collect(rest, out);
            }
        }
    }
}

}  // namespace

std::optional<std::string> oracle_solvable(const std::array<int, 4>& puzzle,
                                           const Rational& target) {
    std::vector<OracleItem> items;
    for (const int v : puzzle) {
        items.push_back({Rational(v), std::to_string(v), false});
    }
    return oracle_search(items, target);
}

std::set<Rational> oracle_values(const std::array<int, 4>& puzzle) {
    std::vector<Rational> values;
    for (const int v : puzzle) values.emplace_back(v);
    std::set<Rational> out;
    oracle_collect(values, out);
    return out;
}

// ---- role bundle -----------------------------------------------------------

namespace {

struct CtxState {
    NodeId id;
    Game24State state;
};

std::vector<CtxState> context_states(const ReasoningDag& dag, const std::vector<NodeId>& ctx) {
    std::vector<CtxState> out;
    out.reserve(ctx.size());
    for (const NodeId id : ctx) {
        out.push_back({id, Game24State::deserialize(dag.node(id).payload)});
    }
    return out;
}

std::vector<std::string> tried_keys(const std::vector<CtxState>& states,
                                    const std::vector<std::string>& rejected) {
    std::vector<std::string> keys;
    for (const auto& cs : states) keys.push_back(cs.state.canonical_key());
    keys.insert(keys.end(), rejected.begin(), rejected.end());
    std::sort(keys.begin(), keys.end());
    return keys;
}

bool is_tried(const std::vector<std::string>& sorted_keys, const std::string& key) {
    return std::binary_search(sorted_keys.begin(), sorted_keys.end(), key);
}

Candidate make_candidate(const CtxState& from, const ArithStep& step,
                         const Game24State& successor) {
    Candidate cand;
    cand.payload = successor.serialize();
    cand.parents = {from.id};
    cand.rationale = step.str();
    return cand;
}

}  // namespace

RoleBundle make_role_bundle(const Game24Options& options) {
    RoleBundle bundle;
    const Rational target = options.target;
    const bool prune = options.prune;

    bundle.canonicalize = [](const std::string& payload) {
        return Game24State::deserialize(payload).canonical_key();
    };

    if (options.mode == ProposerMode::Exhaustive) {
        // Newest validated state first, steps in canonical order, first successor
        // not already validated or rejected. Ignores the rng stream.
        bundle.proposer = [](const ProposerView& view, Rng&) -> std::optional<Candidate> {
            const auto states = context_states(view.dag, view.context);
            const auto tried = tried_keys(states, view.rejected);
            for (auto it = states.rbegin(); it != states.rend(); ++it) {
                if (it->state.slots.size() < 2) continue;
                for (const auto& step : enumerate_steps(it->state)) {
                    const Game24State succ = apply_step(it->state, step);
                    if (is_tried(tried, succ.canonical_key())) continue;
                    return make_candidate(*it, step, succ);
                }
            }
            return std::nullopt;  // move set exhausted
        };
    } else {
        // Uniform over states that still have untried steps, then uniform over
        // those untried steps; previously validated or rejected successors are
        // the "forbidden" list and never re-proposed.
        bundle.proposer = [](const ProposerView& view, Rng& rng) -> std::optional<Candidate> {
            const auto states = context_states(view.dag, view.context);
            const auto tried = tried_keys(states, view.rejected);
            struct Open {
                const CtxState* from;
                std::vector<std::pair<ArithStep, Game24State>> moves;
            };
            std::vector<Open> open;
            for (const auto& cs : states) {
                if (cs.state.slots.size() < 2) continue;
                Open o{&cs, {}};
                for (const auto& step : enumerate_steps(cs.state)) {
                    Game24State succ = apply_step(cs.state, step);
                    if (is_tried(tried, succ.canonical_key())) continue;
                    o.moves.emplace_back(step, std::move(succ));
                }
                if (!o.moves.empty()) open.push_back(std::move(o));
            }
            if (open.empty()) return std::nullopt;
            const Open& pick = open[rng.index(open.size())];
            const auto& [step, succ] = pick.moves[rng.index(pick.moves.size())];
            return make_candidate(*pick.from, step, succ);
        };
    }

    bundle.verifier = [target, prune](const ReasoningDag& dag, const std::vector<NodeId>&,
                                      const Candidate& cand) -> Verdict {
        if (cand.parents.size() != 1) return Verdict::rejected("malformed: expected one parent");
        Game24State succ;
        try {
            succ = Game24State::deserialize(cand.payload);
        } catch (const LoadError&) {
            return Verdict::rejected("malformed-state");
        }
        Game24State parent;
        try {
            parent = Game24State::deserialize(dag.node(cand.parents[0]).payload);
        } catch (const LoadError&) {
            return Verdict::rejected("malformed-parent");
        }
        if (succ.steps.size() != parent.steps.size() + 1) {
            return Verdict::rejected("malformed: step history mismatch");
        }
        const ArithStep& step = succ.steps.back();
        const Verdict v = verify_step(parent, step);
        if (!v.ok()) return v;
        Game24State expected;
        try {
            expected = apply_step(parent, step);
        } catch (const std::exception&) {
            return Verdict::rejected("arithmetic-incorrect");
        }
        if (expected.serialize() != cand.payload) return Verdict::rejected("state-mismatch");
        if (prune) {
            const auto reach = reachable_values(succ.numbers());
            if (!reach.count(target)) return Verdict::rejected("unreachable-target");
        }
        return Verdict::validated();
    };

    bundle.reporter = [target](const ReasoningDag& dag,
                               const std::string&) -> std::optional<std::string> {
        const auto& nodes = dag.nodes();
        for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
            const Game24State st = Game24State::deserialize(it->payload);
            if (auto eq = solution_equation(st, target)) return eq;
        }
        return std::nullopt;
    };

    bundle.support_node = [target](const ReasoningDag& dag, const std::string&,
                                   const std::string&) -> std::optional<NodeId> {
        const auto& nodes = dag.nodes();
        for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
            const Game24State st = Game24State::deserialize(it->payload);
            if (solution_equation(st, target)) return it->id;
        }
        return std::nullopt;
    };

    return bundle;
}

Game24Result run_cr_24(const std::array<int, 4>& puzzle, const SessionConfig& config,
                       const Game24Options& options, EventSink sink, int session_index) {
    const Game24State init = initial_state(puzzle);
    Session session(config, make_role_bundle(options), {init.serialize()},
                    options.target.str());
    Game24Result out;
    out.puzzle = puzzle;
    out.session = session.run(std::move(sink), session_index);
    out.solved = out.session.halted_by == HaltReason::Reporter;
    out.equation = out.session.answer;
    return out;
}

std::vector<std::array<int, 4>> load_puzzles_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open puzzle file: " + path);
    std::vector<std::array<int, 4>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno += 1;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::array<int, 4> puzzle{};
        std::stringstream ss(line);
        std::string cell;
        std::size_t idx = 0;
        while (std::getline(ss, cell, ',')) {
            if (idx >= 4) throw LoadError("line " + std::to_string(lineno) + ": too many values");
            try {
                std::size_t pos = 0;
                puzzle[idx] = std::stoi(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) {
                    pos += 1;
                }
                if (pos != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw LoadError("line " + std::to_string(lineno) + ": bad integer '" + cell + "'");
            }
            idx += 1;
        }
        if (idx != 4) throw LoadError("line " + std::to_string(lineno) + ": expected 4 values");
        out.push_back(puzzle);
    }
    return out;
}

}  // namespace cr::game24
