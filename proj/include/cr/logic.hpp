#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cr/session.hpp"

namespace cr::logic {

// Statement AST for a restricted first-order fragment: ground connectives plus
// universally quantified implications whose antecedent is a literal pattern.
enum class StKind { Atom, Not, And, Or, Implies, Forall };

struct Statement {
    StKind kind = StKind::Atom;
    std::string pred;        // Atom: predicate symbol
    std::string arg;         // Atom: constant or bound-variable name
    bool arg_is_var = false; // Atom: whether arg refers to a quantified variable
    std::string var;         // Forall: bound variable name
    std::vector<Statement> kids;  // Not: 1, And/Or/Implies: 2, Forall: 1 (body)

    bool operator==(const Statement&) const = default;
};

// Builders.
Statement atom(std::string pred, std::string constant);
Statement vatom(std::string pred, std::string var);
Statement neg(Statement s);
Statement conj(Statement a, Statement b);
Statement disj(Statement a, Statement b);
Statement impl(Statement a, Statement b);
Statement forall(std::string var, Statement body);

// Structural predicates and helpers.
bool is_literal(const Statement& s);   // atom or negated atom
bool is_ground(const Statement& s);    // no variables, no quantifier
Statement complement(const Statement& literal);  // L -> !L with !! collapse

// Symbolic surface, e.g. "forall x. (Monkey(x) -> Mammal(x))".
std::string to_string(const Statement& s);
Statement parse_formula(const std::string& text);  // throws ParseError

// Normal form: double negation collapsed, commutative operands sorted, bound
// variables renamed to a fixed name. canonical_str is the dag payload format.
Statement canonical(const Statement& s);
std::string canonical_str(const Statement& s);

// Replace the bound variable of a universal with a constant; returns the ground
// body. Throws LookupError when s is not a universal.
Statement instantiate(const Statement& s, const std::string& constant);

// Quantifier-free evaluation; atoms are keyed as "Pred(arg)".
// Throws EvalError on quantifiers or unassigned atoms.
bool eval_propositional(const Statement& s, const std::map<std::string, bool>& assignment);

// Universals become finite conjunctions over the given constants (for model
// checking over a fixed universe). Throws ConfigError when constants is empty
// and a quantifier is present.
Statement expand_universals(const Statement& s, const std::vector<std::string>& constants);

void collect_atom_keys(const Statement& s, std::set<std::string>& out);
void collect_constants(const Statement& s, std::set<std::string>& out);

// ---- inference rules -----------------------------------------------------------

enum class InferenceRule {
    UniversalInstantiation,  // (forall x. A->C, ground literal at c) => A[c]->C[c]
    ModusPonens,             // (forall x. A->C, A[c]) => C[c]; or (A->C, A) => C
    Contrapositive,          // forall x. L1->L2 => forall x. !L2->!L1
    DisjunctiveSyllogism,    // (A|B, !A) => B and (A|B, !B) => A
    ConjunctionElimination,  // A&B => A, B
    ConjunctionIntroduction, // (L1, L2) distinct ground literals => L1&L2
};

constexpr int kRuleCount = 6;

int rule_arity(InferenceRule rule);
const char* rule_name(InferenceRule rule);
std::optional<InferenceRule> rule_from_name(const std::string& name);

// All conclusions of one rule application, in fixed order; empty on shape mismatch.
std::vector<Statement> apply_rule_all(InferenceRule rule,
                                      const std::vector<Statement>& antecedents);
// First conclusion, if any.
std::optional<Statement> apply_rule(InferenceRule rule,
                                    const std::vector<Statement>& antecedents);

// ---- role implementations --------------------------------------------------------

enum class ProposePolicy { Systematic, Sampled };

struct LogicMove {
    InferenceRule rule;
    std::vector<NodeId> parents;  // antecedent nodes, rule order
    Statement conclusion;
};

// Applicable moves whose conclusions are not already in context, deduplicated by
// canonical conclusion (first justification wins), in deterministic order: rules
// in enum order, antecedent tuples in context order.
std::vector<LogicMove> enumerate_moves(const ReasoningDag& dag,
                                       const std::vector<NodeId>& context);

// Statement-level verification: antecedents must be context members and the rule
// must reproduce the candidate exactly (canonical comparison). Duplicates of
// context statements are rejected.
Verdict verify_logic(const ReasoningDag& dag, const std::vector<NodeId>& context,
                     const Candidate& candidate);

enum class Label { True, False, Unknown };
const char* label_name(Label label);
Label label_from(const std::string& text);  // throws LoadError

// True when the hypothesis is present (canonically), False when its negation is,
// nullopt otherwise — exhaustion is mapped to Unknown by the caller.
std::optional<Label> report_label(const ReasoningDag& dag, const Statement& hypothesis);

RoleBundle logic_bundle(ProposePolicy policy = ProposePolicy::Systematic);

// ---- natural-language surface ----------------------------------------------------

// Restricted sentence grammar (see README for the BNF); throws ParseError.
Statement parse_sentence(const std::string& text);

struct LogicProblem {
    std::vector<Statement> premises;
    Statement hypothesis;
    std::optional<Label> gold;
    std::vector<std::string> premise_texts;
    std::string hypothesis_text;
};

// Problem file: JSON {"premises": [sentence...], "hypothesis": sentence,
// "label": optional}. Throws LoadError on I/O or schema errors, ParseError on
// sentences outside the grammar.
LogicProblem load_logic_problem(const std::string& path);
LogicProblem parse_problem_json(const std::string& json_text);

struct LogicResult {
    Label label = Label::Unknown;
    SessionResult session;
};

// Full propose/verify/accumulate run over the problem; exhaustion -> Unknown.
LogicResult run_logic(const LogicProblem& problem, const SessionConfig& config,
                      ProposePolicy policy = ProposePolicy::Systematic,
                      EventSink sink = nullptr, int session_index = 0);

}  // namespace cr::logic
