#include "cr/logic.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "cr/errors.hpp"

namespace cr::logic {

namespace {

Statement make(StKind kind, std::vector<Statement> kids) {
    Statement s;
    s.kind = kind;
    s.kids = std::move(kids);
    return s;
}

}  // namespace

Statement atom(std::string pred, std::string constant) {
    Statement s;
    s.pred = std::move(pred);
    s.arg = std::move(constant);
    return s;
}

Statement vatom(std::string pred, std::string var) {
    Statement s = atom(std::move(pred), std::move(var));
    s.arg_is_var = true;
    return s;
}

Statement neg(Statement s) { return make(StKind::Not, {std::move(s)}); }
Statement conj(Statement a, Statement b) { return make(StKind::And, {std::move(a), std::move(b)}); }
Statement disj(Statement a, Statement b) { return make(StKind::Or, {std::move(a), std::move(b)}); }
Statement impl(Statement a, Statement b) {
    return make(StKind::Implies, {std::move(a), std::move(b)});
}

Statement forall(std::string var, Statement body) {
    Statement s = make(StKind::Forall, {std::move(body)});
    s.var = std::move(var);
    return s;
}

bool is_literal(const Statement& s) {
    if (s.kind == StKind::Atom) return true;
    return s.kind == StKind::Not && s.kids[0].kind == StKind::Atom;
}

bool is_ground(const Statement& s) {
    if (s.kind == StKind::Forall) return false;
    if (s.kind == StKind::Atom) return !s.arg_is_var;
    return std::all_of(s.kids.begin(), s.kids.end(), is_ground);
}

Statement complement(const Statement& literal) {
    if (literal.kind == StKind::Not) return literal.kids[0];
    return neg(literal);
}

std::string to_string(const Statement& s) {
    switch (s.kind) {
        case StKind::Atom:
            return s.pred + "(" + s.arg + ")";
        case StKind::Not:
            if (s.kids[0].kind == StKind::Atom) return "!" + to_string(s.kids[0]);
            return "!(" + to_string(s.kids[0]) + ")";
        case StKind::And:
            return "(" + to_string(s.kids[0]) + " & " + to_string(s.kids[1]) + ")";
        case StKind::Or:
            return "(" + to_string(s.kids[0]) + " | " + to_string(s.kids[1]) + ")";
        case StKind::Implies:
            return "(" + to_string(s.kids[0]) + " -> " + to_string(s.kids[1]) + ")";
        case StKind::Forall:
            return "forall " + s.var + ". " + to_string(s.kids[0]);
    }
    throw ParseError("unreachable statement kind");
}

// ---- symbolic parser ---------------------------------------------------------------

namespace {

struct FormulaParser {
    // token stream: identifiers plus ( ) ! & | -> .
    std::vector<std::string> toks;
    std::size_t pos = 0;
    std::vector<std::string> bound;  // active quantifier variables

    explicit FormulaParser(const std::string& text) {
        std::size_t i = 0;
        while (i < text.size()) {
            const char c = text[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                i++;
            } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t j = i;
                while (j < text.size() &&
                       (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
                    j++;
                }
                toks.push_back(text.substr(i, j - i));
                i = j;
            } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
                toks.push_back("->");
                i += 2;
            } else if (c == '(' || c == ')' || c == '!' || c == '&' || c == '|' || c == '.') {
                toks.push_back(std::string(1, c));
                i++;
            } else {
                throw ParseError("unexpected character '" + std::string(1, c) + "' in formula: " +
                                 text);
            }
        }
    }

    bool at(const std::string& t) const { return pos < toks.size() && toks[pos] == t; }

    std::string expect_ident() {
        if (pos >= toks.size() || !std::isalpha(static_cast<unsigned char>(toks[pos][0]))) {
            throw ParseError("expected identifier in formula");
        }
        return toks[pos++];
    }

    void expect(const std::string& t) {
        if (!at(t)) throw ParseError("expected '" + t + "' in formula");
        pos++;
    }

    Statement parse() {
        Statement s = implication();
        if (pos != toks.size()) throw ParseError("trailing tokens in formula");
        return s;
    }

    Statement implication() {
        Statement lhs = or_expr();
        if (at("->")) {
            pos++;
            return impl(std::move(lhs), implication());
        }
        return lhs;
    }

    Statement or_expr() {
        Statement lhs = and_expr();
        while (at("|")) {
            pos++;
            lhs = disj(std::move(lhs), and_expr());
        }
        return lhs;
    }

    Statement and_expr() {
        Statement lhs = unary();
        while (at("&")) {
            pos++;
            lhs = conj(std::move(lhs), unary());
        }
        return lhs;
    }

    Statement unary() {
        if (at("!")) {
            pos++;
            return neg(unary());
        }
        return primary();
    }

    Statement primary() {
        if (at("(")) {
            pos++;
            Statement s = implication();
            expect(")");
            return s;
        }
        if (at("forall")) {
            pos++;
            const std::string var = expect_ident();
            expect(".");
            bound.push_back(var);
            Statement body = implication();
            bound.pop_back();
            return forall(var, std::move(body));
        }
        const std::string pred = expect_ident();
        expect("(");
        const std::string arg = expect_ident();
        expect(")");
        const bool is_var = std::find(bound.begin(), bound.end(), arg) != bound.end();
        return is_var ? vatom(pred, arg) : atom(pred, arg);
    }
};

// Restricted-form checks: quantification only as forall(var, literal -> body),
// variables only under their quantifier.
void check_statement(const Statement& s, const std::string* active_var) {
    switch (s.kind) {
        case StKind::Atom:
            if (s.arg_is_var && (!active_var || s.arg != *active_var)) {
                throw ParseError("variable '" + s.arg + "' used outside its quantifier");
            }
            return;
        case StKind::Not:
            check_statement(s.kids[0], active_var);
            return;
        case StKind::And:
        case StKind::Or:
        case StKind::Implies:
            check_statement(s.kids[0], active_var);
            check_statement(s.kids[1], active_var);
            return;
        case StKind::Forall: {
            if (active_var) throw ParseError("nested quantifiers are not supported");
            const Statement& body = s.kids[0];
            if (body.kind != StKind::Implies) {
                throw ParseError("universal body must be an implication");
            }
            if (!is_literal(body.kids[0])) {
                throw ParseError("universal antecedent must be a literal");
            }
            check_statement(body, &s.var);
            return;
        }
    }
}

}  // namespace

Statement parse_formula(const std::string& text) {
    FormulaParser parser(text);
    Statement s = parser.parse();
    check_statement(s, nullptr);
    return s;
}

// ---- canonical form ----------------------------------------------------------------

namespace {

Statement rename_var(const Statement& s, const std::string& from, const std::string& to) {
    Statement out = s;
    if (out.kind == StKind::Atom) {
        if (out.arg_is_var && out.arg == from) out.arg = to;
        return out;
    }
    for (auto& kid : out.kids) kid = rename_var(kid, from, to);
    return out;
}

}  // namespace

Statement canonical(const Statement& s) {
    switch (s.kind) {
        case StKind::Atom:
            return s;
        case StKind::Not: {
            Statement inner = canonical(s.kids[0]);
            if (inner.kind == StKind::Not) return inner.kids[0];  // !!A -> A
            return neg(std::move(inner));
        }
        case StKind::And:
        case StKind::Or: {
            Statement a = canonical(s.kids[0]);
            Statement b = canonical(s.kids[1]);
            if (to_string(b) < to_string(a)) std::swap(a, b);
            return make(s.kind, {std::move(a), std::move(b)});
        }
        case StKind::Implies:
            return impl(canonical(s.kids[0]), canonical(s.kids[1]));
        case StKind::Forall: {
            Statement body = canonical(rename_var(s.kids[0], s.var, "x"));
            return forall("x", std::move(body));
        }
    }
    throw ParseError("unreachable statement kind");
}

std::string canonical_str(const Statement& s) { return to_string(canonical(s)); }

Statement instantiate(const Statement& s, const std::string& constant) {
    if (s.kind != StKind::Forall) throw LookupError("instantiate: not a universal");
    Statement body = rename_var(s.kids[0], s.var, constant);
    // the renamed occurrences are now constants
    struct Grounder {
        static void fix(Statement& st, const std::string& c) {
            if (st.kind == StKind::Atom) {
                if (st.arg_is_var && st.arg == c) st.arg_is_var = false;
                return;
            }
            for (auto& kid : st.kids) fix(kid, c);
        }
    };
    Grounder::fix(body, constant);
    return body;
}

bool eval_propositional(const Statement& s, const std::map<std::string, bool>& assignment) {
    switch (s.kind) {
        case StKind::Atom: {
            const auto it = assignment.find(s.pred + "(" + s.arg + ")");
            if (it == assignment.end()) {
                throw EvalError("unassigned atom: " + s.pred + "(" + s.arg + ")");
            }
            return it->second;
        }
        case StKind::Not:
            return !eval_propositional(s.kids[0], assignment);
        case StKind::And:
            return eval_propositional(s.kids[0], assignment) &&
                   eval_propositional(s.kids[1], assignment);
        case StKind::Or:
            return eval_propositional(s.kids[0], assignment) ||
                   eval_propositional(s.kids[1], assignment);
        case StKind::Implies:
            return !eval_propositional(s.kids[0], assignment) ||
                   eval_propositional(s.kids[1], assignment);
        case StKind::Forall:
            throw EvalError("quantifier in propositional evaluation");
    }
    throw EvalError("unreachable statement kind");
}

Statement expand_universals(const Statement& s, const std::vector<std::string>& constants) {
    if (s.kind == StKind::Forall) {
        if (constants.empty()) throw ConfigError("expand_universals: empty constant set");
        Statement acc = instantiate(s, constants[0]);
        for (std::size_t i = 1; i < constants.size(); ++i) {
            acc = conj(std::move(acc), instantiate(s, constants[i]));
        }
        return acc;
    }
    Statement out = s;
    for (auto& kid : out.kids) kid = expand_universals(kid, constants);
    return out;
}

void collect_atom_keys(const Statement& s, std::set<std::string>& out) {
    if (s.kind == StKind::Atom) {
        out.insert(s.pred + "(" + s.arg + ")");
        return;
    }
    for (const auto& kid : s.kids) collect_atom_keys(kid, out);
}

void collect_constants(const Statement& s, std::set<std::string>& out) {
    if (s.kind == StKind::Atom) {
        if (!s.arg_is_var) out.insert(s.arg);
        return;
    }
    for (const auto& kid : s.kids) collect_constants(kid, out);
}

// ---- inference rules ----------------------------------------------------------------

int rule_arity(InferenceRule rule) {
    switch (rule) {
        case InferenceRule::Contrapositive:
        case InferenceRule::ConjunctionElimination:
            return 1;
        default:
            return 2;
    }
}

const char* rule_name(InferenceRule rule) {
    switch (rule) {
        case InferenceRule::UniversalInstantiation: return "UniversalInstantiation";
        case InferenceRule::ModusPonens: return "ModusPonens";
        case InferenceRule::Contrapositive: return "Contrapositive";
        case InferenceRule::DisjunctiveSyllogism: return "DisjunctiveSyllogism";
        case InferenceRule::ConjunctionElimination: return "ConjunctionElimination";
        case InferenceRule::ConjunctionIntroduction: return "ConjunctionIntroduction";
    }
    return "?";
}

std::optional<InferenceRule> rule_from_name(const std::string& name) {
    for (int i = 0; i < kRuleCount; ++i) {
        const auto rule = static_cast<InferenceRule>(i);
        if (name == rule_name(rule)) return rule;
    }
    return std::nullopt;
}

namespace {

bool is_universal_implication(const Statement& s) {
    return s.kind == StKind::Forall && s.kids[0].kind == StKind::Implies;
}

// the constant mentioned by a ground literal
std::optional<std::string> literal_constant(const Statement& s) {
    if (!is_literal(s) || !is_ground(s)) return std::nullopt;
    const Statement& a = s.kind == StKind::Not ? s.kids[0] : s;
    return a.arg;
}

bool equal_canonical(const Statement& a, const Statement& b) {
    return canonical_str(a) == canonical_str(b);
}

}  // namespace

std::vector<Statement> apply_rule_all(InferenceRule rule,
                                      const std::vector<Statement>& antecedents) {
    if (static_cast<int>(antecedents.size()) != rule_arity(rule)) return {};
    std::vector<Statement> out;
    auto push_unique = [&out](Statement s) {
        for (const auto& have : out) {
            if (equal_canonical(have, s)) return;
        }
        out.push_back(std::move(s));
    };

    switch (rule) {
        case InferenceRule::UniversalInstantiation: {
            // second antecedent only supplies the constant witness
            const Statement& u = antecedents[0];
            const auto c = literal_constant(antecedents[1]);
            if (is_universal_implication(u) && c) push_unique(instantiate(u, *c));
            break;
        }
        case InferenceRule::ModusPonens: {
            const Statement& major = antecedents[0];
            const Statement& minor = antecedents[1];
            if (!is_ground(minor)) break;
            if (is_universal_implication(major)) {
                const auto c = literal_constant(minor);
                if (c) {
                    const Statement inst = instantiate(major, *c);
                    if (equal_canonical(inst.kids[0], minor)) push_unique(inst.kids[1]);
                }
            } else if (major.kind == StKind::Implies && is_ground(major)) {
                if (equal_canonical(major.kids[0], minor)) push_unique(major.kids[1]);
            }
            break;
        }
        case InferenceRule::Contrapositive: {
            const Statement& u = antecedents[0];
            if (is_universal_implication(u) && is_literal(u.kids[0].kids[1])) {
                const Statement& body = u.kids[0];
                push_unique(forall(
                    u.var, impl(complement(body.kids[1]), complement(body.kids[0]))));
            }
            break;
        }
        case InferenceRule::DisjunctiveSyllogism: {
            const Statement& d = antecedents[0];
            const Statement& n = antecedents[1];
            if (d.kind != StKind::Or || !is_ground(d) || !is_ground(n) || !is_literal(n)) break;
            if (equal_canonical(complement(n), d.kids[0])) push_unique(d.kids[1]);
            if (equal_canonical(complement(n), d.kids[1])) push_unique(d.kids[0]);
            break;
        }
        case InferenceRule::ConjunctionElimination: {
            const Statement& c = antecedents[0];
            if (c.kind == StKind::And) {
                push_unique(c.kids[0]);
                push_unique(c.kids[1]);
            }
            break;
        }
        case InferenceRule::ConjunctionIntroduction: {
            const Statement& a = antecedents[0];
            const Statement& b = antecedents[1];
            if (is_literal(a) && is_literal(b) && is_ground(a) && is_ground(b) &&
                !equal_canonical(a, b)) {
                push_unique(conj(a, b));
            }
            break;
        }
    }
    return out;
}

std::optional<Statement> apply_rule(InferenceRule rule,
                                    const std::vector<Statement>& antecedents) {
    auto all = apply_rule_all(rule, antecedents);
    if (all.empty()) return std::nullopt;
    return std::move(all.front());
}

// ---- roles ---------------------------------------------------------------------------

std::vector<LogicMove> enumerate_moves(const ReasoningDag& dag,
                                       const std::vector<NodeId>& context) {
    std::vector<Statement> stmts;
    stmts.reserve(context.size());
    std::unordered_set<std::string> known;
    for (const NodeId id : context) {
        stmts.push_back(parse_formula(dag.node(id).payload));
        known.insert(canonical_str(stmts.back()));
    }

    std::vector<LogicMove> moves;
    auto consider = [&](InferenceRule rule, std::vector<NodeId> parents,
                        const std::vector<Statement>& ants) {
        for (Statement& conclusion : apply_rule_all(rule, ants)) {
            const std::string key = canonical_str(conclusion);
            if (known.count(key)) continue;
            known.insert(key);  // dedupe across justifications; first wins
            moves.push_back({rule, parents, std::move(conclusion)});
        }
    };

    for (int r = 0; r < kRuleCount; ++r) {
        const auto rule = static_cast<InferenceRule>(r);
        if (rule_arity(rule) == 1) {
            for (std::size_t i = 0; i < stmts.size(); ++i) {
                consider(rule, {context[i]}, {stmts[i]});
            }
        } else {
            for (std::size_t i = 0; i < stmts.size(); ++i) {
                for (std::size_t j = 0; j < stmts.size(); ++j) {
                    if (i == j) continue;
                    consider(rule, {context[i], context[j]}, {stmts[i], stmts[j]});
                }
            }
        }
    }
    return moves;
}

Verdict verify_logic(const ReasoningDag& dag, const std::vector<NodeId>& context,
                     const Candidate& candidate) {
    Statement claimed;
    try {
        claimed = parse_formula(candidate.payload);
    } catch (const ParseError&) {
        return Verdict::rejected("unparseable");
    }
    const auto rule = rule_from_name(candidate.rationale);
    if (!rule) return Verdict::rejected("unknown-rule");
    if (static_cast<int>(candidate.parents.size()) != rule_arity(*rule)) {
        return Verdict::rejected("arity-mismatch");
    }
    std::vector<Statement> ants;
    for (const NodeId id : candidate.parents) {
        if (std::find(context.begin(), context.end(), id) == context.end()) {
            return Verdict::rejected("antecedent-not-in-context");
        }
        ants.push_back(parse_formula(dag.node(id).payload));
    }
    const std::string key = canonical_str(claimed);
    for (const NodeId id : context) {
        if (canonical_str(parse_formula(dag.node(id).payload)) == key) {
            return Verdict::rejected("duplicate");
        }
    }
    for (const Statement& conclusion : apply_rule_all(*rule, ants)) {
        if (canonical_str(conclusion) == key) return Verdict::validated();
    }
    return Verdict::rejected("not-derivable");
}

const char* label_name(Label label) {
    switch (label) {
        case Label::True: return "True";
        case Label::False: return "False";
        case Label::Unknown: return "Unknown";
    }
    return "?";
}

Label label_from(const std::string& text) {
    for (const Label l : {Label::True, Label::False, Label::Unknown}) {
        if (text == label_name(l)) return l;
    }
    throw LoadError("unknown label: " + text);
}

std::optional<Label> report_label(const ReasoningDag& dag, const Statement& hypothesis) {
    const std::string want = canonical_str(hypothesis);
    const std::string anti = canonical_str(neg(hypothesis));
    for (NodeId id = 0; id < dag.size(); ++id) {
        const std::string have = canonical_str(parse_formula(dag.node(id).payload));
        if (have == want) return Label::True;
        if (have == anti) return Label::False;
    }
    return std::nullopt;
}

RoleBundle logic_bundle(ProposePolicy policy) {
    RoleBundle roles;
    roles.proposer = [policy](const ProposerView& view, Rng& rng) -> std::optional<Candidate> {
        std::vector<LogicMove> moves = enumerate_moves(view.dag, view.context);
        std::erase_if(moves, [&view](const LogicMove& m) {
            const std::string key = canonical_str(m.conclusion);
            return std::find(view.rejected.begin(), view.rejected.end(), key) !=
                   view.rejected.end();
        });
        if (moves.empty()) return std::nullopt;
        const std::size_t pick =
            policy == ProposePolicy::Systematic ? 0 : rng.next_below(moves.size());
        const LogicMove& m = moves[pick];
        return Candidate{canonical_str(m.conclusion), m.parents, rule_name(m.rule)};
    };
    roles.verifier = verify_logic;
    roles.reporter = [](const ReasoningDag& dag,
                        const std::string& goal) -> std::optional<std::string> {
        const auto label = report_label(dag, parse_formula(goal));
        if (!label) return std::nullopt;
        return std::string(label_name(*label));
    };
    roles.canonicalize = [](const std::string& payload) {
        return canonical_str(parse_formula(payload));
    };
    roles.support_node = [](const ReasoningDag& dag, const std::string& goal,
                            const std::string& answer) -> std::optional<NodeId> {
        const Statement hyp = parse_formula(goal);
        std::string want;
        if (answer == label_name(Label::True)) {
            want = canonical_str(hyp);
        } else if (answer == label_name(Label::False)) {
            want = canonical_str(neg(hyp));
        } else {
            return std::nullopt;
        }
        for (NodeId id = 0; id < dag.size(); ++id) {
            if (canonical_str(parse_formula(dag.node(id).payload)) == want) return id;
        }
        return std::nullopt;
    };
    return roles;
}

// ---- natural-language surface ----------------------------------------------------------

namespace {

std::string lower(std::string w) {
    for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return w;
}

std::string capitalize(std::string w) {
    if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
}

// naive singularization: parties -> party, foxes -> fox, monkeys -> monkey
std::string singular(const std::string& w) {
    if (w.size() > 3 && w.ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
    if (w.size() > 2 && w.ends_with("es")) {
        const std::string stem = w.substr(0, w.size() - 2);
        if (stem.ends_with("s") || stem.ends_with("x") || stem.ends_with("z") ||
            stem.ends_with("ch") || stem.ends_with("sh")) {
            return stem;
        }
    }
    if (w.size() > 1 && w.ends_with("s") && !w.ends_with("ss")) return w.substr(0, w.size() - 1);
    return w;
}

struct SentenceParser {
    std::vector<std::string> words;  // original casing
    std::size_t pos = 0;
    std::string text;
    std::string subject;  // last ground subject, for elided clauses ("but is an animal")

    explicit SentenceParser(const std::string& input) : text(input) {
        std::string word;
        for (const char c : input) {
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-') {
                word += c;
            } else if (!word.empty()) {
                words.push_back(word);
                word.clear();
            }
        }
        if (!word.empty()) words.push_back(word);
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("cannot parse sentence (" + why + "): " + text);
    }

    bool done() const { return pos == words.size(); }
    std::string peek() const { return pos < words.size() ? lower(words[pos]) : ""; }

    bool eat(const std::string& w) {
        if (peek() != w) return false;
        pos++;
        return true;
    }

    std::string take() {
        if (done()) fail("unexpected end");
        return words[pos++];
    }

    void skip_article() {
        if (!eat("a")) eat("an");
    }

    // class noun -> predicate: singularize + capitalize
    std::string class_pred() { return capitalize(singular(lower(take()))); }
    // verb or possession noun -> predicate: capitalize as written
    std::string word_pred() { return capitalize(lower(take())); }

    Statement parse() {
        Statement s = sentence();
        if (!done()) fail("trailing words");
        check_statement(s, nullptr);
        return s;
    }

    Statement sentence() {
        const std::string head = peek();
        if (head == "all" || head == "no") return universal_plural();
        if (head == "every") return universal_singular();
        if (head == "anything") return universal_anything();
        if (head == "if") return ground_conditional();
        return ground_sequence();
    }

    // "All monkeys are mammals" | "No birds are mammals" | "All birds can fly" | ...
    Statement universal_plural() {
        const bool negated = peek() == "no";
        pos++;  // all | no
        const std::string subj = class_pred();
        Statement pred = universal_predicate(/*plural=*/true);
        if (negated) pred = complement(pred);
        return forall("x", impl(vatom(subj, "x"), std::move(pred)));
    }

    // "Every animal is either a monkey or a bird" | "Every animal is a mammal" | ...
    Statement universal_singular() {
        pos++;  // every
        const std::string subj = class_pred();
        return forall("x", impl(vatom(subj, "x"), universal_predicate(/*plural=*/false)));
    }

    // "Anything that can fly has wings" | "Anything that is a bird can fly" | ...
    Statement universal_anything() {
        pos++;  // anything
        if (!eat("that")) fail("expected 'that'");
        Statement lhs = verb_phrase();
        Statement rhs = universal_predicate(/*plural=*/false);
        return forall("x", impl(std::move(lhs), std::move(rhs)));
    }

    // subject-side phrase of an "anything that ..." sentence, over the variable
    Statement verb_phrase() {
        if (eat("can")) return vatom(word_pred(), "x");
        if (eat("is")) {
            const bool negated = eat("not");
            skip_article();
            Statement a = vatom(class_pred(), "x");
            return negated ? neg(std::move(a)) : std::move(a);
        }
        if (eat("has") || eat("have")) return vatom(word_pred(), "x");
        fail("expected verb phrase");
    }

    // predicate of a universal over the variable
    Statement universal_predicate(bool plural) {
        if (eat("can")) return vatom(word_pred(), "x");
        if (eat("cannot")) return neg(vatom(word_pred(), "x"));
        if (eat(plural ? "have" : "has")) return vatom(word_pred(), "x");
        if (!eat(plural ? "are" : "is")) fail("expected predicate");
        if (!plural && eat("either")) {
            skip_article();
            Statement a = vatom(class_pred(), "x");
            if (!eat("or")) fail("expected 'or'");
            skip_article();
            Statement b = vatom(class_pred(), "x");
            return disj(std::move(a), std::move(b));
        }
        const bool negated = eat("not");
        skip_article();
        Statement a = vatom(class_pred(), "x");
        return negated ? neg(std::move(a)) : std::move(a);
    }

    // "If Rock can fly then Rock has wings"
    Statement ground_conditional() {
        pos++;  // if
        Statement lhs = ground_clause(/*allow_elided=*/false);
        if (!eat("then")) fail("expected 'then'");
        Statement rhs = ground_clause(/*allow_elided=*/true);
        return impl(std::move(lhs), std::move(rhs));
    }

    // clause ("but"|"and" clause)* — later subjects may be elided
    Statement ground_sequence() {
        Statement s = ground_clause(/*allow_elided=*/false);
        while (peek() == "but" || peek() == "and") {
            pos++;
            s = conj(std::move(s), ground_clause(/*allow_elided=*/true));
        }
        return s;
    }

    Statement ground_clause(bool allow_elided) {
        std::string name;
        const std::string head = peek();
        const bool elided = head == "is" || head == "can" || head == "cannot" ||
                            head == "has" || head == "does" || head == "have";
        if (elided) {
            if (!allow_elided || subject.empty()) fail("clause without subject");
            name = subject;
        } else {
            name = take();
            if (std::islower(static_cast<unsigned char>(name[0]))) {
                fail("expected a proper name");
            }
            subject = name;
        }
        if (eat("can")) return atom(word_pred(), name);
        if (eat("cannot")) return neg(atom(word_pred(), name));
        if (eat("has") || eat("have")) return atom(word_pred(), name);
        if (eat("does")) {
            if (!eat("not") || !eat("have")) fail("expected 'does not have'");
            return neg(atom(word_pred(), name));
        }
        if (!eat("is")) fail("expected verb");
        if (eat("either")) {
            skip_article();
            Statement a = atom(class_pred(), name);
            if (!eat("or")) fail("expected 'or'");
            skip_article();
            Statement b = atom(class_pred(), name);
            return disj(std::move(a), std::move(b));
        }
        const bool negated = eat("not");
        skip_article();
        Statement a = atom(class_pred(), name);
        return negated ? neg(std::move(a)) : std::move(a);
    }
};

}  // namespace

Statement parse_sentence(const std::string& text) {
    SentenceParser parser(text);
    return parser.parse();
}

LogicProblem parse_problem_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("problem json: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("premises") || !doc.contains("hypothesis")) {
        throw LoadError("problem json: need {premises, hypothesis}");
    }
    LogicProblem problem;
    try {
        for (const auto& p : doc.at("premises")) {
            if (!p.is_string()) throw LoadError("problem json: premises must be strings");
            problem.premise_texts.push_back(p.get<std::string>());
            problem.premises.push_back(parse_sentence(problem.premise_texts.back()));
        }
        if (problem.premises.empty()) throw LoadError("problem json: premises empty");
        problem.hypothesis_text = doc.at("hypothesis").get<std::string>();
        problem.hypothesis = parse_sentence(problem.hypothesis_text);
        if (doc.contains("label")) problem.gold = label_from(doc.at("label").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("problem json: ") + e.what());
    }
    return problem;
}

LogicProblem load_logic_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open problem file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_problem_json(buf.str());
}

LogicResult run_logic(const LogicProblem& problem, const SessionConfig& config,
                      ProposePolicy policy, EventSink sink, int session_index) {
    std::vector<std::string> premises;
    premises.reserve(problem.premises.size());
    for (const Statement& p : problem.premises) premises.push_back(canonical_str(p));
    Session session(config, logic_bundle(policy), std::move(premises),
                    canonical_str(problem.hypothesis));
    LogicResult result;
    result.session = session.run(std::move(sink), session_index);
    result.label = result.session.answer.empty() ? Label::Unknown
                                                 : label_from(result.session.answer);
    return result;
}

}  // namespace cr::logic
