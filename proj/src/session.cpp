#include "cr/session.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "cr/errors.hpp"

namespace cr {

using nlohmann::json;

void SessionConfig::validate() const {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (b < 1) throw ConfigError("b must be >= 1");
    if (L < 1) throw ConfigError("L must be >= 1");
    if (temperature_propose < 0.0) throw ConfigError("temperature_propose must be >= 0");
    if (temperature_vote < 0.0) throw ConfigError("temperature_vote must be >= 0");
}

const char* halt_reason_name(HaltReason reason) {
    switch (reason) {
        case HaltReason::Reporter: return "reporter";
        case HaltReason::IterationCap: return "iteration_cap";
        case HaltReason::ProposalBudget: return "proposal_budget";
    }
    return "?";
}

static const char* event_type_name(Event::Type t) {
    switch (t) {
        case Event::Type::Premise: return "premise";
        case Event::Type::Propose: return "propose";
        case Event::Type::Verdict: return "verdict";
        case Event::Type::Report: return "report";
        case Event::Type::Halt: return "halt";
    }
    return "?";
}

std::string event_to_json(const Event& ev) {
    json j;
    j["event"] = event_type_name(ev.type);
    j["session"] = ev.session;
    j["branch"] = ev.branch;
    switch (ev.type) {
        case Event::Type::Premise:
            j["node"] = ev.node;
            j["payload"] = ev.payload;
            break;
        case Event::Type::Propose:
            j["iteration"] = ev.iteration;
            j["payload"] = ev.payload;
            j["parents"] = ev.parents;
            j["rationale"] = ev.rationale;
            break;
        case Event::Type::Verdict:
            j["iteration"] = ev.iteration;
            j["verdict"] = ev.validated ? "validated" : "rejected";
            if (ev.validated) j["node"] = ev.node;
            j["note"] = ev.note;
            break;
        case Event::Type::Report:
            j["iteration"] = ev.iteration;
            j["answer"] = ev.answer;
            break;
        case Event::Type::Halt:
            j["reason"] = ev.halt_reason;
            j["iterations"] = ev.iteration;
            j["visited_states"] = ev.metrics.visited_states;
            j["proposer_calls"] = ev.metrics.proposer_calls;
            j["verifier_calls"] = ev.metrics.verifier_calls;
            j["reporter_calls"] = ev.metrics.reporter_calls;
            j["rejected"] = ev.metrics.rejected_candidates;
            break;
    }
    return j.dump();
}

BranchRun::BranchRun(const SessionConfig& config, const RoleBundle& roles,
                     const std::vector<std::string>& premises, std::string goal,
                     int branch_index, int session_index, EventSink sink)
    : config_(config),
      roles_(roles),
      goal_(std::move(goal)),
      branch_index_(branch_index),
      session_index_(session_index),
      sink_(std::move(sink)),
      rng_(Rng(config.seed).derive(static_cast<std::uint64_t>(branch_index))) {
    metrics_.visited_states = 1;  // the initial state counts as visited
    for (const auto& p : premises) {
        const NodeId id = dag_.add_premise(p);
        seen_.emplace(canon(p), id);
        if (sink_) {
            Event ev;
            ev.type = Event::Type::Premise;
            ev.session = session_index_;
            ev.branch = branch_index_;
            ev.node = id;
            ev.payload = p;
            sink_(ev);
        }
    }
}

std::string BranchRun::canon(const std::string& payload) const {
    return roles_.canonicalize ? roles_.canonicalize(payload) : payload;
}

std::vector<NodeId> BranchRun::assemble_context() {
    const auto& premises = dag_.premise_ids();
    std::vector<NodeId> ctx;
    if (config_.context_policy == ContextPolicy::FullHistory) {
        for (const auto& n : dag_.nodes()) ctx.push_back(n.id);  // insertion order
        return ctx;
    }
    // RandomPremisePair: two premises sampled uniformly without replacement (one if
    // only one exists), then every validated proposition in insertion order.
    if (premises.size() <= 2) {
        ctx.assign(premises.begin(), premises.end());
    } else {
        for (const std::size_t i : rng_.sample_without_replacement(premises.size(), 2)) {
            ctx.push_back(premises[i]);
        }
    }
    for (const auto& n : dag_.nodes()) {
        if (n.origin == Origin::Proposed) ctx.push_back(n.id);
    }
    return ctx;
}

bool BranchRun::can_step() const {
    if (answer_.has_value()) return false;
    if (iteration_ >= config_.L) return false;
    if (dag_.validated_proposed_count() >= static_cast<std::size_t>(config_.n)) return false;
    return true;
}

std::optional<std::string> BranchRun::consult_reporter() {
    metrics_.reporter_calls += 1;
    auto ans = roles_.reporter(dag_, goal_);
    if (ans.has_value()) {
        answer_ = ans;
        report_iteration_ = iteration_;
        if (sink_) {
            Event ev;
            ev.type = Event::Type::Report;
            ev.session = session_index_;
            ev.branch = branch_index_;
            ev.iteration = iteration_;
            ev.answer = *ans;
            sink_(ev);
        }
    }
    return ans;
}

StepOutcome BranchRun::step() {
    iteration_ += 1;
    const std::vector<NodeId> ctx = assemble_context();

    metrics_.proposer_calls += 1;
    const ProposerView view{dag_, ctx, goal_, rejected_};
    std::optional<Candidate> cand = roles_.proposer(view, rng_);
    if (!cand.has_value()) {
        // Move set exhausted: no candidate, so no verifier call and no rejected
        // candidate is recorded. run_to_halt treats this as the branch's end.
        StepOutcome out;
        out.kind = StepOutcome::Kind::Rejected;
        out.note = "exhausted";
        return out;
    }

    if (sink_) {
        Event ev;
        ev.type = Event::Type::Propose;
        ev.session = session_index_;
        ev.branch = branch_index_;
        ev.iteration = iteration_;
        ev.payload = cand->payload;
        ev.parents = cand->parents;
        ev.rationale = cand->rationale;
        sink_(ev);
    }

    auto reject = [&](const std::string& note) {
        metrics_.rejected_candidates += 1;
        rejected_.push_back(canon(cand->payload));
        if (sink_) {
            Event ev;
            ev.type = Event::Type::Verdict;
            ev.session = session_index_;
            ev.branch = branch_index_;
            ev.iteration = iteration_;
            ev.validated = false;
            ev.note = note;
            sink_(ev);
        }
        StepOutcome out;
        out.kind = StepOutcome::Kind::Rejected;
        out.note = note;
        return out;
    };

    // Malformed proposal: a declared parent outside the assembled context (or
    // unknown). Counts as a rejection with a note; the verifier is not consulted.
    for (const NodeId p : cand->parents) {
        const bool in_ctx = std::find(ctx.begin(), ctx.end(), p) != ctx.end();
        if (!in_ctx) return reject("malformed: parent not in context");
    }

    metrics_.verifier_calls += 1;
    const Verdict verdict = roles_.verifier(dag_, ctx, *cand);
    if (!verdict.ok()) return reject(verdict.note.empty() ? "rejected" : verdict.note);

    // Duplicate suppression happens after verification so that every step makes
    // exactly one proposer call and one verifier call.
    const std::string key = canon(cand->payload);
    if (seen_.count(key)) return reject("duplicate");

    const NodeId id = dag_.add_validated(cand->payload, cand->parents, cand->rationale);
    seen_.emplace(key, id);
    metrics_.visited_states += 1;
    if (sink_) {
        Event ev;
        ev.type = Event::Type::Verdict;
        ev.session = session_index_;
        ev.branch = branch_index_;
        ev.iteration = iteration_;
        ev.validated = true;
        ev.node = id;
        sink_(ev);
    }

    if (auto ans = consult_reporter()) {
        StepOutcome out;
        out.kind = StepOutcome::Kind::ReporterHalt;
        out.node = id;
        out.answer = *ans;
        return out;
    }
    StepOutcome out;
    out.kind = StepOutcome::Kind::Accepted;
    out.node = id;
    return out;
}

HaltReason BranchRun::run_to_halt() {
    // The reporter may fire on premises alone, before any proposition exists.
    if (consult_reporter().has_value()) return HaltReason::Reporter;
    while (can_step()) {
        const StepOutcome out = step();
        if (out.kind == StepOutcome::Kind::ReporterHalt) return HaltReason::Reporter;
        if (out.kind == StepOutcome::Kind::Rejected && out.note == "exhausted") {
            // Move set ran out before the cap could bite.
            return HaltReason::IterationCap;
        }
        if (out.kind == StepOutcome::Kind::Rejected && config_.report_every_iteration) {
            if (consult_reporter().has_value()) return HaltReason::Reporter;
        }
    }
    if (answer_.has_value()) return HaltReason::Reporter;
    if (dag_.validated_proposed_count() >= static_cast<std::size_t>(config_.n)) {
        return HaltReason::ProposalBudget;
    }
    return HaltReason::IterationCap;
}

void BranchRun::emit_halt(HaltReason reason) {
    if (!sink_) return;
    Event ev;
    ev.type = Event::Type::Halt;
    ev.session = session_index_;
    ev.branch = branch_index_;
    ev.iteration = iteration_;
    ev.halt_reason = halt_reason_name(reason);
    ev.metrics = metrics_;
    sink_(ev);
}

Session::Session(SessionConfig config, RoleBundle roles, std::vector<std::string> premises,
                 std::string goal)
    : config_(config), roles_(std::move(roles)), premises_(std::move(premises)),
      goal_(std::move(goal)) {
    config_.validate();
    if (!roles_.proposer || !roles_.verifier || !roles_.reporter) {
        throw ConfigError("role bundle incomplete");
    }
}

SessionResult Session::run(EventSink sink, int session_index) const {
    SessionResult result;
    int best_branch = -1;
    int best_iters = 0;
    std::vector<BranchRun> runs;
    runs.reserve(static_cast<std::size_t>(config_.b));
    std::vector<HaltReason> reasons;
    for (int bi = 0; bi < config_.b; ++bi) {
        runs.emplace_back(config_, roles_, premises_, goal_, bi, session_index, sink);
        BranchRun& br = runs.back();
        const HaltReason reason = br.run_to_halt();
        br.emit_halt(reason);
        reasons.push_back(reason);
        result.metrics += br.metrics();
        if (reason == HaltReason::Reporter) {
            const int iters = br.iterations_at_report();
            if (best_branch < 0 || iters < best_iters) {
                best_branch = bi;
                best_iters = iters;
            }
        }
    }
    if (best_branch >= 0) {
        BranchRun& winner = runs[static_cast<std::size_t>(best_branch)];
        result.answer = *winner.answer();
        result.halted_by = HaltReason::Reporter;
        result.branch = best_branch;
        result.dag = winner.dag();
    } else {
        // No branch reported: ProposalBudget only when every branch ended on the
        // validated-proposition budget.
        const bool all_budget = std::all_of(reasons.begin(), reasons.end(), [](HaltReason r) {
            return r == HaltReason::ProposalBudget;
        });
        result.halted_by = all_budget && !reasons.empty() ? HaltReason::ProposalBudget
                                                          : HaltReason::IterationCap;
        result.branch = -1;
        if (!runs.empty()) result.dag = runs.front().dag();
    }
    // Derivation: ancestor closure of the node grounding the answer. The domain
    // locates it when it can; otherwise the newest node of the winning branch is
    // the one whose acceptance triggered the report.
    if (best_branch >= 0 && result.dag.size() > 0) {
        NodeId support = static_cast<NodeId>(result.dag.size() - 1);
        if (roles_.support_node) {
            if (auto sid = roles_.support_node(result.dag, goal_, result.answer)) {
                support = *sid;
            }
        }
        result.derivation = extract_derivation(result.dag, support);
    }
    return result;
}

std::string SessionResult::to_json() const {
    json j;
    j["answer"] = answer;
    j["derivation"] = derivation;
    j["halted_by"] = halt_reason_name(halted_by);
    j["branch"] = branch;
    j["metrics"] = {{"visited_states", metrics.visited_states},
                    {"proposer_calls", metrics.proposer_calls},
                    {"verifier_calls", metrics.verifier_calls},
                    {"reporter_calls", metrics.reporter_calls},
                    {"rejected_candidates", metrics.rejected_candidates}};
    json nodes = json::array();
    for (const auto& n : dag.nodes()) {
        nodes.push_back({{"id", n.id},
                         {"payload", n.payload},
                         {"parents", n.parents},
                         {"rationale", n.rationale},
                         {"origin", n.origin == Origin::Premise ? "premise" : "proposed"}});
    }
    j["dag"] = nodes;
    return j.dump();
}

std::string majority_vote(const std::vector<std::string>& answers) {
    if (answers.empty()) throw ConfigError("majority_vote over empty answer list");
    std::unordered_map<std::string, int> counts;
    for (const auto& a : answers) counts[a] += 1;
    int best = -1;
    std::string winner;
    for (const auto& a : answers) {  // first occurrence order breaks ties
        const int c = counts[a];
        if (c > best) {
            best = c;
            winner = a;
        }
    }
    return winner;
}

}  // namespace cr
