#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cr/dag.hpp"
#include "cr/rng.hpp"

namespace cr {

enum class ContextPolicy { FullHistory, RandomPremisePair };

struct SessionConfig {
    int n = 16;                        // max validated propositions per branch
    int k = 1;                         // majority-vote width (used by callers)
    int b = 1;                         // independent branches
    int L = 50;                        // iteration cap per branch
    double temperature_propose = 0.1;
    double temperature_vote = 0.7;
    std::uint64_t seed = 0;
    ContextPolicy context_policy = ContextPolicy::FullHistory;
    bool report_every_iteration = false;  // also consult the reporter after rejections

    void validate() const;  // throws ConfigError
};

// What the proposer sees: the dag, the assembled context ids, the goal, and the
// canonical payloads of previously rejected candidates (the "forbidden" list —
// deterministic proposers need it to enumerate untried moves).
struct ProposerView {
    const ReasoningDag& dag;
    const std::vector<NodeId>& context;
    const std::string& goal;
    const std::vector<std::string>& rejected;
};

struct Candidate {
    std::string payload;
    std::vector<NodeId> parents;  // declared antecedents, must be context members
    std::string rationale;        // e.g. rule or operation name; opaque to the engine
};

using ProposeFn = std::function<std::optional<Candidate>(const ProposerView&, Rng&)>;
using VerifyFn = std::function<Verdict(const ReasoningDag&, const std::vector<NodeId>&,
                                       const Candidate&)>;
using ReportFn = std::function<std::optional<std::string>(const ReasoningDag&,
                                                          const std::string& goal)>;
using CanonicalFn = std::function<std::string(const std::string&)>;
using SupportFn = std::function<std::optional<NodeId>(const ReasoningDag&,
                                                      const std::string& goal,
                                                      const std::string& answer)>;

struct RoleBundle {
    ProposeFn proposer;
    VerifyFn verifier;
    ReportFn reporter;
    CanonicalFn canonicalize;  // optional; identity when absent
    SupportFn support_node;    // optional; names the node that grounds the answer
};

struct Metrics {
    std::int64_t visited_states = 0;  // validated non-premise nodes + 1 per branch
    std::int64_t proposer_calls = 0;
    std::int64_t verifier_calls = 0;
    std::int64_t reporter_calls = 0;
    std::int64_t rejected_candidates = 0;

    Metrics& operator+=(const Metrics& o) {
        visited_states += o.visited_states;
        proposer_calls += o.proposer_calls;
        verifier_calls += o.verifier_calls;
        reporter_calls += o.reporter_calls;
        rejected_candidates += o.rejected_candidates;
        return *this;
    }
};

enum class HaltReason { Reporter, IterationCap, ProposalBudget };

struct StepOutcome {
    enum class Kind { Accepted, Rejected, ReporterHalt };
    Kind kind = Kind::Rejected;
    NodeId node = 0;      // valid when Accepted
    std::string answer;   // valid when ReporterHalt
    std::string note;     // rejection reason when Rejected
};

// Event-log record; one JSON line each. Field set is part of the external format.
struct Event {
    enum class Type { Premise, Propose, Verdict, Report, Halt };
    Type type;
    int session = 0;
    int branch = 0;
    int iteration = 0;            // 0 before the first step
    NodeId node = 0;              // premise/verdict(validated)
    std::string payload;          // premise/propose
    std::vector<NodeId> parents;  // propose
    std::string rationale;        // propose
    bool validated = false;       // verdict
    std::string note;             // verdict
    std::string answer;           // report
    std::string halt_reason;      // halt
    Metrics metrics;              // halt
};

using EventSink = std::function<void(const Event&)>;

struct SessionResult {
    std::string answer;             // empty when no branch reported
    std::vector<NodeId> derivation; // ancestor closure of the reported node set
    Metrics metrics;                // summed across branches
    HaltReason halted_by = HaltReason::IterationCap;
    int branch = -1;                // winning branch index, -1 when none reported
    ReasoningDag dag;               // dag of the winning branch (or branch 0)

    std::string to_json() const;    // deterministic serialization (replay checks)
};

// One branch of a session: owns its dag, rng stream and metrics. Exposed so tests
// can drive step() directly; Session::run composes b of these.
class BranchRun {
public:
    BranchRun(const SessionConfig& config, const RoleBundle& roles,
              const std::vector<std::string>& premises, std::string goal, int branch_index,
              int session_index = 0, EventSink sink = nullptr);

    // One iteration: exactly one proposer call, then (for well-formed candidates)
    // exactly one verifier call; the reporter is consulted after every acceptance.
    StepOutcome step();

    // True while neither the iteration cap nor the proposition budget has been hit
    // and no reporter answer has been produced.
    bool can_step() const;

    // Consult reporter on the current dag (used before the first step: premises
    // alone may already decide the goal).
    std::optional<std::string> consult_reporter();

    HaltReason run_to_halt();  // loops step() honoring caps; returns halt reason

    const ReasoningDag& dag() const { return dag_; }
    const Metrics& metrics() const { return metrics_; }
    const std::optional<std::string>& answer() const { return answer_; }
    int iterations() const { return iteration_; }
    int iterations_at_report() const { return report_iteration_; }
    void emit_halt(HaltReason reason);

private:
    std::vector<NodeId> assemble_context();
    std::string canon(const std::string& payload) const;

    const SessionConfig& config_;
    const RoleBundle& roles_;
    std::string goal_;
    int branch_index_;
    int session_index_;
    EventSink sink_;
    ReasoningDag dag_;
    Rng rng_;
    Metrics metrics_;
    std::optional<std::string> answer_;
    int iteration_ = 0;
    int report_iteration_ = -1;
    std::vector<std::string> rejected_;          // canonical payloads, insertion order
    std::unordered_map<std::string, NodeId> seen_;  // canonical payload -> node
};

class Session {
public:
    // Validates config (throws ConfigError). Empty premise lists are legal at this
    // level; domains that require premises enforce that in their own entry points.
    Session(SessionConfig config, RoleBundle roles, std::vector<std::string> premises,
            std::string goal);

    // Runs b independent branches on derived rng streams, merges deterministically:
    // earliest-reporting branch wins (fewest iterations at report, ties by index),
    // metrics summed across all branches.
    SessionResult run(EventSink sink = nullptr, int session_index = 0) const;

    const SessionConfig& config() const { return config_; }

private:
    SessionConfig config_;
    RoleBundle roles_;
    std::vector<std::string> premises_;
    std::string goal_;
};

// Modal answer; ties resolved toward the earliest-occurring answer among the tied.
// Precondition: answers non-empty.
std::string majority_vote(const std::vector<std::string>& answers);

const char* halt_reason_name(HaltReason reason);

// Serialize one event as a single JSON line (no trailing newline).
std::string event_to_json(const Event& ev);

}  // namespace cr
