#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cr/dag.hpp"
#include "cr/errors.hpp"
#include "cr/rng.hpp"
#include "cr/session.hpp"
#include "support/toy_domain.hpp"

using namespace cr;
using nlohmann::json;

TEST_CASE("session config validation") {
    SessionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SessionConfig bad = cfg;
    bad.n = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.k = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.b = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.L = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.temperature_propose = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.temperature_vote = -2.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("majority vote is modal with earliest-occurrence tie break") {
    CHECK(majority_vote({"True", "True", "False"}) == "True");
    CHECK(majority_vote({"False", "True"}) == "False");
    CHECK(majority_vote({"True", "False", "False", "True"}) == "True");
    CHECK(majority_vote({"Unknown"}) == "Unknown");
    CHECK(majority_vote({"a", "b", "b", "c", "c"}) == "b");
    CHECK_THROWS_AS(majority_vote({}), ConfigError);
}

TEST_CASE("dag is append-only with strictly earlier validated parents") {
    ReasoningDag dag;
    const NodeId p0 = dag.add_premise("p0");
    const NodeId p1 = dag.add_premise("p1");
    CHECK(p0 == 0);
    CHECK(p1 == 1);
    CHECK(dag.premise_ids() == std::vector<NodeId>{0, 1});
    const NodeId n2 = dag.add_validated("n2", {p0, p1});
    CHECK(n2 == 2);
    CHECK(dag.node(n2).parents == std::vector<NodeId>{0, 1});
    CHECK(dag.node(n2).origin == Origin::Proposed);
    CHECK(dag.node(p0).origin == Origin::Premise);
    CHECK(dag.validated_proposed_count() == 1);
    CHECK_THROWS_AS(dag.add_validated("bad", {7}), LookupError);   // future parent
    CHECK_THROWS_AS(dag.node(99), LookupError);
}

TEST_CASE("extract_derivation returns the topologically ordered minimal closure") {
    ReasoningDag dag;
    dag.add_premise("p0");
    dag.add_premise("p1");
    dag.add_premise("p2");
    const NodeId n3 = dag.add_validated("n3", {0, 1});
    const NodeId n4 = dag.add_validated("n4", {2});
    const NodeId n5 = dag.add_validated("n5", {n3, n4});
    CHECK(extract_derivation(dag, n5) == std::vector<NodeId>{0, 1, 2, 3, 4, 5});
    CHECK(extract_derivation(dag, n3) == std::vector<NodeId>{0, 1, 3});
    CHECK(extract_derivation(dag, 2) == std::vector<NodeId>{2});
    CHECK_THROWS_AS(extract_derivation(dag, 42), LookupError);
}

namespace {

// Scripted domain: proposer walks a fixed payload list; verifier validates
// payloads not marked "bad"; reporter answers once a "goal" payload is in.
RoleBundle scripted_bundle(std::vector<Candidate> script) {
    RoleBundle bundle;
    auto cursor = std::make_shared<std::size_t>(0);
    bundle.proposer = [script, cursor](const ProposerView&, Rng&) -> std::optional<Candidate> {
        if (*cursor >= script.size()) return std::nullopt;
        return script[(*cursor)++];
    };
    bundle.verifier = [](const ReasoningDag&, const std::vector<NodeId>&,
                         const Candidate& cand) -> Verdict {
        if (cand.payload.find("bad") != std::string::npos) {
            return Verdict::rejected("scripted-bad");
        }
        return Verdict::validated();
    };
    bundle.reporter = [](const ReasoningDag& dag, const std::string& goal)
        -> std::optional<std::string> {
        for (const auto& n : dag.nodes()) {
            if (n.payload == goal) return "found:" + goal;
        }
        return std::nullopt;
    };
    return bundle;
}

}  // namespace

TEST_CASE("step makes exactly one proposer call and one verifier call") {
    SessionConfig cfg;
    cfg.seed = 7;
    RoleBundle bundle = scripted_bundle({
        {"alpha", {0}, "r1"},
        {"bad-one", {0}, "r2"},
        {"goal", {1}, "r3"},
    });
    BranchRun run(cfg, bundle, {"root"}, "goal", 0);

    StepOutcome s1 = run.step();
    CHECK(s1.kind == StepOutcome::Kind::Accepted);
    CHECK(run.metrics().proposer_calls == 1);
    CHECK(run.metrics().verifier_calls == 1);
    CHECK(run.metrics().reporter_calls == 1);  // consulted after the acceptance
    CHECK(run.dag().size() == 2);

    StepOutcome s2 = run.step();
    CHECK(s2.kind == StepOutcome::Kind::Rejected);
    CHECK(s2.note == "scripted-bad");
    CHECK(run.metrics().proposer_calls == 2);
    CHECK(run.metrics().verifier_calls == 2);
    CHECK(run.metrics().rejected_candidates == 1);
    CHECK(run.dag().size() == 2);  // rejected candidates never enter the dag

    StepOutcome s3 = run.step();
    CHECK(s3.kind == StepOutcome::Kind::ReporterHalt);
    CHECK(s3.answer == "found:goal");
    CHECK(run.metrics().visited_states == 3);  // two accepted + initial state
}

TEST_CASE("malformed proposals are rejected without consulting the verifier") {
    SessionConfig cfg;
    RoleBundle bundle = scripted_bundle({{"alpha", {42}, "bad-parent"}});
    BranchRun run(cfg, bundle, {"root"}, "goal", 0);
    StepOutcome out = run.step();
    CHECK(out.kind == StepOutcome::Kind::Rejected);
    CHECK(out.note == "malformed: parent not in context");
    CHECK(run.metrics().verifier_calls == 0);
    CHECK(run.metrics().rejected_candidates == 1);
    CHECK(run.dag().size() == 1);
}

TEST_CASE("verifier backend errors propagate without mutating the dag") {
    SessionConfig cfg;
    RoleBundle bundle = scripted_bundle({{"alpha", {0}, "r"}, {"beta", {0}, "r"}});
    bundle.verifier = [](const ReasoningDag&, const std::vector<NodeId>&,
                         const Candidate&) -> Verdict {
        throw TransportError("backend down");
    };
    BranchRun run(cfg, bundle, {"root"}, "goal", 0);
    CHECK_THROWS_AS(run.step(), TransportError);
    CHECK(run.dag().size() == 1);
    CHECK(run.metrics().rejected_candidates == 0);
}

TEST_CASE("duplicate candidates are silently rejected after verification") {
    SessionConfig cfg;
    RoleBundle bundle = scripted_bundle({
        {"alpha", {0}, "r"},
        {"alpha", {0}, "r"},   // exact duplicate
        {"ALPHA", {0}, "r"},   // duplicate only under canonicalization
    });
    bundle.canonicalize = [](const std::string& s) {
        std::string lower = s;
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return lower;
    };
    BranchRun run(cfg, bundle, {"root"}, "goal", 0);
    CHECK(run.step().kind == StepOutcome::Kind::Accepted);
    StepOutcome dup = run.step();
    CHECK(dup.kind == StepOutcome::Kind::Rejected);
    CHECK(dup.note == "duplicate");
    StepOutcome dup2 = run.step();
    CHECK(dup2.kind == StepOutcome::Kind::Rejected);
    CHECK(dup2.note == "duplicate");
    CHECK(run.metrics().verifier_calls == 3);  // duplicates still verified first
    CHECK(run.dag().size() == 2);
}

TEST_CASE("assemble_context policies") {
    SessionConfig cfg;
    cfg.seed = 11;
    std::vector<std::vector<NodeId>> captured;
    RoleBundle bundle;
    bundle.proposer = [&captured](const ProposerView& view, Rng&) -> std::optional<Candidate> {
        captured.push_back(view.context);
        Candidate cand;
        cand.payload = "x" + std::to_string(captured.size());
        return cand;
    };
    bundle.verifier = [](const ReasoningDag&, const std::vector<NodeId>&, const Candidate&) {
        return Verdict::validated();
    };
    bundle.reporter = [](const ReasoningDag&, const std::string&) -> std::optional<std::string> {
        return std::nullopt;
    };

    SUBCASE("full history lists every node in insertion order") {
        cfg.context_policy = ContextPolicy::FullHistory;
        BranchRun run(cfg, bundle, {"p0", "p1", "p2"}, "", 0);
        run.step();
        run.step();
        CHECK(captured[0] == std::vector<NodeId>{0, 1, 2});
        CHECK(captured[1] == std::vector<NodeId>{0, 1, 2, 3});
    }

    SUBCASE("random premise pair keeps two premises plus all validated") {
        cfg.context_policy = ContextPolicy::RandomPremisePair;
        BranchRun run(cfg, bundle, {"p0", "p1", "p2", "p3"}, "", 0);
        run.step();
        run.step();
        REQUIRE(captured[0].size() == 2);
        CHECK(captured[0][0] < captured[0][1]);
        CHECK(captured[0][1] <= 3);
        REQUIRE(captured[1].size() == 3);
        CHECK(captured[1][2] == 4);  // the validated proposition joins the context
    }

    SUBCASE("single premise yields a one-element context") {
        cfg.context_policy = ContextPolicy::RandomPremisePair;
        BranchRun run(cfg, bundle, {"only"}, "", 0);
        run.step();
        CHECK(captured[0] == std::vector<NodeId>{0});
    }
}

TEST_CASE("run halts by iteration cap with the domain default answer") {
    SessionConfig cfg;
    cfg.L = 5;
    cfg.n = 100;
    testsupport::ToyOptions opt;
    opt.report_modulus = 1000000;  // reporter never fires
    Session session(cfg, testsupport::toy_bundle(opt), {"p"}, "");
    const SessionResult res = session.run();
    CHECK(res.halted_by == HaltReason::IterationCap);
    CHECK(res.answer.empty());
    CHECK(res.branch == -1);
    CHECK(res.metrics.proposer_calls == 5);
}

TEST_CASE("run halts on the proposal budget when n validated propositions exist") {
    SessionConfig cfg;
    cfg.L = 50;
    cfg.n = 3;
    RoleBundle bundle;
    int counter = 0;
    bundle.proposer = [&counter](const ProposerView&, Rng&) -> std::optional<Candidate> {
        Candidate cand;
        cand.payload = "u" + std::to_string(counter++);
        return cand;
    };
    bundle.verifier = [](const ReasoningDag&, const std::vector<NodeId>&, const Candidate&) {
        return Verdict::validated();
    };
    bundle.reporter = [](const ReasoningDag&, const std::string&) -> std::optional<std::string> {
        return std::nullopt;
    };
    Session session(cfg, bundle, {"p"}, "");
    const SessionResult res = session.run();
    CHECK(res.halted_by == HaltReason::ProposalBudget);
    CHECK(res.dag.validated_proposed_count() == 3);
    CHECK(res.metrics.visited_states == 4);  // 3 validated + initial state
}

TEST_CASE("reporter may answer on premises alone, before any proposition") {
    SessionConfig cfg;
    RoleBundle bundle = scripted_bundle({});
    Session session(cfg, bundle, {"goal"}, "goal");
    const SessionResult res = session.run();
    CHECK(res.halted_by == HaltReason::Reporter);
    CHECK(res.answer == "found:goal");
    CHECK(res.metrics.proposer_calls == 0);
    CHECK(res.metrics.reporter_calls == 1);
}

TEST_CASE("multi-branch merge picks the earliest-reporting branch, ties by index") {
    SessionConfig cfg;
    cfg.b = 3;
    cfg.L = 30;
    cfg.n = 30;
    cfg.seed = 123;
    testsupport::ToyOptions opt;
    opt.report_modulus = 9;
    const RoleBundle bundle = testsupport::toy_bundle(opt);
    Session session(cfg, bundle, {"p"}, "");

    std::vector<Event> events;
    const SessionResult res = session.run([&events](const Event& ev) { events.push_back(ev); });

    // Recompute the winner from the event stream: earliest report iteration, then
    // smallest branch index.
    int best_branch = -1;
    int best_iter = 0;
    std::map<int, Metrics> halt_metrics;
    for (const auto& ev : events) {
        if (ev.type == Event::Type::Report) {
            if (best_branch < 0 || ev.iteration < best_iter ||
                (ev.iteration == best_iter && ev.branch < best_branch)) {
                best_branch = ev.branch;
                best_iter = ev.iteration;
            }
        }
        if (ev.type == Event::Type::Halt) halt_metrics[ev.branch] = ev.metrics;
    }
    CHECK(halt_metrics.size() == 3);  // every branch ran to its own halt
    if (best_branch >= 0) {
        CHECK(res.halted_by == HaltReason::Reporter);
        CHECK(res.branch == best_branch);
    } else {
        CHECK(res.branch == -1);
    }
    Metrics sum;
    for (const auto& [branch, m] : halt_metrics) sum += m;
    CHECK(sum.proposer_calls == res.metrics.proposer_calls);
    CHECK(sum.visited_states == res.metrics.visited_states);
    CHECK(sum.rejected_candidates == res.metrics.rejected_candidates);
}

TEST_CASE("event log lines are well formed json with the documented fields") {
    SessionConfig cfg;
    cfg.L = 4;
    cfg.n = 10;
    cfg.seed = 5;
    Session session(cfg, testsupport::toy_bundle(), {"p0", "p1"}, "");
    std::vector<std::string> lines;
    session.run([&lines](const Event& ev) { lines.push_back(event_to_json(ev)); }, 3);
    REQUIRE(!lines.empty());
    std::set<std::string> kinds;
    for (const auto& line : lines) {
        const json j = json::parse(line);
        CHECK(j.contains("event"));
        CHECK(j.at("session") == 3);
        CHECK(j.contains("branch"));
        kinds.insert(j.at("event").get<std::string>());
        if (j.at("event") == "halt") {
            CHECK(j.contains("visited_states"));
            CHECK(j.contains("proposer_calls"));
            CHECK(j.contains("reason"));
        }
    }
    CHECK(kinds.count("premise") == 1);
    CHECK(kinds.count("propose") == 1);
    CHECK(kinds.count("verdict") == 1);
    CHECK(kinds.count("halt") == 1);
}

TEST_CASE("fixed seeds replay bit-identically and distinct seeds diverge") {
    SessionConfig cfg;
    cfg.L = 12;
    cfg.n = 12;
    cfg.b = 2;
    cfg.seed = 2024;
    const RoleBundle bundle = testsupport::toy_bundle();
    const std::string a = Session(cfg, bundle, {"p"}, "").run().to_json();
    const std::string b = Session(cfg, bundle, {"p"}, "").run().to_json();
    CHECK(a == b);
    cfg.seed = 2025;
    const std::string c = Session(cfg, bundle, {"p"}, "").run().to_json();
    CHECK(a != c);
}

TEST_CASE("engine invariants hold across randomized toy sessions") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SessionConfig cfg;
        Rng meta(seed);
        cfg.seed = seed;
        cfg.n = 1 + static_cast<int>(meta.next_below(6));
        cfg.b = 1 + static_cast<int>(meta.next_below(3));
        cfg.L = 1 + static_cast<int>(meta.next_below(8));
        testsupport::ToyOptions opt;
        opt.vocab = 8 + static_cast<int>(meta.next_below(40));
        opt.accept_percent = static_cast<int>(meta.next_below(101));
        opt.report_modulus = 3 + static_cast<int>(meta.next_below(20));
        Session session(cfg, testsupport::toy_bundle(opt), {"p0", "p1"}, "");
        const SessionResult res = session.run();
        CHECK(res.metrics.proposer_calls <= static_cast<std::int64_t>(cfg.b) * cfg.L);
        CHECK(res.dag.validated_proposed_count() <= static_cast<std::size_t>(cfg.n));
        for (const auto& node : res.dag.nodes()) {
            for (const NodeId p : node.parents) {
                CHECK(p < node.id);  // acyclicity: parents strictly earlier
                CHECK(res.dag.node(p).verdict == VerdictKind::Validated);
            }
        }
    }
}

TEST_CASE("rng streams are deterministic and derivation decorrelates") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng base(7);
    Rng c0 = base.derive(0);
    Rng c1 = base.derive(1);
    CHECK(c0.next_u64() != c1.next_u64());
    // bounded draws stay in range and hit every residue eventually
    Rng d(3);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 200; ++i) seen.insert(d.next_below(5));
    CHECK(seen == std::set<std::uint64_t>{0, 1, 2, 3, 4});
    Rng e(9);
    for (int i = 0; i < 100; ++i) {
        const double x = e.next_double();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}
