// cr: command-line front end. Subcommands: solve24, logic, simulate, report.
// Exit codes: 0 = ran to completion, 2 = usage/input error, 1 = internal error.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cr/errors.hpp"
#include "cr/game24.hpp"
#include "cr/llm.hpp"
#include "cr/logic.hpp"
#include "cr/rng.hpp"
#include "cr/session.hpp"
#include "cr/theory.hpp"

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void emit_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw cr::LoadError("cannot write output file: " + out_path);
    out << text;
}

void emit_json(const json& report, const std::string& out_path) {
    emit_text(report.dump(2) + "\n", out_path);
}

// Optional JSONL event log shared by the solving commands.
struct EventLog {
    std::ofstream file;

    explicit EventLog(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw cr::LoadError("cannot write event log: " + path);
    }

    cr::EventSink sink() {
        if (!file.is_open()) return nullptr;
        return [this](const cr::Event& ev) { file << cr::event_to_json(ev) << '\n'; };
    }
};

json metrics_json(const cr::Metrics& m) {
    return {{"visited_states", m.visited_states},
            {"proposer_calls", m.proposer_calls},
            {"verifier_calls", m.verifier_calls},
            {"reporter_calls", m.reporter_calls},
            {"rejected_candidates", m.rejected_candidates}};
}

// Ancestor closure of the reported conclusion, premises first (ids ascend in
// topological order), with enough structure to re-verify each edge offline.
json derivation_json(const cr::SessionResult& result) {
    json out = json::array();
    for (const cr::NodeId id : result.derivation) {
        const cr::PropositionNode& node = result.dag.node(id);
        out.push_back({{"node", id},
                       {"payload", node.payload},
                       {"parents", node.parents},
                       {"premise", node.origin == cr::Origin::Premise},
                       {"rationale", node.rationale}});
    }
    return out;
}

// ---- solve24 -----------------------------------------------------------------------

struct Solve24Args {
    std::string puzzles_path;
    int breadth = 1;
    int limit = 50;
    int budget = 16;
    std::string mode = "exhaustive";
    bool no_prune = false;
    std::uint64_t seed = 0;
    std::string out;
    std::string log;
};

int cmd_solve24(const Solve24Args& args) {
    const auto start = Clock::now();
    const auto puzzles = cr::game24::load_puzzles_csv(args.puzzles_path);

    cr::SessionConfig base;
    base.b = args.breadth;
    base.L = args.limit;
    base.n = args.budget;
    base.seed = args.seed;
    base.validate();

    cr::game24::Game24Options options;
    options.mode = args.mode == "random" ? cr::game24::ProposerMode::Random
                                         : cr::game24::ProposerMode::Exhaustive;
    options.prune = !args.no_prune;

    EventLog log(args.log);
    cr::Rng seeder(args.seed);

    json items = json::array();
    long solved = 0;
    cr::Metrics total;
    for (std::size_t i = 0; i < puzzles.size(); ++i) {
        cr::SessionConfig config = base;
        config.seed = seeder.derive(i).next_u64();
        const auto result = cr::game24::run_cr_24(puzzles[i], config, options, log.sink(),
                                                  static_cast<int>(i));
        if (result.solved) ++solved;
        total += result.session.metrics;
        json item;
        item["puzzle"] = puzzles[i];
        item["solved"] = result.solved;
        item["equation"] = result.equation;
        item["halted_by"] = cr::halt_reason_name(result.session.halted_by);
        item["metrics"] = metrics_json(result.session.metrics);
        items.push_back(std::move(item));
    }

    const double count = static_cast<double>(puzzles.size());
    json report;
    report["command"] = "solve24";
    report["config"] = {{"puzzles", args.puzzles_path}, {"breadth", args.breadth},
                        {"limit", args.limit},          {"budget", args.budget},
                        {"mode", args.mode},            {"prune", !args.no_prune},
                        {"seed", args.seed}};
    report["items"] = std::move(items);
    report["aggregates"] = {
        {"puzzles", puzzles.size()},
        {"solved", solved},
        {"accuracy", count > 0 ? static_cast<double>(solved) / count : 0.0},
        {"mean_visited_states",
         count > 0 ? static_cast<double>(total.visited_states) / count : 0.0},
        {"mean_proposer_calls",
         count > 0 ? static_cast<double>(total.proposer_calls) / count : 0.0},
        {"mean_verifier_calls",
         count > 0 ? static_cast<double>(total.verifier_calls) / count : 0.0},
        {"mean_reporter_calls",
         count > 0 ? static_cast<double>(total.reporter_calls) / count : 0.0}};
    report["wall_time_ms"] = elapsed_ms(start);
    emit_json(report, args.out);
    return 0;
}

// ---- logic -------------------------------------------------------------------------

struct LogicArgs {
    std::vector<std::string> paths;
    std::string backend = "logic";
    std::string policy = "systematic";
    int k = 16;
    int budget = 50;
    int limit = 50;
    int breadth = 1;
    double temp_propose = 0.1;
    double temp_vote = 0.7;
    std::uint64_t seed = 0;
    std::string out;
    std::string log;
    // llm backend plumbing
    std::string endpoint = "http://127.0.0.1:8080/v1/chat/completions";
    std::string model = "local-model";
    std::string api_key_env = "CR_API_KEY";
    std::string templates = "assets/prompts";
    int max_in_flight = 4;
};

// Raw problem text for the llm backend: no grammar parsing, any sentences allowed.
struct RawProblem {
    std::vector<std::string> premises;
    std::string hypothesis;
    std::optional<cr::logic::Label> gold;
};

RawProblem load_raw_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cr::LoadError("cannot open problem file: " + path);
    RawProblem raw;
    try {
        json doc = json::parse(in);
        for (const auto& p : doc.at("premises")) raw.premises.push_back(p.get<std::string>());
        raw.hypothesis = doc.at("hypothesis").get<std::string>();
        if (doc.contains("label") && !doc["label"].is_null())
            raw.gold = cr::logic::label_from(doc["label"].get<std::string>());
    } catch (const json::exception& e) {
        throw cr::LoadError(path + ": " + e.what());
    }
    return raw;
}

cr::SessionConfig logic_config(const LogicArgs& args) {
    cr::SessionConfig config;
    config.n = args.budget;
    config.k = args.k;
    config.b = args.breadth;
    config.L = args.limit;
    config.temperature_propose = args.temp_propose;
    config.temperature_vote = args.temp_vote;
    config.seed = args.seed;
    config.validate();
    return config;
}

int cmd_logic(const LogicArgs& args) {
    const auto start = Clock::now();
    for (const auto& path : args.paths)
        if (!std::filesystem::exists(path))
            throw cr::LoadError("problem file does not exist: " + path);

    const cr::SessionConfig base = logic_config(args);
    const cr::logic::ProposePolicy policy = args.policy == "sampled"
                                                ? cr::logic::ProposePolicy::Sampled
                                                : cr::logic::ProposePolicy::Systematic;

    // Live-mode collaborators are created once so configuration errors surface
    // before any per-item work.
    std::optional<cr::ChatClient> client;
    std::optional<cr::LlmTemplates> templates;
    if (args.backend == "llm") {
        cr::EndpointConfig endpoint;
        endpoint.base_url = args.endpoint;
        endpoint.model_id = args.model;
        endpoint.temperature = args.temp_propose;
        endpoint.max_in_flight = args.max_in_flight;
        endpoint.api_key_env = args.api_key_env;
        client.emplace(endpoint);
        templates = cr::load_logic_templates(args.templates);
    }

    EventLog log(args.log);
    cr::Rng seeder(args.seed);

    json items = json::array();
    long scored = 0;
    long correct = 0;
    long errored = 0;
    cr::Metrics total;
    for (std::size_t i = 0; i < args.paths.size(); ++i) {
        const std::string& path = args.paths[i];
        json item;
        item["path"] = path;
        cr::Rng item_rng = seeder.derive(i);

        try {
            std::optional<cr::logic::Label> gold;
            std::vector<std::string> votes;
            std::vector<cr::SessionResult> vote_results;
            cr::Metrics item_metrics;

            if (args.backend == "llm") {
                const RawProblem raw = load_raw_problem(path);
                gold = raw.gold;
                for (int v = 0; v < args.k; ++v) {
                    cr::SessionConfig config = base;
                    config.seed = item_rng.derive(v).next_u64();
                    const cr::RoleBundle roles = cr::llm_role_bundle(*templates, *client, config);
                    cr::Session session(config, roles, raw.premises, raw.hypothesis);
                    auto result = session.run(log.sink(), static_cast<int>(i) * args.k + v);
                    votes.push_back(result.answer.empty()
                                        ? cr::logic::label_name(cr::logic::Label::Unknown)
                                        : result.answer);
                    item_metrics += result.metrics;
                    vote_results.push_back(std::move(result));
                }
            } else {
                const cr::logic::LogicProblem problem = cr::logic::load_logic_problem(path);
                gold = problem.gold;
                for (int v = 0; v < args.k; ++v) {
                    cr::SessionConfig config = base;
                    config.seed = item_rng.derive(v).next_u64();
                    auto result = cr::logic::run_logic(
                        problem, config, policy, log.sink(),
                        static_cast<int>(i) * args.k + v);
                    votes.push_back(cr::logic::label_name(result.label));
                    item_metrics += result.session.metrics;
                    vote_results.push_back(std::move(result.session));
                }
            }

            const std::string predicted = cr::majority_vote(votes);
            item["predicted"] = predicted;
            item["votes"] = votes;
            // Expose the derivation behind the first vote that carried the majority.
            for (std::size_t v = 0; v < votes.size(); ++v) {
                if (votes[v] == predicted) {
                    item["derivation"] = derivation_json(vote_results[v]);
                    break;
                }
            }
            item["metrics"] = metrics_json(item_metrics);
            total += item_metrics;
            if (gold.has_value()) {
                const std::string want = cr::logic::label_name(*gold);
                item["gold"] = want;
                item["correct"] = predicted == want;
                ++scored;
                if (predicted == want) ++correct;
            }
        } catch (const cr::ParseError& e) {
            item["error"] = e.what();
            ++errored;
        } catch (const cr::LoadError& e) {
            item["error"] = e.what();
            ++errored;
        }
        items.push_back(std::move(item));
    }

    json report;
    report["command"] = "logic";
    report["config"] = {{"backend", args.backend}, {"policy", args.policy},
                        {"k", args.k},             {"budget", args.budget},
                        {"limit", args.limit},     {"breadth", args.breadth},
                        {"seed", args.seed}};
    report["items"] = std::move(items);
    const double denom = static_cast<double>(scored);
    report["aggregates"] = {{"items", args.paths.size()},
                            {"errors", errored},
                            {"scored", scored},
                            {"correct", correct},
                            {"accuracy", denom > 0 ? static_cast<double>(correct) / denom : 0.0},
                            {"totals", metrics_json(total)}};
    report["wall_time_ms"] = elapsed_ms(start);
    emit_json(report, args.out);
    return 0;
}

// ---- simulate ------------------------------------------------------------------------

struct Lemma1Args {
    double step = 0.05;
    int nmax = 20;
    std::string out;
};

int cmd_lemma1_grid(const Lemma1Args& args) {
    if (args.step <= 0.0 || args.step > 1.0)
        throw cr::ConfigError("--step must lie in (0, 1]");
    if (args.nmax < 1) throw cr::ConfigError("--nmax must be >= 1");
    const int steps = static_cast<int>(std::lround(1.0 / args.step));

    std::string csv = "p1,p2,n,lhs,rhs,holds\n";
    long points = 0;
    long violations = 0;
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
            const double p1 = static_cast<double>(i) / steps;
            const double p2 = static_cast<double>(j) / steps;
            for (int n = 1; n <= args.nmax; ++n) {
                const auto res = cr::theory::check_lemma1(p1, p2, n);
                ++points;
                if (!res.holds) ++violations;
                csv += std::to_string(p1) + "," + std::to_string(p2) + "," +
                       std::to_string(n) + "," + std::to_string(res.lhs) + "," +
                       std::to_string(res.rhs) + "," + (res.holds ? "1" : "0") + "\n";
            }
        }
    }
    emit_text(csv, args.out);
    std::cerr << "lemma1-grid: " << violations << " violations across " << points
              << " grid points\n";
    return 0;
}

struct SweepArgs {
    int params = 50;
    long trials = 100000;
    int nmax = 6;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_ordering_sweep(const SweepArgs& args) {
    if (args.params < 1) throw cr::ConfigError("--params must be >= 1");
    if (args.trials < 1) throw cr::ConfigError("--trials must be >= 1");
    if (args.nmax < 1) throw cr::ConfigError("--nmax must be >= 1");

    auto se2 = [](const cr::theory::Estimate& a, const cr::theory::Estimate& b) {
        return std::sqrt(a.std_err * a.std_err + b.std_err * b.std_err);
    };

    cr::Rng rng(args.seed);
    std::string csv =
        "p1,p2,n,cotsc,cotsc_se,tot,tot_se,cr,cr_se,tot_closed,"
        "ok_cotsc_le_tot,ok_tot_le_cr,ok_tot_closed\n";
    long violations = 0;
    for (int j = 0; j < args.params; ++j) {
        const double p1 = 0.05 + 0.85 * rng.next_double();
        const double p2 = 0.05 + 0.85 * rng.next_double();
        const int n = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(args.nmax)));
        const auto params = cr::theory::StageParams::two_stage(p1, p2, n);
        // Boosts grow with history, staying >= the base stage probabilities
        // (the structural assumption behind the CR >= ToT comparison).
        cr::theory::CrBoostSchedule boosts;
        const double d1 = 0.3 * rng.next_double();
        const double d2 = 0.3 * rng.next_double();
        for (int h = 0; h <= n; ++h) {
            boosts.stage1.push_back(std::min(1.0, p1 + d1 * h));
            boosts.stage2.push_back(std::min(1.0, p2 + d2 * h));
        }
        cr::Rng trial_seeds = rng.derive(static_cast<std::uint64_t>(j));
        const auto cot = cr::theory::simulate(cr::theory::Method::CoTSC, params, boosts,
                                              args.trials, trial_seeds.derive(0).next_u64());
        const auto tot = cr::theory::simulate(cr::theory::Method::ToT, params, boosts,
                                              args.trials, trial_seeds.derive(1).next_u64());
        const auto crs = cr::theory::simulate(cr::theory::Method::CR, params, boosts,
                                              args.trials, trial_seeds.derive(2).next_u64());
        const double closed = cr::theory::p_tot(p1, p2, n);
        const bool ok1 = cot.value <= tot.value + 3.0 * se2(cot, tot);
        const bool ok2 = tot.value <= crs.value + 3.0 * se2(tot, crs);
        const bool ok3 = std::abs(tot.value - closed) <= 4.0 * tot.std_err;
        if (!(ok1 && ok2 && ok3)) ++violations;
        csv += std::to_string(p1) + "," + std::to_string(p2) + "," + std::to_string(n) + "," +
               std::to_string(cot.value) + "," + std::to_string(cot.std_err) + "," +
               std::to_string(tot.value) + "," + std::to_string(tot.std_err) + "," +
               std::to_string(crs.value) + "," + std::to_string(crs.std_err) + "," +
               std::to_string(closed) + "," + (ok1 ? "1" : "0") + "," + (ok2 ? "1" : "0") +
               "," + (ok3 ? "1" : "0") + "\n";
    }
    emit_text(csv, args.out);
    std::cerr << "ordering-sweep: " << violations << " violations across " << args.params
              << " parameterizations\n";
    return 0;
}

struct ConceptualArgs {
    std::vector<int> puzzle;
    long trials = 1000;
    std::uint64_t seed = 0;
    std::string out;
};

json estimate_json(const cr::theory::Estimate& e) {
    return {{"value", e.value}, {"std_err", e.std_err}, {"trials", e.trials}, {"seed", e.seed}};
}

int cmd_conceptual(const ConceptualArgs& args) {
    if (args.puzzle.size() != 4)
        throw cr::ConfigError("--puzzle needs exactly four comma-separated numbers");
    if (args.trials < 1) throw cr::ConfigError("--trials must be >= 1");
    std::array<int, 4> puzzle{};
    for (int i = 0; i < 4; ++i) puzzle[static_cast<std::size_t>(i)] = args.puzzle[
        static_cast<std::size_t>(i)];

    const auto res = cr::theory::conceptual_experiment(puzzle, args.trials, args.seed);
    const double se_product = std::sqrt(
        std::pow(res.p2_hat.value * res.p1_hat.std_err, 2) +
        std::pow(res.p1_hat.value * res.p2_hat.std_err, 2));
    const double se_gap =
        std::sqrt(se_product * se_product + res.pipeline_hat.std_err * res.pipeline_hat.std_err);
    const double gap = std::abs(res.product - res.pipeline_hat.value);

    json report;
    report["command"] = "simulate/conceptual";
    report["puzzle"] = args.puzzle;
    report["trials"] = args.trials;
    report["seed"] = args.seed;
    report["p_hat"] = estimate_json(res.p_hat);
    report["p1_hat"] = estimate_json(res.p1_hat);
    report["p2_hat"] = estimate_json(res.p2_hat);
    report["pipeline_hat"] = estimate_json(res.pipeline_hat);
    report["product_p1_p2"] = res.product;
    report["product_std_err"] = se_product;
    report["product_vs_pipeline_gap"] = gap;
    report["consistent_3sigma"] = gap <= 3.0 * se_gap;
    emit_json(report, args.out);
    return 0;
}

// ---- report --------------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> inputs;
    std::string out;
};

int cmd_report(const ReportArgs& args) {
    std::vector<std::string> files;
    for (const auto& input : args.inputs) {
        if (std::filesystem::is_directory(input)) {
            std::vector<std::string> found;
            for (const auto& entry : std::filesystem::directory_iterator(input))
                if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
                    found.push_back(entry.path().string());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (std::filesystem::exists(input)) {
            files.push_back(input);
        } else {
            throw cr::LoadError("no such log file or directory: " + input);
        }
    }
    if (files.empty()) throw cr::LoadError("no event logs to aggregate");

    struct SessionAgg {
        bool reported = false;
        std::string answer;
        long long visited = 0, proposer = 0, verifier = 0, reporter = 0, rejected = 0;
        int branches = 0;
        int premises = 0;
        int proposes = 0;
        int validated = 0;
    };

    json sessions = json::array();
    long long total_sessions = 0, total_reported = 0;
    long long sum_visited = 0, sum_proposer = 0, sum_verifier = 0, sum_reporter = 0,
              sum_rejected = 0;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw cr::LoadError("cannot open event log: " + file);
        std::map<int, SessionAgg> aggs;  // session index -> aggregate, ordered
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json ev;
            try {
                ev = json::parse(line);
                const std::string type = ev.at("event").get<std::string>();
                SessionAgg& agg = aggs[ev.at("session").get<int>()];
                if (type == "premise") {
                    agg.premises += 1;
                } else if (type == "propose") {
                    agg.proposes += 1;
                } else if (type == "verdict") {
                    if (ev.at("verdict").get<std::string>() == "validated") agg.validated += 1;
                } else if (type == "report") {
                    if (!agg.reported) agg.answer = ev.at("answer").get<std::string>();
                    agg.reported = true;
                } else if (type == "halt") {
                    agg.branches += 1;
                    agg.visited += ev.at("visited_states").get<long long>();
                    agg.proposer += ev.at("proposer_calls").get<long long>();
                    agg.verifier += ev.at("verifier_calls").get<long long>();
                    agg.reporter += ev.at("reporter_calls").get<long long>();
                    agg.rejected += ev.at("rejected").get<long long>();
                }
            } catch (const json::exception& e) {
                std::cerr << "warning: " << file << ":" << line_no
                          << ": skipping corrupt log line (" << e.what() << ")\n";
                continue;
            }
        }
        for (const auto& [index, agg] : aggs) {
            ++total_sessions;
            if (agg.reported) ++total_reported;
            sum_visited += agg.visited;
            sum_proposer += agg.proposer;
            sum_verifier += agg.verifier;
            sum_reporter += agg.reporter;
            sum_rejected += agg.rejected;
            sessions.push_back({{"file", file},
                                {"session", index},
                                {"reported", agg.reported},
                                {"answer", agg.answer},
                                {"branches", agg.branches},
                                {"premises", agg.premises},
                                {"proposes", agg.proposes},
                                {"validated", agg.validated},
                                {"visited_states", agg.visited},
                                {"proposer_calls", agg.proposer},
                                {"verifier_calls", agg.verifier},
                                {"reporter_calls", agg.reporter},
                                {"rejected_candidates", agg.rejected}});
        }
    }

    const double denom = static_cast<double>(total_sessions);
    json report;
    report["command"] = "report";
    report["files"] = files;
    report["sessions"] = std::move(sessions);
    report["aggregates"] = {
        {"sessions", total_sessions},
        {"reported", total_reported},
        {"accuracy", denom > 0 ? static_cast<double>(total_reported) / denom : 0.0},
        {"mean_visited_states", denom > 0 ? static_cast<double>(sum_visited) / denom : 0.0},
        {"mean_proposer_calls", denom > 0 ? static_cast<double>(sum_proposer) / denom : 0.0},
        {"mean_verifier_calls", denom > 0 ? static_cast<double>(sum_verifier) / denom : 0.0},
        {"mean_reporter_calls", denom > 0 ? static_cast<double>(sum_reporter) / denom : 0.0},
        {"total_rejected", sum_rejected}};
    emit_json(report, args.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cumulative reasoning toolkit: propose/verify/accumulate sessions, "
                 "theory simulations, and event-log reports"};
    app.require_subcommand(1);

    Solve24Args solve_args;
    auto* solve = app.add_subcommand("solve24", "run CR sessions over a puzzle CSV");
    solve->add_option("puzzles", solve_args.puzzles_path, "CSV file, four integers per line")
        ->required();
    solve->add_option("--breadth", solve_args.breadth, "independent branches per puzzle")
        ->capture_default_str();
    solve->add_option("--limit", solve_args.limit, "iteration cap per branch")
        ->capture_default_str();
    solve->add_option("--budget", solve_args.budget, "validated-proposition budget per branch")
        ->capture_default_str();
    solve->add_option("--mode", solve_args.mode, "proposer mode")
        ->check(CLI::IsMember({"exhaustive", "random"}))
        ->capture_default_str();
    solve->add_flag("--no-prune", solve_args.no_prune, "disable reachability pruning");
    solve->add_option("--seed", solve_args.seed, "base seed")->capture_default_str();
    solve->add_option("--out", solve_args.out, "write the JSON report here");
    solve->add_option("--log", solve_args.log, "write a JSONL event log here");

    LogicArgs logic_args;
    auto* logic = app.add_subcommand("logic", "judge hypotheses over logic problem files");
    logic->add_option("problems", logic_args.paths, "problem JSON files")->required();
    logic->add_option("--backend", logic_args.backend, "reasoning backend")
        ->check(CLI::IsMember({"logic", "llm"}))
        ->capture_default_str();
    logic->add_option("--policy", logic_args.policy, "symbolic proposer policy")
        ->check(CLI::IsMember({"systematic", "sampled"}))
        ->capture_default_str();
    logic->add_option("--k", logic_args.k, "majority-vote width")->capture_default_str();
    logic->add_option("--budget", logic_args.budget, "validated-proposition budget per branch")
        ->capture_default_str();
    logic->add_option("--limit", logic_args.limit, "iteration cap per branch")
        ->capture_default_str();
    logic->add_option("--breadth", logic_args.breadth, "independent branches")
        ->capture_default_str();
    logic->add_option("--temp-propose", logic_args.temp_propose, "proposer temperature")
        ->capture_default_str();
    logic->add_option("--temp-vote", logic_args.temp_vote, "majority-vote temperature")
        ->capture_default_str();
    logic->add_option("--seed", logic_args.seed, "base seed")->capture_default_str();
    logic->add_option("--out", logic_args.out, "write the JSON report here");
    logic->add_option("--log", logic_args.log, "write a JSONL event log here");
    logic->add_option("--endpoint", logic_args.endpoint, "chat-completions URL (llm backend)")
        ->capture_default_str();
    logic->add_option("--model", logic_args.model, "model id (llm backend)")
        ->capture_default_str();
    logic->add_option("--api-key-env", logic_args.api_key_env,
                      "environment variable holding the API key")
        ->capture_default_str();
    logic->add_option("--templates", logic_args.templates, "prompt template directory")
        ->capture_default_str();
    logic->add_option("--max-in-flight", logic_args.max_in_flight,
                      "concurrent request cap (llm backend)")
        ->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "closed forms and Monte Carlo estimates");
    simulate->require_subcommand(1);

    Lemma1Args lemma_args;
    auto* lemma = simulate->add_subcommand("lemma1-grid",
                                           "best-of-n vs two-stage closed-form grid (CSV)");
    lemma->add_option("--step", lemma_args.step, "probability grid step")
        ->capture_default_str();
    lemma->add_option("--nmax", lemma_args.nmax, "largest n")->capture_default_str();
    lemma->add_option("--out", lemma_args.out, "write the CSV here");

    SweepArgs sweep_args;
    auto* sweep = simulate->add_subcommand(
        "ordering-sweep", "Monte Carlo arrival-probability ordering over random parameters");
    sweep->add_option("--params", sweep_args.params, "number of random parameterizations")
        ->capture_default_str();
    sweep->add_option("--trials", sweep_args.trials, "Monte Carlo trials per estimate")
        ->capture_default_str();
    sweep->add_option("--nmax", sweep_args.nmax, "largest per-stage attempt count")
        ->capture_default_str();
    sweep->add_option("--seed", sweep_args.seed, "base seed")->capture_default_str();
    sweep->add_option("--out", sweep_args.out, "write the CSV here");

    ConceptualArgs conceptual_args;
    auto* conceptual = simulate->add_subcommand(
        "conceptual", "stage decomposition of random search on one puzzle (JSON)");
    conceptual->add_option("--puzzle", conceptual_args.puzzle, "four comma-separated numbers")
        ->delimiter(',')
        ->required();
    conceptual->add_option("--trials", conceptual_args.trials, "trials per estimate")
        ->capture_default_str();
    conceptual->add_option("--seed", conceptual_args.seed, "base seed")->capture_default_str();
    conceptual->add_option("--out", conceptual_args.out, "write the JSON report here");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "aggregate JSONL event logs");
    report->add_option("logs", report_args.inputs, "event-log files or directories")
        ->required();
    report->add_option("--out", report_args.out, "write the JSON report here");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(solve)) return cmd_solve24(solve_args);
        if (app.got_subcommand(logic)) return cmd_logic(logic_args);
        if (app.got_subcommand(simulate)) {
            if (simulate->got_subcommand(lemma)) return cmd_lemma1_grid(lemma_args);
            if (simulate->got_subcommand(sweep)) return cmd_ordering_sweep(sweep_args);
            if (simulate->got_subcommand(conceptual)) return cmd_conceptual(conceptual_args);
        }
        if (app.got_subcommand(report)) return cmd_report(report_args);
        std::cerr << app.help();
        return 2;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const cr::LoadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cr::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cr::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
