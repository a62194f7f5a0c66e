#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <vector>

#include "cr/errors.hpp"
#include "cr/game24.hpp"
#include "cr/logic.hpp"
#include "cr/session.hpp"
#include "cr/theory.hpp"

namespace py = pybind11;

namespace {

py::dict metrics_dict(const cr::Metrics& m) {
    py::dict out;
    out["visited_states"] = m.visited_states;
    out["proposer_calls"] = m.proposer_calls;
    out["verifier_calls"] = m.verifier_calls;
    out["reporter_calls"] = m.reporter_calls;
    out["rejected_candidates"] = m.rejected_candidates;
    return out;
}

py::dict estimate_dict(const cr::theory::Estimate& e) {
    py::dict out;
    out["value"] = e.value;
    out["std_err"] = e.std_err;
    out["trials"] = e.trials;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cumulative-reasoning engine bindings";

    py::register_exception<cr::ParseError>(m, "FormulaParseError", PyExc_ValueError);
    py::register_exception<cr::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<cr::LoadError>(m, "InputError", PyExc_ValueError);

    m.def(
        "solve24",
        [](const std::array<int, 4>& puzzle, int limit, std::uint64_t seed) {
            cr::SessionConfig cfg;
            cfg.L = limit;
            cfg.n = limit;
            cfg.seed = seed;
            const auto res = cr::game24::run_cr_24(puzzle, cfg);
            py::dict out;
            out["solved"] = res.solved;
            out["equation"] = res.equation;
            out["proposer_calls"] = res.session.metrics.proposer_calls;
            out["visited_states"] = res.session.metrics.visited_states;
            return out;
        },
        py::arg("puzzle"), py::arg("limit") = 50, py::arg("seed") = 0,
        "Run the cumulative-reasoning search on a four-number puzzle.");

    m.def(
        "oracle_solvable",
        [](const std::array<int, 4>& puzzle) -> py::object {
            const auto witness = cr::game24::oracle_solvable(puzzle);
            if (!witness) return py::none();
            return py::str(*witness);
        },
        py::arg("puzzle"),
        "Brute-force check; returns a witness equation or None.");

    m.def(
        "infer",
        [](const std::vector<std::string>& premises, const std::string& hypothesis, int limit,
           std::uint64_t seed) {
            cr::logic::LogicProblem problem;
            for (const auto& text : premises) {
                problem.premises.push_back(cr::logic::parse_sentence(text));
                problem.premise_texts.push_back(text);
            }
            problem.hypothesis = cr::logic::parse_sentence(hypothesis);
            problem.hypothesis_text = hypothesis;

            cr::SessionConfig cfg;
            cfg.L = limit;
            cfg.n = limit;
            cfg.seed = seed;
            const auto res = cr::logic::run_logic(problem, cfg);

            py::list derivation;
            for (const cr::NodeId id : res.session.derivation) {
                derivation.append(res.session.dag.node(id).payload);
            }
            py::dict out;
            out["label"] = cr::logic::label_name(res.label);
            out["derivation"] = derivation;
            out["metrics"] = metrics_dict(res.session.metrics);
            return out;
        },
        py::arg("premises"), py::arg("hypothesis"), py::arg("limit") = 50, py::arg("seed") = 0,
        "Judge a hypothesis (True/False/Unknown) against natural-language premises; "
        "returns the label plus the derivation closure behind it.");

    m.def(
        "check_lemma1",
        [](double p1, double p2, int n) {
            const auto r = cr::theory::check_lemma1(p1, p2, n);
            py::dict out;
            out["lhs"] = r.lhs;
            out["rhs"] = r.rhs;
            out["holds"] = r.holds;
            return out;
        },
        py::arg("p1"), py::arg("p2"), py::arg("n"),
        "Single-shot vs staged closed forms: lhs = 1-(1-p1*p2)^n, rhs = staged product.");

    m.def(
        "conceptual_experiment",
        [](const std::array<int, 4>& puzzle, long trials, std::uint64_t seed) {
            const auto r = cr::theory::conceptual_experiment(puzzle, trials, seed);
            py::dict out;
            out["p_hat"] = estimate_dict(r.p_hat);
            out["p1_hat"] = estimate_dict(r.p1_hat);
            out["p2_hat"] = estimate_dict(r.p2_hat);
            out["pipeline_hat"] = estimate_dict(r.pipeline_hat);
            out["product"] = r.product;
            return out;
        },
        py::arg("puzzle"), py::arg("trials") = 1000, py::arg("seed") = 0,
        "Random-strategy stage decomposition of one solvable puzzle.");
}
