#pragma once

#include <stdexcept>
#include <string>

namespace cr {

// Invalid session or endpoint configuration (bad budgets, bad probabilities,
// missing API key, unsolvable conceptual-experiment puzzle, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data (CSV puzzles, problem JSON, dataset JSONL).
struct LoadError : std::runtime_error {
    explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

// Unknown node id, bad parent reference, or similar lookup failure.
struct LookupError : std::runtime_error {
    explicit LookupError(const std::string& what) : std::runtime_error(what) {}
};

// Prompt template rendering failed (unbound slot).
struct RenderError : std::runtime_error {
    explicit RenderError(const std::string& what) : std::runtime_error(what) {}
};

// HTTP transport failed after exhausting retries.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// Endpoint answered but the payload does not match the chat-completions shape.
struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Propositional evaluation over an incomplete assignment or quantified input.
struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

// Statement text outside the restricted grammar.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cr
