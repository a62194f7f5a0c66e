#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cr/dag.hpp"
#include "cr/logic.hpp"
#include "cr/session.hpp"

namespace cr {

// ---- chat messages and prompt templates ----------------------------------------
//
// Template files are plain UTF-8 text. A line that is exactly `[system]`, `[user]`
// or `[assistant]` starts a turn; everything until the next marker is that turn's
// content (outer blank lines trimmed, interior ones kept). `{{name}}` placeholders
// are slots; the loader declares them by scanning, so a rendered template can never
// contain an unresolved placeholder without render_prompt throwing first.

enum class ChatRole { System, User, Assistant };
const char* chat_role_name(ChatRole role);

struct ChatMessage {
    ChatRole role = ChatRole::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct PromptTemplate {
    std::string id;
    std::vector<ChatMessage> turns;  // system first, then few-shot/user/cue turns
    std::vector<std::string> slots;  // sorted, unique, scanned from turn content
};

// Parse template text (id is caller-chosen, usually the file stem).
// Throws LoadError on unknown section markers or content before the first marker.
PromptTemplate parse_template(const std::string& id, const std::string& text);

// Read + parse a template file; id = file stem. Throws LoadError.
PromptTemplate load_template(const std::string& path);

// Substitute every {{slot}} with bindings.at(slot). Pure and deterministic; turns
// without slots are passed through verbatim and in order.
// Throws RenderError naming the first missing slot.
std::vector<ChatMessage> render_prompt(const PromptTemplate& tmpl,
                                       const std::map<std::string, std::string>& bindings);

// ---- endpoint client ------------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 3;                          // total tries, >= 1
    std::chrono::milliseconds initial_backoff{100};
    double backoff_factor = 2.0;                   // sleep *= factor per retry
};

struct EndpointConfig {
    std::string base_url = "http://127.0.0.1:8080/v1/chat/completions";
    std::string model_id = "local-model";
    double temperature = 0.1;
    int max_in_flight = 4;
    std::string api_key_env = "CR_API_KEY";
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;

    void validate() const;  // temperature >= 0, max_in_flight >= 1; throws ConfigError
};

struct Completion {
    std::string content;
    int attempts = 0;  // HTTP requests actually issued for this call
};

// Blocking chat-completions client. Thread-safe; at most max_in_flight requests are
// on the wire at any moment (callers beyond that block on an internal semaphore).
class ChatClient {
public:
    explicit ChatClient(EndpointConfig config);

    // POSTs {model, messages, temperature}; returns choices[0].message.content.
    // Missing API key env -> ConfigError before any network traffic. Connection
    // failures and 5xx responses are retried with exponential backoff and become
    // TransportError when attempts run out; non-retryable statuses and unparseable
    // bodies are ProtocolError.
    Completion complete(const std::vector<ChatMessage>& messages);
    Completion complete(const std::vector<ChatMessage>& messages, double temperature);

    const EndpointConfig& config() const { return config_; }

private:
    void acquire();
    void release();

    EndpointConfig config_;
    std::string host_;
    int port_ = 0;
    std::string path_;
    std::mutex mu_;
    std::condition_variable cv_;
    int in_flight_ = 0;
};

// ---- output parsing ---------------------------------------------------------------

// Last True/False/Unknown token (case-insensitive, word-bounded) after the last
// "judgement" marker; the whole text when no marker is present; Unknown when no
// token is found at all.
logic::Label parse_label(const std::string& text);

// Valid/True -> Validated; Invalid/False -> Rejected("judged invalid"); the last
// such token wins. Anything else -> Rejected("unparseable verdict").
Verdict parse_verdict(const std::string& text);

// Generated proposition text -> bare statement: strips a leading `"Proposition":`
// label, surrounding quotes and whitespace, and keeps the first non-empty line.
std::string parse_proposition(const std::string& text);

// ---- dataset ingestion ---------------------------------------------------------------

struct FolioRecord {
    std::string example_id;
    std::vector<std::string> premises;
    std::string hypothesis;
    logic::Label label = logic::Label::Unknown;
};

struct FolioLoad {
    std::vector<FolioRecord> records;  // post-exclusion, file order
    int parsed = 0;                    // well-formed records in the file
    int excluded = 0;                  // dropped by the exclusion list
};

// Line-delimited JSON: {"example_id", "premises": [...], "hypothesis", "label"}.
// Exclusion file: one example_id per line (blank lines ignored). Malformed lines,
// labels outside {True,False,Unknown} and duplicate ids -> LoadError with the line
// number. Missing files -> LoadError.
FolioLoad load_folio(const std::string& path,
                     const std::optional<std::string>& exclusion_path = std::nullopt);

// Round-trip serialization used by the losslessness checks.
std::string folio_to_jsonl(const std::vector<FolioRecord>& records);

// ---- role adapters ----------------------------------------------------------------

struct LlmTemplates {
    PromptTemplate proposer;
    PromptTemplate verifier;
    PromptTemplate reporter;
};

// Load proposer_logic/verifier_logic/reporter_logic templates from a directory.
LlmTemplates load_logic_templates(const std::string& dir);

// Adapters from the engine role contracts onto rendered prompts + client calls.
// The proposer binds the assembled context as "premises" (joined with newlines)
// and declares those context nodes as parents; the verifier re-renders the
// candidate against its parents; the reporter answers only when its parsed label
// is True or False (Unknown keeps the session running). Proposer and verifier use
// temperature_propose, the reporter temperature_vote, mirroring SessionConfig.
// The client must outlive the bundle.
RoleBundle llm_role_bundle(const LlmTemplates& templates, ChatClient& client,
                           const SessionConfig& config);

}  // namespace cr
