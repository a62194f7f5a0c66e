#include "cr/llm.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "cr/errors.hpp"

namespace cr {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Offset just past the last word-bounded occurrence of `token` in lowercase text
// `hay`, or npos. Used to locate the judgement region and the final verdict token.
size_t last_token(const std::string& hay, const std::string& token) {
    size_t best = std::string::npos;
    for (size_t pos = hay.find(token); pos != std::string::npos;
         pos = hay.find(token, pos + 1)) {
        bool left_ok = pos == 0 || !word_char(hay[pos - 1]);
        size_t end = pos + token.size();
        bool right_ok = end >= hay.size() || !word_char(hay[end]);
        if (left_ok && right_ok) best = pos;
    }
    return best;
}

void scan_slots(const std::string& text, std::vector<std::string>& slots) {
    size_t pos = 0;
    while ((pos = text.find("{{", pos)) != std::string::npos) {
        size_t close = text.find("}}", pos + 2);
        if (close == std::string::npos) break;
        slots.push_back(text.substr(pos + 2, close - pos - 2));
        pos = close + 2;
    }
}

}  // namespace

// ---- templates -------------------------------------------------------------------

const char* chat_role_name(ChatRole role) {
    switch (role) {
        case ChatRole::System: return "system";
        case ChatRole::User: return "user";
        case ChatRole::Assistant: return "assistant";
    }
    return "user";
}

PromptTemplate parse_template(const std::string& id, const std::string& text) {
    PromptTemplate tmpl;
    tmpl.id = id;

    std::optional<ChatRole> role;
    std::vector<std::string> lines;
    auto flush = [&]() {
        if (!role) return;
        // Trim outer blank lines only; interior blank lines and trailing spaces on
        // the last content line (generation cues) are significant.
        size_t a = 0, b = lines.size();
        while (a < b && trim(lines[a]).empty()) ++a;
        while (b > a && trim(lines[b - 1]).empty()) --b;
        std::string content;
        for (size_t i = a; i < b; ++i) {
            if (i > a) content += '\n';
            content += lines[i];
        }
        if (content.empty() && *role != ChatRole::Assistant)
            throw LoadError("template '" + id + "': empty " +
                            chat_role_name(*role) + " turn");
        tmpl.turns.push_back({*role, content});
        lines.clear();
    };

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "[system]" || line == "[user]" || line == "[assistant]") {
            flush();
            role = line == "[system]" ? ChatRole::System
                 : line == "[user]"   ? ChatRole::User
                                      : ChatRole::Assistant;
            continue;
        }
        if (!role) {
            if (!trim(line).empty())
                throw LoadError("template '" + id + "': content before first section marker");
            continue;
        }
        lines.push_back(line);
    }
    flush();

    if (tmpl.turns.empty()) throw LoadError("template '" + id + "': no turns");
    for (size_t i = 0; i < tmpl.turns.size(); ++i)
        if (tmpl.turns[i].role == ChatRole::System && i != 0)
            throw LoadError("template '" + id + "': system turn not first");

    for (const auto& turn : tmpl.turns) scan_slots(turn.content, tmpl.slots);
    std::sort(tmpl.slots.begin(), tmpl.slots.end());
    tmpl.slots.erase(std::unique(tmpl.slots.begin(), tmpl.slots.end()), tmpl.slots.end());
    return tmpl;
}

PromptTemplate load_template(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open template file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_template(std::filesystem::path(path).stem().string(), buf.str());
}

std::vector<ChatMessage> render_prompt(const PromptTemplate& tmpl,
                                       const std::map<std::string, std::string>& bindings) {
    std::vector<ChatMessage> out;
    out.reserve(tmpl.turns.size());
    for (const auto& turn : tmpl.turns) {
        std::string rendered;
        const std::string& src = turn.content;
        size_t pos = 0;
        while (pos < src.size()) {
            size_t open = src.find("{{", pos);
            if (open == std::string::npos) {
                rendered.append(src, pos, std::string::npos);
                break;
            }
            size_t close = src.find("}}", open + 2);
            if (close == std::string::npos) {
                rendered.append(src, pos, std::string::npos);
                break;
            }
            rendered.append(src, pos, open - pos);
            std::string slot = src.substr(open + 2, close - open - 2);
            auto it = bindings.find(slot);
            if (it == bindings.end())
                throw RenderError("unbound slot '" + slot + "' in template '" + tmpl.id + "'");
            rendered += it->second;
            pos = close + 2;
        }
        out.push_back({turn.role, rendered});
    }
    return out;
}

// ---- endpoint client ---------------------------------------------------------------

void EndpointConfig::validate() const {
    if (temperature < 0) throw ConfigError("temperature must be >= 0");
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    if (retry.backoff_factor < 1.0) throw ConfigError("retry.backoff_factor must be >= 1");
    if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
        throw ConfigError("base_url must start with http:// or https://");
}

ChatClient::ChatClient(EndpointConfig config) : config_(std::move(config)) {
    config_.validate();
    // Split "scheme://host[:port]/path" into the client target and request path.
    size_t scheme = config_.base_url.find("://");
    size_t slash = config_.base_url.find('/', scheme + 3);
    std::string prefix =
        slash == std::string::npos ? config_.base_url : config_.base_url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : config_.base_url.substr(slash);
    host_ = prefix;  // httplib::Client accepts the full scheme-host-port form
    port_ = 0;
}

void ChatClient::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
    ++in_flight_;
}

void ChatClient::release() {
    {
        std::lock_guard lock(mu_);
        --in_flight_;
    }
    cv_.notify_one();
}

Completion ChatClient::complete(const std::vector<ChatMessage>& messages) {
    return complete(messages, config_.temperature);
}

Completion ChatClient::complete(const std::vector<ChatMessage>& messages, double temperature) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("API key environment variable '" + config_.api_key_env +
                          "' is not set");

    json body;
    body["model"] = config_.model_id;
    body["temperature"] = temperature;
    body["messages"] = json::array();
    for (const auto& m : messages)
        body["messages"].push_back({{"role", chat_role_name(m.role)}, {"content", m.content}});
    const std::string payload = body.dump();

    acquire();
    struct Slot {
        ChatClient* c;
        ~Slot() { c->release(); }
    } slot{this};

    std::string last_error;
    auto backoff = config_.retry.initial_backoff;
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(static_cast<long long>(
                static_cast<double>(backoff.count()) * config_.retry.backoff_factor));
        }
        httplib::Client cli(host_);
        cli.set_connection_timeout(config_.timeout);
        cli.set_read_timeout(config_.timeout);
        cli.set_write_timeout(config_.timeout);
        cli.set_default_headers({{"Authorization", std::string("Bearer ") + key}});
        auto res = cli.Post(path_, payload, "application/json");
        if (!res) {
            last_error = "connection error: " + httplib::to_string(res.error());
            continue;  // transient
        }
        if (res->status >= 500 && res->status < 600) {
            last_error = "status " + std::to_string(res->status);
            continue;  // transient
        }
        if (res->status != 200)
            throw ProtocolError("endpoint returned status " + std::to_string(res->status) +
                                " for " + config_.base_url);
        try {
            json reply = json::parse(res->body);
            return {reply.at("choices").at(0).at("message").at("content").get<std::string>(),
                    attempt};
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("response is not chat-completion shaped: ") +
                                e.what());
        }
    }
    throw TransportError("POST " + config_.base_url + " failed after " +
                         std::to_string(config_.retry.max_attempts) +
                         " attempts (" + last_error + ")");
}

// ---- output parsing -----------------------------------------------------------------

logic::Label parse_label(const std::string& text) {
    std::string hay = lower(text);
    size_t region = 0;
    for (const char* marker : {"judgement", "judgment"}) {
        size_t pos = hay.rfind(marker);
        if (pos != std::string::npos) region = std::max(region, pos);
    }
    std::string tail = hay.substr(region);
    size_t t = last_token(tail, "true");
    size_t f = last_token(tail, "false");
    size_t u = last_token(tail, "unknown");
    size_t best = std::string::npos;
    logic::Label label = logic::Label::Unknown;
    if (t != std::string::npos) { best = t; label = logic::Label::True; }
    if (f != std::string::npos && (best == std::string::npos || f > best)) {
        best = f;
        label = logic::Label::False;
    }
    if (u != std::string::npos && (best == std::string::npos || u > best)) {
        label = logic::Label::Unknown;
    }
    return label;
}

Verdict parse_verdict(const std::string& text) {
    std::string hay = lower(text);
    size_t yes = last_token(hay, "valid");
    size_t no = last_token(hay, "invalid");
    size_t t = last_token(hay, "true");
    size_t f = last_token(hay, "false");
    if (t != std::string::npos && (yes == std::string::npos || t > yes)) yes = t;
    if (f != std::string::npos && (no == std::string::npos || f > no)) no = f;
    if (yes == std::string::npos && no == std::string::npos)
        return Verdict::rejected("unparseable verdict");
    if (no != std::string::npos && (yes == std::string::npos || no > yes))
        return Verdict::rejected("judged invalid");
    return Verdict::validated();
}

std::string parse_proposition(const std::string& text) {
    std::string s = trim(text);
    size_t label = s.find("\"Proposition\":");
    if (label != std::string::npos) s = trim(s.substr(label + 14));
    if (!s.empty() && s.front() == '"') s.erase(0, 1);
    size_t cut = s.find('"');
    if (cut == std::string::npos) cut = s.find('\n');
    if (cut != std::string::npos) s = s.substr(0, cut);
    return trim(s);
}

// ---- dataset ingestion ---------------------------------------------------------------

FolioLoad load_folio(const std::string& path,
                     const std::optional<std::string>& exclusion_path) {
    std::unordered_set<std::string> excluded_ids;
    if (exclusion_path) {
        std::ifstream ex(*exclusion_path);
        if (!ex) throw LoadError("cannot open exclusion file: " + *exclusion_path);
        std::string line;
        while (std::getline(ex, line)) {
            std::string id = trim(line);
            if (!id.empty()) excluded_ids.insert(id);
        }
    }

    std::ifstream in(path);
    if (!in) throw LoadError("cannot open dataset file: " + path);

    FolioLoad out;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw LoadError(where + ": malformed JSON: " + e.what());
        }
        FolioRecord r;
        try {
            const auto& id = rec.at("example_id");
            r.example_id = id.is_string() ? id.get<std::string>() : id.dump();
            for (const auto& p : rec.at("premises")) r.premises.push_back(p.get<std::string>());
            r.hypothesis = rec.at("hypothesis").get<std::string>();
            r.label = logic::label_from(rec.at("label").get<std::string>());
        } catch (const json::exception& e) {
            throw LoadError(where + ": bad record: " + e.what());
        } catch (const LoadError& e) {
            throw LoadError(where + ": " + e.what());
        }
        if (!seen_ids.insert(r.example_id).second)
            throw LoadError(where + ": duplicate example_id '" + r.example_id + "'");
        ++out.parsed;
        if (excluded_ids.count(r.example_id)) {
            ++out.excluded;
            continue;
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

std::string folio_to_jsonl(const std::vector<FolioRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        json rec;
        rec["example_id"] = r.example_id;
        rec["premises"] = r.premises;
        rec["hypothesis"] = r.hypothesis;
        rec["label"] = logic::label_name(r.label);
        out += rec.dump();
        out += '\n';
    }
    return out;
}

// ---- role adapters ---------------------------------------------------------------------

LlmTemplates load_logic_templates(const std::string& dir) {
    LlmTemplates tpls;
    tpls.proposer = load_template(dir + "/proposer_logic.tmpl");
    tpls.verifier = load_template(dir + "/verifier_logic.tmpl");
    tpls.reporter = load_template(dir + "/reporter_logic.tmpl");
    return tpls;
}

RoleBundle llm_role_bundle(const LlmTemplates& templates, ChatClient& client,
                           const SessionConfig& config) {
    const double t_work = config.temperature_propose;
    // Majority-vote sessions sample the reporter at the vote temperature.
    const double t_report = config.k > 1 ? config.temperature_vote : config.temperature_propose;

    RoleBundle bundle;

    bundle.proposer = [tmpl = templates.proposer, &client, t_work](
                          const ProposerView& view, Rng&) -> std::optional<Candidate> {
        std::vector<std::string> premises;
        for (NodeId id : view.context) premises.push_back(view.dag.node(id).payload);
        auto messages = render_prompt(
            tmpl, {{"premises", join(premises, "\n")}, {"hypothesis", view.goal}});
        std::string content = client.complete(messages, t_work).content;
        std::string payload = parse_proposition(content);
        if (payload.empty()) payload = trim(content);
        Candidate cand;
        cand.payload = std::move(payload);
        cand.parents = view.context;
        cand.rationale = "llm";
        return cand;
    };

    bundle.verifier = [tmpl = templates.verifier, &client, t_work](
                          const ReasoningDag& dag, const std::vector<NodeId>&,
                          const Candidate& cand) -> Verdict {
        std::vector<std::string> premises;
        for (NodeId id : cand.parents) premises.push_back(dag.node(id).payload);
        auto messages = render_prompt(
            tmpl, {{"premises", join(premises, "\n")}, {"proposition", cand.payload}});
        return parse_verdict(client.complete(messages, t_work).content);
    };

    bundle.reporter = [tmpl = templates.reporter, &client, t_report](
                          const ReasoningDag& dag,
                          const std::string& goal) -> std::optional<std::string> {
        std::vector<std::string> premises;
        std::vector<std::string> propositions;
        for (const auto& node : dag.nodes()) {
            if (node.origin == Origin::Premise)
                premises.push_back(node.payload);
            else
                propositions.push_back(node.payload);
        }
        auto messages = render_prompt(tmpl, {{"premises", join(premises, "\n")},
                                             {"hypothesis", goal},
                                             {"propositions", join(propositions, "\n")}});
        logic::Label label = parse_label(client.complete(messages, t_report).content);
        if (label == logic::Label::Unknown) return std::nullopt;  // keep reasoning
        return std::string(logic::label_name(label));
    };

    bundle.canonicalize = [](const std::string& payload) {
        // Free-text dedupe: trim and collapse whitespace runs.
        std::string out;
        bool in_space = false;
        for (char c : payload) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                in_space = !out.empty();
                continue;
            }
            if (in_space) out += ' ';
            in_space = false;
            out += c;
        }
        return out;
    };

    bundle.support_node = nullptr;
    return bundle;
}

}  // namespace cr
