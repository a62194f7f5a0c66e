#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cr/errors.hpp"

namespace cr {

using NodeId = std::uint32_t;

enum class Origin { Premise, Proposed };

enum class VerdictKind { Validated, Rejected };

struct Verdict {
    VerdictKind kind = VerdictKind::Rejected;
    std::string note;  // machine-readable reason when rejected

    static Verdict validated() { return {VerdictKind::Validated, ""}; }
    static Verdict rejected(std::string why) { return {VerdictKind::Rejected, std::move(why)}; }
    bool ok() const { return kind == VerdictKind::Validated; }
};

struct PropositionNode {
    NodeId id = 0;
    std::string payload;           // domain statement, opaque to the engine
    std::vector<NodeId> parents;   // all strictly earlier, all validated
    std::string rationale;         // justification as declared by the proposer
    Origin origin = Origin::Proposed;
    VerdictKind verdict = VerdictKind::Validated;
};

// Append-only store of premises and validated propositions. Rejected candidates
// never enter the store; acyclicity holds because parents precede children by id.
class ReasoningDag {
public:
    NodeId add_premise(std::string payload) {
        const NodeId id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back(
            {id, std::move(payload), {}, "", Origin::Premise, VerdictKind::Validated});
        premise_ids_.push_back(id);
        return id;
    }

    NodeId add_validated(std::string payload, std::vector<NodeId> parents,
                         std::string rationale = "") {
        const NodeId id = static_cast<NodeId>(nodes_.size());
        for (const NodeId p : parents) {
            if (p >= id) throw LookupError("parent id " + std::to_string(p) + " not yet in dag");
            assert(nodes_[p].verdict == VerdictKind::Validated);
        }
        nodes_.push_back({id, std::move(payload), std::move(parents), std::move(rationale),
                          Origin::Proposed, VerdictKind::Validated});
        return id;
    }

    const PropositionNode& node(NodeId id) const {
        if (id >= nodes_.size()) throw LookupError("unknown node id " + std::to_string(id));
        return nodes_[id];
    }

    const std::vector<PropositionNode>& nodes() const { return nodes_; }
    const std::vector<NodeId>& premise_ids() const { return premise_ids_; }
    std::size_t size() const { return nodes_.size(); }

    std::size_t validated_proposed_count() const {
        return nodes_.size() - premise_ids_.size();
    }

private:
    std::vector<PropositionNode> nodes_;
    std::vector<NodeId> premise_ids_;
};

// Topologically ordered minimal ancestor closure of target (ids ascending, which is
// a topological order because every parent precedes its child).
std::vector<NodeId> extract_derivation(const ReasoningDag& dag, NodeId target);

}  // namespace cr
