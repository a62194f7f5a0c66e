#include "cr/dag.hpp"

#include <algorithm>

namespace cr {

std::vector<NodeId> extract_derivation(const ReasoningDag& dag, NodeId target) {
    if (target >= dag.size()) {
        throw LookupError("extract_derivation: unknown node id " + std::to_string(target));
    }
    std::vector<bool> mark(dag.size(), false);
    std::vector<NodeId> stack{target};
    mark[target] = true;
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        for (const NodeId p : dag.node(id).parents) {
            if (!mark[p]) {
                mark[p] = true;
                stack.push_back(p);
            }
        }
    }
    std::vector<NodeId> out;
    for (NodeId id = 0; id < dag.size(); ++id) {
        if (mark[id]) out.push_back(id);  // ascending ids == topological order
    }
    return out;
}

}  // namespace cr
