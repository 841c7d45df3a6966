#pragma once
// k-MST solvers: a branch-and-bound exact solver for small instances and a
// best-ratio greedy heuristic for larger ones, plus an independent tree
// verifier. Rewards sit on vertices; the solvers find a minimum-weight tree
// collecting at least k reward. Negative edge weights are handled natively.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mecsim/adgraph.hpp"

namespace mecsim {

inline constexpr int kDefaultExactLimit = 16;

struct TreeSolution {
    std::vector<int> vertices;                 // sorted ascending
    std::vector<std::pair<int, int>> edges;    // u < v, sorted
    std::int64_t objective = 0;                // sum of edge weights
    std::int64_t reward = 0;                   // sum of vertex rewards
};

// Exact solver: branch-and-bound over connected vertex subsets with
// spanning-tree evaluation per subset. Respects mutual-inclusion pairs and
// consumes star rewards at included hubs greedily (zero-weight spokes), which
// is equivalent to solving the materialized form. Ties between equal-objective
// trees break toward the lexicographically smallest sorted vertex-id sequence.
// Throws SizeLimitError above exact_limit core vertices and InfeasibleError
// when no subtree reaches reward k.
TreeSolution kmst_exact(const KmstGraph& graph, std::int64_t k, int exact_limit = kDefaultExactLimit);

// Feasibility-first greedy: grow from every start vertex, repeatedly attaching
// the frontier edge with the best weight/reward-gained ratio, then prune
// redundant leaves. Never worse than feasible; no approximation ratio claimed.
TreeSolution kmst_heuristic(const KmstGraph& graph, std::int64_t k);

struct TreeCheck {
    bool ok = true;
    std::vector<std::string> violations;
};

// Recomputes everything from the graph: tree shape, edge existence, reward
// quota, objective, pairing closure. Never throws; violations are listed.
TreeCheck verify_tree(const KmstGraph& graph, const TreeSolution& solution, std::int64_t k);

} // namespace mecsim
