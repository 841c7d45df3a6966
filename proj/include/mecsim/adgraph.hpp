#pragma once
// Approximate deployment graph over MEC servers and its reduction chain:
// quota-Steiner instance -> auxiliary-node k-MST form with equivalently
// rescaled rewards -> optional star expansion. Node weight = hosted
// microservice storage, node reward = hosted popularity mass, edge weight =
// minus the pairwise shared-microservice storage.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mecsim/catalog.hpp"

namespace mecsim {

struct MecServer {
    std::string id;
    std::int64_t capacity = 0;          // storage units
    std::vector<std::string> services;  // candidate placement (service ids)
};

struct AdNode {
    std::string server_id;
    std::int64_t weight = 0;  // total size of placed microservices
    double reward = 0.0;      // popularity mass of placed services
    std::vector<std::string> microservices; // sorted union over placed services
    std::vector<std::string> services;      // sorted, deduplicated
};

struct AdEdge {
    int u = 0, v = 0;          // node indices, u < v
    std::int64_t overlap = 0;  // shared microservice storage; edge weight is -overlap
};

struct AdGraph {
    std::vector<AdNode> nodes;
    std::vector<AdEdge> edges;
};

// One node per server, one edge per pair with shared microservices.
// Validates capacities and service references against the catalog.
AdGraph build_ad_graph(const std::vector<MecServer>& servers, const ServiceCatalog& catalog);

// Total storage of the services as deployed independently (shared
// microservices counted once per service).
std::int64_t storage_before_deredundancy(const std::vector<Service>& services,
                                         const ServiceCatalog& catalog);

// Sum of node weights plus (negative) edge weights over a chosen subtree.
// The chosen edges must form a spanning tree of the node set.
std::int64_t approx_storage(const AdGraph& graph, const std::vector<int>& nodes,
                            const std::vector<std::pair<int, int>>& edges);

// --- k-MST instance -------------------------------------------------------

struct KmstVertex {
    std::int64_t reward = 0;
    // Mutual-inclusion partner: a tree containing this vertex must contain the
    // partner and vice versa. The reduction pairs every original node with its
    // auxiliary reward carrier; without the pairing a tree could collect a
    // star's reward without paying the node weight on the anchor edge.
    int pair_with = -1;
    // For materialized star forms: the hub this zero-weight spoke hangs off.
    int spoke_of = -1;
    std::string label;
};

struct KmstEdge {
    int u = 0, v = 0;
    std::int64_t weight = 0; // may be negative between original nodes
};

struct KmstGraph {
    std::vector<KmstVertex> vertices;
    std::vector<KmstEdge> edges;
    bool aggregated = true; // star reward counts live at hubs, no spokes materialized
    std::int64_t k_target = 0;
};

// Reduction with integerized rewards: scaled_reward_i = floor(scale * r_i),
// quota = ceil(scale * required_rate). Rounding is conservative, so any
// feasible integerized solution also meets the real-valued rate constraint.
// Vertex layout: [0, n) original nodes, [n, 2n) their auxiliaries.
// Throws InfeasibleError when the quota exceeds the total scaled reward.
KmstGraph to_kmst_instance(const AdGraph& graph, double required_rate, std::int64_t scale);

// Same construction from already-integerized rewards and quota.
KmstGraph to_kmst_scaled(const AdGraph& graph, const std::vector<std::int64_t>& scaled_rewards,
                         std::int64_t scaled_quota);

// Materializes star rewards: every vertex with reward rho > 1 keeps reward 1
// and gains rho-1 reward-1 spokes on zero-weight edges. Total reward is
// preserved exactly.
KmstGraph star_expand(const KmstGraph& graph);

std::string to_dot(const AdGraph& graph);
std::string to_dot(const KmstGraph& graph);

} // namespace mecsim
