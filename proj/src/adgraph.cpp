#include "mecsim/adgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace mecsim {

namespace {

// Rounding guards: popularity sums are doubles, so floor(10*0.6) must not
// come out as 5 because 10*0.6 == 5.999... in binary.
std::int64_t floor_scaled(double x) {
    return static_cast<std::int64_t>(std::floor(x + 1e-9));
}

std::int64_t ceil_scaled(double x) {
    return static_cast<std::int64_t>(std::ceil(x - 1e-9));
}

struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

} // namespace

AdGraph build_ad_graph(const std::vector<MecServer>& servers, const ServiceCatalog& catalog) {
    AdGraph graph;
    graph.nodes.reserve(servers.size());
    std::set<std::string> server_ids;
    for (const auto& server : servers) {
        if (!server_ids.insert(server.id).second) {
            throw ValidationError("build_ad_graph: duplicate server id '" + server.id + "'");
        }
        if (server.capacity < 0) {
            throw ValidationError("build_ad_graph: server '" + server.id + "' has negative capacity");
        }
        AdNode node;
        node.server_id = server.id;
        std::set<std::string> micros;
        std::set<std::string> placed;
        for (const auto& sid : server.services) {
            if (!placed.insert(sid).second) continue;
            const Service* svc = catalog.find(sid);
            if (svc == nullptr) {
                throw ValidationError("build_ad_graph: server '" + server.id +
                                      "' references unknown service '" + sid + "'");
            }
            node.reward += svc->popularity;
            for (const auto& m : svc->microservices) micros.insert(m);
        }
        node.services.assign(placed.begin(), placed.end());
        node.microservices.assign(micros.begin(), micros.end());
        for (const auto& m : node.microservices) node.weight += catalog.size_of(m);
        if (node.weight > server.capacity) {
            throw ValidationError("build_ad_graph: server '" + server.id + "' placement needs " +
                                  std::to_string(node.weight) + " units but capacity is " +
                                  std::to_string(server.capacity));
        }
        graph.nodes.push_back(std::move(node));
    }
    for (int i = 0; i < static_cast<int>(graph.nodes.size()); ++i) {
        for (int j = i + 1; j < static_cast<int>(graph.nodes.size()); ++j) {
            std::int64_t shared = 0;
            const auto& a = graph.nodes[i].microservices;
            const auto& b = graph.nodes[j].microservices;
            std::vector<std::string> common;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(common));
            for (const auto& m : common) shared += catalog.size_of(m);
            if (shared > 0) graph.edges.push_back({i, j, shared});
        }
    }
    return graph;
}

std::int64_t storage_before_deredundancy(const std::vector<Service>& services,
                                         const ServiceCatalog& catalog) {
    std::int64_t total = 0;
    for (const auto& s : services) {
        for (const auto& m : s.microservices) total += catalog.size_of(m);
    }
    return total;
}

std::int64_t approx_storage(const AdGraph& graph, const std::vector<int>& nodes,
                            const std::vector<std::pair<int, int>>& edges) {
    const int n = static_cast<int>(graph.nodes.size());
    std::set<int> node_set;
    for (int v : nodes) {
        if (v < 0 || v >= n) throw ValidationError("approx_storage: node index out of range");
        if (!node_set.insert(v).second) throw ValidationError("approx_storage: duplicate node index");
    }
    if (node_set.empty()) {
        if (!edges.empty()) throw ValidationError("approx_storage: edges without nodes");
        return 0;
    }
    if (edges.size() + 1 != node_set.size()) {
        throw ValidationError("approx_storage: selection is not a tree (edge count mismatch)");
    }
    std::map<std::pair<int, int>, std::int64_t> overlap;
    for (const auto& e : graph.edges) overlap[{e.u, e.v}] = e.overlap;

    std::map<int, int> dense;
    int next = 0;
    for (int v : node_set) dense[v] = next++;
    Dsu dsu(next);
    std::int64_t total = 0;
    for (int v : node_set) total += graph.nodes[v].weight;
    for (auto [a, b] : edges) {
        if (a > b) std::swap(a, b);
        if (!node_set.count(a) || !node_set.count(b)) {
            throw ValidationError("approx_storage: edge endpoint outside the node set");
        }
        auto it = overlap.find({a, b});
        if (it == overlap.end()) {
            throw ValidationError("approx_storage: edge (" + std::to_string(a) + "," +
                                  std::to_string(b) + ") not in graph");
        }
        if (!dsu.unite(dense[a], dense[b])) {
            throw ValidationError("approx_storage: selection contains a cycle");
        }
        total -= it->second;
    }
    const int root = dsu.find(0);
    for (int i = 1; i < next; ++i) {
        if (dsu.find(i) != root) throw ValidationError("approx_storage: selection is disconnected");
    }
    return total;
}

KmstGraph to_kmst_scaled(const AdGraph& graph, const std::vector<std::int64_t>& scaled_rewards,
                         std::int64_t scaled_quota) {
    const int n = static_cast<int>(graph.nodes.size());
    if (static_cast<int>(scaled_rewards.size()) != n) {
        throw ValidationError("to_kmst_scaled: reward vector size mismatch");
    }
    std::int64_t total = 0;
    for (std::int64_t r : scaled_rewards) {
        if (r < 0) throw ValidationError("to_kmst_scaled: negative scaled reward");
        total += r;
    }
    if (scaled_quota > total) {
        throw InfeasibleError("required rate unreachable: scaled quota " +
                              std::to_string(scaled_quota) + " exceeds total scaled reward " +
                              std::to_string(total));
    }

    KmstGraph out;
    const std::int64_t vertex_count = 2 * static_cast<std::int64_t>(n);
    out.vertices.resize(static_cast<std::size_t>(vertex_count));
    for (int i = 0; i < n; ++i) {
        // Original node: reward zeroed, then the equivalent update 2|V*|P+1.
        out.vertices[i].reward = 1;
        out.vertices[i].pair_with = n + i;
        out.vertices[i].label = graph.nodes[i].server_id;
        // Auxiliary reward carrier, connected by an edge weighing the node weight.
        out.vertices[n + i].reward = 2 * vertex_count * scaled_rewards[i] + 1;
        out.vertices[n + i].pair_with = i;
        out.vertices[n + i].label = "aux:" + graph.nodes[i].server_id;
        out.edges.push_back({i, n + i, graph.nodes[i].weight});
    }
    for (const auto& e : graph.edges) {
        out.edges.push_back({e.u, e.v, -e.overlap});
    }
    out.aggregated = true;
    out.k_target = 2 * scaled_quota * vertex_count;
    return out;
}

KmstGraph to_kmst_instance(const AdGraph& graph, double required_rate, std::int64_t scale) {
    if (scale < 1) throw ValidationError("to_kmst_instance: scale must be >= 1");
    if (required_rate < 0.0 || required_rate > 1.0) {
        throw ValidationError("to_kmst_instance: required rate must be in [0,1]");
    }
    std::vector<std::int64_t> scaled;
    scaled.reserve(graph.nodes.size());
    for (const auto& node : graph.nodes) {
        scaled.push_back(floor_scaled(static_cast<double>(scale) * node.reward));
    }
    return to_kmst_scaled(graph, scaled, ceil_scaled(static_cast<double>(scale) * required_rate));
}

KmstGraph star_expand(const KmstGraph& graph) {
    if (!graph.aggregated) {
        throw ValidationError("star_expand: graph is already materialized");
    }
    std::int64_t spoke_total = 0;
    for (const auto& v : graph.vertices) {
        if (v.reward > 1) spoke_total += v.reward - 1;
    }
    if (spoke_total > 2'000'000) {
        throw ValidationError("star_expand: materialization would create " +
                              std::to_string(spoke_total) + " spokes; keep the aggregated form");
    }
    KmstGraph out = graph;
    out.aggregated = false;
    const int base = static_cast<int>(graph.vertices.size());
    int next = base;
    for (int hub = 0; hub < base; ++hub) {
        const std::int64_t rho = graph.vertices[hub].reward;
        if (rho <= 1) continue;
        out.vertices[hub].reward = 1;
        for (std::int64_t s = 1; s < rho; ++s) {
            KmstVertex spoke;
            spoke.reward = 1;
            spoke.spoke_of = hub;
            spoke.label = graph.vertices[hub].label + ":spoke" + std::to_string(s);
            out.vertices.push_back(std::move(spoke));
            out.edges.push_back({hub, next, 0});
            ++next;
        }
    }
    return out;
}

std::string to_dot(const AdGraph& graph) {
    std::ostringstream os;
    os << "graph adgraph {\n";
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& nd = graph.nodes[i];
        os << "  n" << i << " [label=\"" << nd.server_id << " V=" << nd.weight << ",r=" << nd.reward
           << "\"];\n";
    }
    for (const auto& e : graph.edges) {
        os << "  n" << e.u << " -- n" << e.v << " [label=\"" << -e.overlap << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

std::string to_dot(const KmstGraph& graph) {
    std::ostringstream os;
    os << "graph kmst {\n";
    os << "  // k_target=" << graph.k_target << (graph.aggregated ? " aggregated" : " materialized")
       << "\n";
    for (std::size_t i = 0; i < graph.vertices.size(); ++i) {
        const auto& v = graph.vertices[i];
        os << "  n" << i << " [label=\"" << (v.label.empty() ? "v" + std::to_string(i) : v.label)
           << " P=" << v.reward << "\"];\n";
    }
    for (const auto& e : graph.edges) {
        os << "  n" << e.u << " -- n" << e.v << " [label=\"" << e.weight << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace mecsim
