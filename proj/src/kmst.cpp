#include "mecsim/kmst.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace mecsim {

namespace {

using Mask = std::uint32_t;

// Folded view of the instance: zero-weight spokes collapse into their hub's
// reward, leaving a core graph the search runs on. Spokes are re-materialized
// into the solution afterwards.
struct Core {
    const KmstGraph* graph = nullptr;
    int n = 0;                               // number of core vertices
    std::vector<int> core_ids;               // core index -> graph vertex id
    std::vector<int> core_of;                // graph vertex id -> core index or -1
    std::vector<std::int64_t> own_reward;    // raw vertex reward
    std::vector<std::int64_t> folded_reward; // own + attached spokes
    std::vector<int> pair_with;              // core index space, -1 if none
    std::vector<std::vector<int>> spokes;    // sorted graph vertex ids per core hub
    struct Edge {
        int u, v;
        std::int64_t w;
    };
    std::vector<Edge> edges;        // core edges, sorted by (w,u,v)
    std::vector<Mask> adjacency;    // per core vertex
    std::int64_t total_reward = 0;  // folded sum
};

Core fold(const KmstGraph& graph) {
    const int vn = static_cast<int>(graph.vertices.size());
    Core core;
    core.graph = &graph;
    core.core_of.assign(vn, -1);
    for (int v = 0; v < vn; ++v) {
        const auto& vert = graph.vertices[v];
        if (vert.reward < 0) throw ValidationError("kmst: negative vertex reward");
        if (vert.spoke_of >= 0) {
            if (vert.spoke_of >= vn || graph.vertices[vert.spoke_of].spoke_of >= 0) {
                throw ValidationError("kmst: spoke attached to an invalid hub");
            }
            continue;
        }
        core.core_of[v] = core.n++;
        core.core_ids.push_back(v);
    }
    core.own_reward.resize(core.n);
    core.folded_reward.resize(core.n);
    core.pair_with.assign(core.n, -1);
    core.spokes.resize(core.n);
    for (int v = 0; v < vn; ++v) {
        const auto& vert = graph.vertices[v];
        if (vert.spoke_of >= 0) {
            core.spokes[core.core_of[vert.spoke_of]].push_back(v);
            continue;
        }
        const int c = core.core_of[v];
        core.own_reward[c] = vert.reward;
        if (vert.pair_with >= 0) {
            if (vert.pair_with >= vn || graph.vertices[vert.pair_with].pair_with != v) {
                throw ValidationError("kmst: pairing is not mutual");
            }
            if (graph.vertices[vert.pair_with].spoke_of >= 0) {
                throw ValidationError("kmst: vertex paired with a spoke");
            }
        }
    }
    for (auto& s : core.spokes) std::sort(s.begin(), s.end());
    for (int c = 0; c < core.n; ++c) {
        const int v = core.core_ids[c];
        const int p = graph.vertices[v].pair_with;
        if (p >= 0) core.pair_with[c] = core.core_of[p];
        core.folded_reward[c] = core.own_reward[c];
        for (int s : core.spokes[c]) core.folded_reward[c] += graph.vertices[s].reward;
        core.total_reward += core.folded_reward[c];
    }
    std::set<std::pair<int, int>> seen_pairs;
    for (const auto& e : graph.edges) {
        if (e.u < 0 || e.u >= vn || e.v < 0 || e.v >= vn || e.u == e.v) {
            throw ValidationError("kmst: edge with invalid endpoints");
        }
        const bool u_spoke = graph.vertices[e.u].spoke_of >= 0;
        const bool v_spoke = graph.vertices[e.v].spoke_of >= 0;
        if (u_spoke || v_spoke) {
            const int spoke = u_spoke ? e.u : e.v;
            const int hub = u_spoke ? e.v : e.u;
            if (u_spoke && v_spoke) throw ValidationError("kmst: edge between two spokes");
            if (graph.vertices[spoke].spoke_of != hub || e.weight != 0) {
                throw ValidationError("kmst: spoke edge must connect its hub at weight 0");
            }
            continue;
        }
        int u = core.core_of[e.u], v = core.core_of[e.v];
        if (u > v) std::swap(u, v);
        if (!seen_pairs.insert({u, v}).second) {
            throw ValidationError("kmst: parallel edge between core vertices");
        }
        core.edges.push_back({u, v, e.weight});
    }
    std::sort(core.edges.begin(), core.edges.end(), [](const Core::Edge& a, const Core::Edge& b) {
        return std::tie(a.w, a.u, a.v) < std::tie(b.w, b.u, b.v);
    });
    core.adjacency.assign(core.n, 0);
    for (const auto& e : core.edges) {
        core.adjacency[e.u] |= Mask(1) << e.v;
        core.adjacency[e.v] |= Mask(1) << e.u;
    }
    for (int c = 0; c < core.n; ++c) {
        const int p = core.pair_with[c];
        if (p >= 0 && ((core.adjacency[c] >> p) & 1) == 0) {
            throw ValidationError("kmst: paired vertices must share an edge");
        }
    }
    return core;
}

struct DsuSmall {
    int parent[32];
    explicit DsuSmall(int n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
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

// Minimum spanning tree of the subgraph induced by `mask` (Kruskal; fine with
// negative weights). Returns false when the induced subgraph cannot be spanned.
bool subset_mst(const Core& core, Mask mask, std::int64_t& weight,
                std::vector<std::pair<int, int>>& edges) {
    weight = 0;
    edges.clear();
    const int count = std::popcount(mask);
    if (count <= 1) return true;
    DsuSmall dsu(core.n);
    int joined = 0;
    for (const auto& e : core.edges) {
        if (((mask >> e.u) & 1) == 0 || ((mask >> e.v) & 1) == 0) continue;
        if (dsu.unite(e.u, e.v)) {
            weight += e.w;
            edges.emplace_back(e.u, e.v);
            if (++joined == count - 1) return true;
        }
    }
    return false;
}

std::int64_t mask_reward(const Core& core, Mask mask) {
    std::int64_t r = 0;
    for (Mask m = mask; m;) {
        const int v = std::countr_zero(m);
        m &= m - 1;
        r += core.folded_reward[v];
    }
    return r;
}

Mask reach_from(const Core& core, Mask start, Mask allowed) {
    Mask seen = start & allowed;
    Mask frontier = seen;
    while (frontier) {
        Mask next = 0;
        for (Mask m = frontier; m;) {
            const int v = std::countr_zero(m);
            m &= m - 1;
            next |= core.adjacency[v] & allowed & ~seen;
        }
        seen |= next;
        frontier = next;
    }
    return seen;
}

std::int64_t negative_sum_within(const Core& core, Mask region) {
    std::int64_t s = 0;
    for (const auto& e : core.edges) {
        if (e.w >= 0) break; // edges sorted by weight
        if (((region >> e.u) & 1) && ((region >> e.v) & 1)) s += e.w;
    }
    return s;
}

struct Incumbent {
    bool found = false;
    std::int64_t objective = 0;
    Mask mask = 0;
    std::vector<int> vertex_ids; // graph ids, sorted
    std::vector<std::pair<int, int>> core_edges;
};

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Ties break toward fewer vertices, then the lexicographically smallest
// sorted id sequence, so equal-cost free riders never join the tree.
bool improves(const Incumbent& best, std::int64_t weight, const std::vector<int>& ids) {
    if (!best.found) return true;
    if (weight != best.objective) return weight < best.objective;
    if (ids.size() != best.vertex_ids.size()) return ids.size() < best.vertex_ids.size();
    return lex_less(ids, best.vertex_ids);
}

void consider(const Core& core, Mask mask, Incumbent& best) {
    std::int64_t weight;
    std::vector<std::pair<int, int>> edges;
    if (!subset_mst(core, mask, weight, edges)) return;
    std::vector<int> ids;
    for (Mask m = mask; m;) {
        const int v = std::countr_zero(m);
        m &= m - 1;
        ids.push_back(core.core_ids[v]);
    }
    std::sort(ids.begin(), ids.end());
    if (improves(best, weight, ids)) {
        best.found = true;
        best.objective = weight;
        best.mask = mask;
        best.vertex_ids = std::move(ids);
        best.core_edges = std::move(edges);
    }
}

// Connected-subset enumeration rooted at the minimum vertex, with
// include/exclude branching on frontier vertices. Prunes on reward
// reachability and on the sum of negative edges still reachable; the
// objective prune is strict so equal-cost trees stay visible for the
// deterministic lexicographic tie-break.
void branch(const Core& core, std::int64_t k, Mask set, Mask excluded, Incumbent& best) {
    if (mask_reward(core, set) >= k) consider(core, set, best);

    Mask frontier = 0;
    for (Mask m = set; m;) {
        const int v = std::countr_zero(m);
        m &= m - 1;
        frontier |= core.adjacency[v];
    }
    frontier &= ~set & ~excluded;
    if (frontier == 0) return;

    const Mask allowed = ~excluded;
    const Mask reach = reach_from(core, set, allowed);
    if (mask_reward(core, reach) < k) return;
    if (best.found && negative_sum_within(core, reach) > best.objective) return;

    const int v = std::countr_zero(frontier);
    const int p = core.pair_with[v];

    Mask include = set | (Mask(1) << v);
    bool include_ok = true;
    if (p >= 0 && ((set >> p) & 1) == 0) {
        if ((excluded >> p) & 1) {
            include_ok = false;
        } else {
            include |= Mask(1) << p; // partner is adjacent by construction
        }
    }
    if (include_ok) branch(core, k, include, excluded, best);

    Mask excluded_next = excluded | (Mask(1) << v);
    if (p >= 0) excluded_next |= Mask(1) << p;
    branch(core, k, set, excluded_next, best);
}

// Attach spokes of the chosen hubs (smallest ids first) until the raw reward
// reaches k. Spokes cost nothing, so taking the minimum needed keeps the
// vertex sequence lexicographically small.
TreeSolution materialize(const Core& core, const Incumbent& best, std::int64_t k) {
    TreeSolution out;
    std::int64_t reward = 0;
    for (Mask m = best.mask; m;) {
        const int c = std::countr_zero(m);
        m &= m - 1;
        out.vertices.push_back(core.core_ids[c]);
        reward += core.own_reward[c];
    }
    for (auto [u, v] : best.core_edges) {
        int a = core.core_ids[u], b = core.core_ids[v];
        if (a > b) std::swap(a, b);
        out.edges.emplace_back(a, b);
    }
    std::vector<int> hubs;
    for (Mask m = best.mask; m;) {
        const int c = std::countr_zero(m);
        m &= m - 1;
        if (!core.spokes[c].empty()) hubs.push_back(c);
    }
    std::sort(hubs.begin(), hubs.end(),
              [&](int a, int b) { return core.core_ids[a] < core.core_ids[b]; });
    for (int hub : hubs) {
        for (int spoke : core.spokes[hub]) {
            if (reward >= k) break;
            out.vertices.push_back(spoke);
            int a = core.core_ids[hub], b = spoke;
            if (a > b) std::swap(a, b);
            out.edges.emplace_back(a, b);
            reward += core.graph->vertices[spoke].reward;
        }
        if (reward >= k) break;
    }
    std::sort(out.vertices.begin(), out.vertices.end());
    std::sort(out.edges.begin(), out.edges.end());
    out.objective = best.objective;
    out.reward = reward;
    return out;
}

} // namespace

TreeSolution kmst_exact(const KmstGraph& graph, std::int64_t k, int exact_limit) {
    if (k <= 0) return {};
    const Core core = fold(graph);
    if (core.n > exact_limit || core.n > 30) {
        throw SizeLimitError("kmst_exact: " + std::to_string(core.n) +
                             " core vertices exceed the exact limit of " +
                             std::to_string(std::min(exact_limit, 30)) +
                             "; use kmst_heuristic");
    }
    Incumbent best;
    for (int root = 0; root < core.n; ++root) {
        const int p = core.pair_with[root];
        if (p >= 0 && p < root) continue; // enumerated under the partner's root
        Mask set = Mask(1) << root;
        if (p >= 0) set |= Mask(1) << p;
        Mask excluded = root > 0 ? (Mask(1) << root) - 1 : 0;
        branch(core, k, set, excluded, best);
    }
    if (!best.found) {
        throw InfeasibleError("kmst_exact: no subtree reaches reward " + std::to_string(k));
    }
    return materialize(core, best, k);
}

namespace {

struct GrownTree {
    Mask mask = 0;
    std::vector<std::pair<int, int>> edges; // core index space
    std::int64_t weight = 0;
    std::int64_t reward = 0;
};

// Ratio rank for attaching a frontier unit: negative-weight gains always look
// attractive, zero-gain positive-weight edges always look last.
double attach_rank(std::int64_t cost, std::int64_t gain) {
    if (gain > 0) return static_cast<double>(cost) / static_cast<double>(gain);
    if (cost < 0) return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::infinity();
}

} // namespace

TreeSolution kmst_heuristic(const KmstGraph& graph, std::int64_t k) {
    if (k <= 0) return {};
    const Core core = fold(graph);

    std::map<std::pair<int, int>, std::int64_t> edge_weight;
    for (const auto& e : core.edges) edge_weight[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.w;
    auto weight_of = [&](int a, int b) {
        return edge_weight.at({std::min(a, b), std::max(a, b)});
    };

    Incumbent best;
    std::set<Mask> tried_seeds;
    for (int seed = 0; seed < core.n; ++seed) {
        GrownTree tree;
        tree.mask = Mask(1) << seed;
        tree.reward = core.folded_reward[seed];
        const int sp = core.pair_with[seed];
        if (sp >= 0) {
            tree.mask |= Mask(1) << sp;
            tree.reward += core.folded_reward[sp];
            tree.edges.emplace_back(std::min(seed, sp), std::max(seed, sp));
            tree.weight += weight_of(seed, sp);
        }
        if (!tried_seeds.insert(tree.mask).second) continue;

        bool stuck = false;
        while (tree.reward < k && !stuck) {
            int pick_from = -1, pick_to = -1;
            std::int64_t pick_cost = 0;
            double pick_rank = std::numeric_limits<double>::infinity();
            bool found = false;
            for (const auto& e : core.edges) {
                for (int dir = 0; dir < 2; ++dir) {
                    const int u = dir == 0 ? e.u : e.v;
                    const int x = dir == 0 ? e.v : e.u;
                    if (((tree.mask >> u) & 1) == 0 || ((tree.mask >> x) & 1) != 0) continue;
                    std::int64_t cost = e.w;
                    std::int64_t gain = core.folded_reward[x];
                    const int px = core.pair_with[x];
                    if (px >= 0 && ((tree.mask >> px) & 1) == 0) {
                        cost += weight_of(x, px);
                        gain += core.folded_reward[px];
                    }
                    const double rank = attach_rank(cost, gain);
                    const bool wins =
                        !found || rank < pick_rank ||
                        (rank == pick_rank &&
                         std::tie(cost, x, u) < std::tie(pick_cost, pick_to, pick_from));
                    if (wins) {
                        found = true;
                        pick_rank = rank;
                        pick_cost = cost;
                        pick_from = u;
                        pick_to = x;
                    }
                }
            }
            if (!found) {
                stuck = true;
                break;
            }
            tree.mask |= Mask(1) << pick_to;
            tree.edges.emplace_back(std::min(pick_from, pick_to), std::max(pick_from, pick_to));
            tree.weight += weight_of(pick_from, pick_to);
            tree.reward += core.folded_reward[pick_to];
            const int px = core.pair_with[pick_to];
            if (px >= 0 && ((tree.mask >> px) & 1) == 0) {
                tree.mask |= Mask(1) << px;
                tree.edges.emplace_back(std::min(pick_to, px), std::max(pick_to, px));
                tree.weight += weight_of(pick_to, px);
                tree.reward += core.folded_reward[px];
            }
        }
        if (tree.reward < k) continue;

        // Prune removable leaves while the quota still holds. Paired vertices
        // leave only together, with the pair edge.
        bool pruned = true;
        while (pruned) {
            pruned = false;
            std::vector<int> degree(core.n, 0);
            for (auto [a, b] : tree.edges) {
                ++degree[a];
                ++degree[b];
            }
            for (Mask m = tree.mask; m && !pruned;) {
                const int v = std::countr_zero(m);
                m &= m - 1;
                const int pv = core.pair_with[v];
                if (pv < 0) {
                    if (degree[v] != 1 || std::popcount(tree.mask) <= 1) continue;
                    auto it = std::find_if(tree.edges.begin(), tree.edges.end(), [&](auto& e) {
                        return e.first == v || e.second == v;
                    });
                    const std::int64_t w = weight_of(it->first, it->second);
                    if (w <= 0) continue;
                    if (tree.reward - core.folded_reward[v] < k) continue;
                    tree.mask &= ~(Mask(1) << v);
                    tree.reward -= core.folded_reward[v];
                    tree.weight -= w;
                    tree.edges.erase(it);
                    pruned = true;
                } else {
                    if (((tree.mask >> pv) & 1) == 0) continue;
                    // Drop the pair {v, pv} hanging off a single connector at v.
                    if (degree[pv] != 1 || degree[v] != 2) continue;
                    std::int64_t drop = 0;
                    std::vector<std::pair<int, int>> keep;
                    for (auto e : tree.edges) {
                        const bool touches_v = e.first == v || e.second == v;
                        const bool touches_p = e.first == pv || e.second == pv;
                        if (touches_v || touches_p) {
                            drop += weight_of(e.first, e.second);
                        } else {
                            keep.push_back(e);
                        }
                    }
                    if (drop <= 0) continue;
                    const std::int64_t gain = core.folded_reward[v] + core.folded_reward[pv];
                    if (tree.reward - gain < k || std::popcount(tree.mask) <= 2) continue;
                    tree.mask &= ~(Mask(1) << v);
                    tree.mask &= ~(Mask(1) << pv);
                    tree.reward -= gain;
                    tree.weight -= drop;
                    tree.edges = std::move(keep);
                    pruned = true;
                }
            }
        }

        Incumbent candidate;
        candidate.found = true;
        candidate.objective = tree.weight;
        candidate.mask = tree.mask;
        candidate.core_edges = tree.edges;
        for (Mask m = tree.mask; m;) {
            const int v = std::countr_zero(m);
            m &= m - 1;
            candidate.vertex_ids.push_back(core.core_ids[v]);
        }
        std::sort(candidate.vertex_ids.begin(), candidate.vertex_ids.end());
        if (improves(best, candidate.objective, candidate.vertex_ids)) {
            best = std::move(candidate);
        }
    }
    if (!best.found) {
        throw InfeasibleError("kmst_heuristic: no subtree reaches reward " + std::to_string(k));
    }
    return materialize(core, best, k);
}

TreeCheck verify_tree(const KmstGraph& graph, const TreeSolution& solution, std::int64_t k) {
    TreeCheck check;
    auto flag = [&](const std::string& what) {
        check.ok = false;
        check.violations.push_back(what);
    };
    const int vn = static_cast<int>(graph.vertices.size());

    std::set<int> verts;
    for (int v : solution.vertices) {
        if (v < 0 || v >= vn) {
            flag("vertex index out of range");
            return check;
        }
        if (!verts.insert(v).second) flag("duplicate vertex");
    }
    if (verts.empty()) {
        if (!solution.edges.empty()) flag("edges without vertices");
        if (solution.objective != 0) flag("objective mismatch");
        if (solution.reward != 0) flag("reward mismatch");
        if (k > 0) flag("reward below quota");
        return check;
    }
    if (solution.edges.size() + 1 != verts.size()) flag("disconnected");

    std::map<std::pair<int, int>, std::int64_t> weights;
    for (const auto& e : graph.edges) {
        weights[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.weight;
    }
    std::map<int, int> dense;
    int idx = 0;
    for (int v : verts) dense[v] = idx++;
    std::vector<int> parent(idx);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    std::int64_t objective = 0;
    std::set<std::pair<int, int>> seen_edges;
    for (auto [a, b] : solution.edges) {
        if (a > b) std::swap(a, b);
        if (!verts.count(a) || !verts.count(b)) {
            flag("edge endpoint outside vertex set");
            continue;
        }
        if (!seen_edges.insert({a, b}).second) flag("duplicate edge");
        auto it = weights.find({a, b});
        if (it == weights.end()) {
            flag("edge not in graph");
            continue;
        }
        objective += it->second;
        const int ra = find(dense[a]), rb = find(dense[b]);
        if (ra == rb) {
            flag("cycle");
        } else {
            parent[rb] = ra;
        }
    }
    const int root = find(0);
    for (int i = 1; i < idx; ++i) {
        if (find(i) != root) {
            flag("disconnected");
            break;
        }
    }

    std::int64_t reward = 0;
    for (int v : verts) {
        reward += graph.vertices[v].reward;
        const int p = graph.vertices[v].pair_with;
        if (p >= 0 && !verts.count(p)) {
            flag("pairing violated at vertex " + std::to_string(v));
        }
        const int hub = graph.vertices[v].spoke_of;
        if (hub >= 0 && !verts.count(hub)) flag("spoke without its hub");
    }
    if (objective != solution.objective) flag("objective mismatch");
    if (reward != solution.reward) flag("reward mismatch");
    if (reward < k) flag("reward below quota");
    return check;
}

} // namespace mecsim
