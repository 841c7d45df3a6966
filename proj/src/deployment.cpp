#include "mecsim/deployment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

namespace mecsim {

namespace {

constexpr std::int64_t kNoWeight = std::numeric_limits<std::int64_t>::max() / 4;

std::int64_t floor_scaled(double x) {
    return static_cast<std::int64_t>(std::floor(x + 1e-9));
}

std::int64_t ceil_scaled(double x) {
    return static_cast<std::int64_t>(std::ceil(x - 1e-9));
}

std::vector<std::vector<int>> components_of(const AdGraph& graph) {
    const int n = static_cast<int>(graph.nodes.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : graph.edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        const int c = static_cast<int>(out.size());
        out.emplace_back();
        std::vector<int> stack{s};
        comp[s] = c;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            out[c].push_back(v);
            for (int w : adj[v]) {
                if (comp[w] < 0) {
                    comp[w] = c;
                    stack.push_back(w);
                }
            }
        }
        std::sort(out[c].begin(), out[c].end());
    }
    return out;
}

AdGraph induced_subgraph(const AdGraph& graph, const std::vector<int>& nodes,
                         std::vector<int>& local_to_global) {
    AdGraph sub;
    std::map<int, int> global_to_local;
    local_to_global = nodes;
    for (int v : nodes) {
        global_to_local[v] = static_cast<int>(sub.nodes.size());
        sub.nodes.push_back(graph.nodes[v]);
    }
    for (const auto& e : graph.edges) {
        auto iu = global_to_local.find(e.u);
        auto iv = global_to_local.find(e.v);
        if (iu != global_to_local.end() && iv != global_to_local.end()) {
            sub.edges.push_back({iu->second, iv->second, e.overlap});
        }
    }
    return sub;
}

// Per-component trade-off: for every reachable integer reward level (capped at
// the global quota), the cheapest connected server subset and its tree.
struct ProfilePoint {
    std::int64_t weight = kNoWeight;
    std::vector<int> nodes;                 // component-local indices
    std::vector<std::pair<int, int>> edges; // component-local
};

std::vector<ProfilePoint> component_profile(const AdGraph& comp,
                                            const std::vector<std::int64_t>& rewards,
                                            std::int64_t cap, int exact_limit) {
    std::vector<ProfilePoint> exact_at(static_cast<std::size_t>(cap) + 1);
    exact_at[0].weight = 0; // choosing nothing from this component

    const int n = static_cast<int>(comp.nodes.size());
    if (2 * n <= exact_limit && n <= 20) {
        struct E {
            int u, v;
            std::int64_t w;
        };
        std::vector<E> edges;
        for (const auto& e : comp.edges) edges.push_back({e.u, e.v, -e.overlap});
        std::sort(edges.begin(), edges.end(),
                  [](const E& a, const E& b) { return std::tie(a.w, a.u, a.v) < std::tie(b.w, b.u, b.v); });
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            // connectivity + MST in one Kruskal pass
            std::vector<int> parent(n);
            std::iota(parent.begin(), parent.end(), 0);
            auto find = [&](int x) {
                while (parent[x] != x) x = parent[x] = parent[parent[x]];
                return x;
            };
            const int count = std::popcount(mask);
            int joined = 0;
            std::int64_t weight = 0;
            std::vector<std::pair<int, int>> tree;
            for (const auto& e : edges) {
                if (((mask >> e.u) & 1) == 0 || ((mask >> e.v) & 1) == 0) continue;
                const int ru = find(e.u), rv = find(e.v);
                if (ru == rv) continue;
                parent[rv] = ru;
                weight += e.w;
                tree.emplace_back(e.u, e.v);
                ++joined;
            }
            if (joined != count - 1) continue; // induced subgraph disconnected
            std::int64_t reward = 0;
            std::vector<int> nodes;
            for (int v = 0; v < n; ++v) {
                if ((mask >> v) & 1) {
                    reward += rewards[v];
                    weight += comp.nodes[v].weight;
                    nodes.push_back(v);
                }
            }
            const std::int64_t level = std::min(reward, cap);
            if (weight < exact_at[level].weight) {
                exact_at[level] = {weight, std::move(nodes), std::move(tree)};
            }
        }
    } else {
        // Component too large to enumerate: greedy per reward level.
        std::int64_t total = 0;
        for (std::int64_t r : rewards) total += r;
        const std::int64_t top = std::min(total, cap);
        const KmstGraph kg = to_kmst_scaled(comp, rewards, top);
        const std::int64_t vstar = 2 * static_cast<std::int64_t>(n);
        for (std::int64_t q = 1; q <= top; ++q) {
            TreeSolution sol = kmst_heuristic(kg, 2 * q * vstar);
            std::int64_t reward = 0;
            std::vector<int> nodes;
            std::vector<std::pair<int, int>> tree;
            std::int64_t weight = 0;
            for (int v : sol.vertices) {
                if (v < n) {
                    nodes.push_back(v);
                    reward += rewards[v];
                    weight += comp.nodes[v].weight;
                }
            }
            for (auto [a, b] : sol.edges) {
                if (a < n && b < n) {
                    tree.emplace_back(a, b);
                    std::int64_t overlap = 0;
                    for (const auto& e : comp.edges) {
                        if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) overlap = e.overlap;
                    }
                    weight -= overlap;
                }
            }
            const std::int64_t level = std::min(reward, cap);
            if (weight < exact_at[level].weight) {
                exact_at[level] = {weight, std::move(nodes), std::move(tree)};
            }
        }
    }

    // Achieving "at least q" is the suffix minimum over exact levels.
    std::vector<ProfilePoint> at_least = exact_at;
    for (std::int64_t q = cap - 1; q >= 0; --q) {
        if (at_least[q + 1].weight < at_least[q].weight) at_least[q] = at_least[q + 1];
    }
    return at_least;
}

} // namespace

double deredundancy_degree(std::int64_t footprint, std::int64_t residual_overlap) {
    if (footprint <= 0) {
        throw ValidationError("deredundancy_degree: undefined for zero footprint");
    }
    if (residual_overlap < 0 || residual_overlap > footprint) {
        throw ValidationError("deredundancy_degree: residual overlap out of [0, footprint]");
    }
    return static_cast<double>(footprint - residual_overlap) / static_cast<double>(footprint);
}

DeploymentPlan solve_deployment(const ServiceCatalog& catalog,
                                const std::vector<MecServer>& servers, double required_rate,
                                std::int64_t kappa, int exact_limit) {
    if (required_rate < 0.0 || required_rate > 1.0) {
        throw ValidationError("solve_deployment: required rate must be in [0,1]");
    }
    if (kappa < 1) throw ValidationError("solve_deployment: kappa must be >= 1");

    const AdGraph graph = build_ad_graph(servers, catalog);
    DeploymentPlan plan;
    plan.required_rate = required_rate;
    plan.kappa = kappa;
    for (const auto& s : catalog.services) plan.cloud_set.push_back(s.id);
    std::sort(plan.cloud_set.begin(), plan.cloud_set.end());

    if (required_rate <= 0.0) {
        plan.feasible = true;
        return plan;
    }

    const int n = static_cast<int>(graph.nodes.size());
    std::vector<std::int64_t> rewards(n);
    std::int64_t reward_total = 0;
    for (int i = 0; i < n; ++i) {
        rewards[i] = floor_scaled(static_cast<double>(kappa) * graph.nodes[i].reward);
        reward_total += rewards[i];
    }
    const std::int64_t quota = ceil_scaled(static_cast<double>(kappa) * required_rate);
    if (quota > reward_total) {
        throw InfeasibleError("required rate unreachable: scaled quota " + std::to_string(quota) +
                              " exceeds total scaled reward " + std::to_string(reward_total));
    }

    std::vector<int> chosen;                         // global node indices
    std::vector<std::pair<int, int>> tree_edges;     // global node indices

    const auto comps = components_of(graph);
    if (comps.size() <= 1) {
        const KmstGraph instance = to_kmst_instance(graph, required_rate, kappa);
        TreeSolution sol;
        if (static_cast<int>(instance.vertices.size()) <= exact_limit) {
            sol = kmst_exact(instance, instance.k_target, exact_limit);
        } else {
            sol = kmst_heuristic(instance, instance.k_target);
        }
        for (int v : sol.vertices) {
            if (v < n) chosen.push_back(v);
        }
        for (auto [a, b] : sol.edges) {
            if (a < n && b < n) tree_edges.emplace_back(a, b);
        }
        plan.tree = sol;
    } else {
        // Disconnected graph: best combination of per-component subtrees whose
        // integerized rewards add up to the quota.
        std::vector<std::vector<ProfilePoint>> profiles;
        std::vector<std::vector<int>> locals;
        for (const auto& comp_nodes : comps) {
            std::vector<int> local_to_global;
            const AdGraph sub = induced_subgraph(graph, comp_nodes, local_to_global);
            std::vector<std::int64_t> sub_rewards;
            for (int g : comp_nodes) sub_rewards.push_back(rewards[g]);
            profiles.push_back(component_profile(sub, sub_rewards, quota, exact_limit));
            locals.push_back(local_to_global);
        }
        const std::size_t q1 = static_cast<std::size_t>(quota) + 1;
        std::vector<std::int64_t> dp(q1, kNoWeight);
        std::vector<std::vector<std::int64_t>> choice(profiles.size(),
                                                      std::vector<std::int64_t>(q1, -1));
        dp[0] = 0;
        std::vector<std::int64_t> prev;
        for (std::size_t c = 0; c < profiles.size(); ++c) {
            prev = dp;
            std::fill(dp.begin(), dp.end(), kNoWeight);
            for (std::size_t need = 0; need < q1; ++need) {
                for (std::size_t take = 0; take <= need; ++take) {
                    const auto& pt = profiles[c][take];
                    if (pt.weight >= kNoWeight || prev[need - take] >= kNoWeight) continue;
                    const std::int64_t w = prev[need - take] + pt.weight;
                    if (w < dp[need]) {
                        dp[need] = w;
                        choice[c][need] = static_cast<std::int64_t>(take);
                    }
                }
            }
        }
        if (dp[quota] >= kNoWeight) {
            throw InfeasibleError("required rate unreachable across components");
        }
        std::size_t need = static_cast<std::size_t>(quota);
        for (std::size_t c = profiles.size(); c-- > 0;) {
            const std::int64_t take = choice[c][need];
            const auto& pt = profiles[c][static_cast<std::size_t>(take)];
            for (int lv : pt.nodes) chosen.push_back(locals[c][lv]);
            for (auto [a, b] : pt.edges) tree_edges.emplace_back(locals[c][a], locals[c][b]);
            need -= static_cast<std::size_t>(take);
        }
        std::sort(chosen.begin(), chosen.end());
        // Assemble the forest in instance vertex ids (aux = n + i).
        TreeSolution forest;
        for (int v : chosen) {
            forest.vertices.push_back(v);
            forest.vertices.push_back(n + v);
            forest.edges.emplace_back(v, n + v);
            forest.objective += graph.nodes[v].weight;
            const std::int64_t vstar = 2 * static_cast<std::int64_t>(n);
            forest.reward += 2 * vstar * rewards[v] + 1 + 1;
        }
        std::map<std::pair<int, int>, std::int64_t> overlap;
        for (const auto& e : graph.edges) overlap[{e.u, e.v}] = e.overlap;
        for (auto [a, b] : tree_edges) {
            if (a > b) std::swap(a, b);
            forest.edges.emplace_back(a, b);
            forest.objective -= overlap.at({a, b});
        }
        std::sort(forest.vertices.begin(), forest.vertices.end());
        std::sort(forest.edges.begin(), forest.edges.end());
        plan.tree = forest;
    }

    // Map back to servers and metrics.
    std::map<std::pair<int, int>, std::int64_t> overlap;
    for (const auto& e : graph.edges) overlap[{e.u, e.v}] = e.overlap;

    std::int64_t residual_overlap = 0;
    std::int64_t arithmetic = 0;
    for (int v : chosen) arithmetic += graph.nodes[v].weight;
    for (auto& [a, b] : tree_edges) {
        if (a > b) std::swap(a, b);
        residual_overlap += overlap.at({a, b});
        arithmetic -= overlap.at({a, b});
    }
    if (comps.size() <= 1) {
        // Single tree: the strict tree-shape route must agree.
        plan.footprint = approx_storage(graph, chosen, tree_edges);
    } else {
        plan.footprint = arithmetic;
    }
    if (plan.footprint != plan.tree.objective || plan.footprint != arithmetic) {
        // Tree objective and node/edge arithmetic are two routes to the same
        // number; a mismatch means a solver bug.
        throw Error("solve_deployment: footprint disagrees with tree objective");
    }

    std::set<std::string> deployed;
    for (int v : chosen) {
        plan.chosen_servers.push_back(graph.nodes[v].server_id);
        plan.achieved_rate += graph.nodes[v].reward;
        for (const auto& s : graph.nodes[v].services) deployed.insert(s);
    }
    plan.deployed_services.assign(deployed.begin(), deployed.end());

    // Ownership assignment: each tree edge's shared microservices are stored
    // once, at the endpoint with more residual capacity (ties to the smaller
    // server id). Affects per-server capacity checks only, not the footprint.
    std::map<int, std::set<std::string>> retained;
    std::map<int, std::int64_t> capacity;
    for (std::size_t i = 0; i < servers.size(); ++i) capacity[static_cast<int>(i)] = servers[i].capacity;
    for (int v : chosen) {
        retained[v] = std::set<std::string>(graph.nodes[v].microservices.begin(),
                                            graph.nodes[v].microservices.end());
    }
    auto used = [&](int v) {
        std::int64_t total = 0;
        for (const auto& m : retained[v]) total += catalog.size_of(m);
        return total;
    };
    std::vector<std::pair<int, int>> sorted_edges = tree_edges;
    for (auto& [a, b] : sorted_edges) {
        if (a > b) std::swap(a, b);
    }
    std::sort(sorted_edges.begin(), sorted_edges.end());
    for (auto [a, b] : sorted_edges) {
        std::vector<std::string> shared;
        std::set_intersection(graph.nodes[a].microservices.begin(),
                              graph.nodes[a].microservices.end(),
                              graph.nodes[b].microservices.begin(),
                              graph.nodes[b].microservices.end(), std::back_inserter(shared));
        for (const auto& m : shared) {
            const bool a_has = retained[a].count(m) > 0;
            const bool b_has = retained[b].count(m) > 0;
            if (!a_has || !b_has) continue; // already single-homed via another edge
            const std::int64_t res_a = capacity[a] - used(a);
            const std::int64_t res_b = capacity[b] - used(b);
            int owner = a;
            if (res_b > res_a) owner = b;
            else if (res_b == res_a) owner = graph.nodes[a].server_id <= graph.nodes[b].server_id ? a : b;
            retained[owner == a ? b : a].erase(m);
        }
    }
    for (int v : chosen) {
        plan.edge_microservices[graph.nodes[v].server_id] =
            std::vector<std::string>(retained[v].begin(), retained[v].end());
        const std::int64_t load = used(v);
        if (load > capacity[v]) {
            plan.warnings.push_back("server '" + graph.nodes[v].server_id +
                                    "' over capacity after ownership assignment (" +
                                    std::to_string(load) + " > " + std::to_string(capacity[v]) +
                                    ")");
        }
    }

    std::int64_t capacity_total = 0;
    for (const auto& s : servers) capacity_total += s.capacity;
    if (plan.footprint > capacity_total) {
        throw InfeasibleError("capacity infeasible: footprint " + std::to_string(plan.footprint) +
                              " exceeds total capacity " + std::to_string(capacity_total));
    }
    if (plan.footprint > 0) {
        if (residual_overlap <= plan.footprint) {
            plan.theta = deredundancy_degree(plan.footprint, residual_overlap);
        } else {
            // pairwise overlap triple-counts shared content on heavy-overlap
            // trees; the degree is undefined there
            plan.warnings.push_back("residual overlap exceeds the footprint; theta undefined");
        }
    }
    if (plan.achieved_rate + kPopularityTolerance < required_rate) {
        plan.warnings.push_back("achieved rate below requirement after rounding");
    }
    plan.feasible = true;
    return plan;
}

PlanCheck verify_plan(const DeploymentPlan& plan, const ServiceCatalog& catalog,
                      const std::vector<MecServer>& servers) {
    PlanCheck check;
    auto flag = [&](const std::string& what) {
        check.ok = false;
        check.violations.push_back(what);
    };

    AdGraph graph;
    try {
        graph = build_ad_graph(servers, catalog);
    } catch (const Error& e) {
        flag(std::string("cannot rebuild graph: ") + e.what());
        return check;
    }
    const int n = static_cast<int>(graph.nodes.size());
    std::map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[graph.nodes[i].server_id] = i;

    for (const auto& sid : plan.chosen_servers) {
        if (!index.count(sid)) flag("chosen server '" + sid + "' not in scenario");
    }
    std::set<std::string> cloud(plan.cloud_set.begin(), plan.cloud_set.end());
    for (const auto& [sid, micros] : plan.edge_microservices) {
        if (!index.count(sid)) {
            flag("retained set for unknown server '" + sid + "'");
            continue;
        }
        std::int64_t load = 0;
        for (const auto& m : micros) load += catalog.size_of(m);
        // informational only: per-server overflow is a warning at solve time
        (void)load;
    }
    for (const auto& sid : plan.deployed_services) {
        if (!cloud.count(sid)) flag("deployed service '" + sid + "' missing from cloud set");
    }

    if (!plan.tree.vertices.empty()) {
        std::vector<std::int64_t> rewards(n);
        for (int i = 0; i < n; ++i) {
            rewards[i] =
                static_cast<std::int64_t>(std::floor(static_cast<double>(plan.kappa) *
                                                     graph.nodes[i].reward + 1e-9));
        }
        KmstGraph instance;
        try {
            instance = to_kmst_scaled(
                graph, rewards,
                static_cast<std::int64_t>(std::ceil(static_cast<double>(plan.kappa) *
                                                    plan.required_rate - 1e-9)));
        } catch (const Error& e) {
            flag(std::string("cannot rebuild instance: ") + e.what());
            return check;
        }
        // Verify each connected piece of the (possibly forest) solution.
        std::map<int, std::vector<int>> adj;
        for (auto [a, b] : plan.tree.edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        std::set<int> remaining(plan.tree.vertices.begin(), plan.tree.vertices.end());
        std::int64_t objective_total = 0;
        while (!remaining.empty()) {
            std::vector<int> piece{*remaining.begin()};
            remaining.erase(remaining.begin());
            for (std::size_t i = 0; i < piece.size(); ++i) {
                for (int w : adj[piece[i]]) {
                    if (remaining.erase(w)) piece.push_back(w);
                }
            }
            std::sort(piece.begin(), piece.end());
            std::set<int> in_piece(piece.begin(), piece.end());
            TreeSolution part;
            part.vertices = piece;
            for (auto [a, b] : plan.tree.edges) {
                if (in_piece.count(a) && in_piece.count(b)) part.edges.emplace_back(a, b);
            }
            std::map<std::pair<int, int>, std::int64_t> weights;
            for (const auto& e : instance.edges) {
                weights[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.weight;
            }
            for (auto [a, b] : part.edges) {
                auto it = weights.find({std::min(a, b), std::max(a, b)});
                if (it != weights.end()) part.objective += it->second;
            }
            for (int v : part.vertices) {
                if (v >= 0 && v < static_cast<int>(instance.vertices.size())) {
                    part.reward += instance.vertices[v].reward;
                }
            }
            objective_total += part.objective;
            const TreeCheck sub = verify_tree(instance, part, 0);
            if (!sub.ok) {
                for (const auto& v : sub.violations) flag("tree: " + v);
            }
        }
        if (objective_total != plan.footprint) {
            flag("footprint does not match tree objective");
        }
        // Quota: integerized rewards over chosen servers must reach the quota.
        std::int64_t got = 0;
        for (const auto& sid : plan.chosen_servers) {
            auto it = index.find(sid);
            if (it != index.end()) got += rewards[it->second];
        }
        const std::int64_t quota = static_cast<std::int64_t>(
            std::ceil(static_cast<double>(plan.kappa) * plan.required_rate - 1e-9));
        if (plan.feasible && got < quota) flag("scaled reward below quota");
    }

    // Every microservice of a deployed service must be retained somewhere.
    std::set<std::string> retained_union;
    for (const auto& [sid, micros] : plan.edge_microservices) {
        retained_union.insert(micros.begin(), micros.end());
    }
    for (const auto& sid : plan.deployed_services) {
        const Service* svc = catalog.find(sid);
        if (svc == nullptr) {
            flag("deployed service '" + sid + "' unknown to catalog");
            continue;
        }
        for (const auto& m : svc->microservices) {
            if (!retained_union.count(m)) {
                flag("microservice '" + m + "' of deployed service '" + sid +
                     "' retained nowhere");
            }
        }
    }
    return check;
}

std::string plan_to_json(const DeploymentPlan& plan) {
    nlohmann::ordered_json j;
    j["servers"] = plan.chosen_servers;
    nlohmann::ordered_json micro;
    for (const auto& [sid, ms] : plan.edge_microservices) micro[sid] = ms;
    j["microservices"] = micro;
    j["footprint"] = plan.footprint;
    j["achieved_rate"] = plan.achieved_rate;
    if (plan.theta.has_value()) {
        j["theta"] = *plan.theta;
    } else {
        j["theta"] = nullptr;
    }
    j["feasible"] = plan.feasible;
    j["required_rate"] = plan.required_rate;
    j["kappa"] = plan.kappa;
    j["cloud_set"] = plan.cloud_set;
    j["deployed_services"] = plan.deployed_services;
    j["warnings"] = plan.warnings;
    nlohmann::ordered_json tree;
    tree["vertices"] = plan.tree.vertices;
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (auto [a, b] : plan.tree.edges) edges.push_back({a, b});
    tree["edges"] = edges;
    tree["objective"] = plan.tree.objective;
    tree["reward"] = plan.tree.reward;
    j["tree"] = tree;
    return j.dump(2) + "\n";
}

DeploymentPlan plan_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("plan parse error: ") + e.what());
    }
    DeploymentPlan plan;
    try {
        plan.chosen_servers = j.at("servers").get<std::vector<std::string>>();
        for (const auto& [key, value] : j.at("microservices").items()) {
            plan.edge_microservices[key] = value.get<std::vector<std::string>>();
        }
        plan.footprint = j.at("footprint").get<std::int64_t>();
        plan.achieved_rate = j.at("achieved_rate").get<double>();
        if (j.contains("theta") && !j["theta"].is_null()) plan.theta = j["theta"].get<double>();
        plan.feasible = j.value("feasible", true);
        plan.required_rate = j.value("required_rate", 0.0);
        plan.kappa = j.value("kappa", kDefaultKappa);
        if (j.contains("cloud_set")) plan.cloud_set = j["cloud_set"].get<std::vector<std::string>>();
        if (j.contains("deployed_services")) {
            plan.deployed_services = j["deployed_services"].get<std::vector<std::string>>();
        }
        if (j.contains("warnings")) plan.warnings = j["warnings"].get<std::vector<std::string>>();
        if (j.contains("tree")) {
            const auto& t = j["tree"];
            plan.tree.vertices = t.value("vertices", std::vector<int>{});
            if (t.contains("edges")) {
                for (const auto& e : t["edges"]) {
                    plan.tree.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
                }
            }
            plan.tree.objective = t.value("objective", std::int64_t{0});
            plan.tree.reward = t.value("reward", std::int64_t{0});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("plan field error: ") + e.what());
    }
    return plan;
}

} // namespace mecsim
