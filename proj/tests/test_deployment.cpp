#include <doctest.h>

#include <algorithm>
#include <set>

#include "testutil.hpp"

using namespace mecsim;

namespace {

struct TwoServer {
    ServiceCatalog catalog;
    std::vector<MecServer> servers;
    TwoServer() {
        catalog.services = {{"sA", 0.6, {"m1", "m2", "m3"}}, {"sB", 0.4, {"m2", "m3", "m4"}}};
        validate_catalog(catalog);
        servers = {{"M1", 10, {"sA"}}, {"M2", 10, {"sB"}}};
    }
};

} // namespace

TEST_SUITE("deployment") {

TEST_CASE("running example deploys both servers at footprint 4") {
    TwoServer fx;
    const DeploymentPlan plan = solve_deployment(fx.catalog, fx.servers, 0.9, 10);
    CHECK(plan.feasible);
    CHECK(plan.chosen_servers == std::vector<std::string>{"M1", "M2"});
    CHECK(plan.footprint == 4);
    CHECK(plan.achieved_rate == doctest::Approx(1.0));
    REQUIRE(plan.theta.has_value());
    CHECK(*plan.theta == doctest::Approx(0.5));

    // brute force over the three nonempty subsets
    const AdGraph graph = build_ad_graph(fx.servers, fx.catalog);
    const auto oracle = testutil::oracle_quota(graph, {6, 4}, 9);
    REQUIRE(oracle.has_value());
    CHECK(oracle->objective == plan.footprint);

    // every microservice of a deployed service is retained somewhere
    std::set<std::string> retained;
    for (const auto& [sid, micros] : plan.edge_microservices) {
        retained.insert(micros.begin(), micros.end());
    }
    CHECK(retained == std::set<std::string>{"m1", "m2", "m3", "m4"});
}

TEST_CASE("zero rate yields the empty plan") {
    TwoServer fx;
    const DeploymentPlan plan = solve_deployment(fx.catalog, fx.servers, 0.0, 10);
    CHECK(plan.feasible);
    CHECK(plan.chosen_servers.empty());
    CHECK(plan.footprint == 0);
    CHECK(plan.achieved_rate == 0.0);
    CHECK_FALSE(plan.theta.has_value());
}

TEST_CASE("a single server covering everything wins at full rate") {
    ServiceCatalog catalog;
    catalog.services = {{"sA", 0.6, {"m1", "m2"}}, {"sB", 0.4, {"m3"}}};
    validate_catalog(catalog);
    std::vector<MecServer> servers = {{"M1", 5, {"sA", "sB"}}, {"M2", 5, {"sA"}}};
    const DeploymentPlan plan = solve_deployment(catalog, servers, 1.0, 10);
    CHECK(plan.chosen_servers == std::vector<std::string>{"M1"});
    CHECK(plan.footprint == 3);
}

TEST_CASE("unreachable rate raises an infeasibility error") {
    ServiceCatalog catalog;
    catalog.services = {{"sA", 0.5, {"m1"}}, {"sB", 0.5, {"m2"}}};
    validate_catalog(catalog);
    std::vector<MecServer> servers = {{"M1", 5, {"sA"}}};
    CHECK_THROWS_WITH_AS(solve_deployment(catalog, servers, 0.9, 1000),
                         doctest::Contains("unreachable"), InfeasibleError);
}

TEST_CASE("plans are optimal against brute force on small connected instances") {
    Rng rng(77);
    int compared = 0;
    while (compared < 60) {
        const auto catalog = testutil::random_catalog(rng, 5, 9, 1, 3);
        const auto servers = testutil::random_servers(rng, catalog, 5, 16);
        const AdGraph graph = build_ad_graph(servers, catalog);
        // connected instances only: the oracle enumerates connected subsets
        std::vector<int> seen(graph.nodes.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (const auto& e : graph.edges) {
                const int w = e.u == v ? e.v : (e.v == v ? e.u : -1);
                if (w >= 0 && !seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
        if (std::count(seen.begin(), seen.end(), 1) != static_cast<int>(graph.nodes.size())) {
            continue;
        }
        const double rate = 0.1 + 0.6 * uniform_unit(rng);
        const std::int64_t kappa = 10;
        std::vector<std::int64_t> rewards;
        for (const auto& node : graph.nodes) {
            rewards.push_back(testutil::scale_reward(node.reward, kappa));
        }
        const auto oracle = testutil::oracle_quota(graph, rewards, testutil::scale_quota(rate, kappa));
        DeploymentPlan plan;
        try {
            plan = solve_deployment(catalog, servers, rate, kappa);
        } catch (const InfeasibleError&) {
            CHECK_FALSE(oracle.has_value());
            ++compared;
            continue;
        }
        REQUIRE(oracle.has_value());
        CHECK(plan.footprint == oracle->objective);
        ++compared;
    }
}

TEST_CASE("conservative rounding keeps the real-valued rate satisfied") {
    Rng rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const auto catalog = testutil::random_catalog(rng, 5, 9, 1, 3);
        const auto servers = testutil::random_servers(rng, catalog, 4, 16);
        const double rate = 0.2 + 0.6 * uniform_unit(rng);
        try {
            const DeploymentPlan plan = solve_deployment(catalog, servers, rate, 1000);
            CHECK(plan.achieved_rate + kPopularityTolerance >= rate);
        } catch (const InfeasibleError&) {
        }
    }
}

TEST_CASE("footprint grows with the required rate") {
    TwoServer fx;
    std::int64_t previous = -1;
    for (double rate : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        const DeploymentPlan plan = solve_deployment(fx.catalog, fx.servers, rate, 100);
        CHECK(plan.footprint >= previous);
        previous = plan.footprint;
    }
}

TEST_CASE("deployed services always come from the cloud set") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const auto catalog = testutil::random_catalog(rng, 5, 9, 1, 3);
        const auto servers = testutil::random_servers(rng, catalog, 4, 16);
        DeploymentPlan plan;
        try {
            plan = solve_deployment(catalog, servers, 0.4, 100);
        } catch (const InfeasibleError&) {
            continue;
        }
        std::set<std::string> cloud(plan.cloud_set.begin(), plan.cloud_set.end());
        for (const auto& sid : plan.deployed_services) CHECK(cloud.count(sid) == 1);
        CHECK(cloud.size() == catalog.services.size());
    }
}

TEST_CASE("de-redundancy degree arithmetic") {
    CHECK(deredundancy_degree(10, 2) == doctest::Approx(0.8));
    CHECK(deredundancy_degree(10, 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(deredundancy_degree(0, 0), ValidationError);
    CHECK_THROWS_AS(deredundancy_degree(10, 11), ValidationError);
}

TEST_CASE("theta matches an independent recomputation from tree edges") {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const auto catalog = testutil::random_catalog(rng, 5, 8, 1, 3);
        const auto servers = testutil::random_servers(rng, catalog, 4, 16);
        DeploymentPlan plan;
        try {
            plan = solve_deployment(catalog, servers, 0.3 + 0.4 * uniform_unit(rng), 100);
        } catch (const InfeasibleError&) {
            continue;
        }
        if (!plan.theta.has_value()) continue;
        const AdGraph graph = build_ad_graph(servers, catalog);
        const int n = static_cast<int>(graph.nodes.size());
        std::int64_t residual = 0;
        for (auto [a, b] : plan.tree.edges) {
            if (a >= n || b >= n) continue; // anchor edges carry node weight, not overlap
            for (const auto& e : graph.edges) {
                if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) residual += e.overlap;
            }
        }
        CHECK(*plan.theta ==
              doctest::Approx(double(plan.footprint - residual) / double(plan.footprint)));
    }
}

TEST_CASE("disconnected deployment graphs merge per component") {
    // two disjoint pairs of servers; the quota needs both components
    ServiceCatalog catalog;
    catalog.services = {{"sA", 0.4, {"a1", "a2"}},
                        {"sB", 0.2, {"a2", "a3"}},
                        {"sC", 0.3, {"b1", "b2"}},
                        {"sD", 0.1, {"b2", "b3"}}};
    validate_catalog(catalog);
    std::vector<MecServer> servers = {
        {"M1", 8, {"sA"}}, {"M2", 8, {"sB"}}, {"M3", 8, {"sC"}}, {"M4", 8, {"sD"}}};
    const DeploymentPlan plan = solve_deployment(catalog, servers, 0.9, 10);
    CHECK(plan.feasible);
    // quota 9 of 10: the cheapest combination is {M1,M2} plus M3 alone,
    // leaving M4's single reward unit uncollected
    CHECK(plan.chosen_servers == std::vector<std::string>{"M1", "M2", "M3"});
    CHECK(plan.footprint == 5);
    CHECK(plan.achieved_rate == doctest::Approx(0.9));

    // a lighter quota picks the single best component subset
    const DeploymentPlan light = solve_deployment(catalog, servers, 0.4, 10);
    CHECK(light.footprint == 2);
    CHECK(light.chosen_servers == std::vector<std::string>{"M1"});
}

TEST_CASE("plan verification accepts solver output and flags tampering") {
    TwoServer fx;
    DeploymentPlan plan = solve_deployment(fx.catalog, fx.servers, 0.9, 10);
    CHECK(verify_plan(plan, fx.catalog, fx.servers).ok);

    DeploymentPlan tampered = plan;
    tampered.footprint += 1;
    CHECK_FALSE(verify_plan(tampered, fx.catalog, fx.servers).ok);

    DeploymentPlan ghost = plan;
    ghost.chosen_servers.push_back("M9");
    CHECK_FALSE(verify_plan(ghost, fx.catalog, fx.servers).ok);
}

TEST_CASE("plan json round-trips") {
    TwoServer fx;
    const DeploymentPlan plan = solve_deployment(fx.catalog, fx.servers, 0.9, 10);
    const DeploymentPlan back = plan_from_json(plan_to_json(plan));
    CHECK(back.chosen_servers == plan.chosen_servers);
    CHECK(back.footprint == plan.footprint);
    CHECK(back.achieved_rate == doctest::Approx(plan.achieved_rate));
    CHECK(back.tree.vertices == plan.tree.vertices);
    CHECK(back.tree.edges == plan.tree.edges);
    REQUIRE(back.theta.has_value());
    CHECK(*back.theta == doctest::Approx(*plan.theta));
    CHECK(verify_plan(back, fx.catalog, fx.servers).ok);
}

TEST_CASE("capacity pressure surfaces as ownership warnings only") {
    // both servers exactly full; the shared copy must land on one side
    ServiceCatalog catalog;
    catalog.services = {{"sA", 0.5, {"m1", "m2"}}, {"sB", 0.5, {"m2", "m3"}}};
    validate_catalog(catalog);
    std::vector<MecServer> servers = {{"M1", 2, {"sA"}}, {"M2", 2, {"sB"}}};
    const DeploymentPlan plan = solve_deployment(catalog, servers, 1.0, 10);
    CHECK(plan.feasible);
    CHECK(plan.footprint == 3);
    std::set<std::string> retained;
    for (const auto& [sid, micros] : plan.edge_microservices) {
        retained.insert(micros.begin(), micros.end());
    }
    CHECK(retained == std::set<std::string>{"m1", "m2", "m3"});
}

} // TEST_SUITE
