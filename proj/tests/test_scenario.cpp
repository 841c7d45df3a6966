#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mecsim/scenario.hpp"
#include "testutil.hpp"

using namespace mecsim;

namespace {

std::string fixtures_dir() {
    const char* dir = std::getenv("MECSIM_FIXTURES");
    return dir ? dir : "fixtures";
}

} // namespace

TEST_SUITE("scenario") {

TEST_CASE("the bundled fixtures load and validate") {
    const Scenario two = load_scenario(fixtures_dir() + "/two_server.json");
    CHECK(two.catalog.services.size() == 2);
    CHECK(two.servers.size() == 2);
    CHECK(two.sim.kappa == 10);

    const Scenario three = load_scenario(fixtures_dir() + "/three_ue.json");
    CHECK(three.ue_ids == std::vector<std::string>{"UE1", "UE2", "UE3"});
    CHECK(three.tasks.size() == 5);
    CHECK_FALSE(three.latency.synthetic);
    CHECK(three.latency.cells.size() == 15);

    const Scenario sim = load_scenario(fixtures_dir() + "/sim_small.json");
    CHECK(sim.ue_ids.size() == 25);
    CHECK(sim.sim.window.floating);
    CHECK(sim.latency.synthetic);
}

TEST_CASE("parse errors carry context") {
    CHECK_THROWS_WITH_AS(parse_scenario("{not json"), doctest::Contains("parse error"),
                         ValidationError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ValidationError);
}

TEST_CASE("dangling references name the offending id") {
    const std::string base = R"({
      "catalog": {"services": [{"id": "sA", "popularity": 1.0, "microservices": ["m1"]}]},
      "servers": [{"id": "M1", "capacity": 4, "services": ["sGhost"]}],
      "ues": {"count": 1}
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(base), doctest::Contains("sGhost"), ValidationError);

    const std::string bad_cache = R"({
      "catalog": {"services": [{"id": "sA", "popularity": 1.0, "microservices": ["m1"]}]},
      "ues": {"count": 1, "d2d_caches": {"u9": ["m1"]}}
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(bad_cache), doctest::Contains("u9"), ValidationError);

    const std::string bad_task = R"({
      "catalog": {"services": [{"id": "sA", "popularity": 1.0, "microservices": ["m1"]}]},
      "ues": {"count": 1},
      "tasks": [{"ue": "u1", "subtasks": [{"microservice": "m9", "service": "sA"}]}]
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(bad_task), doctest::Contains("m9"), ValidationError);
}

TEST_CASE("range checks on simulation settings") {
    const std::string bad_rate = R"({
      "catalog": {"services": [{"id": "sA", "popularity": 1.0, "microservices": ["m1"]}]},
      "sim": {"task_arrival": 1.2}
    })";
    CHECK_THROWS_AS(parse_scenario(bad_rate), ValidationError);

    const std::string bad_window = R"({
      "catalog": {"services": [{"id": "sA", "popularity": 1.0, "microservices": ["m1"]}]},
      "sim": {"window": {"mode": "fixed", "size": 0}}
    })";
    CHECK_THROWS_AS(parse_scenario(bad_window), ValidationError);

    const std::string bad_mode = R"({
      "catalog": {"services": [{"id": "sA", "popularity": 1.0, "microservices": ["m1"]}]},
      "sim": {"window": {"mode": "sliding"}}
    })";
    CHECK_THROWS_AS(parse_scenario(bad_mode), ValidationError);
}

TEST_CASE("catalog json round-trips") {
    Rng rng(88);
    const auto catalog = testutil::random_catalog(rng, 6, 10, 1, 3);
    const ServiceCatalog back = catalog_from_json(catalog_to_json(catalog));
    REQUIRE(back.services.size() == catalog.services.size());
    for (std::size_t i = 0; i < back.services.size(); ++i) {
        CHECK(back.services[i].id == catalog.services[i].id);
        CHECK(back.services[i].popularity == doctest::Approx(catalog.services[i].popularity));
        CHECK(back.services[i].microservices == catalog.services[i].microservices);
    }
}

TEST_CASE("sim config carries the scenario sections") {
    const Scenario scenario = load_scenario(fixtures_dir() + "/sim_small.json");
    const SimConfig config = sim_config_from(scenario);
    CHECK(config.servers.size() == 4);
    CHECK(config.ue_ids.size() == 25);
    CHECK(config.settings.required_rate == doctest::Approx(0.9));
    CHECK(config.latency.mec_speed == doctest::Approx(32.0));
}

TEST_CASE("explicit latency providers reject unknown cells") {
    const Scenario three = load_scenario(fixtures_dir() + "/three_ue.json");
    const auto provider = make_latency_provider(three);
    Subtask known{"UE1", 1, "ms_a", "sA", 1.0};
    CHECK(provider->latency(known, {TargetKind::Mec, "M1"}) == doctest::Approx(5.0));
    Subtask unknown{"UE1", 9, "ms_a", "sA", 1.0};
    CHECK_THROWS_AS(provider->latency(unknown, {TargetKind::Mec, "M1"}), ValidationError);
}

TEST_CASE("synthetic latency follows the link budget") {
    SyntheticParams params;
    const double rate = params.link_rate();
    CHECK(rate > 1e6);
    SyntheticLatency latency(params);
    Subtask st{"u1", 1, "m", "s", 2.0};
    const double mec = latency.latency(st, {TargetKind::Mec, "M1"});
    const double ue = latency.latency(st, {TargetKind::Ue, "u2"});
    const double cloud = latency.latency(st, {TargetKind::Cloud, "Cloud1"});
    CHECK(mec == doctest::Approx(2.0 / params.mec_speed));
    CHECK(ue == doctest::Approx(2.0 / params.ue_speed));
    CHECK(cloud > params.cloud_rtt);
    CHECK(mec < ue);
    CHECK(ue < cloud);
}

} // TEST_SUITE
