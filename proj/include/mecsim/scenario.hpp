#pragma once
// Scenario files: one JSON document carrying the catalog, the edge servers,
// the UE population with device-to-device caches, an optional fixed task set,
// the latency model, and simulation settings.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mecsim/adgraph.hpp"
#include "mecsim/catalog.hpp"
#include "mecsim/offload.hpp"
#include "mecsim/sim.hpp"

namespace mecsim {

struct LatencySection {
    bool synthetic = true;
    SyntheticParams params;
    // explicit mode: (ue, index-in-ue, target id) -> latency
    std::vector<std::tuple<std::string, int, std::string, double>> cells;
};

struct Scenario {
    ServiceCatalog catalog;
    std::vector<MecServer> servers;
    std::vector<std::string> ue_ids;
    std::map<std::string, std::set<std::string>> d2d_caches;
    std::vector<std::string> clouds{"Cloud1"};
    std::vector<Subtask> tasks; // optional fixed workload, in declaration order
    LatencySection latency;
    SimSettings sim;
};

// Throws ValidationError with the offending field or id on any dangling
// reference or out-of-range value.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

std::unique_ptr<LatencyProvider> make_latency_provider(const Scenario& scenario);

SimConfig sim_config_from(const Scenario& scenario);

// Catalog section serialization (the same shape the scenario file uses).
std::string catalog_to_json(const ServiceCatalog& catalog);
ServiceCatalog catalog_from_json(const std::string& text);

} // namespace mecsim
