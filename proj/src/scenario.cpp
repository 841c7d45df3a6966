#include "mecsim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mecsim {

namespace {

using nlohmann::json;

ServiceCatalog parse_catalog(const json& j) {
    ServiceCatalog catalog;
    catalog.deployment_threshold = j.value("deployment_threshold", 0.0);
    if (!j.contains("services") || !j["services"].is_array()) {
        throw ValidationError("scenario: catalog.services must be an array");
    }
    for (const auto& js : j["services"]) {
        Service s;
        s.id = js.at("id").get<std::string>();
        s.popularity = js.at("popularity").get<double>();
        s.microservices = js.at("microservices").get<std::vector<std::string>>();
        catalog.services.push_back(std::move(s));
    }
    if (j.contains("microservice_sizes")) {
        for (const auto& [key, value] : j["microservice_sizes"].items()) {
            catalog.microservice_sizes[key] = value.get<std::int64_t>();
        }
    }
    validate_catalog(catalog);
    return catalog;
}

json catalog_json(const ServiceCatalog& catalog) {
    nlohmann::ordered_json j;
    j["deployment_threshold"] = catalog.deployment_threshold;
    nlohmann::ordered_json services = nlohmann::ordered_json::array();
    for (const auto& s : catalog.services) {
        nlohmann::ordered_json js;
        js["id"] = s.id;
        js["popularity"] = s.popularity;
        js["microservices"] = s.microservices;
        services.push_back(js);
    }
    j["services"] = services;
    if (!catalog.microservice_sizes.empty()) {
        nlohmann::ordered_json sizes;
        for (const auto& [id, size] : catalog.microservice_sizes) sizes[id] = size;
        j["microservice_sizes"] = sizes;
    }
    return j;
}

WindowMode parse_window(const json& j) {
    WindowMode mode;
    const std::string kind = j.value("mode", std::string("floating"));
    if (kind == "floating") {
        mode.floating = true;
    } else if (kind == "fixed") {
        mode.floating = false;
        mode.size = j.at("size").get<int>();
        if (mode.size < 1) throw ValidationError("scenario: sim.window.size must be >= 1");
    } else {
        throw ValidationError("scenario: sim.window.mode must be 'fixed' or 'floating'");
    }
    return mode;
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario parse error: ") + e.what());
    }
    Scenario scenario;
    try {
        scenario.catalog = parse_catalog(j.at("catalog"));

        if (j.contains("servers")) {
            std::set<std::string> seen;
            for (const auto& js : j["servers"]) {
                MecServer server;
                server.id = js.at("id").get<std::string>();
                server.capacity = js.at("capacity").get<std::int64_t>();
                if (js.contains("services")) {
                    server.services = js["services"].get<std::vector<std::string>>();
                }
                if (!seen.insert(server.id).second) {
                    throw ValidationError("scenario: duplicate server id '" + server.id + "'");
                }
                for (const auto& sid : server.services) {
                    if (scenario.catalog.find(sid) == nullptr) {
                        throw ValidationError("scenario: server '" + server.id +
                                              "' references unknown service '" + sid + "'");
                    }
                }
                scenario.servers.push_back(std::move(server));
            }
        }

        if (j.contains("ues")) {
            const auto& ju = j["ues"];
            if (ju.contains("ids")) {
                scenario.ue_ids = ju["ids"].get<std::vector<std::string>>();
            } else {
                const int count = ju.value("count", 0);
                for (int i = 1; i <= count; ++i) scenario.ue_ids.push_back("u" + std::to_string(i));
            }
            if (ju.contains("d2d_caches")) {
                std::set<std::string> known(scenario.ue_ids.begin(), scenario.ue_ids.end());
                for (const auto& [ue, micros] : ju["d2d_caches"].items()) {
                    if (!known.count(ue)) {
                        throw ValidationError("scenario: d2d cache for unknown UE '" + ue + "'");
                    }
                    auto list = micros.get<std::vector<std::string>>();
                    scenario.d2d_caches[ue] = std::set<std::string>(list.begin(), list.end());
                }
            }
        }

        // an explicitly empty cloud list is allowed (edge/D2D-only scenarios)
        if (j.contains("clouds")) {
            scenario.clouds = j["clouds"].get<std::vector<std::string>>();
        }

        if (j.contains("tasks")) {
            std::set<std::string> known(scenario.ue_ids.begin(), scenario.ue_ids.end());
            for (const auto& jt : j["tasks"]) {
                const std::string ue = jt.at("ue").get<std::string>();
                if (!known.count(ue)) {
                    throw ValidationError("scenario: task for unknown UE '" + ue + "'");
                }
                int index = 0;
                for (const auto& sub : scenario.tasks) {
                    if (sub.ue_id == ue) index = std::max(index, sub.index_in_ue);
                }
                for (const auto& jst : jt.at("subtasks")) {
                    Subtask st;
                    st.ue_id = ue;
                    st.index_in_ue = ++index;
                    st.microservice = jst.at("microservice").get<std::string>();
                    st.parent_service = jst.at("service").get<std::string>();
                    st.work = jst.value("work", 1.0);
                    const Service* svc = scenario.catalog.find(st.parent_service);
                    if (svc == nullptr) {
                        throw ValidationError("scenario: subtask of '" + ue +
                                              "' references unknown service '" + st.parent_service +
                                              "'");
                    }
                    if (std::find(svc->microservices.begin(), svc->microservices.end(),
                                  st.microservice) == svc->microservices.end()) {
                        throw ValidationError("scenario: microservice '" + st.microservice +
                                              "' does not belong to service '" + st.parent_service +
                                              "'");
                    }
                    scenario.tasks.push_back(std::move(st));
                }
            }
        }

        if (j.contains("latency")) {
            const auto& jl = j["latency"];
            const std::string mode = jl.value("mode", std::string("synthetic"));
            if (mode == "synthetic") {
                scenario.latency.synthetic = true;
                auto& p = scenario.latency.params;
                p.mec_speed = jl.value("mec_speed", p.mec_speed);
                p.ue_speed = jl.value("ue_speed", p.ue_speed);
                p.cloud_rtt = jl.value("cloud_rtt", p.cloud_rtt);
                p.bits_per_unit = jl.value("bits_per_unit", p.bits_per_unit);
                p.bandwidth_hz = jl.value("bandwidth_hz", p.bandwidth_hz);
                p.tx_power_dbm = jl.value("tx_power_dbm", p.tx_power_dbm);
                p.noise_w_per_hz = jl.value("noise_w_per_hz", p.noise_w_per_hz);
            } else if (mode == "explicit") {
                scenario.latency.synthetic = false;
                for (const auto& jc : jl.at("cells")) {
                    const std::string ue = jc.at("ue").get<std::string>();
                    const int sub = jc.at("sub").get<int>();
                    for (const auto& [target, value] : jc.at("values").items()) {
                        scenario.latency.cells.emplace_back(ue, sub, target, value.get<double>());
                    }
                }
            } else {
                throw ValidationError("scenario: latency.mode must be 'synthetic' or 'explicit'");
            }
        }

        if (j.contains("sim")) {
            const auto& js = j["sim"];
            auto& s = scenario.sim;
            s.task_arrival = js.value("task_arrival", s.task_arrival);
            s.service_arrival = js.value("service_arrival", s.service_arrival);
            s.required_rate = js.value("required_rate", s.required_rate);
            if (js.contains("window")) s.window = parse_window(js["window"]);
            s.slots = js.value("slots", s.slots);
            s.slot_duration = js.value("slot_duration", s.slot_duration);
            s.acceptance_prob = js.value("acceptance_prob", s.acceptance_prob);
            s.kappa = js.value("kappa", s.kappa);
            s.exact_limit = js.value("exact_limit", s.exact_limit);
            s.replication = js.value("replication", s.replication);
            if (js.contains("subtasks_per_task")) {
                s.subtasks_min = js["subtasks_per_task"].at(0).get<int>();
                s.subtasks_max = js["subtasks_per_task"].at(1).get<int>();
            }
            if (js.contains("work_units")) {
                s.work_min = js["work_units"].at(0).get<double>();
                s.work_max = js["work_units"].at(1).get<double>();
            }
            if (js.contains("new_services")) {
                const auto& jn = js["new_services"];
                s.new_services.dist.candidate_popularities =
                    jn.value("candidates", std::vector<double>{});
                s.new_services.dist.arrival_prob = s.service_arrival;
                s.new_services.dist.deployment_threshold = scenario.catalog.deployment_threshold;
                if (jn.contains("microservices")) {
                    s.new_services.micro_min = jn["microservices"].at(0).get<int>();
                    s.new_services.micro_max = jn["microservices"].at(1).get<int>();
                }
                s.new_services.share_prob = jn.value("share_prob", s.new_services.share_prob);
                validate_distribution(s.new_services.dist);
            }
            const std::string order = js.value("priority_order", std::string("larger_first"));
            if (order == "larger_first") {
                s.priority_order = PriorityOrder::LargerFirst;
            } else if (order == "smaller_first") {
                s.priority_order = PriorityOrder::SmallerFirst;
            } else {
                throw ValidationError(
                    "scenario: sim.priority_order must be 'larger_first' or 'smaller_first'");
            }
            if (js.contains("eur_weights")) {
                s.eur_storage_weight = js["eur_weights"].at(0).get<double>();
                s.eur_busy_weight = js["eur_weights"].at(1).get<double>();
            }
            for (auto [name, value] :
                 {std::pair<const char*, double>{"task_arrival", s.task_arrival},
                  {"service_arrival", s.service_arrival},
                  {"required_rate", s.required_rate},
                  {"acceptance_prob", s.acceptance_prob}}) {
                if (value < 0.0 || value > 1.0) {
                    throw ValidationError("scenario: sim." + std::string(name) +
                                          " must be in [0,1]");
                }
            }
            if (s.slots < 1) throw ValidationError("scenario: sim.slots must be >= 1");
            if (s.slot_duration <= 0) {
                throw ValidationError("scenario: sim.slot_duration must be positive");
            }
            if (s.subtasks_min < 1 || s.subtasks_max < s.subtasks_min) {
                throw ValidationError("scenario: sim.subtasks_per_task range invalid");
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scenario field error: ") + e.what());
    }
    // new-service sampling follows the scenario arrival rate even when the
    // new_services block is omitted
    scenario.sim.new_services.dist.arrival_prob = scenario.sim.service_arrival;
    scenario.sim.new_services.dist.deployment_threshold = scenario.catalog.deployment_threshold;
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::unique_ptr<LatencyProvider> make_latency_provider(const Scenario& scenario) {
    if (scenario.latency.synthetic) {
        return std::make_unique<SyntheticLatency>(scenario.latency.params);
    }
    auto provider = std::make_unique<ExplicitLatency>();
    for (const auto& [ue, sub, target, value] : scenario.latency.cells) {
        provider->set(ue, sub, target, value);
    }
    return provider;
}

SimConfig sim_config_from(const Scenario& scenario) {
    SimConfig config;
    config.catalog = scenario.catalog;
    config.servers = scenario.servers;
    config.ue_ids = scenario.ue_ids;
    config.d2d_caches = scenario.d2d_caches;
    config.clouds = scenario.clouds;
    config.latency = scenario.latency.params;
    config.settings = scenario.sim;
    return config;
}

std::string catalog_to_json(const ServiceCatalog& catalog) {
    return catalog_json(catalog).dump(2) + "\n";
}

ServiceCatalog catalog_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("catalog parse error: ") + e.what());
    }
    return parse_catalog(j);
}

} // namespace mecsim
