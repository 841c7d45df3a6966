// mecsim command line: service deployment planning, offloading schedules,
// slotted simulation runs and parameter sweeps, and artifact verification.
// Exit codes: 0 success, 1 usage or validation error, 2 domain infeasibility.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mecsim/deployment.hpp"
#include "mecsim/scenario.hpp"
#include "mecsim/sim.hpp"

namespace fs = std::filesystem;
using namespace mecsim;

namespace {

void write_file(const std::string& path, const std::string& content) {
    if (!path.empty() && fs::path(path).has_parent_path()) {
        fs::create_directories(fs::path(path).parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write to '" + path + "'");
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Sweep overrides. Server lists grow with generated entries when a sweep asks
// for more MECs than the scenario declares.
void apply_override(SimConfig& config, const std::string& param, const std::string& value) {
    auto as_int = [&] {
        try {
            return std::stoi(value);
        } catch (...) {
            throw ValidationError("sweep value '" + value + "' is not an integer");
        }
    };
    auto as_real = [&] {
        try {
            return std::stod(value);
        } catch (...) {
            throw ValidationError("sweep value '" + value + "' is not a number");
        }
    };
    if (param == "bs") {
        config.settings.service_arrival = as_real();
        config.settings.new_services.dist.arrival_prob = config.settings.service_arrival;
    } else if (param == "bu") {
        config.settings.task_arrival = as_real();
    } else if (param == "rate") {
        config.settings.required_rate = as_real();
    } else if (param == "mecs") {
        const int count = as_int();
        if (count < 0) throw ValidationError("sweep: mecs must be >= 0");
        std::int64_t default_capacity = 8;
        if (!config.servers.empty()) default_capacity = config.servers.front().capacity;
        while (static_cast<int>(config.servers.size()) < count) {
            MecServer extra;
            extra.id = "M" + std::to_string(config.servers.size() + 1);
            extra.capacity = default_capacity;
            config.servers.push_back(std::move(extra));
        }
        config.servers.resize(static_cast<std::size_t>(count));
    } else if (param == "ues") {
        const int count = as_int();
        if (count < 0) throw ValidationError("sweep: ues must be >= 0");
        std::vector<std::string> ids;
        for (int i = 1; i <= count; ++i) ids.push_back("u" + std::to_string(i));
        config.ue_ids = std::move(ids);
    } else if (param == "window") {
        if (value == "floating") {
            config.settings.window = {true, 0};
        } else {
            config.settings.window = {false, as_int()};
            if (config.settings.window.size < 1) {
                throw ValidationError("sweep: fixed window size must be >= 1");
            }
        }
    } else {
        throw ValidationError("unknown sweep parameter '" + param +
                              "' (expected bs, bu, mecs, ues, rate, or window)");
    }
}

int cmd_deploy(const std::string& scenario_path, double rate, bool rate_set, std::int64_t kappa,
               bool kappa_set, int exact_limit, bool exact_set, const std::string& out_path,
               const std::string& dot_adgraph, const std::string& dot_kmst) {
    const Scenario scenario = load_scenario(scenario_path);
    const double required = rate_set ? rate : scenario.sim.required_rate;
    const std::int64_t scale = kappa_set ? kappa : scenario.sim.kappa;
    const int limit = exact_set ? exact_limit : scenario.sim.exact_limit;
    if (required < 0.0 || required > 1.0) {
        throw ValidationError("--rate must be in [0,1]");
    }

    std::vector<MecServer> servers = scenario.servers;
    bool any_placement = false;
    for (const auto& s : servers) any_placement |= !s.services.empty();
    if (!any_placement) {
        assign_candidate_placements(servers, scenario.catalog, scenario.sim.replication);
    }

    if (!dot_adgraph.empty() || !dot_kmst.empty()) {
        const AdGraph graph = build_ad_graph(servers, scenario.catalog);
        if (!dot_adgraph.empty()) write_file(dot_adgraph, to_dot(graph));
        if (!dot_kmst.empty() && required > 0.0) {
            write_file(dot_kmst, to_dot(to_kmst_instance(graph, required, scale)));
        }
    }

    const DeploymentPlan plan =
        solve_deployment(scenario.catalog, servers, required, scale, limit);
    const std::string text = plan_to_json(plan);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
    for (const auto& w : plan.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "footprint " << plan.footprint << " achieved_rate " << plan.achieved_rate
              << "\n";
    return 0;
}

int cmd_schedule(const std::string& scenario_path, const std::string& plan_path,
                 const std::string& out_path, const std::string& matrix_out) {
    const Scenario scenario = load_scenario(scenario_path);
    if (scenario.tasks.empty()) {
        // an empty task set is a valid degenerate input
        if (!out_path.empty()) write_file(out_path, "subtask,target,start,finish,delay_type\n");
        std::cout << "T_total 0\n";
        return 0;
    }
    DeploymentPlan plan;
    if (!plan_path.empty()) {
        plan = plan_from_json(read_file(plan_path));
    }
    const HostingInfo hosting =
        hosting_from_plan(plan, scenario.clouds, scenario.ue_ids, scenario.d2d_caches);
    const auto latency = make_latency_provider(scenario);
    const OffloadMatrix matrix = build_offload_matrix(scenario.tasks, hosting, *latency);
    if (!matrix_out.empty()) write_file(matrix_out, matrix_to_csv(matrix));

    std::vector<std::string> unschedulable;
    for (std::size_t r = 0; r < matrix.subtasks.size(); ++r) {
        bool any = false;
        for (const auto& cell : matrix.cells[r]) any |= cell.has_value();
        if (!any) unschedulable.push_back(subtask_name(matrix.subtasks[r]));
    }
    if (!unschedulable.empty()) {
        for (const auto& name : unschedulable) {
            std::cerr << "unschedulable subtask: " << name << "\n";
        }
        return 2;
    }

    const auto priorities = integration_priorities(matrix, scenario.catalog);
    const auto queue = design_queue(matrix, priorities, scenario.sim.priority_order);
    const Schedule schedule = evaluate_schedule(queue, matrix, priorities);
    const std::string csv = schedule_to_csv(schedule, matrix);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    std::cout << "T_total " << schedule.makespan << "\n";
    return 0;
}

int cmd_simulate(const std::string& scenario_path, int slots, bool slots_set, std::uint64_t seed,
                 const std::string& out_path, const std::string& baseline) {
    const Scenario scenario = load_scenario(scenario_path);
    SimConfig config = sim_config_from(scenario);
    if (slots_set) config.settings.slots = slots;
    std::vector<SlotMetrics> rows;
    if (baseline.empty()) {
        rows = run_simulation(config, seed);
    } else if (baseline == "random_deploy") {
        rows = run_baseline(BaselineKind::RandomDeploy, config, seed);
    } else if (baseline == "no_priority_fcfs") {
        rows = run_baseline(BaselineKind::NoPriorityFcfs, config, seed);
    } else {
        throw ValidationError("unknown baseline '" + baseline +
                              "' (expected random_deploy or no_priority_fcfs)");
    }
    const std::string csv = metrics_to_csv(seed, rows);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& param,
              const std::string& values, int slots, bool slots_set, std::uint64_t seed,
              const std::string& out_dir) {
    const Scenario scenario = load_scenario(scenario_path);
    std::vector<std::string> tokens;
    {
        std::stringstream ss(values);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) tokens.push_back(tok);
        }
    }
    if (tokens.empty()) throw ValidationError("--values produced an empty grid");
    fs::create_directories(out_dir);

    nlohmann::ordered_json manifest;
    manifest["param"] = param;
    manifest["values"] = tokens;
    manifest["seed"] = seed;
    manifest["notes"]["eur"] =
        "artifact-defined metric: 0.5*storage-occupancy + 0.5*edge-busy-fraction by default";
    std::vector<std::string> files;
    for (const auto& tok : tokens) {
        SimConfig config = sim_config_from(scenario);
        if (slots_set) config.settings.slots = slots;
        apply_override(config, param, tok);
        const auto rows = run_simulation(config, seed);
        const std::string name = param + "_" + tok + ".csv";
        write_file((fs::path(out_dir) / name).string(), metrics_to_csv(seed, rows));
        files.push_back(name);
    }
    manifest["slots"] = slots_set ? slots : scenario.sim.slots;
    manifest["files"] = files;
    write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return 0;
}

int cmd_verify(const std::string& scenario_path, const std::string& plan_path,
               const std::string& schedule_path) {
    const Scenario scenario = load_scenario(scenario_path);
    bool ok = true;
    if (!plan_path.empty()) {
        const DeploymentPlan plan = plan_from_json(read_file(plan_path));
        const PlanCheck check = verify_plan(plan, scenario.catalog, scenario.servers);
        if (check.ok) {
            std::cout << "plan: ok\n";
        } else {
            ok = false;
            for (const auto& v : check.violations) std::cout << "plan violation: " << v << "\n";
        }
        if (!schedule_path.empty()) {
            const HostingInfo hosting =
                hosting_from_plan(plan, scenario.clouds, scenario.ue_ids, scenario.d2d_caches);
            const auto latency = make_latency_provider(scenario);
            const OffloadMatrix matrix =
                build_offload_matrix(scenario.tasks, hosting, *latency);
            // rebuild the schedule from its CSV
            Schedule schedule;
            std::istringstream in(read_file(schedule_path));
            std::string line;
            std::getline(in, line); // header
            std::map<std::string, int> row_of;
            for (std::size_t r = 0; r < matrix.subtasks.size(); ++r) {
                row_of[subtask_name(matrix.subtasks[r])] = static_cast<int>(r);
            }
            std::map<std::string, Target> target_of;
            for (const auto& t : matrix.targets) target_of[t.id] = t;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                std::stringstream row(line);
                std::string name, target, start, finish, kind;
                std::getline(row, name, ',');
                std::getline(row, target, ',');
                std::getline(row, start, ',');
                std::getline(row, finish, ',');
                std::getline(row, kind, ',');
                ScheduleEntry entry;
                auto rit = row_of.find(name);
                if (rit == row_of.end()) {
                    throw ValidationError("schedule csv: unknown subtask '" + name + "'");
                }
                auto tit = target_of.find(target);
                if (tit == target_of.end()) {
                    throw ValidationError("schedule csv: unknown target '" + target + "'");
                }
                entry.row = rit->second;
                entry.target = tit->second;
                entry.start = std::stod(start);
                entry.finish = std::stod(finish);
                entry.propagation = kind == "propagation";
                schedule.makespan = std::max(schedule.makespan, entry.finish);
                schedule.entries.push_back(entry);
            }
            const ScheduleCheck check2 = validate_schedule(schedule, matrix);
            if (check2.ok) {
                std::cout << "schedule: ok\n";
            } else {
                ok = false;
                for (const auto& v : check2.violations) {
                    std::cout << "schedule violation: " << v << "\n";
                }
            }
        }
    }
    return ok ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"edge service placement and task offloading toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, plan_path, matrix_out, dot_adgraph, dot_kmst;
    std::string param, values, baseline, schedule_path;
    double rate = 0.0;
    std::int64_t kappa = kDefaultKappa;
    int exact_limit = kDefaultExactLimit;
    int slots = 0;
    std::uint64_t seed = 0;

    auto* deploy = app.add_subcommand("deploy", "solve the service deployment problem");
    deploy->add_option("scenario", scenario_path, "scenario JSON")->required();
    auto* rate_opt = deploy->add_option("--rate", rate, "required edge offloading rate");
    auto* kappa_opt = deploy->add_option("--kappa", kappa, "reward integerization scale");
    auto* exact_opt = deploy->add_option("--exact-limit", exact_limit,
                                         "max instance vertices for the exact solver");
    deploy->add_option("--out", out_path, "plan JSON output path");
    deploy->add_option("--dot-adgraph", dot_adgraph, "write the deployment graph in DOT form");
    deploy->add_option("--dot-kmst", dot_kmst, "write the reduced instance in DOT form");

    auto* schedule = app.add_subcommand("schedule", "build the offloading queue and schedule");
    schedule->add_option("scenario", scenario_path, "scenario JSON")->required();
    schedule->add_option("--plan", plan_path, "deployment plan JSON");
    schedule->add_option("--out", out_path, "schedule CSV output path");
    schedule->add_option("--matrix-out", matrix_out, "offload matrix CSV output path");

    auto* simulate = app.add_subcommand("simulate", "run one slotted simulation");
    simulate->add_option("scenario", scenario_path, "scenario JSON")->required();
    auto* slots_opt = simulate->add_option("--slots", slots, "number of slots");
    simulate->add_option("--seed", seed, "random seed")->required();
    simulate->add_option("--out", out_path, "metrics CSV output path");
    simulate->add_option("--baseline", baseline, "random_deploy or no_priority_fcfs");

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep->add_option("scenario", scenario_path, "scenario JSON")->required();
    sweep->add_option("--param", param, "bs, bu, mecs, ues, rate, or window")->required();
    sweep->add_option("--values", values, "comma-separated grid values")->required();
    auto* sweep_slots_opt = sweep->add_option("--slots", slots, "number of slots");
    sweep->add_option("--seed", seed, "random seed")->required();
    sweep->add_option("--out", out_path, "output directory")->required();

    auto* verify = app.add_subcommand("verify", "re-check plans and schedules");
    verify->add_option("scenario", scenario_path, "scenario JSON")->required();
    verify->add_option("--plan", plan_path, "deployment plan JSON")->required();
    verify->add_option("--schedule", schedule_path, "schedule CSV to validate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (deploy->parsed()) {
            return cmd_deploy(scenario_path, rate, rate_opt->count() > 0, kappa,
                              kappa_opt->count() > 0, exact_limit, exact_opt->count() > 0,
                              out_path, dot_adgraph, dot_kmst);
        }
        if (schedule->parsed()) {
            return cmd_schedule(scenario_path, plan_path, out_path, matrix_out);
        }
        if (simulate->parsed()) {
            return cmd_simulate(scenario_path, slots, slots_opt->count() > 0, seed, out_path,
                                baseline);
        }
        if (sweep->parsed()) {
            return cmd_sweep(scenario_path, param, values, slots, sweep_slots_opt->count() > 0,
                             seed, out_path);
        }
        if (verify->parsed()) {
            return cmd_verify(scenario_path, plan_path, schedule_path);
        }
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
