#include "mecsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mecsim {

namespace {

std::string fmt_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

} // namespace

void assign_candidate_placements(std::vector<MecServer>& servers, const ServiceCatalog& catalog,
                                 int replication) {
    for (auto& s : servers) s.services.clear();
    if (servers.empty()) return;

    std::vector<const Service*> order;
    for (const auto& s : catalog.services) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const Service* a, const Service* b) {
        if (a->popularity != b->popularity) return a->popularity > b->popularity;
        return a->id < b->id;
    });

    std::vector<std::set<std::string>> placed(servers.size());
    std::vector<std::int64_t> used(servers.size(), 0);
    std::size_t cursor = 0;
    for (const Service* svc : order) {
        int copies = 0;
        for (std::size_t attempt = 0; attempt < servers.size() && copies < replication; ++attempt) {
            const std::size_t i = (cursor + attempt) % servers.size();
            std::int64_t added = 0;
            for (const auto& m : svc->microservices) {
                if (!placed[i].count(m)) added += catalog.size_of(m);
            }
            if (used[i] + added > servers[i].capacity) continue;
            servers[i].services.push_back(svc->id);
            for (const auto& m : svc->microservices) {
                if (placed[i].insert(m).second) used[i] += catalog.size_of(m);
            }
            ++copies;
        }
        cursor = (cursor + 1) % servers.size();
    }
}

namespace {

// Random capacity-filling baseline: every server independently caches services
// drawn uniformly at random until nothing more fits. Popularity is ignored and
// duplicate copies across servers are kept (no de-redundancy).
void place_services_random(std::vector<MecServer>& servers, const ServiceCatalog& catalog,
                           Rng& rng) {
    for (auto& server : servers) {
        server.services.clear();
        std::vector<int> order(catalog.services.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        for (std::size_t i = order.size(); i > 1; --i) {
            const auto j =
                static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
            std::swap(order[i - 1], order[j]);
        }
        std::set<std::string> placed;
        std::int64_t used = 0;
        for (int idx : order) {
            const Service& svc = catalog.services[static_cast<std::size_t>(idx)];
            std::int64_t added = 0;
            for (const auto& m : svc.microservices) {
                if (!placed.count(m)) added += catalog.size_of(m);
            }
            if (used + added > server.capacity) continue;
            server.services.push_back(svc.id);
            for (const auto& m : svc.microservices) {
                if (placed.insert(m).second) used += catalog.size_of(m);
            }
        }
    }
}

// Deployment for the random baseline: every placed service stays where it
// landed, shared copies included.
DeploymentPlan random_fill_plan(const ServiceCatalog& catalog,
                                const std::vector<MecServer>& servers) {
    DeploymentPlan plan;
    plan.feasible = true;
    std::set<std::string> deployed;
    std::int64_t residual = 0;
    std::map<std::string, std::int64_t> copies;
    for (const auto& server : servers) {
        if (server.services.empty()) continue;
        plan.chosen_servers.push_back(server.id);
        std::set<std::string> micros;
        double reward = 0.0;
        std::set<std::string> seen;
        for (const auto& sid : server.services) {
            if (!seen.insert(sid).second) continue;
            const Service* svc = catalog.find(sid);
            reward += svc->popularity;
            deployed.insert(sid);
            for (const auto& m : svc->microservices) micros.insert(m);
        }
        plan.achieved_rate += reward;
        plan.edge_microservices[server.id] =
            std::vector<std::string>(micros.begin(), micros.end());
        for (const auto& m : micros) {
            plan.footprint += catalog.size_of(m);
            ++copies[m];
        }
    }
    for (const auto& [m, count] : copies) {
        if (count > 1) residual += (count - 1) * catalog.size_of(m);
    }
    for (const auto& s : catalog.services) plan.cloud_set.push_back(s.id);
    plan.deployed_services.assign(deployed.begin(), deployed.end());
    if (plan.footprint > 0) plan.theta = deredundancy_degree(plan.footprint, residual);
    return plan;
}

struct BatchResult {
    int subtasks = 0;
    int edge_served = 0;
    double mec_busy = 0.0;      // total busy time on MEC targets
    double last_finish = 0.0;   // absolute
    double delay_sum = 0.0;     // completion minus arrival, summed
};

// Schedule one batch starting no earlier than `exec_start`, preserving per-UE
// chains across batches.
BatchResult run_batch(const std::vector<PendingSubtask>& batch, double exec_start,
                      SimState& state, const SimConfig& config, Rng& rng) {
    BatchResult result;
    if (batch.empty()) return result;

    std::vector<Subtask> subtasks;
    subtasks.reserve(batch.size());
    for (const auto& p : batch) subtasks.push_back(p.subtask);

    HostingInfo hosting = hosting_from_plan(state.have_plan ? state.plan : DeploymentPlan{},
                                            config.clouds, config.ue_ids, config.d2d_caches);
    SyntheticLatency latency(config.latency);
    OffloadMatrix matrix = build_offload_matrix(subtasks, hosting, latency);

    // D2D acceptance: a UE turns down an offload aimed at it with probability
    // 1 - acceptance_prob; rejected cells leave the row.
    for (std::size_t c = 0; c < matrix.targets.size(); ++c) {
        if (matrix.targets[c].kind != TargetKind::Ue) continue;
        for (std::size_t r = 0; r < matrix.subtasks.size(); ++r) {
            if (matrix.cells[r][c].has_value() &&
                !bernoulli(rng, config.settings.acceptance_prob)) {
                matrix.cells[r][c].reset();
            }
        }
    }

    const std::vector<IntegrationPriority> priorities =
        integration_priorities(matrix, state.catalog);

    std::vector<int> queue;
    if (config.queue_policy == QueuePolicy::IntegrationPriority) {
        queue = design_queue(matrix, priorities, config.settings.priority_order);
    } else {
        queue.resize(matrix.subtasks.size());
        for (std::size_t i = 0; i < queue.size(); ++i) queue[i] = static_cast<int>(i);
    }

    ScheduleContext context;
    context.base_time = exec_start;
    context.ue_ready = state.ue_ready;
    const Schedule schedule = evaluate_schedule(queue, matrix, priorities, &context);

    for (const auto& entry : schedule.entries) {
        ++result.subtasks;
        if (entry.target.kind == TargetKind::Mec) {
            ++result.edge_served;
            result.mec_busy += entry.finish - entry.start;
        }
        result.last_finish = std::max(result.last_finish, entry.finish);
        // rows index the batch vector directly
        result.delay_sum += entry.finish - batch[static_cast<std::size_t>(entry.row)].arrival;
        state.ue_ready[matrix.subtasks[entry.row].ue_id] =
            std::max(state.ue_ready[matrix.subtasks[entry.row].ue_id], entry.finish);
    }
    return result;
}

} // namespace

double critical_ues(int window_size, double task_arrival) {
    if (window_size < 1) throw ValidationError("critical_ues: window size must be >= 1");
    return static_cast<double>(window_size) * task_arrival;
}

double compute_eur(std::int64_t footprint, std::int64_t capacity_total, double mec_busy_time,
                   int num_mecs, double slot_duration, double storage_weight, double busy_weight) {
    if (slot_duration <= 0.0) throw ValidationError("compute_eur: slot duration must be positive");
    const double storage =
        capacity_total > 0
            ? std::min(1.0, static_cast<double>(footprint) / static_cast<double>(capacity_total))
            : 0.0;
    const double busy =
        num_mecs > 0
            ? std::min(1.0, mec_busy_time / (static_cast<double>(num_mecs) * slot_duration))
            : 0.0;
    return storage_weight * storage + busy_weight * busy;
}

SimState init_sim(const SimConfig& config) {
    validate_catalog(config.catalog);
    SimState state;
    state.catalog = config.catalog;
    state.servers = config.servers;
    return state;
}

SlotMetrics run_slot(SimState& state, const SimConfig& config, Rng& rng) {
    const auto& s = config.settings;
    SlotMetrics metrics;
    metrics.slot = state.slot;
    const double slot_start = static_cast<double>(state.slot) * s.slot_duration;
    const double slot_end = slot_start + s.slot_duration;

    // 1. Service arrival and re-deployment.
    if (s.service_arrival > 0.0) {
        const auto popularity = sample_new_service(s.new_services.dist, rng);
        if (popularity.has_value() && *popularity < 1.0) {
            Service fresh;
            fresh.id = "svc_new_" + std::to_string(++state.new_service_count);
            fresh.popularity = *popularity;
            std::vector<std::string> pool;
            {
                std::set<std::string> all;
                for (const auto& svc : state.catalog.services) {
                    all.insert(svc.microservices.begin(), svc.microservices.end());
                }
                pool.assign(all.begin(), all.end());
            }
            const int count = static_cast<int>(
                uniform_int(rng, s.new_services.micro_min, s.new_services.micro_max));
            std::set<std::string> chosen;
            for (int i = 0; i < count; ++i) {
                if (!pool.empty() && bernoulli(rng, s.new_services.share_prob)) {
                    chosen.insert(pick(rng, pool));
                } else {
                    chosen.insert("ms_new_" + std::to_string(++state.new_micro_count));
                }
            }
            fresh.microservices.assign(chosen.begin(), chosen.end());
            state.catalog = push_service(state.catalog, fresh);
        }
    }
    state.catalog.slot_index = state.slot % std::max(1, s.slots);

    if (config.deploy_policy == DeployPolicy::PopularitySteiner) {
        assign_candidate_placements(state.servers, state.catalog, s.replication);
        try {
            state.plan =
                solve_deployment(state.catalog, state.servers, s.required_rate, s.kappa,
                                 s.exact_limit);
            state.have_plan = true;
        } catch (const InfeasibleError& e) {
            metrics.warnings.push_back(std::string("deployment infeasible, keeping previous plan: ") +
                                       e.what());
        }
    } else {
        place_services_random(state.servers, state.catalog, rng);
        state.plan = random_fill_plan(state.catalog, state.servers);
        state.have_plan = true;
    }

    if (state.have_plan) {
        metrics.analytic_hit_rate =
            hit_rate(state.catalog, std::set<std::string>(state.plan.deployed_services.begin(),
                                                          state.plan.deployed_services.end()));
        metrics.theta = state.plan.theta;
    }

    // 2. Task arrivals: one Bernoulli trial per UE, tasks split into subtasks
    // whose microservices follow the popularity distribution.
    std::vector<PendingSubtask> arrivals;
    std::vector<double> cumulative;
    {
        double acc = 0.0;
        for (const auto& svc : state.catalog.services) {
            acc += svc.popularity;
            cumulative.push_back(acc);
        }
    }
    std::map<std::string, int> next_index;
    for (const auto& p : state.pending) {
        next_index[p.subtask.ue_id] = std::max(next_index[p.subtask.ue_id], p.subtask.index_in_ue);
    }
    for (const auto& ue : config.ue_ids) {
        if (!bernoulli(rng, s.task_arrival)) continue;
        const double offset = uniform_unit(rng) * s.slot_duration;
        const int count = static_cast<int>(uniform_int(rng, s.subtasks_min, s.subtasks_max));
        for (int i = 0; i < count; ++i) {
            PendingSubtask pending;
            pending.arrival = slot_start + offset;
            pending.subtask.ue_id = ue;
            pending.subtask.index_in_ue = ++next_index[ue];
            // service by popularity, microservice uniform within the service
            const double draw = uniform_unit(rng);
            std::size_t svc_idx = cumulative.size() - 1;
            for (std::size_t k = 0; k < cumulative.size(); ++k) {
                if (draw < cumulative[k]) {
                    svc_idx = k;
                    break;
                }
            }
            const Service& svc = state.catalog.services[svc_idx];
            pending.subtask.parent_service = svc.id;
            pending.subtask.microservice = pick(rng, svc.microservices);
            pending.subtask.work =
                s.work_min + uniform_unit(rng) * std::max(0.0, s.work_max - s.work_min);
            arrivals.push_back(std::move(pending));
        }
    }
    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const PendingSubtask& a, const PendingSubtask& b) {
                         return a.arrival < b.arrival;
                     });
    for (auto& a : arrivals) state.pending.push_back(std::move(a));

    // 3+4. Window batching and scheduling.
    int edge_served = 0;
    double mec_busy = 0.0;
    double delay_sum = 0.0;
    const bool last_slot = state.slot + 1 >= s.slots;
    auto execute = [&](std::vector<PendingSubtask> batch, double close_time) {
        const double exec_start = std::max(close_time, state.window_free_at);
        const BatchResult r = run_batch(batch, exec_start, state, config, rng);
        state.window_free_at = std::max(exec_start, r.last_finish);
        metrics.subtasks += r.subtasks;
        ++metrics.windows;
        edge_served += r.edge_served;
        mec_busy += r.mec_busy;
        delay_sum += r.delay_sum;
        metrics.makespan = std::max(metrics.makespan, r.last_finish - slot_start);
    };

    if (s.window.floating) {
        std::vector<PendingSubtask> batch(state.pending.begin(), state.pending.end());
        state.pending.clear();
        if (!batch.empty()) execute(std::move(batch), slot_end);
    } else {
        const std::size_t window = static_cast<std::size_t>(s.window.size);
        while (state.pending.size() >= window) {
            std::vector<PendingSubtask> batch(state.pending.begin(),
                                              state.pending.begin() +
                                                  static_cast<std::ptrdiff_t>(window));
            state.pending.erase(state.pending.begin(),
                                state.pending.begin() + static_cast<std::ptrdiff_t>(window));
            // pending stays in arrival order, so the window closes when its
            // last subtask arrives
            const double close_time = batch.back().arrival;
            execute(std::move(batch), close_time);
        }
        if (last_slot && !state.pending.empty()) {
            // flush the partial window at the end of the run
            std::vector<PendingSubtask> batch(state.pending.begin(), state.pending.end());
            state.pending.clear();
            execute(std::move(batch), slot_end);
        }
    }

    if (metrics.subtasks > 0) {
        metrics.edge_offload_rate =
            static_cast<double>(edge_served) / static_cast<double>(metrics.subtasks);
        metrics.mean_window_delay = delay_sum / static_cast<double>(metrics.subtasks);
    }

    std::int64_t capacity_total = 0;
    for (const auto& server : config.servers) capacity_total += server.capacity;
    metrics.eur = compute_eur(state.have_plan ? state.plan.footprint : 0, capacity_total, mec_busy,
                              static_cast<int>(config.servers.size()), s.slot_duration,
                              s.eur_storage_weight, s.eur_busy_weight);

    ++state.slot;
    return metrics;
}

std::vector<SlotMetrics> run_simulation(const SimConfig& config, std::uint64_t seed) {
    SimState state = init_sim(config);
    Rng rng(seed);
    std::vector<SlotMetrics> out;
    out.reserve(static_cast<std::size_t>(config.settings.slots));
    for (int slot = 0; slot < config.settings.slots; ++slot) {
        out.push_back(run_slot(state, config, rng));
    }
    return out;
}

std::vector<SlotMetrics> run_baseline(BaselineKind kind, const SimConfig& config,
                                      std::uint64_t seed) {
    SimConfig variant = config;
    switch (kind) {
        case BaselineKind::RandomDeploy:
            variant.deploy_policy = DeployPolicy::RandomFill;
            break;
        case BaselineKind::NoPriorityFcfs:
            variant.queue_policy = QueuePolicy::ArrivalFcfs;
            break;
    }
    return run_simulation(variant, seed);
}

std::string metrics_csv_header() {
    return "seed,slot,subtasks,windows,edge_offload_rate,analytic_hit_rate,theta,eur,makespan,"
           "mean_window_delay\n";
}

std::string metrics_to_csv(std::uint64_t seed, const std::vector<SlotMetrics>& rows) {
    std::ostringstream os;
    os << metrics_csv_header();
    for (const auto& m : rows) {
        os << seed << "," << m.slot << "," << m.subtasks << "," << m.windows << ",";
        if (m.edge_offload_rate.has_value()) os << fmt_number(*m.edge_offload_rate);
        os << "," << fmt_number(m.analytic_hit_rate) << ",";
        if (m.theta.has_value()) os << fmt_number(*m.theta);
        os << "," << fmt_number(m.eur) << "," << fmt_number(m.makespan) << ",";
        if (m.mean_window_delay.has_value()) os << fmt_number(*m.mean_window_delay);
        os << "\n";
    }
    return os.str();
}

} // namespace mecsim
