#pragma once
// Time-slotted simulation: Bernoulli service and task arrivals, slot-boundary
// re-deployment, fixed or floating subtask windows, schedule evaluation, and
// per-slot metric collection. One run is fully determined by (config, seed).

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mecsim/catalog.hpp"
#include "mecsim/deployment.hpp"
#include "mecsim/offload.hpp"

namespace mecsim {

struct WindowMode {
    bool floating = true;
    int size = 0; // subtasks per window in fixed mode
};

enum class DeployPolicy { PopularitySteiner, RandomFill };
enum class QueuePolicy { IntegrationPriority, ArrivalFcfs };

struct NewServiceGen {
    NewServiceDistribution dist;
    int micro_min = 2;
    int micro_max = 4;
    double share_prob = 0.5; // chance a microservice reuses an existing id
};

// Settings that live in the scenario file's "sim" section.
struct SimSettings {
    double task_arrival = 0.6;    // per UE per slot
    double service_arrival = 0.0; // per slot
    double required_rate = 0.9;
    WindowMode window;
    int slots = 50;
    double slot_duration = 1.0;
    double acceptance_prob = 0.95; // a UE accepts a D2D offload with this probability
    std::int64_t kappa = kDefaultKappa;
    int exact_limit = kDefaultExactLimit;
    int replication = 2; // candidate copies per service during placement
    int subtasks_min = 1, subtasks_max = 4;
    double work_min = 1.0, work_max = 3.0;
    NewServiceGen new_services;
    PriorityOrder priority_order = PriorityOrder::LargerFirst;
    double eur_storage_weight = 0.5;
    double eur_busy_weight = 0.5;
};

struct SimConfig {
    ServiceCatalog catalog;
    std::vector<MecServer> servers; // capacities; placements are rebuilt per slot
    std::vector<std::string> ue_ids;
    std::map<std::string, std::set<std::string>> d2d_caches;
    std::vector<std::string> clouds{"Cloud1"};
    SyntheticParams latency;
    SimSettings settings;
    DeployPolicy deploy_policy = DeployPolicy::PopularitySteiner;
    QueuePolicy queue_policy = QueuePolicy::IntegrationPriority;
};

struct SlotMetrics {
    int slot = 0;
    int subtasks = 0;             // scheduled in this slot
    int windows = 0;              // batches executed in this slot
    std::optional<double> edge_offload_rate; // absent when nothing was scheduled
    double analytic_hit_rate = 0.0;
    std::optional<double> theta;  // absent on an empty plan
    double eur = 0.0;
    double makespan = 0.0;        // latest completion relative to slot start
    std::optional<double> mean_window_delay; // completion minus arrival
    std::vector<std::string> warnings;
};

struct PendingSubtask {
    Subtask subtask;
    double arrival = 0.0; // absolute time
};

struct SimState {
    ServiceCatalog catalog;
    std::vector<MecServer> servers; // with current candidate placements
    DeploymentPlan plan;
    bool have_plan = false;
    int slot = 0;
    double window_free_at = 0.0;          // when the serial window executor is free
    std::deque<PendingSubtask> pending;   // waiting for a window (fixed mode)
    std::map<std::string, double> ue_ready; // carry intra-UE chains across windows
    int new_service_count = 0;
    int new_micro_count = 0;
};

// Candidate placement for a catalog: services in descending popularity, each
// assigned round-robin to up to `replication` servers with room. Replication
// is what creates the redundancy the deployment step then removes.
void assign_candidate_placements(std::vector<MecServer>& servers, const ServiceCatalog& catalog,
                                 int replication);

SimState init_sim(const SimConfig& config);

// One slot: service arrivals + re-deployment, task arrivals, window batching,
// scheduling, metric aggregation. Infeasible deployments degrade to the
// previous slot's plan with a warning.
SlotMetrics run_slot(SimState& state, const SimConfig& config, Rng& rng);

std::vector<SlotMetrics> run_simulation(const SimConfig& config, std::uint64_t seed);

enum class BaselineKind { RandomDeploy, NoPriorityFcfs };

// Proxy baselines: random capacity-filling deployment with no de-redundancy,
// and arrival-order scheduling that ignores priorities.
std::vector<SlotMetrics> run_baseline(BaselineKind kind, const SimConfig& config,
                                      std::uint64_t seed);

// Predicted UE count at which a fixed window of the given size is filled by
// one slot's arrivals.
double critical_ues(int window_size, double task_arrival);

// Energy utilization ratio: weighted blend of edge storage occupancy and edge
// busy-time fraction. The metric itself is an artifact of this simulator.
double compute_eur(std::int64_t footprint, std::int64_t capacity_total, double mec_busy_time,
                   int num_mecs, double slot_duration, double storage_weight, double busy_weight);

std::string metrics_csv_header();
std::string metrics_to_csv(std::uint64_t seed, const std::vector<SlotMetrics>& rows);

} // namespace mecsim
