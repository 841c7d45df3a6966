#pragma once
// Subtask offloading: the latency matrix over candidate targets, integration
// priorities (main = serial of the fastest target, sub = parent-service
// popularity), the two-queue offloading order, and schedule evaluation under
// per-UE ordering and per-target FCFS constraints.

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mecsim/catalog.hpp"
#include "mecsim/deployment.hpp"

namespace mecsim {

enum class TargetKind { Mec, Cloud, Ue };

struct Target {
    TargetKind kind = TargetKind::Mec;
    std::string id;
    bool operator==(const Target&) const = default;
};

struct Subtask {
    std::string ue_id;
    int index_in_ue = 1; // 1-based order within the UE's task stream
    std::string microservice;
    std::string parent_service;
    double work = 1.0; // work units, consumed by the synthetic latency model
};

// Column order is fixed: MEC servers, then cloud servers, then UEs.
// A cell is present iff the target hosts the subtask's microservice.
struct OffloadMatrix {
    std::vector<Subtask> subtasks;
    std::vector<Target> targets;
    std::vector<std::vector<std::optional<double>>> cells; // [row][column]
};

// Who hosts what: edge servers per deployment plan, clouds host everything,
// UEs per their device-to-device cache sets.
struct HostingInfo {
    std::vector<std::string> mec_order;
    std::map<std::string, std::set<std::string>> mec;
    std::vector<std::string> clouds;
    std::vector<std::string> ue_order;
    std::map<std::string, std::set<std::string>> ue;
};

HostingInfo hosting_from_plan(const DeploymentPlan& plan, const std::vector<std::string>& clouds,
                              const std::vector<std::string>& ue_order,
                              const std::map<std::string, std::set<std::string>>& d2d_caches);

class LatencyProvider {
public:
    virtual ~LatencyProvider() = default;
    virtual double latency(const Subtask& subtask, const Target& target) const = 0;
};

// Fixed per-(subtask,target) latencies loaded from a scenario file.
class ExplicitLatency : public LatencyProvider {
public:
    void set(const std::string& ue_id, int index_in_ue, const std::string& target_id, double value);
    double latency(const Subtask& subtask, const Target& target) const override;

private:
    std::map<std::tuple<std::string, int, std::string>, double> values_;
};

// Processing latency = work / target speed; cloud latency = base round trip
// plus transfer time over a Shannon-capacity link.
struct SyntheticParams {
    double mec_speed = 32.0;     // work units per second
    double ue_speed = 8.0;       // work units per second
    double cloud_rtt = 0.5;      // seconds
    double bits_per_unit = 1e5;  // payload bits per work unit
    double bandwidth_hz = 5e6;
    double tx_power_dbm = 14.0;
    double noise_w_per_hz = 1e-9;
    double link_rate() const; // bits per second
};

class SyntheticLatency : public LatencyProvider {
public:
    explicit SyntheticLatency(SyntheticParams params) : params_(params) {}
    double latency(const Subtask& subtask, const Target& target) const override;

private:
    SyntheticParams params_;
};

OffloadMatrix build_offload_matrix(const std::vector<Subtask>& subtasks, const HostingInfo& hosting,
                                   const LatencyProvider& latency);

// Present targets of a row in column order. Position in this sequence (1-based)
// is the serial number the redefined sequence assigns. Errors on empty rows.
std::vector<int> object_sequence(const OffloadMatrix& matrix, int row);

struct IntegrationPriority {
    int main = 1;     // serial of the minimum-latency target, ties to the smaller serial
    double sub = 0.0; // parent service popularity
};

IntegrationPriority integration_priority(const OffloadMatrix& matrix, int row,
                                         const ServiceCatalog& catalog);

std::vector<IntegrationPriority> integration_priorities(const OffloadMatrix& matrix,
                                                        const ServiceCatalog& catalog);

enum class PriorityOrder { LargerFirst, SmallerFirst };

// Two-queue design: a candidate set holds each UE's head subtask; the best
// candidate moves to the offloading queue and that UE's next subtask is
// promoted. Intra-UE order is always preserved. Returns row indices.
std::vector<int> design_queue(const OffloadMatrix& matrix,
                              const std::vector<IntegrationPriority>& priorities,
                              PriorityOrder order = PriorityOrder::LargerFirst);

struct ScheduleEntry {
    int row = 0;
    Target target;
    double start = 0.0;
    double finish = 0.0;
    bool propagation = false; // cloud entries carry propagation delay, others processing
};

struct Schedule {
    std::vector<ScheduleEntry> entries; // in queue order
    double makespan = 0.0;              // latest finish time
};

// Carry-over state when a schedule continues an earlier batch: the absolute
// time the batch starts and per-UE ready times from previous batches.
struct ScheduleContext {
    double base_time = 0.0;
    std::map<std::string, double> ue_ready;
};

// Processes the queue in order: each subtask runs on its main-priority target;
// edge and UE targets serve one subtask at a time (first come, first served),
// cloud runs everything in parallel; a subtask never starts before its intra-UE
// predecessor finishes.
Schedule evaluate_schedule(const std::vector<int>& queue, const OffloadMatrix& matrix,
                           const std::vector<IntegrationPriority>& priorities,
                           const ScheduleContext* context = nullptr);

struct ScheduleCheck {
    bool ok = true;
    std::vector<std::string> violations;
};

// Checks single assignment, intra-UE ordering, per-target FCFS non-overlap,
// and time positivity. Never throws.
ScheduleCheck validate_schedule(const Schedule& schedule, const OffloadMatrix& matrix);

// CSV with one row per subtask and one column per target, "-" marking targets
// that do not host the microservice.
std::string matrix_to_csv(const OffloadMatrix& matrix);
OffloadMatrix matrix_from_csv(std::istream& in, const std::vector<Target>& targets);

std::string schedule_to_csv(const Schedule& schedule, const OffloadMatrix& matrix);

std::string subtask_name(const Subtask& subtask);

} // namespace mecsim
