#include "mecsim/offload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <tuple>

namespace mecsim {

namespace {

std::string fmt_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

} // namespace

std::string subtask_name(const Subtask& subtask) {
    return "task_" + subtask.ue_id + "_sub" + std::to_string(subtask.index_in_ue);
}

HostingInfo hosting_from_plan(const DeploymentPlan& plan, const std::vector<std::string>& clouds,
                              const std::vector<std::string>& ue_order,
                              const std::map<std::string, std::set<std::string>>& d2d_caches) {
    HostingInfo hosting;
    hosting.mec_order = plan.chosen_servers;
    for (const auto& sid : plan.chosen_servers) {
        auto it = plan.edge_microservices.find(sid);
        if (it != plan.edge_microservices.end()) {
            hosting.mec[sid] = std::set<std::string>(it->second.begin(), it->second.end());
        } else {
            hosting.mec[sid] = {};
        }
    }
    hosting.clouds = clouds;
    hosting.ue_order = ue_order;
    for (const auto& ue : ue_order) {
        auto it = d2d_caches.find(ue);
        if (it != d2d_caches.end()) hosting.ue[ue] = it->second;
    }
    return hosting;
}

void ExplicitLatency::set(const std::string& ue_id, int index_in_ue, const std::string& target_id,
                          double value) {
    values_[{ue_id, index_in_ue, target_id}] = value;
}

double ExplicitLatency::latency(const Subtask& subtask, const Target& target) const {
    auto it = values_.find({subtask.ue_id, subtask.index_in_ue, target.id});
    if (it == values_.end()) {
        throw ValidationError("explicit latency missing for " + subtask_name(subtask) +
                              " on target '" + target.id + "'");
    }
    return it->second;
}

double SyntheticParams::link_rate() const {
    const double tx_w = std::pow(10.0, (tx_power_dbm - 30.0) / 10.0);
    const double snr = tx_w / (noise_w_per_hz * bandwidth_hz);
    return bandwidth_hz * std::log2(1.0 + snr);
}

double SyntheticLatency::latency(const Subtask& subtask, const Target& target) const {
    switch (target.kind) {
        case TargetKind::Mec:
            return subtask.work / params_.mec_speed;
        case TargetKind::Ue:
            return subtask.work / params_.ue_speed;
        case TargetKind::Cloud:
            return params_.cloud_rtt + subtask.work * params_.bits_per_unit / params_.link_rate();
    }
    return subtask.work; // unreachable
}

OffloadMatrix build_offload_matrix(const std::vector<Subtask>& subtasks, const HostingInfo& hosting,
                                   const LatencyProvider& latency) {
    OffloadMatrix matrix;
    matrix.subtasks = subtasks;
    for (const auto& id : hosting.mec_order) matrix.targets.push_back({TargetKind::Mec, id});
    for (const auto& id : hosting.clouds) matrix.targets.push_back({TargetKind::Cloud, id});
    for (const auto& id : hosting.ue_order) matrix.targets.push_back({TargetKind::Ue, id});

    matrix.cells.assign(subtasks.size(),
                        std::vector<std::optional<double>>(matrix.targets.size()));
    for (std::size_t r = 0; r < subtasks.size(); ++r) {
        const auto& st = subtasks[r];
        for (std::size_t c = 0; c < matrix.targets.size(); ++c) {
            const auto& tgt = matrix.targets[c];
            bool hosts = false;
            switch (tgt.kind) {
                case TargetKind::Mec: {
                    auto it = hosting.mec.find(tgt.id);
                    hosts = it != hosting.mec.end() && it->second.count(st.microservice) > 0;
                    break;
                }
                case TargetKind::Cloud:
                    hosts = true; // the cloud set is complete
                    break;
                case TargetKind::Ue: {
                    if (tgt.id == st.ue_id) break; // no self-offload column entry
                    auto it = hosting.ue.find(tgt.id);
                    hosts = it != hosting.ue.end() && it->second.count(st.microservice) > 0;
                    break;
                }
            }
            if (!hosts) continue;
            const double value = latency.latency(st, tgt);
            if (!(value > 0.0)) {
                throw ValidationError("latency for " + subtask_name(st) + " on '" + tgt.id +
                                      "' must be positive");
            }
            matrix.cells[r][c] = value;
        }
    }
    return matrix;
}

std::vector<int> object_sequence(const OffloadMatrix& matrix, int row) {
    if (row < 0 || row >= static_cast<int>(matrix.subtasks.size())) {
        throw ValidationError("object_sequence: row out of range");
    }
    std::vector<int> seq;
    for (std::size_t c = 0; c < matrix.targets.size(); ++c) {
        if (matrix.cells[row][c].has_value()) seq.push_back(static_cast<int>(c));
    }
    if (seq.empty()) {
        throw InfeasibleError("unschedulable subtask " + subtask_name(matrix.subtasks[row]) +
                              ": no target hosts microservice '" +
                              matrix.subtasks[row].microservice + "'");
    }
    return seq;
}

IntegrationPriority integration_priority(const OffloadMatrix& matrix, int row,
                                         const ServiceCatalog& catalog) {
    const std::vector<int> seq = object_sequence(matrix, row);
    IntegrationPriority priority;
    double best = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double value = *matrix.cells[row][seq[i]];
        if (i == 0 || value < best) {
            best = value;
            priority.main = static_cast<int>(i) + 1;
        }
    }
    const Service* svc = catalog.find(matrix.subtasks[row].parent_service);
    if (svc == nullptr) {
        throw ValidationError("integration_priority: unknown parent service '" +
                              matrix.subtasks[row].parent_service + "'");
    }
    priority.sub = svc->popularity;
    return priority;
}

std::vector<IntegrationPriority> integration_priorities(const OffloadMatrix& matrix,
                                                        const ServiceCatalog& catalog) {
    std::vector<IntegrationPriority> out;
    out.reserve(matrix.subtasks.size());
    for (int r = 0; r < static_cast<int>(matrix.subtasks.size()); ++r) {
        out.push_back(integration_priority(matrix, r, catalog));
    }
    return out;
}

std::vector<int> design_queue(const OffloadMatrix& matrix,
                              const std::vector<IntegrationPriority>& priorities,
                              PriorityOrder order) {
    if (priorities.size() != matrix.subtasks.size()) {
        throw ValidationError("design_queue: one priority per subtask required");
    }
    // Group rows per UE in the order UEs first appear; rows within a UE sort by
    // the intra-UE index.
    std::vector<std::string> ue_order;
    std::map<std::string, std::vector<int>> per_ue;
    for (int r = 0; r < static_cast<int>(matrix.subtasks.size()); ++r) {
        const auto& ue = matrix.subtasks[r].ue_id;
        if (!per_ue.count(ue)) ue_order.push_back(ue);
        per_ue[ue].push_back(r);
    }
    std::map<std::string, int> ue_rank;
    for (std::size_t i = 0; i < ue_order.size(); ++i) ue_rank[ue_order[i]] = static_cast<int>(i);
    for (auto& [ue, rows] : per_ue) {
        std::sort(rows.begin(), rows.end(), [&](int a, int b) {
            return matrix.subtasks[a].index_in_ue < matrix.subtasks[b].index_in_ue;
        });
    }

    auto beats = [&](int a, int b) {
        const auto& pa = priorities[a];
        const auto& pb = priorities[b];
        if (pa.main != pb.main || pa.sub != pb.sub) {
            const bool larger = std::tie(pa.main, pa.sub) > std::tie(pb.main, pb.sub);
            return order == PriorityOrder::LargerFirst ? larger : !larger;
        }
        // Equal priorities round-robin across UEs.
        return std::tie(matrix.subtasks[a].index_in_ue, ue_rank[matrix.subtasks[a].ue_id]) <
               std::tie(matrix.subtasks[b].index_in_ue, ue_rank[matrix.subtasks[b].ue_id]);
    };

    std::map<std::string, std::size_t> next_of; // per UE, index into per_ue rows
    std::vector<int> candidates;                // head subtask of each UE
    for (const auto& ue : ue_order) {
        candidates.push_back(per_ue[ue][0]);
        next_of[ue] = 1;
    }
    std::vector<int> queue;
    queue.reserve(matrix.subtasks.size());
    while (!candidates.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i) {
            if (beats(candidates[i], candidates[best])) best = i;
        }
        const int row = candidates[best];
        queue.push_back(row);
        const auto& ue = matrix.subtasks[row].ue_id;
        const auto& rows = per_ue[ue];
        if (next_of[ue] < rows.size()) {
            candidates[best] = rows[next_of[ue]++];
        } else {
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best));
        }
    }
    return queue;
}

Schedule evaluate_schedule(const std::vector<int>& queue, const OffloadMatrix& matrix,
                           const std::vector<IntegrationPriority>& priorities,
                           const ScheduleContext* context) {
    const double base = context ? context->base_time : 0.0;
    std::map<std::string, double> ue_ready;
    if (context) ue_ready = context->ue_ready;
    std::vector<double> target_free(matrix.targets.size(), base);

    Schedule schedule;
    schedule.makespan = 0.0;
    for (int row : queue) {
        const std::vector<int> seq = object_sequence(matrix, row);
        const int main = priorities[row].main;
        if (main < 1 || main > static_cast<int>(seq.size())) {
            throw ValidationError("evaluate_schedule: main priority out of sequence range for " +
                                  subtask_name(matrix.subtasks[row]));
        }
        const int column = seq[main - 1];
        const Target& target = matrix.targets[column];
        const double latency = *matrix.cells[row][column];

        auto ready_it = ue_ready.find(matrix.subtasks[row].ue_id);
        const double ready = ready_it == ue_ready.end() ? base : std::max(base, ready_it->second);

        ScheduleEntry entry;
        entry.row = row;
        entry.target = target;
        if (target.kind == TargetKind::Cloud) {
            entry.start = ready;
            entry.propagation = true;
        } else {
            entry.start = std::max(ready, target_free[column]);
            entry.propagation = false;
        }
        entry.finish = entry.start + latency;
        if (target.kind != TargetKind::Cloud) target_free[column] = entry.finish;
        ue_ready[matrix.subtasks[row].ue_id] = entry.finish;
        schedule.makespan = std::max(schedule.makespan, entry.finish);
        schedule.entries.push_back(entry);
    }
    return schedule;
}

ScheduleCheck validate_schedule(const Schedule& schedule, const OffloadMatrix& matrix) {
    ScheduleCheck check;
    auto flag = [&](const std::string& what) {
        check.ok = false;
        check.violations.push_back(what);
    };

    std::vector<int> seen(matrix.subtasks.size(), 0);
    std::map<std::string, int> column_of;
    for (std::size_t c = 0; c < matrix.targets.size(); ++c) column_of[matrix.targets[c].id] = static_cast<int>(c);

    for (const auto& entry : schedule.entries) {
        if (entry.row < 0 || entry.row >= static_cast<int>(matrix.subtasks.size())) {
            flag("entry references unknown subtask row");
            continue;
        }
        ++seen[static_cast<std::size_t>(entry.row)];
        const auto name = subtask_name(matrix.subtasks[entry.row]);
        auto cit = column_of.find(entry.target.id);
        if (cit == column_of.end() ||
            !matrix.cells[entry.row][static_cast<std::size_t>(cit->second)].has_value()) {
            flag("target-not-available: " + name + " on '" + entry.target.id + "'");
        }
        if (entry.start < 0.0) flag("negative-start: " + name);
        if (!(entry.finish > entry.start)) flag("nonpositive-duration: " + name);
    }
    for (std::size_t r = 0; r < seen.size(); ++r) {
        if (seen[r] == 0) flag("missing-assignment: " + subtask_name(matrix.subtasks[r]));
        if (seen[r] > 1) flag("duplicate-assignment: " + subtask_name(matrix.subtasks[r]));
    }

    // Intra-UE ordering: a subtask starts no earlier than the finish of the
    // previous subtask of the same UE.
    std::map<std::string, std::vector<const ScheduleEntry*>> per_ue;
    for (const auto& entry : schedule.entries) {
        if (entry.row < 0 || entry.row >= static_cast<int>(matrix.subtasks.size())) continue;
        per_ue[matrix.subtasks[entry.row].ue_id].push_back(&entry);
    }
    for (auto& [ue, entries] : per_ue) {
        std::sort(entries.begin(), entries.end(), [&](const ScheduleEntry* a, const ScheduleEntry* b) {
            return matrix.subtasks[a->row].index_in_ue < matrix.subtasks[b->row].index_in_ue;
        });
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (entries[i]->start + 1e-12 < entries[i - 1]->finish) {
                flag("ue-order: " + subtask_name(matrix.subtasks[entries[i]->row]) +
                     " starts before its predecessor finishes");
            }
        }
    }

    // Per-target FCFS: edge and UE targets run one subtask at a time, in the
    // order they were queued. Cloud targets run in parallel.
    std::map<std::string, std::vector<std::pair<std::size_t, const ScheduleEntry*>>> per_target;
    for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
        const auto& entry = schedule.entries[i];
        if (entry.target.kind == TargetKind::Cloud) continue;
        per_target[entry.target.id].push_back({i, &entry});
    }
    for (auto& [tid, entries] : per_target) {
        for (std::size_t i = 1; i < entries.size(); ++i) {
            const auto* prev = entries[i - 1].second;
            const auto* cur = entries[i].second;
            if (cur->start + 1e-12 < prev->finish) {
                flag("target-overlap: '" + tid + "' runs " +
                     subtask_name(matrix.subtasks[cur->row]) + " before " +
                     subtask_name(matrix.subtasks[prev->row]) + " finishes");
            }
        }
    }
    return check;
}

std::string matrix_to_csv(const OffloadMatrix& matrix) {
    std::ostringstream os;
    os << "subtask";
    for (const auto& t : matrix.targets) os << "," << t.id;
    os << "\n";
    for (std::size_t r = 0; r < matrix.subtasks.size(); ++r) {
        os << subtask_name(matrix.subtasks[r]);
        for (std::size_t c = 0; c < matrix.targets.size(); ++c) {
            os << ",";
            if (matrix.cells[r][c].has_value()) {
                os << fmt_number(*matrix.cells[r][c]);
            } else {
                os << "-";
            }
        }
        os << "\n";
    }
    return os.str();
}

OffloadMatrix matrix_from_csv(std::istream& in, const std::vector<Target>& targets) {
    OffloadMatrix matrix;
    matrix.targets = targets;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("matrix csv: missing header");
    {
        std::stringstream header(line);
        std::string cell;
        std::getline(header, cell, ',');
        std::size_t idx = 0;
        while (std::getline(header, cell, ',')) {
            if (idx >= targets.size() || targets[idx].id != cell) {
                throw ValidationError("matrix csv: header column '" + cell +
                                      "' does not match the expected target order");
            }
            ++idx;
        }
        if (idx != targets.size()) throw ValidationError("matrix csv: header column count mismatch");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        Subtask st;
        // row label format: task_<ue>_sub<n>
        const auto sub_pos = cell.rfind("_sub");
        if (cell.rfind("task_", 0) != 0 || sub_pos == std::string::npos) {
            throw ValidationError("matrix csv: bad row label '" + cell + "'");
        }
        st.ue_id = cell.substr(5, sub_pos - 5);
        st.index_in_ue = std::stoi(cell.substr(sub_pos + 4));
        matrix.subtasks.push_back(st);
        std::vector<std::optional<double>> cells;
        while (std::getline(row, cell, ',')) {
            if (cell == "-" || cell.empty()) {
                cells.emplace_back(std::nullopt);
            } else {
                cells.emplace_back(std::stod(cell));
            }
        }
        if (cells.size() != targets.size()) {
            throw ValidationError("matrix csv: row '" + subtask_name(st) + "' has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(targets.size()));
        }
        matrix.cells.push_back(std::move(cells));
    }
    return matrix;
}

std::string schedule_to_csv(const Schedule& schedule, const OffloadMatrix& matrix) {
    std::ostringstream os;
    os << "subtask,target,start,finish,delay_type\n";
    for (const auto& entry : schedule.entries) {
        os << subtask_name(matrix.subtasks[entry.row]) << "," << entry.target.id << ","
           << fmt_number(entry.start) << "," << fmt_number(entry.finish) << ","
           << (entry.propagation ? "propagation" : "processing") << "\n";
    }
    return os.str();
}

} // namespace mecsim
