// Acceptance suite: end-to-end checks with pinned tolerances, one pass/fail
// line per criterion. Arguments: <cli-binary> <fixtures-dir>.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mecsim/scenario.hpp"
#include "testutil.hpp"

using namespace mecsim;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
std::string g_fixtures;
int g_failures = 0;

void report(int index, const std::string& name, bool pass, double seconds,
            const std::string& detail) {
    std::printf("%s  criterion %d: %s (%.1f s)%s%s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                seconds, detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run(int index, const std::string& name, const std::function<bool(std::string&)>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(index, name, pass, seconds, detail);
}

// --- criterion 1: the reduction preserves quota optima ----------------------

bool reduction_equivalence(std::string& detail) {
    Rng rng(20240901);
    int checked = 0;
    const auto start = std::chrono::steady_clock::now();
    while (checked < 200) {
        const auto catalog = testutil::random_catalog(rng, 5, 9, 1, 3);
        const int server_count = static_cast<int>(uniform_int(rng, 2, 6));
        const auto servers = testutil::random_servers(rng, catalog, server_count, 16);
        const AdGraph graph = build_ad_graph(servers, catalog);
        const std::int64_t kappa = uniform_int(rng, 2, 10);
        const double rate = uniform_unit(rng);

        std::vector<std::int64_t> rewards;
        for (const auto& node : graph.nodes) {
            rewards.push_back(testutil::scale_reward(node.reward, kappa));
        }
        const std::int64_t quota = testutil::scale_quota(rate, kappa);
        const auto oracle = testutil::oracle_quota(graph, rewards, quota);

        KmstGraph instance;
        try {
            instance = to_kmst_instance(graph, rate, kappa);
        } catch (const InfeasibleError&) {
            std::int64_t total = 0;
            for (auto r : rewards) total += r;
            if (total >= quota) {
                detail = "reduction rejected a reachable quota";
                return false;
            }
            ++checked;
            continue;
        }
        TreeSolution sol;
        bool feasible = true;
        try {
            sol = kmst_exact(instance, instance.k_target);
        } catch (const InfeasibleError&) {
            feasible = false;
        }
        // the oracle enumerates connected subsets; a disconnected optimum can
        // exist only across components, which the transformed instance cannot
        // span either, so feasibility must agree
        if (feasible != oracle.has_value()) {
            detail = "feasibility disagreement at instance " + std::to_string(checked);
            return false;
        }
        if (feasible) {
            const int n = static_cast<int>(graph.nodes.size());
            std::vector<int> induced;
            for (int v : sol.vertices) {
                if (v < n) induced.push_back(v);
            }
            std::int64_t induced_reward = 0;
            for (int v : induced) induced_reward += rewards[static_cast<std::size_t>(v)];
            const auto induced_value = testutil::oracle_quota_value(graph, induced);
            if (sol.objective != oracle->objective || !induced_value.has_value() ||
                *induced_value != oracle->objective || induced_reward < quota) {
                detail = "objective mismatch: solver " + std::to_string(sol.objective) +
                         " vs enumeration " + std::to_string(oracle->objective);
                return false;
            }
        }
        ++checked;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail = std::to_string(checked) + " instances";
    return seconds < 60.0;
}

// --- criterion 2: exact solver vs exhaustive enumeration --------------------

bool solver_oracle_suite(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(7777);
    int instances = 0;
    // all topologies on 2..5 vertices, one seeded weight assignment each
    for (int n = 2; n <= 5; ++n) {
        const int pairs = n * (n - 1) / 2;
        for (std::uint32_t edge_mask = 0; edge_mask < (1u << pairs); ++edge_mask) {
            KmstGraph graph;
            graph.vertices.resize(static_cast<std::size_t>(n));
            for (auto& v : graph.vertices) v.reward = uniform_int(rng, 0, 3);
            int bit = 0;
            for (int u = 0; u < n; ++u) {
                for (int v = u + 1; v < n; ++v, ++bit) {
                    if ((edge_mask >> bit) & 1) {
                        graph.edges.push_back({u, v, uniform_int(rng, -2, 3)});
                    }
                }
            }
            std::int64_t total = 0;
            for (const auto& v : graph.vertices) total += v.reward;
            for (std::int64_t k : {std::int64_t{1}, (total + 1) / 2, total, total + 1}) {
                const auto oracle = testutil::oracle_kmst(graph, k);
                std::int64_t got = 0;
                bool feasible = true;
                try {
                    got = kmst_exact(graph, k).objective;
                } catch (const InfeasibleError&) {
                    feasible = false;
                }
                if (feasible != oracle.has_value() || (feasible && got != *oracle)) {
                    detail = "mismatch on a small topology";
                    return false;
                }
                ++instances;
            }
        }
    }
    // 200 random 8-vertex instances
    for (int trial = 0; trial < 200; ++trial) {
        const auto graph = testutil::random_kmst_graph(rng, 8, 0.45, -2, 3, 3);
        std::int64_t total = 0;
        for (const auto& v : graph.vertices) total += v.reward;
        const std::int64_t k = uniform_int(rng, 1, std::max<std::int64_t>(1, total + 1));
        const auto oracle = testutil::oracle_kmst(graph, k);
        std::int64_t got = 0;
        bool feasible = true;
        try {
            got = kmst_exact(graph, k).objective;
        } catch (const InfeasibleError&) {
            feasible = false;
        }
        if (feasible != oracle.has_value() || (feasible && got != *oracle)) {
            detail = "mismatch on a random 8-vertex instance";
            return false;
        }
        ++instances;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail = std::to_string(instances) + " instances";
    return seconds < 120.0;
}

// --- criterion 3: aggregated vs materialized stars ---------------------------

bool star_fidelity(std::string& detail) {
    Rng rng(555);
    int checked = 0;
    while (checked < 100) {
        const auto catalog = testutil::random_catalog(rng, 4, 8, 1, 3);
        const auto servers =
            testutil::random_servers(rng, catalog, static_cast<int>(uniform_int(rng, 2, 4)), 12);
        const AdGraph graph = build_ad_graph(servers, catalog);
        KmstGraph aggregated;
        try {
            aggregated = to_kmst_instance(graph, 0.2 + 0.6 * uniform_unit(rng),
                                          uniform_int(rng, 2, 8));
        } catch (const InfeasibleError&) {
            continue;
        }
        const KmstGraph materialized = star_expand(aggregated);
        TreeSolution a, b;
        bool a_ok = true, b_ok = true;
        try {
            a = kmst_exact(aggregated, aggregated.k_target);
        } catch (const InfeasibleError&) {
            a_ok = false;
        }
        try {
            b = kmst_exact(materialized, materialized.k_target);
        } catch (const InfeasibleError&) {
            b_ok = false;
        }
        if (a_ok != b_ok) {
            detail = "feasibility differs between forms";
            return false;
        }
        if (a_ok) {
            const int n = static_cast<int>(graph.nodes.size());
            auto originals = [&](const TreeSolution& sol) {
                std::vector<int> out;
                for (int v : sol.vertices) {
                    if (v < n) out.push_back(v);
                }
                return out;
            };
            if (a.objective != b.objective || originals(a) != originals(b)) {
                detail = "aggregated and materialized optima differ";
                return false;
            }
        }
        ++checked;
    }
    detail = "100 instances";
    return true;
}

// --- criterion 4: popularity algebra ----------------------------------------

bool popularity_algebra(std::string& detail) {
    Rng rng(31337);
    for (int sequence = 0; sequence < 10000; ++sequence) {
        ServiceCatalog catalog;
        const int base = static_cast<int>(uniform_int(rng, 1, 4));
        double left = 1.0;
        for (int i = 0; i < base; ++i) {
            const double p = i + 1 == base ? left : left * (0.2 + 0.6 * uniform_unit(rng));
            catalog.services.push_back({"s" + std::to_string(i), p, {"m"}});
            left -= i + 1 == base ? 0.0 : p;
        }
        const int pushes = static_cast<int>(uniform_int(rng, 1, 6));
        for (int i = 0; i < pushes; ++i) {
            catalog = push_service(
                catalog, {"n" + std::to_string(sequence) + "_" + std::to_string(i),
                          0.01 + 0.9 * uniform_unit(rng), {"m"}});
        }
        double sum = 0.0;
        for (const auto& s : catalog.services) sum += s.popularity;
        if (std::abs(sum - 1.0) > 1e-9) {
            detail = "normalization drifted to " + std::to_string(sum);
            return false;
        }
    }

    // composition identity, exact on binary fractions
    ServiceCatalog exact;
    exact.services = {{"s1", 0.5, {"m"}}, {"s2", 0.25, {"m"}}, {"s3", 0.25, {"m"}}};
    const std::set<std::string> deployed{"s1", "s3"};
    const Service fresh{"s4", 0.25, {"m"}};
    if (hit_rate_after_push(exact, deployed, fresh, true) -
            hit_rate_after_push(exact, deployed, fresh, false) !=
        0.25) {
        detail = "exact composition identity failed";
        return false;
    }
    for (int trial = 0; trial < 1000; ++trial) {
        const double p = 0.01 + 0.97 * uniform_unit(rng);
        const Service f{"sx", p, {"m"}};
        const double diff = hit_rate_after_push(exact, deployed, f, true) -
                            hit_rate_after_push(exact, deployed, f, false);
        if (std::abs(diff - p) > 1e-12) {
            detail = "floating composition identity beyond 1e-12";
            return false;
        }
    }
    detail = "10000 sequences";
    return true;
}

// --- criterion 5: bundled fixture goldens ------------------------------------

bool fixture_golden(std::string& detail) {
    const Scenario scenario = load_scenario(g_fixtures + "/three_ue.json");
    std::ifstream plan_in(g_fixtures + "/three_ue_plan.json");
    std::ostringstream plan_text;
    plan_text << plan_in.rdbuf();
    const DeploymentPlan plan = plan_from_json(plan_text.str());
    const HostingInfo hosting =
        hosting_from_plan(plan, scenario.clouds, scenario.ue_ids, scenario.d2d_caches);
    const auto latency = make_latency_provider(scenario);
    const OffloadMatrix matrix = build_offload_matrix(scenario.tasks, hosting, *latency);

    auto value = [&](int row, const std::string& target) -> std::optional<double> {
        for (std::size_t c = 0; c < matrix.targets.size(); ++c) {
            if (matrix.targets[c].id == target) return matrix.cells[row][c];
        }
        return std::nullopt;
    };
    struct Cell {
        int row;
        const char* target;
        double expect;
    };
    const std::vector<Cell> cells = {
        {0, "M1", 5},  {0, "M2", 4},  {0, "Cloud1", 7},  {0, "UE3", 8},  {1, "M2", 8},
        {1, "Cloud1", 10}, {2, "M1", 2}, {2, "Cloud1", 6}, {2, "UE1", 5}, {3, "M1", 8},
        {3, "Cloud1", 5},  {4, "M2", 3}, {4, "Cloud1", 7}, {4, "UE1", 9}, {4, "UE2", 6}};
    int present = 0;
    for (const auto& cell : cells) {
        const auto got = value(cell.row, cell.target);
        if (!got || *got != cell.expect) {
            detail = "matrix cell mismatch";
            return false;
        }
        ++present;
    }
    for (std::size_t r = 0; r < matrix.cells.size(); ++r) {
        for (const auto& cell : matrix.cells[r]) present -= cell.has_value() ? 1 : 0;
    }
    if (present != 0) {
        detail = "matrix has extra cells";
        return false;
    }

    const auto seq = object_sequence(matrix, 4);
    std::vector<std::string> ids;
    for (int c : seq) ids.push_back(matrix.targets[static_cast<std::size_t>(c)].id);
    if (ids != std::vector<std::string>{"M2", "Cloud1", "UE1", "UE2"}) {
        detail = "object sequence mismatch";
        return false;
    }

    const auto priorities = integration_priorities(matrix, scenario.catalog);
    const auto queue = design_queue(matrix, priorities);
    // the candidate set starts as the per-UE heads {t11, t21, t31}; the first
    // pop must be t31 under the documented priority order
    if (queue.size() != 5 || queue[0] != 3) {
        detail = "queue prefix mismatch";
        return false;
    }
    detail = "matrix, sequence, and queue prefix reproduced";
    return true;
}

// --- criterion 6: scheduling invariants --------------------------------------

bool scheduling_invariants(std::string& detail) {
    Rng rng(606060);
    for (int trial = 0; trial < 1000; ++trial) {
        auto inst = testutil::random_offload_instance(rng, 4, 3, 3, 2);
        const auto priorities = integration_priorities(inst.matrix, inst.catalog);
        const auto queue = design_queue(inst.matrix, priorities);
        if (queue.size() != inst.matrix.subtasks.size()) {
            detail = "queue is not a permutation";
            return false;
        }
        std::map<std::string, int> last;
        for (int row : queue) {
            const auto& st = inst.matrix.subtasks[static_cast<std::size_t>(row)];
            auto it = last.find(st.ue_id);
            if (it != last.end() && st.index_in_ue <= it->second) {
                detail = "intra-UE order broken";
                return false;
            }
            last[st.ue_id] = st.index_in_ue;
        }
        const Schedule schedule = evaluate_schedule(queue, inst.matrix, priorities);
        if (!validate_schedule(schedule, inst.matrix).ok) {
            detail = "evaluator output failed validation";
            return false;
        }
        const double scale = 0.5 + 4.0 * uniform_unit(rng);
        for (auto& row : inst.matrix.cells) {
            for (auto& cell : row) {
                if (cell.has_value()) *cell *= scale;
            }
        }
        const auto rescaled = integration_priorities(inst.matrix, inst.catalog);
        for (std::size_t i = 0; i < priorities.size(); ++i) {
            if (priorities[i].main != rescaled[i].main) {
                detail = "main priority changed under row scaling";
                return false;
            }
        }
    }
    detail = "1000 scenarios";
    return true;
}

// --- criterion 7: measured rate vs analytic hit rate -------------------------

bool statistical_consistency(std::string& detail) {
    double worst = 0.0;
    for (std::uint64_t seed : {7ull, 8ull, 9ull}) {
        const SimConfig config = testutil::rate_consistency_config();
        const auto rows = run_simulation(config, seed);
        int subtasks = 0;
        for (const auto& m : rows) subtasks += m.subtasks;
        if (subtasks < 1000) {
            detail = "fewer than 1000 subtasks";
            return false;
        }
        const double measured = testutil::weighted_edge_rate(rows);
        double analytic = 0.0;
        for (const auto& m : rows) analytic += m.analytic_hit_rate;
        analytic /= static_cast<double>(rows.size());
        worst = std::max(worst, std::abs(measured - analytic));
    }
    std::ostringstream os;
    os.precision(4);
    os << "max |measured-analytic| = " << worst;
    detail = os.str();
    return worst <= 0.05;
}

// --- criterion 8: trend reproduction -----------------------------------------

bool trend_reproduction(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    std::ostringstream notes;

    // (a) fixed-window delay dips near the predicted UE count
    {
        const std::vector<int> grid = {14, 28, 42, 56, 70};
        std::vector<double> delay;
        for (int ues : grid) {
            SimConfig config = testutil::window_sweep_config();
            config.ue_ids.clear();
            for (int i = 1; i <= ues; ++i) config.ue_ids.push_back("u" + std::to_string(i));
            double total = 0.0;
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                total += testutil::weighted_mean_delay(run_simulation(config, seed));
            }
            delay.push_back(total / 10.0);
        }
        const double predicted =
            critical_ues(testutil::window_sweep_config().settings.window.size,
                         testutil::window_sweep_config().settings.task_arrival);
        std::size_t predicted_index = 0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (std::abs(grid[i] - predicted) < std::abs(grid[predicted_index] - predicted)) {
                predicted_index = i;
            }
        }
        const std::size_t argmin = static_cast<std::size_t>(
            std::min_element(delay.begin(), delay.end()) - delay.begin());
        notes << "window argmin at " << grid[argmin] << " UEs (predicted " << predicted << ")";
        if (std::abs(static_cast<int>(argmin) - static_cast<int>(predicted_index)) > 1) {
            detail = notes.str();
            return false;
        }
    }

    // (b) edge offload rate non-decreasing in the MEC count
    {
        std::vector<double> rate;
        for (int mecs : {1, 2, 4, 8}) {
            SimConfig config = testutil::mecs_sweep_config();
            config.servers.clear();
            for (int i = 1; i <= mecs; ++i) config.servers.push_back({"M" + std::to_string(i), 6, {}});
            double total = 0.0;
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                total += testutil::weighted_edge_rate(run_simulation(config, seed));
            }
            rate.push_back(total / 10.0);
        }
        notes << "; mec rates";
        for (double r : rate) notes << " " << r;
        for (std::size_t i = 1; i < rate.size(); ++i) {
            if (rate[i] < rate[i - 1]) {
                detail = notes.str();
                return false;
            }
        }
    }

    // (c) de-redundancy degree stays above 0.7 at modest rate requirements
    {
        for (double rate : {0.2, 0.4, 0.6}) {
            double total = 0.0;
            int count = 0;
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                SimConfig config = testutil::theta_config();
                config.settings.required_rate = rate;
                for (const auto& m : run_simulation(config, seed)) {
                    if (m.theta.has_value()) {
                        total += *m.theta;
                        ++count;
                    }
                }
            }
            const double mean = count > 0 ? total / count : 0.0;
            notes << "; theta(" << rate << ") = " << mean;
            if (mean < 0.7) {
                detail = notes.str();
                return false;
            }
        }
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail = notes.str();
    return seconds <= 300.0;
}

// --- criterion 9: sweep determinism ------------------------------------------

bool sweep_determinism(std::string& detail) {
    const fs::path dir = fs::temp_directory_path() / "mecsim_acceptance_sweep";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string args = " sweep " + g_fixtures +
                             "/sim_small.json --param bs --values 0.1,0.5,0.9 --slots 10 --seed 13 "
                             "--out ";
    const std::string run_a = g_cli + args + (dir / "a").string() + " > /dev/null 2>&1";
    const std::string run_b = g_cli + args + (dir / "b").string() + " > /dev/null 2>&1";
    if (std::system(run_a.c_str()) != 0 || std::system(run_b.c_str()) != 0) {
        detail = "sweep command failed";
        return false;
    }
    int files = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        std::ifstream fa(entry.path(), std::ios::binary);
        std::ifstream fb(dir / "b" / entry.path().filename(), std::ios::binary);
        std::ostringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str() != sb.str() || sa.str().empty()) {
            detail = "outputs differ for " + entry.path().filename().string();
            return false;
        }
        ++files;
    }
    detail = std::to_string(files) + " files byte-identical";
    return files == 4; // 3 grid points + manifest
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <cli-binary> <fixtures-dir>\n";
        return 2;
    }
    g_cli = argv[1];
    g_fixtures = argv[2];

    run(1, "reduction preserves quota optima", reduction_equivalence);
    run(2, "exact solver matches exhaustive enumeration", solver_oracle_suite);
    run(3, "aggregated and materialized stars agree", star_fidelity);
    run(4, "popularity algebra stays normalized and composable", popularity_algebra);
    run(5, "bundled fixture reproduces matrix, sequence, and queue", fixture_golden);
    run(6, "scheduling invariants hold on random scenarios", scheduling_invariants);
    run(7, "measured edge rate tracks the analytic hit rate", statistical_consistency);
    run(8, "qualitative trends: window dip, MEC growth, de-redundancy", trend_reproduction);
    run(9, "sweep reruns are byte-identical", sweep_determinism);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
