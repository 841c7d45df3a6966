#pragma once
// End-to-end deployment: catalog + servers + required edge offloading rate in,
// chosen server subtree with de-redundant microservice placement out.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mecsim/adgraph.hpp"
#include "mecsim/kmst.hpp"

namespace mecsim {

inline constexpr std::int64_t kDefaultKappa = 1000;

struct DeploymentPlan {
    std::vector<std::string> chosen_servers;
    // Microservices each chosen server retains after shared copies are
    // de-duplicated along the tree edges.
    std::map<std::string, std::vector<std::string>> edge_microservices;
    std::vector<std::string> cloud_set;          // complete service universe
    std::vector<std::string> deployed_services;  // union over chosen servers
    std::int64_t footprint = 0;                  // de-redundant edge storage
    double achieved_rate = 0.0;                  // sum of node rewards over chosen servers
    std::optional<double> theta;                 // de-redundancy degree, absent when footprint 0
    TreeSolution tree;                           // forest when the graph is disconnected
    bool feasible = false;
    std::vector<std::string> warnings;
    // Inputs preserved so plans can be re-verified later.
    double required_rate = 0.0;
    std::int64_t kappa = kDefaultKappa;
};

// Builds the AD-graph, reduces to a k-MST instance, solves (exactly within
// exact_limit core vertices, heuristically beyond), maps the tree back to
// servers and assigns shared microservices to single owners. Disconnected
// graphs are solved per component and merged over integerized reward levels.
DeploymentPlan solve_deployment(const ServiceCatalog& catalog,
                                const std::vector<MecServer>& servers, double required_rate,
                                std::int64_t kappa = kDefaultKappa,
                                int exact_limit = kDefaultExactLimit);

// (footprint - residual_overlap) / footprint. Errors on zero footprint.
double deredundancy_degree(std::int64_t footprint, std::int64_t residual_overlap);

struct PlanCheck {
    bool ok = true;
    std::vector<std::string> violations;
};

// Re-derives the instance from catalog + servers and checks the plan against
// it: tree/forest shape, quota, footprint arithmetic, capacities, retention.
PlanCheck verify_plan(const DeploymentPlan& plan, const ServiceCatalog& catalog,
                      const std::vector<MecServer>& servers);

std::string plan_to_json(const DeploymentPlan& plan);
DeploymentPlan plan_from_json(const std::string& text);

} // namespace mecsim
