#pragma once
// Service catalog: the probability space of task types. Services are sets of
// microservices with a popularity; popularities always sum to 1. New services
// arrive via a Bernoulli process and rescale existing popularities.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mecsim/errors.hpp"
#include "mecsim/random.hpp"

namespace mecsim {

// Popularity sums accumulate rounding under repeated rescaling; every equality
// test on popularity mass uses this tolerance.
inline constexpr double kPopularityTolerance = 1e-9;

struct Microservice {
    std::string id;
    std::int64_t size = 1; // storage units
};

struct Service {
    std::string id;
    double popularity = 0.0; // in [0,1]
    std::vector<std::string> microservices; // non-empty, ids
};

struct ServiceCatalog {
    std::vector<Service> services;
    // Storage size per microservice id; ids not listed have size 1.
    std::map<std::string, std::int64_t> microservice_sizes;
    double deployment_threshold = 0.0; // minimum popularity a new service may carry
    int slot_index = 0;

    const Service* find(const std::string& service_id) const;
    std::int64_t size_of(const std::string& microservice_id) const;
    double total_popularity() const;
};

// Throws ValidationError on duplicate ids, popularity out of range, empty
// microservice sets, or a popularity sum off 1 by more than the tolerance.
void validate_catalog(const ServiceCatalog& catalog);

// Popularity mass of the deployed service set. Unknown ids are an error.
double hit_rate(const ServiceCatalog& catalog, const std::set<std::string>& deployed);

// Rescales every existing popularity by (1 - p_new) and appends the new
// service; the result sums to 1 again.
ServiceCatalog push_service(const ServiceCatalog& catalog, const Service& fresh);

// Hit rate after the push: base*(1-p) when the new service stays cloud-only,
// plus p once it is cached at the edge.
double hit_rate_after_push(const ServiceCatalog& catalog, const std::set<std::string>& deployed,
                           const Service& fresh, bool cached_at_edge);

// Candidate popularities for newly arriving services. Values below the
// deployment threshold are rejected at construction; services that would fall
// under the threshold are never generated.
struct NewServiceDistribution {
    std::vector<double> candidate_popularities;
    double arrival_prob = 0.0; // Bernoulli arrival probability per slot
    double deployment_threshold = 0.0;
};

void validate_distribution(const NewServiceDistribution& dist);

// With probability arrival_prob returns one candidate popularity drawn
// uniformly; otherwise nullopt ("no service pushed this slot").
std::optional<double> sample_new_service(const NewServiceDistribution& dist, Rng& rng);

} // namespace mecsim
