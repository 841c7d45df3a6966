#include "mecsim/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace mecsim {

const Service* ServiceCatalog::find(const std::string& service_id) const {
    for (const auto& s : services) {
        if (s.id == service_id) return &s;
    }
    return nullptr;
}

std::int64_t ServiceCatalog::size_of(const std::string& microservice_id) const {
    auto it = microservice_sizes.find(microservice_id);
    return it == microservice_sizes.end() ? 1 : it->second;
}

double ServiceCatalog::total_popularity() const {
    double sum = 0.0;
    for (const auto& s : services) sum += s.popularity;
    return sum;
}

void validate_catalog(const ServiceCatalog& catalog) {
    if (catalog.deployment_threshold < 0.0 || catalog.deployment_threshold > 1.0) {
        throw ValidationError("catalog: deployment_threshold must be in [0,1]");
    }
    std::unordered_set<std::string> seen;
    for (const auto& s : catalog.services) {
        if (s.id.empty()) throw ValidationError("catalog: service with empty id");
        if (!seen.insert(s.id).second) {
            throw ValidationError("catalog: duplicate service id '" + s.id + "'");
        }
        if (s.popularity < 0.0 || s.popularity > 1.0) {
            throw ValidationError("catalog: service '" + s.id + "' popularity out of [0,1]");
        }
        if (s.microservices.empty()) {
            throw ValidationError("catalog: service '" + s.id + "' has no microservices");
        }
        std::unordered_set<std::string> micro_seen;
        for (const auto& m : s.microservices) {
            if (!micro_seen.insert(m).second) {
                throw ValidationError("catalog: service '" + s.id + "' lists microservice '" + m +
                                      "' twice");
            }
        }
    }
    for (const auto& [id, size] : catalog.microservice_sizes) {
        if (size < 0) throw ValidationError("catalog: microservice '" + id + "' has negative size");
    }
    if (!catalog.services.empty()) {
        const double sum = catalog.total_popularity();
        if (std::abs(sum - 1.0) > kPopularityTolerance) {
            throw ValidationError("catalog: popularities sum to " + std::to_string(sum) +
                                  ", expected 1 within tolerance");
        }
    }
}

double hit_rate(const ServiceCatalog& catalog, const std::set<std::string>& deployed) {
    double sum = 0.0;
    for (const auto& id : deployed) {
        const Service* s = catalog.find(id);
        if (s == nullptr) {
            throw ValidationError("hit_rate: unknown service id '" + id + "' in deployed set");
        }
        sum += s->popularity;
    }
    return sum;
}

namespace {

void check_pushable(const ServiceCatalog& catalog, const Service& fresh) {
    if (!(fresh.popularity > 0.0 && fresh.popularity < 1.0)) {
        throw ValidationError("push_service: popularity of '" + fresh.id +
                              "' must lie strictly inside (0,1)");
    }
    if (fresh.microservices.empty()) {
        throw ValidationError("push_service: service '" + fresh.id + "' has no microservices");
    }
    if (catalog.find(fresh.id) != nullptr) {
        throw ValidationError("push_service: duplicate service id '" + fresh.id + "'");
    }
}

} // namespace

ServiceCatalog push_service(const ServiceCatalog& catalog, const Service& fresh) {
    check_pushable(catalog, fresh);
    ServiceCatalog next = catalog;
    const double keep = 1.0 - fresh.popularity;
    for (auto& s : next.services) s.popularity *= keep;
    next.services.push_back(fresh);
    return next;
}

double hit_rate_after_push(const ServiceCatalog& catalog, const std::set<std::string>& deployed,
                           const Service& fresh, bool cached_at_edge) {
    check_pushable(catalog, fresh);
    const double base = hit_rate(catalog, deployed);
    const double not_cached = base * (1.0 - fresh.popularity);
    return cached_at_edge ? not_cached + fresh.popularity : not_cached;
}

void validate_distribution(const NewServiceDistribution& dist) {
    if (dist.arrival_prob < 0.0 || dist.arrival_prob > 1.0) {
        throw ValidationError("new-service distribution: arrival probability out of [0,1]");
    }
    if (dist.deployment_threshold < 0.0 || dist.deployment_threshold > 1.0) {
        throw ValidationError("new-service distribution: deployment threshold out of [0,1]");
    }
    for (double g : dist.candidate_popularities) {
        if (g < dist.deployment_threshold || g > 1.0) {
            throw ValidationError(
                "new-service distribution: candidate popularity " + std::to_string(g) +
                " outside [threshold,1]");
        }
    }
}

std::optional<double> sample_new_service(const NewServiceDistribution& dist, Rng& rng) {
    validate_distribution(dist);
    if (dist.arrival_prob > 0.0 && dist.candidate_popularities.empty()) {
        throw ValidationError(
            "new-service distribution: no candidate popularities but arrival probability > 0");
    }
    if (!bernoulli(rng, dist.arrival_prob)) return std::nullopt;
    return pick(rng, dist.candidate_popularities);
}

} // namespace mecsim
