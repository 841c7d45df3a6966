#include <doctest.h>

#include <cmath>

#include "mecsim/catalog.hpp"

using namespace mecsim;

namespace {

ServiceCatalog three_services() {
    ServiceCatalog catalog;
    catalog.services = {{"s1", 0.5, {"m1"}}, {"s2", 0.3, {"m2"}}, {"s3", 0.2, {"m3"}}};
    validate_catalog(catalog);
    return catalog;
}

} // namespace

TEST_SUITE("catalog") {

TEST_CASE("hit rate sums deployed popularity") {
    const auto catalog = three_services();
    CHECK(hit_rate(catalog, {"s1", "s3"}) == doctest::Approx(0.7));
    CHECK(hit_rate(catalog, {}) == 0.0);
    CHECK(hit_rate(catalog, {"s1", "s2", "s3"}) == doctest::Approx(1.0));
}

TEST_CASE("hit rate rejects unknown ids by name") {
    const auto catalog = three_services();
    CHECK_THROWS_WITH_AS(hit_rate(catalog, {"nope"}),
                         doctest::Contains("unknown service id 'nope'"), ValidationError);
}

TEST_CASE("push rescales old popularities") {
    const auto catalog = three_services();
    const auto next = push_service(catalog, {"s4", 0.2, {"m4"}});
    REQUIRE(next.services.size() == 4);
    CHECK(next.services[0].popularity == doctest::Approx(0.4));
    CHECK(next.services[1].popularity == doctest::Approx(0.24));
    CHECK(next.services[2].popularity == doctest::Approx(0.16));
    CHECK(next.services[3].popularity == doctest::Approx(0.2));
    CHECK(next.total_popularity() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("push with vanishing popularity leaves the catalog unchanged") {
    const auto catalog = three_services();
    const auto next = push_service(catalog, {"s4", 1e-15, {"m4"}});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(next.services[i].popularity - catalog.services[i].popularity) < 1e-9);
    }
}

TEST_CASE("repeated pushes stay normalized") {
    auto catalog = three_services();
    double brute = 0.0;
    for (int i = 0; i < 5; ++i) {
        catalog = push_service(catalog, {"n" + std::to_string(i), 0.1, {"mx"}});
    }
    for (const auto& s : catalog.services) brute += s.popularity;
    CHECK(std::abs(brute - 1.0) <= kPopularityTolerance);
}

TEST_CASE("push preserves the relative order of old popularities") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        ServiceCatalog catalog;
        double left = 1.0;
        for (int i = 0; i < 5; ++i) {
            const double p = i == 4 ? left : left * (0.2 + 0.3 * uniform_unit(rng));
            catalog.services.push_back({"s" + std::to_string(i), p, {"m"}});
            left -= i == 4 ? 0.0 : p;
        }
        const auto next = push_service(catalog, {"fresh", 0.05 + 0.9 * uniform_unit(rng), {"m"}});
        for (std::size_t a = 0; a < 5; ++a) {
            for (std::size_t b = a + 1; b < 5; ++b) {
                const bool before = catalog.services[a].popularity < catalog.services[b].popularity;
                const bool after = next.services[a].popularity < next.services[b].popularity;
                CHECK(before == after);
            }
        }
    }
}

TEST_CASE("push rejects bad inputs") {
    const auto catalog = three_services();
    CHECK_THROWS_AS(push_service(catalog, {"s1", 0.2, {"m"}}), ValidationError);
    CHECK_THROWS_AS(push_service(catalog, {"s9", 0.0, {"m"}}), ValidationError);
    CHECK_THROWS_AS(push_service(catalog, {"s9", 1.0, {"m"}}), ValidationError);
}

TEST_CASE("hit rate after push follows the cached/uncached split") {
    const auto catalog = three_services();
    const Service fresh{"s4", 0.2, {"m4"}};
    const std::set<std::string> deployed{"s1", "s3"}; // base 0.7
    CHECK(hit_rate_after_push(catalog, deployed, fresh, false) == doctest::Approx(0.56));
    CHECK(hit_rate_after_push(catalog, deployed, fresh, true) == doctest::Approx(0.76));
}

TEST_CASE("caching the new service adds exactly its popularity") {
    // binary fractions keep the identity exact in floating point
    ServiceCatalog catalog;
    catalog.services = {{"s1", 0.5, {"m1"}}, {"s2", 0.25, {"m2"}}, {"s3", 0.25, {"m3"}}};
    const Service fresh{"s4", 0.25, {"m4"}};
    const std::set<std::string> deployed{"s1", "s2"};
    const double uncached = hit_rate_after_push(catalog, deployed, fresh, false);
    const double cached = hit_rate_after_push(catalog, deployed, fresh, true);
    CHECK(cached - uncached == 0.25);

    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const double p = 0.05 + 0.9 * uniform_unit(rng);
        const Service f{"sx", p, {"mx"}};
        const double diff = hit_rate_after_push(catalog, deployed, f, true) -
                            hit_rate_after_push(catalog, deployed, f, false);
        CHECK(std::abs(diff - p) < 1e-12);
    }
}

TEST_CASE("hit rate is monotone under set inclusion") {
    const auto catalog = three_services();
    const double small = hit_rate(catalog, {"s2"});
    const double larger = hit_rate(catalog, {"s2", "s3"});
    const double all = hit_rate(catalog, {"s1", "s2", "s3"});
    CHECK(small <= larger);
    CHECK(larger <= all);
}

TEST_CASE("sampling respects the arrival probability") {
    Rng rng(42);
    NewServiceDistribution never{{0.3}, 0.0, 0.0};
    for (int i = 0; i < 100; ++i) CHECK_FALSE(sample_new_service(never, rng).has_value());

    NewServiceDistribution always{{0.3}, 1.0, 0.0};
    for (int i = 0; i < 100; ++i) {
        const auto drawn = sample_new_service(always, rng);
        REQUIRE(drawn.has_value());
        CHECK(*drawn == 0.3);
    }
}

TEST_CASE("sampling matches the two-point distribution empirically") {
    Rng rng(7);
    NewServiceDistribution dist{{0.2, 0.4}, 0.5, 0.0};
    int absent = 0, low = 0, high = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const auto drawn = sample_new_service(dist, rng);
        if (!drawn) {
            ++absent;
        } else if (*drawn == 0.2) {
            ++low;
        } else {
            ++high;
        }
    }
    CHECK(std::abs(absent / double(draws) - 0.5) < 0.01);
    CHECK(std::abs(low / double(draws) - 0.25) < 0.01);
    CHECK(std::abs(high / double(draws) - 0.25) < 0.01);
}

TEST_CASE("sampling errors on an empty candidate set with positive arrivals") {
    Rng rng(1);
    NewServiceDistribution bad{{}, 0.5, 0.0};
    CHECK_THROWS_AS(sample_new_service(bad, rng), ValidationError);
}

TEST_CASE("candidates below the deployment threshold are rejected at construction") {
    NewServiceDistribution dist{{0.04}, 0.5, 0.05};
    CHECK_THROWS_AS(validate_distribution(dist), ValidationError);
}

TEST_CASE("catalog validation catches structural problems") {
    ServiceCatalog dup;
    dup.services = {{"a", 0.5, {"m"}}, {"a", 0.5, {"m"}}};
    CHECK_THROWS_AS(validate_catalog(dup), ValidationError);

    ServiceCatalog empty_micro;
    empty_micro.services = {{"a", 1.0, {}}};
    CHECK_THROWS_AS(validate_catalog(empty_micro), ValidationError);

    ServiceCatalog off_sum;
    off_sum.services = {{"a", 0.5, {"m"}}, {"b", 0.4, {"m2"}}};
    CHECK_THROWS_AS(validate_catalog(off_sum), ValidationError);
}

} // TEST_SUITE
