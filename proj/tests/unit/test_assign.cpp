#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "evgrid/assign.hpp"
#include "evgrid/error.hpp"
#include "random_feeder.hpp"
#include "test_util.hpp"

using namespace evgrid;

namespace {

BusCatalog catalog(std::vector<BusLocation> b) { return BusCatalog(std::move(b)); }

NetworkModel small_net() {
    std::vector<Bus> bs{{"b0", 37.0, -122.0, 12.47, {"transformer"}},
                        {"b1", 37.01, -122.0, 12.47, {}},
                        {"b2", 37.02, -122.0, 12.47, {"transformer"}}};
    std::vector<Line> ls{{"L1", "b0", "b1", 0.1, 0.1, 100}, {"L2", "b1", "b2", 0.1, 0.1, 100}};
    std::vector<LoadPoint> ld{{"ld1", "b1", 5.0, 2.0}};
    return NetworkModel(bs, ls, ld, Source{"b0", 1.0});
}

}  // namespace

TEST_SUITE("assign") {

TEST_CASE("haversine reference distances") {
    CHECK(haversine({37.0, -122.0}, {37.0, -122.0}) == 0.0);
    CHECK(haversine({37.00, -122.0}, {37.01, -122.0}) == doctest::Approx(1111.95).epsilon(0.01 / 1111.95));
    CHECK(std::abs(haversine({0, 0}, {0, 180}) - 20'015'087.0) < 1.0);
    CHECK(haversine({0, 0}, {0, 180}) == doctest::Approx(std::numbers::pi * kEarthRadiusM));
}

TEST_CASE("property: haversine is a metric on the sphere") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
    for (int i = 0; i < 2000; ++i) {
        GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
        double ab = haversine(a, b), ba = haversine(b, a);
        CHECK(ab == doctest::Approx(ba));
        CHECK(ab >= 0.0);
        CHECK(ab <= std::numbers::pi * kEarthRadiusM * (1 + 1e-12));
        CHECK(haversine(a, c) <= ab + haversine(b, c) + 1e-6);
    }
}

TEST_CASE("nearest bus examples") {
    SUBCASE("co-located") {
        auto n = nearest_bus(GeoPoint{37.3, -121.9}, catalog({{"b1", 37.0, -121.0}, {"b7", 37.3, -121.9}}));
        CHECK(n.bus_id == "b7");
        CHECK(n.distance_m == 0.0);
    }
    SUBCASE("closer of two") {
        auto n = nearest_bus(GeoPoint{37.005, -122.0}, catalog({{"x", 37.00, -122.0}, {"y", 37.02, -122.0}}));
        CHECK(n.bus_id == "x");
        CHECK(n.distance_m == doctest::Approx(556.0).epsilon(0.001));
    }
    SUBCASE("tie goes to the smallest id") {
        auto n = nearest_bus(GeoPoint{37.0, -122.0}, catalog({{"b", 37.0, -121.99}, {"a", 37.0, -122.01}}));
        CHECK(n.bus_id == "a");
    }
    SUBCASE("empty catalog") {
        CHECK_THROWS_AS(nearest_bus(GeoPoint{0, 0}, BusCatalog{}), std::invalid_argument);
    }
}

TEST_CASE("catalog order is independent of input order") {
    BusCatalog c = catalog({{"b2", 0, 0}, {"b10", 0, 1}, {"b1", 1, 0}});
    std::vector<std::string> ids;
    for (const auto& e : c.entries()) ids.push_back(e.id);
    CHECK(ids == std::vector<std::string>{"b1", "b10", "b2"});
}

TEST_CASE("property: nearest bus is the true minimum and permutation invariant") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lat(37.0, 37.1), lon(-122.1, -122.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<BusLocation> buses;
        std::size_t n = 1 + trial % 40;
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse grid so exact ties actually occur.
            double la = std::round(lat(rng) * 200) / 200, lo = std::round(lon(rng) * 200) / 200;
            buses.push_back({"b" + std::to_string(i), la, lo});
        }
        GeoPoint p{std::round(lat(rng) * 400) / 400, std::round(lon(rng) * 400) / 400};
        NearestBus got = nearest_bus(p, catalog(buses));

        double best = 1e300;
        std::string best_id;
        for (const auto& b : buses) {
            double d = haversine(p, {b.lat, b.lon});
            if (d < best || (d == best && b.id < best_id)) best = d, best_id = b.id;
        }
        CHECK(got.bus_id == best_id);
        CHECK(got.distance_m == best);

        std::shuffle(buses.begin(), buses.end(), rng);
        CHECK(nearest_bus(p, catalog(buses)).bus_id == got.bus_id);
    }
}

TEST_CASE("assignment targets") {
    NetworkModel net = small_net();
    CHECK(assignment_targets(net, TargetMode::AllBuses).size() == 3);
    auto loads = assignment_targets(net, TargetMode::LoadBuses);
    REQUIRE(loads.size() == 1);
    CHECK(loads.entries()[0].id == "b1");
    auto tagged = assignment_targets(net, TargetMode::TaggedBuses);
    REQUIRE(tagged.size() == 2);
    CHECK(tagged.entries()[1].id == "b2");
    CHECK(parse_target_mode("tagged_buses") == TargetMode::TaggedBuses);
    CHECK_THROWS_AS(parse_target_mode("nope"), SchemaError);
}

TEST_CASE("assign stations carries class allocation") {
    StationCensus census;
    census.counts = {1, 1, 0, 0};
    Allocation alloc = allocate_peak(300, census);
    std::vector<EvStation> st{{"s1", "", 37.0, -122.0, 7.2}, {"s2", "", 37.019, -122.0, 60}};
    auto a = assign_stations(st, alloc, assignment_targets(small_net(), TargetMode::AllBuses));
    REQUIRE(a.size() == 2);
    CHECK(a[0].bus_id == "b0");
    CHECK(a[0].assigned_kw == doctest::Approx(100));
    CHECK(a[1].bus_id == "b2");
    CHECK(a[1].assigned_kw == doctest::Approx(200));
    CHECK(assignments_csv(a).rfind("station_id,bus_id,distance_m,assigned_kw\ns1,b0,0.000,", 0) == 0);
}

TEST_CASE("inject loads") {
    NetworkModel net = small_net();
    SUBCASE("adds to an existing load") {
        std::vector<Assignment> a{{"s1", "b1", 0, 115.35}};
        NetworkModel after = inject_loads(net, a);
        CHECK(after.loads()[*after.load_index("ld1")].kw == doctest::Approx(120.35));
        CHECK(after.loads()[0].kvar == 2.0);
    }
    SUBCASE("empty list leaves the model unchanged") {
        CHECK(inject_loads(net, {}) == net);
    }
    SUBCASE("two assignments accumulate") {
        std::vector<Assignment> a{{"s1", "b2", 0, 10}, {"s2", "b2", 0, 10}};
        NetworkModel after = inject_loads(net, a);
        auto idx = after.load_index("ev_b2");
        REQUIRE(idx.has_value());
        CHECK(after.loads()[*idx].kw == 20.0);
        CHECK(after.loads()[*idx].bus_id == "b2");
    }
    SUBCASE("unknown bus") {
        std::vector<Assignment> a{{"s1", "zz", 0, 10}};
        CHECK_THROWS_AS(inject_loads(net, a), SchemaError);
    }
}

TEST_CASE("property: injected demand equals assigned total") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> kw(0.0, 1000.0);
    for (int trial = 0; trial < 100; ++trial) {
        testing::FeederSpec spec;
        spec.buses = 2 + trial % 60;
        NetworkModel net = testing::random_feeder(rng, spec);
        std::vector<Assignment> a;
        std::uniform_int_distribution<std::size_t> bus(0, spec.buses - 1);
        double total = 0.0;
        for (int k = 0; k < 50; ++k) {
            a.push_back({"s" + std::to_string(k), testing::bus_name(bus(rng)), 0.0, kw(rng)});
            total += a.back().assigned_kw;
        }
        NetworkModel after = inject_loads(net, a);
        CHECK(testing::rel_err(after.total_load_kw() - net.total_load_kw(), total) < 1e-9);
    }
}

}
