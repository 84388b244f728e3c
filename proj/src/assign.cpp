#include "evgrid/assign.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "evgrid/csv.hpp"
#include "evgrid/error.hpp"

namespace evgrid {

double haversine(GeoPoint a, GeoPoint b) {
    constexpr double kDeg = std::numbers::pi / 180.0;
    const double phi1 = a.lat * kDeg;
    const double phi2 = b.lat * kDeg;
    const double dphi = (b.lat - a.lat) * kDeg;
    const double dlambda = (b.lon - a.lon) * kDeg;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

BusCatalog::BusCatalog(std::vector<BusLocation> buses) : entries_(std::move(buses)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const BusLocation& a, const BusLocation& b) { return a.id < b.id; });
}

TargetMode parse_target_mode(std::string_view name) {
    if (name == "load_buses") return TargetMode::LoadBuses;
    if (name == "all_buses") return TargetMode::AllBuses;
    if (name == "tagged_buses") return TargetMode::TaggedBuses;
    throw SchemaError("unknown assignment target mode: " + std::string(name));
}

std::string_view to_string(TargetMode mode) {
    switch (mode) {
        case TargetMode::LoadBuses: return "load_buses";
        case TargetMode::AllBuses: return "all_buses";
        case TargetMode::TaggedBuses: return "tagged_buses";
    }
    return "?";
}

BusCatalog assignment_targets(const NetworkModel& net, TargetMode mode, std::string_view tag) {
    std::vector<bool> has_load(net.buses().size(), false);
    for (const auto& p : net.loads()) has_load[*net.bus_index(p.bus_id)] = true;

    std::vector<BusLocation> picked;
    for (std::size_t i = 0; i < net.buses().size(); ++i) {
        const Bus& b = net.buses()[i];
        bool keep = mode == TargetMode::AllBuses || (mode == TargetMode::LoadBuses && has_load[i]) ||
                    (mode == TargetMode::TaggedBuses && b.has_tag(tag));
        if (keep) picked.push_back({b.id, b.lat, b.lon});
    }
    return BusCatalog(std::move(picked));
}

NearestBus nearest_bus(GeoPoint location, const BusCatalog& catalog) {
    if (catalog.empty()) throw std::invalid_argument("nearest_bus: empty catalog");
    const BusLocation* best = nullptr;
    double best_m = 0.0;
    for (const auto& b : catalog.entries()) {
        double d = haversine(location, {b.lat, b.lon});
        if (best == nullptr || d < best_m) {
            best = &b;
            best_m = d;
        }
    }
    return NearestBus{best->id, best_m};
}

NearestBus nearest_bus(const EvStation& station, const BusCatalog& catalog) {
    return nearest_bus(GeoPoint{station.lat, station.lon}, catalog);
}

std::vector<Assignment> assign_stations(std::span<const EvStation> stations,
                                        const Allocation& allocation, const BusCatalog& catalog) {
    std::vector<Assignment> out;
    out.reserve(stations.size());
    for (const auto& s : stations) {
        NearestBus nb = nearest_bus(s, catalog);
        out.push_back({s.id, nb.bus_id, nb.distance_m, allocation[classify(s.rated_kw)]});
    }
    return out;
}

NetworkModel inject_loads(const NetworkModel& net, std::span<const Assignment> assignments) {
    std::vector<LoadPoint> loads = net.loads();
    // first LoadPoint per bus
    std::vector<std::ptrdiff_t> slot(net.buses().size(), -1);
    for (std::size_t i = 0; i < loads.size(); ++i) {
        auto b = *net.bus_index(loads[i].bus_id);
        if (slot[b] < 0) slot[b] = static_cast<std::ptrdiff_t>(i);
    }
    for (const auto& a : assignments) {
        auto b = net.bus_index(a.bus_id);
        if (!b) throw SchemaError("assignment for station " + a.station_id + ": unknown bus " + a.bus_id);
        if (!(a.assigned_kw >= 0.0)) throw SchemaError("assignment for station " + a.station_id + ": negative kW");
        if (slot[*b] < 0) {
            std::string id = "ev_" + a.bus_id;
            while (net.load_index(id)) id += "_";
            loads.push_back(LoadPoint{id, a.bus_id, 0.0, 0.0});
            slot[*b] = static_cast<std::ptrdiff_t>(loads.size() - 1);
        }
        loads[static_cast<std::size_t>(slot[*b])].kw += a.assigned_kw;
    }
    return NetworkModel(net.buses(), net.lines(), std::move(loads), net.source());
}

std::string assignments_csv(std::span<const Assignment> assignments) {
    std::ostringstream os;
    os << "station_id,bus_id,distance_m,assigned_kw\n";
    for (const auto& a : assignments) {
        os << csv::escape(a.station_id) << ',' << csv::escape(a.bus_id) << ','
           << csv::format_fixed(a.distance_m, 3) << ',' << csv::format_double(a.assigned_kw) << '\n';
    }
    return os.str();
}

}  // namespace evgrid
