#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evgrid/netmodel.hpp"
#include "evgrid/stations.hpp"

namespace evgrid {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine(GeoPoint a, GeoPoint b);

/// Buses eligible to receive station loads, kept sorted by id regardless of
/// the order they were supplied in.
class BusCatalog {
  public:
    BusCatalog() = default;
    explicit BusCatalog(std::vector<BusLocation> buses);

    const std::vector<BusLocation>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

  private:
    std::vector<BusLocation> entries_;
};

enum class TargetMode {
    LoadBuses,   // buses carrying at least one LoadPoint
    AllBuses,
    TaggedBuses  // buses carrying a given tag, e.g. "transformer"
};

TargetMode parse_target_mode(std::string_view name);
std::string_view to_string(TargetMode mode);

BusCatalog assignment_targets(const NetworkModel& net, TargetMode mode,
                              std::string_view tag = "transformer");

struct NearestBus {
    std::string bus_id;
    double distance_m = 0.0;
};

/// Closest catalog bus; equal distances resolve to the smallest id.
/// Throws std::invalid_argument on an empty catalog.
NearestBus nearest_bus(GeoPoint location, const BusCatalog& catalog);
NearestBus nearest_bus(const EvStation& station, const BusCatalog& catalog);

struct Assignment {
    std::string station_id;
    std::string bus_id;
    double distance_m = 0.0;
    double assigned_kw = 0.0;
};

/// One assignment per station (registry order), each carrying the per-station
/// allocation of its capacity class.
std::vector<Assignment> assign_stations(std::span<const EvStation> stations,
                                        const Allocation& allocation, const BusCatalog& catalog);

/// Adds each assigned kW to the first LoadPoint at the bus (creating
/// "ev_<bus>" when the bus has none). kvar is left unchanged. Throws
/// SchemaError on an unknown bus id.
NetworkModel inject_loads(const NetworkModel& net, std::span<const Assignment> assignments);

/// "station_id,bus_id,distance_m,assigned_kw"
std::string assignments_csv(std::span<const Assignment> assignments);

}  // namespace evgrid
