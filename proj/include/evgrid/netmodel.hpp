#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace evgrid {

struct Bus {
    std::string id;
    double lat = 0.0;      // degrees WGS84
    double lon = 0.0;      // degrees WGS84
    double base_kv = 0.0;  // line-to-line
    // Optional labels such as "transformer"; used to restrict assignment targets.
    std::vector<std::string> tags;

    bool has_tag(std::string_view tag) const;
    friend bool operator==(const Bus&, const Bus&) = default;
};

struct Line {
    std::string id;
    std::string from_bus;
    std::string to_bus;
    double resistance_ohm = 0.0;
    double reactance_ohm = 0.0;
    double ampacity_a = 0.0;

    friend bool operator==(const Line&, const Line&) = default;
};

struct LoadPoint {
    std::string id;
    std::string bus_id;
    double kw = 0.0;
    double kvar = 0.0;

    friend bool operator==(const LoadPoint&, const LoadPoint&) = default;
};

struct Source {
    std::string bus_id;
    double voltage_pu = 1.0;

    friend bool operator==(const Source&, const Source&) = default;
};

/// Geo-referenced radial feeder. Immutable once constructed: the constructor
/// checks every element invariant and referential integrity and throws
/// SchemaError naming the offending element. Radiality is not required here;
/// see validate_radial().
class NetworkModel {
  public:
    NetworkModel(std::vector<Bus> buses, std::vector<Line> lines, std::vector<LoadPoint> loads,
                 Source source);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Line>& lines() const { return lines_; }
    const std::vector<LoadPoint>& loads() const { return loads_; }
    const Source& source() const { return source_; }

    std::optional<std::size_t> bus_index(std::string_view id) const;
    std::optional<std::size_t> line_index(std::string_view id) const;
    std::optional<std::size_t> load_index(std::string_view id) const;
    const Bus& bus(std::string_view id) const;

    /// Sum of LoadPoint kw.
    double total_load_kw() const;

    friend bool operator==(const NetworkModel& a, const NetworkModel& b) {
        return a.buses_ == b.buses_ && a.lines_ == b.lines_ && a.loads_ == b.loads_ &&
               a.source_ == b.source_;
    }

  private:
    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    std::vector<LoadPoint> loads_;
    Source source_;
    std::unordered_map<std::string, std::size_t> bus_index_;
    std::unordered_map<std::string, std::size_t> line_index_;
    std::unordered_map<std::string, std::size_t> load_index_;
};

struct TopologyReport {
    bool connected = false;
    bool radial = false;
    std::vector<std::string> orphan_buses;  // ascending id
};

struct BusLocation {
    std::string id;
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const BusLocation&, const BusLocation&) = default;
};

NetworkModel network_from_json(const nlohmann::json& doc);
NetworkModel parse_network(std::string_view text);

/// Native JSON document: keys in declaration order, coordinates with six
/// decimals, other numbers in shortest round-trip form.
std::string serialize_network(const NetworkModel& net);

TopologyReport validate_radial(const NetworkModel& net);

/// All buses sorted by id (byte-wise ascending).
std::vector<BusLocation> bus_catalog(const NetworkModel& net);

nlohmann::json to_json(const TopologyReport& report);

}  // namespace evgrid
