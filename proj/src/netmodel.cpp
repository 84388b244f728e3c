#include "evgrid/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <initializer_list>
#include <sstream>

#include "evgrid/csv.hpp"
#include "evgrid/error.hpp"

namespace evgrid {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw SchemaError(msg); }

std::string quoted(const std::string& s) { return json(s).dump(); }

template <typename Map>
void index_unique(Map& index, const std::string& id, std::size_t pos, const char* kind) {
    if (id.empty()) fail(std::string(kind) + " with empty id");
    if (!index.emplace(id, pos).second) fail(std::string("duplicate ") + kind + " id: " + id);
}

class ElementReader {
  public:
    ElementReader(const json& obj, std::string kind, std::initializer_list<const char*> allowed)
        : obj_(obj), kind_(std::move(kind)) {
        if (!obj_.is_object()) fail(kind_ + " entry must be an object");
        if (obj_.contains("id") && obj_["id"].is_string()) {
            label_ = kind_ + " " + obj_["id"].get<std::string>();
        } else {
            label_ = kind_;
        }
        for (const auto& [key, value] : obj_.items()) {
            if (std::find_if(allowed.begin(), allowed.end(),
                             [&](const char* a) { return key == a; }) == allowed.end()) {
                fail(label_ + ": unknown field '" + key + "'");
            }
        }
    }

    const json& field(const char* name) const {
        auto it = obj_.find(name);
        if (it == obj_.end()) fail(label_ + ": missing field '" + name + "'");
        return *it;
    }

    std::string text(const char* name) const {
        const json& v = field(name);
        if (!v.is_string()) fail(label_ + ": field '" + name + "' must be a string");
        return v.get<std::string>();
    }

    double number(const char* name) const {
        const json& v = field(name);
        if (!v.is_number()) fail(label_ + ": field '" + name + "' must be a number");
        double d = v.get<double>();
        if (!std::isfinite(d)) fail(label_ + ": field '" + name + "' must be finite");
        return d;
    }

    bool has(const char* name) const { return obj_.contains(name); }

  private:
    const json& obj_;
    std::string kind_;
    std::string label_;
};

const json& array_member(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) fail(std::string("missing top-level field '") + name + "'");
    if (!it->is_array()) fail(std::string("top-level field '") + name + "' must be an array");
    return *it;
}

}  // namespace

bool Bus::has_tag(std::string_view tag) const {
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Line> lines,
                           std::vector<LoadPoint> loads, Source source)
    : buses_(std::move(buses)),
      lines_(std::move(lines)),
      loads_(std::move(loads)),
      source_(std::move(source)) {
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        const Bus& b = buses_[i];
        index_unique(bus_index_, b.id, i, "bus");
        if (!(b.lat >= -90.0 && b.lat <= 90.0)) fail("bus " + b.id + ": lat out of range");
        if (!(b.lon >= -180.0 && b.lon <= 180.0)) fail("bus " + b.id + ": lon out of range");
        if (!(b.base_kv > 0.0) || !std::isfinite(b.base_kv)) {
            fail("bus " + b.id + ": base_kv must be positive");
        }
    }
    for (std::size_t i = 0; i < lines_.size(); ++i) {
        const Line& l = lines_[i];
        index_unique(line_index_, l.id, i, "line");
        for (const std::string* end : {&l.from_bus, &l.to_bus}) {
            if (!bus_index_.contains(*end)) fail("dangling bus reference: " + *end + " in line " + l.id);
        }
        if (l.from_bus == l.to_bus) fail("line " + l.id + ": from_bus equals to_bus");
        if (!(l.ampacity_a > 0.0)) fail("line " + l.id + ": ampacity_a must be positive");
        if (!(l.resistance_ohm >= 0.0) || !(l.reactance_ohm >= 0.0)) {
            fail("line " + l.id + ": impedance must be non-negative");
        }
        if (l.resistance_ohm == 0.0 && l.reactance_ohm == 0.0) {
            fail("line " + l.id + ": zero impedance");
        }
    }
    for (std::size_t i = 0; i < loads_.size(); ++i) {
        const LoadPoint& p = loads_[i];
        index_unique(load_index_, p.id, i, "load");
        if (!bus_index_.contains(p.bus_id)) fail("dangling bus reference: " + p.bus_id + " in load " + p.id);
        if (!(p.kw >= 0.0) || !std::isfinite(p.kw)) fail("load " + p.id + ": kw must be non-negative");
        if (!std::isfinite(p.kvar)) fail("load " + p.id + ": kvar must be finite");
    }
    if (!bus_index_.contains(source_.bus_id)) {
        fail("dangling bus reference: " + source_.bus_id + " in source");
    }
    if (!(source_.voltage_pu >= 0.8 && source_.voltage_pu <= 1.2)) {
        fail("source: voltage_pu must be within [0.8, 1.2]");
    }
}

std::optional<std::size_t> NetworkModel::bus_index(std::string_view id) const {
    auto it = bus_index_.find(std::string(id));
    if (it == bus_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> NetworkModel::line_index(std::string_view id) const {
    auto it = line_index_.find(std::string(id));
    if (it == line_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> NetworkModel::load_index(std::string_view id) const {
    auto it = load_index_.find(std::string(id));
    if (it == load_index_.end()) return std::nullopt;
    return it->second;
}

const Bus& NetworkModel::bus(std::string_view id) const {
    auto idx = bus_index(id);
    if (!idx) throw SchemaError("unknown bus: " + std::string(id));
    return buses_[*idx];
}

double NetworkModel::total_load_kw() const {
    double sum = 0.0;
    for (const auto& p : loads_) sum += p.kw;
    return sum;
}

NetworkModel network_from_json(const json& doc) {
    if (!doc.is_object()) fail("network document must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "buses" && key != "lines" && key != "loads" && key != "source") {
            fail("unknown top-level field '" + key + "'");
        }
    }

    std::vector<Bus> buses;
    for (const json& e : array_member(doc, "buses")) {
        ElementReader r(e, "bus", {"id", "lat", "lon", "base_kv", "tags"});
        Bus b{r.text("id"), r.number("lat"), r.number("lon"), r.number("base_kv"), {}};
        if (r.has("tags")) {
            const json& tags = r.field("tags");
            if (!tags.is_array()) fail("bus " + b.id + ": field 'tags' must be an array");
            for (const json& t : tags) {
                if (!t.is_string()) fail("bus " + b.id + ": tags must be strings");
                b.tags.push_back(t.get<std::string>());
            }
        }
        buses.push_back(std::move(b));
    }

    std::vector<Line> lines;
    for (const json& e : array_member(doc, "lines")) {
        ElementReader r(e, "line",
                        {"id", "from_bus", "to_bus", "resistance_ohm", "reactance_ohm", "ampacity_a"});
        lines.push_back(Line{r.text("id"), r.text("from_bus"), r.text("to_bus"),
                             r.number("resistance_ohm"), r.number("reactance_ohm"),
                             r.number("ampacity_a")});
    }

    std::vector<LoadPoint> loads;
    for (const json& e : array_member(doc, "loads")) {
        ElementReader r(e, "load", {"id", "bus_id", "kw", "kvar"});
        loads.push_back(LoadPoint{r.text("id"), r.text("bus_id"), r.number("kw"), r.number("kvar")});
    }

    auto src = doc.find("source");
    if (src == doc.end()) fail("missing top-level field 'source'");
    ElementReader r(*src, "source", {"bus_id", "voltage_pu"});
    Source source{r.text("bus_id"), r.number("voltage_pu")};

    return NetworkModel(std::move(buses), std::move(lines), std::move(loads), std::move(source));
}

NetworkModel parse_network(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what());
    }
    return network_from_json(doc);
}

std::string serialize_network(const NetworkModel& net) {
    using csv::format_double;
    using csv::format_fixed;
    std::ostringstream os;
    os << "{\n  \"buses\": [";
    const char* sep = "\n";
    for (const Bus& b : net.buses()) {
        os << sep << "    {\"id\": " << quoted(b.id) << ", \"lat\": " << format_fixed(b.lat, 6)
           << ", \"lon\": " << format_fixed(b.lon, 6) << ", \"base_kv\": " << format_double(b.base_kv);
        if (!b.tags.empty()) {
            os << ", \"tags\": [";
            for (std::size_t i = 0; i < b.tags.size(); ++i) os << (i ? ", " : "") << quoted(b.tags[i]);
            os << "]";
        }
        os << "}";
        sep = ",\n";
    }
    os << (net.buses().empty() ? "" : "\n  ") << "],\n  \"lines\": [";
    sep = "\n";
    for (const Line& l : net.lines()) {
        os << sep << "    {\"id\": " << quoted(l.id) << ", \"from_bus\": " << quoted(l.from_bus)
           << ", \"to_bus\": " << quoted(l.to_bus)
           << ", \"resistance_ohm\": " << format_double(l.resistance_ohm)
           << ", \"reactance_ohm\": " << format_double(l.reactance_ohm)
           << ", \"ampacity_a\": " << format_double(l.ampacity_a) << "}";
        sep = ",\n";
    }
    os << (net.lines().empty() ? "" : "\n  ") << "],\n  \"loads\": [";
    sep = "\n";
    for (const LoadPoint& p : net.loads()) {
        os << sep << "    {\"id\": " << quoted(p.id) << ", \"bus_id\": " << quoted(p.bus_id)
           << ", \"kw\": " << format_double(p.kw) << ", \"kvar\": " << format_double(p.kvar) << "}";
        sep = ",\n";
    }
    os << (net.loads().empty() ? "" : "\n  ") << "],\n  \"source\": {\"bus_id\": "
       << quoted(net.source().bus_id)
       << ", \"voltage_pu\": " << format_double(net.source().voltage_pu) << "}\n}\n";
    return os.str();
}

TopologyReport validate_radial(const NetworkModel& net) {
    const auto& buses = net.buses();
    std::vector<std::vector<std::size_t>> adjacency(buses.size());
    for (const Line& l : net.lines()) {
        std::size_t a = *net.bus_index(l.from_bus);
        std::size_t b = *net.bus_index(l.to_bus);
        adjacency[a].push_back(b);
        adjacency[b].push_back(a);
    }

    std::vector<bool> seen(buses.size(), false);
    std::deque<std::size_t> queue;
    std::size_t start = *net.bus_index(net.source().bus_id);
    seen[start] = true;
    queue.push_back(start);
    while (!queue.empty()) {
        std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t v : adjacency[u]) {
            if (!seen[v]) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }

    TopologyReport report;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (!seen[i]) report.orphan_buses.push_back(buses[i].id);
    }
    std::sort(report.orphan_buses.begin(), report.orphan_buses.end());
    report.connected = report.orphan_buses.empty();
    report.radial = report.connected && net.lines().size() + 1 == buses.size();
    return report;
}

std::vector<BusLocation> bus_catalog(const NetworkModel& net) {
    std::vector<BusLocation> out;
    out.reserve(net.buses().size());
    for (const Bus& b : net.buses()) out.push_back({b.id, b.lat, b.lon});
    std::sort(out.begin(), out.end(),
              [](const BusLocation& a, const BusLocation& b) { return a.id < b.id; });
    return out;
}

json to_json(const TopologyReport& report) {
    return json{{"connected", report.connected},
                {"radial", report.radial},
                {"orphan_buses", report.orphan_buses}};
}

}  // namespace evgrid
