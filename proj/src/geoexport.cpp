#include "evgrid/geoexport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "evgrid/csv.hpp"

namespace evgrid {

namespace {

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

double style_width(double flow_kw, double ampacity_a, double base_kv, const LineStyle& style) {
    if (!(ampacity_a > 0.0) || !(base_kv > 0.0)) {
        throw std::invalid_argument("style_width: ampacity and base_kv must be positive");
    }
    const double current_a = std::abs(flow_kw) / (std::sqrt(3.0) * base_kv);
    const double utilization = current_a / ampacity_a;
    return std::clamp(style.min_width + style.width_slope * utilization, style.min_width, style.max_width);
}

std::string export_geojson(const NetworkModel& net, std::span<const ImpactRecord> records,
                           const LineStyle& style) {
    std::vector<const ImpactRecord*> by_line(net.lines().size(), nullptr);
    for (const auto& r : records) {
        auto idx = net.line_index(r.line_id);
        if (!idx) throw std::invalid_argument("export_geojson: record for unknown line " + r.line_id);
        if (by_line[*idx] != nullptr) {
            throw std::invalid_argument("export_geojson: more than one record for line " + r.line_id);
        }
        by_line[*idx] = &r;
    }

    using csv::format_double;
    using csv::format_fixed;
    std::ostringstream os;
    os << "{\"type\":\"FeatureCollection\",\"features\":[";
    for (std::size_t k = 0; k < net.lines().size(); ++k) {
        const Line& line = net.lines()[k];
        const Bus& from = net.bus(line.from_bus);
        const Bus& to = net.bus(line.to_bus);
        const ImpactRecord* rec = by_line[k];

        const CategoryInfo& cat = category_info(rec ? rec->category : Category::Gray);
        double width = style.min_width;
        if (rec && rec->metric == Metric::Flow) width = style_width(rec->after, line.ampacity_a, from.base_kv, style);
        double opacity = rec ? style.styled_opacity : style.default_opacity;

        os << (k ? ",\n" : "\n");
        os << "{\"type\":\"Feature\",\"id\":" << quoted(line.id)
           << ",\"geometry\":{\"type\":\"LineString\",\"coordinates\":[[" << format_fixed(from.lon, 6) << ','
           << format_fixed(from.lat, 6) << "],[" << format_fixed(to.lon, 6) << ',' << format_fixed(to.lat, 6)
           << "]]},\"properties\":{\"line_id\":" << quoted(line.id) << ",\"line_color\":\""
           << cat.color_hex << "\",\"line_width\":" << format_fixed(width, 3)
           << ",\"line_opacity\":" << format_fixed(opacity, 3) << ",\"pct_change\":";
        if (rec && std::isfinite(rec->pct_change)) {
            os << format_fixed(rec->pct_change, 3);
        } else {
            os << "null";
        }
        os << ",\"category\":\"" << cat.name << "\",\"ampacity_a\":" << format_double(line.ampacity_a)
           << "}}";
    }
    os << "\n]}\n";
    return os.str();
}

}  // namespace evgrid
