#pragma once

#include <span>
#include <string>

#include "evgrid/impact.hpp"
#include "evgrid/netmodel.hpp"

namespace evgrid {

/// Maps line utilization to drawing attributes. width = clamp(min + slope*u,
/// min, max) with u = current / ampacity.
struct LineStyle {
    double min_width = 1.0;
    double max_width = 5.0;
    double width_slope = 4.0;
    double styled_opacity = 1.0;
    double default_opacity = 0.6;
};

/// Width in points for a line carrying flow_kw (three-phase, unity power
/// factor) at base_kv with the given ampacity.
double style_width(double flow_kw, double ampacity_a, double base_kv, const LineStyle& style = {});

/// FeatureCollection with one LineString per network line, in model order.
/// Coordinates are (lon, lat) with 6 decimals; percentages 3 decimals. Lines
/// without a record get the default Gray style. Throws std::invalid_argument
/// for a record naming an unknown line or a line with two records.
std::string export_geojson(const NetworkModel& net, std::span<const ImpactRecord> records,
                           const LineStyle& style = {});

}  // namespace evgrid
