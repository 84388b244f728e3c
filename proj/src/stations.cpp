#include "evgrid/stations.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include "evgrid/csv.hpp"
#include "evgrid/error.hpp"

namespace evgrid {

namespace {

constexpr double kInfKw = std::numeric_limits<double>::infinity();

constexpr std::array<CapacityClass, kCapacityLevels> kClasses{{
    {CapacityLevel::L1, 0.0, 50.0, kDefaultWeights[0]},
    {CapacityLevel::L2, 50.0, 150.0, kDefaultWeights[1]},
    {CapacityLevel::L3, 150.0, 350.0, kDefaultWeights[2]},
    {CapacityLevel::L4, 350.0, kInfKw, kDefaultWeights[3]},
}};

[[noreturn]] void row_error(std::size_t row, const std::string& msg) {
    throw SchemaError("row " + std::to_string(row) + ": " + msg);
}

}  // namespace

const CapacityClass& capacity_class(CapacityLevel level) {
    return kClasses[static_cast<std::size_t>(level)];
}

std::string_view to_string(CapacityLevel level) {
    switch (level) {
        case CapacityLevel::L1: return "L1";
        case CapacityLevel::L2: return "L2";
        case CapacityLevel::L3: return "L3";
        case CapacityLevel::L4: return "L4";
    }
    return "?";
}

CapacityLevel classify(double rated_kw) {
    if (!(rated_kw > 0.0)) throw std::invalid_argument("station rating must be positive");
    for (const auto& c : kClasses) {
        if (rated_kw >= c.lower_kw && rated_kw < c.upper_kw) return c.level;
    }
    return CapacityLevel::L4;
}

std::size_t StationCensus::total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

std::vector<EvStation> parse_stations(std::string_view table) {
    auto rows = csv::parse(table);
    if (rows.empty()) throw SchemaError("row 1: missing header");

    static constexpr std::array<std::string_view, 5> kColumns{"id", "name", "lat", "lon", "rated_kw"};
    std::array<std::optional<std::size_t>, 5> column;
    const auto& header = rows.front();
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
        std::string_view name = header.fields[i];
        if (i == 0 && name.starts_with("\xEF\xBB\xBF")) name.remove_prefix(3);
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            if (name == kColumns[c] && !column[c]) column[c] = i;
        }
    }
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        if (!column[c]) row_error(header.line, "missing column " + std::string(kColumns[c]));
    }

    std::vector<EvStation> out;
    std::unordered_set<std::string> ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto field = [&](std::size_t c) -> const std::string& {
            std::size_t idx = *column[c];
            if (idx >= row.fields.size()) row_error(row.line, "missing " + std::string(kColumns[c]));
            return row.fields[idx];
        };
        auto number = [&](std::size_t c) {
            double v = 0.0;
            if (!csv::parse_double(field(c), v)) row_error(row.line, "non-numeric " + std::string(kColumns[c]));
            return v;
        };
        EvStation s;
        s.id = field(0);
        s.name = field(1);
        s.lat = number(2);
        s.lon = number(3);
        s.rated_kw = number(4);
        if (s.id.empty()) row_error(row.line, "empty id");
        if (s.lat < -90.0 || s.lat > 90.0) row_error(row.line, "lat out of range");
        if (s.lon < -180.0 || s.lon > 180.0) row_error(row.line, "lon out of range");
        if (!(s.rated_kw > 0.0)) row_error(row.line, "rated_kw must be positive");
        if (!ids.insert(s.id).second) row_error(row.line, "duplicate id " + s.id);
        out.push_back(std::move(s));
    }
    return out;
}

StationCensus take_census(std::span<const EvStation> stations) {
    StationCensus census;
    for (const auto& s : stations) ++census.counts[static_cast<std::size_t>(classify(s.rated_kw))];
    return census;
}

Allocation allocate_peak(double peak_kw, const StationCensus& census, const ClassWeights& weights) {
    if (!(peak_kw >= 0.0) || !std::isfinite(peak_kw)) {
        throw std::invalid_argument("allocate_peak: peak_kw must be finite and non-negative");
    }
    double weighted = 0.0;
    for (std::size_t c = 0; c < kCapacityLevels; ++c) {
        if (!(weights[c] >= 0.0)) throw std::invalid_argument("allocate_peak: negative class weight");
        weighted += static_cast<double>(census.counts[c]) * weights[c];
    }
    if (!(weighted > 0.0)) throw std::invalid_argument("allocate_peak: empty census");

    Allocation a;
    a.peak_kw = peak_kw;
    for (std::size_t c = 0; c < kCapacityLevels; ++c) a.per_station_kw[c] = peak_kw * weights[c] / weighted;
    return a;
}

nlohmann::ordered_json to_json(const StationCensus& census) {
    nlohmann::ordered_json j;
    for (std::size_t c = 0; c < kCapacityLevels; ++c) {
        j[std::string(to_string(static_cast<CapacityLevel>(c)))] = census.counts[c];
    }
    j["total"] = census.total();
    return j;
}

nlohmann::ordered_json to_json(const Allocation& allocation) {
    nlohmann::ordered_json per;
    for (std::size_t c = 0; c < kCapacityLevels; ++c) {
        per[std::string(to_string(static_cast<CapacityLevel>(c)))] = allocation.per_station_kw[c];
    }
    return nlohmann::ordered_json{{"peak_kw", allocation.peak_kw}, {"per_station_kw", per}};
}

}  // namespace evgrid
