#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace evgrid {

struct EvStation {
    std::string id;
    std::string name;
    double lat = 0.0;
    double lon = 0.0;
    double rated_kw = 0.0;
};

enum class CapacityLevel { L1 = 0, L2 = 1, L3 = 2, L4 = 3 };

inline constexpr std::size_t kCapacityLevels = 4;

/// One station capacity class: rated kW in [lower_kw, upper_kw) and its
/// allocation weight.
struct CapacityClass {
    CapacityLevel level;
    double lower_kw;
    double upper_kw;  // +inf for L4
    double weight;
};

using ClassWeights = std::array<double, kCapacityLevels>;

inline constexpr ClassWeights kDefaultWeights{1.0, 2.0, 4.0, 8.0};

const CapacityClass& capacity_class(CapacityLevel level);
std::string_view to_string(CapacityLevel level);

/// Throws std::invalid_argument for rated_kw <= 0 (or NaN).
CapacityLevel classify(double rated_kw);

struct StationCensus {
    std::array<std::size_t, kCapacityLevels> counts{};

    std::size_t total() const;
    std::size_t operator[](CapacityLevel level) const {
        return counts[static_cast<std::size_t>(level)];
    }
};

/// Per-station kW for each capacity class.
struct Allocation {
    double peak_kw = 0.0;
    std::array<double, kCapacityLevels> per_station_kw{};

    double operator[](CapacityLevel level) const {
        return per_station_kw[static_cast<std::size_t>(level)];
    }
};

/// CSV with header containing id,name,lat,lon,rated_kw (any column order,
/// extra columns ignored). Errors are SchemaError prefixed "row N:" where N
/// is the 1-based line number in the table.
std::vector<EvStation> parse_stations(std::string_view table);

StationCensus take_census(std::span<const EvStation> stations);

/// s_c = peak_kw * w_c / sum_c(n_c * w_c). Throws std::invalid_argument when
/// the weighted census is zero or peak_kw is negative.
Allocation allocate_peak(double peak_kw, const StationCensus& census,
                         const ClassWeights& weights = kDefaultWeights);

nlohmann::ordered_json to_json(const StationCensus& census);
nlohmann::ordered_json to_json(const Allocation& allocation);

}  // namespace evgrid
