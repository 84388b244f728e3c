#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evgrid/netmodel.hpp"
#include "evgrid/powerflow.hpp"

namespace evgrid {

enum class Category { Gray = 0, Green = 1, Blue = 2, Pink = 3, Red = 4 };

inline constexpr std::size_t kCategoryCount = 5;

struct CategoryInfo {
    Category category;
    std::string_view name;
    double lower_pct;  // inclusive
    double upper_pct;  // exclusive, +inf for Red
    std::string_view color_hex;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr std::array<CategoryInfo, kCategoryCount> kCategories{{
    {Category::Gray, "Gray", 0.0, 0.05, "#808080"},
    {Category::Green, "Green", 0.05, 10.0, "#00FF00"},
    {Category::Blue, "Blue", 10.0, 50.0, "#0000FF"},
    {Category::Pink, "Pink", 50.0, 80.0, "#FF00FF"},
    {Category::Red, "Red", 80.0, kInf, "#e31a1c"},
}};

const CategoryInfo& category_info(Category c);

/// Baselines at or below this magnitude count as "no flow".
inline constexpr double kZeroFlowKw = 1e-6;

/// |after - before| / before * 100. A new flow on an idle line yields +inf;
/// two idle values yield 0.
double pct_change(double before, double after);

/// +inf (and NaN) fall into Red.
Category categorize(double pct);

enum class Metric { Flow, Loss };
std::string_view to_string(Metric m);

struct ImpactRecord {
    std::string line_id;
    Metric metric = Metric::Flow;
    double before = 0.0;  // kW magnitude
    double after = 0.0;
    double pct_change = 0.0;
    Category category = Category::Gray;
};

/// One record per line in the before solution's line order. Throws
/// std::invalid_argument when the two solutions cover different line sets.
std::vector<ImpactRecord> build_records(const PowerFlowSolution& before,
                                        const PowerFlowSolution& after, Metric metric);

struct Histogram {
    std::vector<double> bin_edges;  // lower edges; last bin is open-ended
    std::vector<std::size_t> counts;

    std::size_t total() const;
};

/// Lower edges of the category bins.
std::vector<double> default_histogram_edges();

/// Half-open bins [e_i, e_{i+1}); values below the first edge go to the first
/// bin, +inf to the last. Throws std::invalid_argument for empty or
/// non-ascending edges.
Histogram build_histogram(std::span<const ImpactRecord> records,
                          std::span<const double> edges);
Histogram build_histogram(std::span<const ImpactRecord> records);

struct SystemSummary {
    double demand_before_kw = 0.0;
    double demand_after_kw = 0.0;
    double demand_pct = 0.0;
    double loss_before_kw = 0.0;
    double loss_after_kw = 0.0;
    double loss_pct = 0.0;
};

/// Throws std::invalid_argument for non-positive baselines.
SystemSummary summarize(double before_demand_kw, double after_demand_kw, double before_loss_kw,
                        double after_loss_kw);

/// Lines with ampacity_a strictly above the threshold, in model order.
std::vector<std::string> filter_by_ampacity(const NetworkModel& net, double threshold_a);

nlohmann::ordered_json to_json(const SystemSummary& summary);
nlohmann::ordered_json to_json(const ImpactRecord& record);
/// {"summary": ..., "records": [...]}; infinite pct_change is written as null.
nlohmann::ordered_json impact_report(const SystemSummary& summary,
                                     std::span<const ImpactRecord> records);

/// "bin_lo,bin_hi,count"; the open upper edge is written as "inf".
std::string histogram_csv(const Histogram& histogram);

}  // namespace evgrid
