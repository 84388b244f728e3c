#include "evgrid/impact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "evgrid/csv.hpp"

namespace evgrid {

const CategoryInfo& category_info(Category c) { return kCategories[static_cast<std::size_t>(c)]; }

double pct_change(double before, double after) {
    before = std::abs(before);
    after = std::abs(after);
    if (before <= kZeroFlowKw) return after > kZeroFlowKw ? kInf : 0.0;
    return std::abs(after - before) / before * 100.0;
}

Category categorize(double pct) {
    for (const auto& c : kCategories) {
        if (pct >= c.lower_pct && pct < c.upper_pct) return c.category;
    }
    // +inf, NaN, and (defensively) negative input
    return pct < 0.0 ? Category::Gray : Category::Red;
}

std::string_view to_string(Metric m) { return m == Metric::Flow ? "flow" : "loss"; }

std::vector<ImpactRecord> build_records(const PowerFlowSolution& before, const PowerFlowSolution& after,
                                        Metric metric) {
    if (!before.line_ids || !after.line_ids) throw std::invalid_argument("build_records: solution has no lines");
    const auto& before_ids = *before.line_ids;
    const auto& after_ids = *after.line_ids;
    if (before_ids.size() != after_ids.size()) {
        throw std::invalid_argument("build_records: line set mismatch (" + std::to_string(before_ids.size()) +
                                    " vs " + std::to_string(after_ids.size()) + " lines)");
    }
    std::unordered_map<std::string_view, std::size_t> after_index;
    for (std::size_t k = 0; k < after_ids.size(); ++k) after_index.emplace(after_ids[k], k);

    const auto& before_values = metric == Metric::Flow ? before.line_flow_kw : before.line_loss_kw;
    const auto& after_values = metric == Metric::Flow ? after.line_flow_kw : after.line_loss_kw;
    if (before_values.size() != before_ids.size() || after_values.size() != after_ids.size()) {
        throw std::invalid_argument("build_records: solution carries no line results");
    }

    std::vector<ImpactRecord> records;
    records.reserve(before_ids.size());
    for (std::size_t k = 0; k < before_ids.size(); ++k) {
        auto it = after_index.find(before_ids[k]);
        if (it == after_index.end()) {
            throw std::invalid_argument("build_records: line set mismatch, " + before_ids[k] +
                                        " missing after");
        }
        ImpactRecord r;
        r.line_id = before_ids[k];
        r.metric = metric;
        r.before = std::abs(before_values[k]);
        r.after = std::abs(after_values[it->second]);
        r.pct_change = pct_change(r.before, r.after);
        r.category = categorize(r.pct_change);
        records.push_back(std::move(r));
    }
    return records;
}

std::size_t Histogram::total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

std::vector<double> default_histogram_edges() {
    std::vector<double> edges;
    for (const auto& c : kCategories) edges.push_back(c.lower_pct);
    return edges;
}

Histogram build_histogram(std::span<const ImpactRecord> records, std::span<const double> edges) {
    if (edges.empty()) throw std::invalid_argument("build_histogram: no bin edges");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!std::isfinite(edges[i])) throw std::invalid_argument("build_histogram: edges must be finite");
        if (i > 0 && !(edges[i] > edges[i - 1])) {
            throw std::invalid_argument("build_histogram: edges must be strictly ascending");
        }
    }
    Histogram h;
    h.bin_edges.assign(edges.begin(), edges.end());
    h.counts.assign(edges.size(), 0);
    for (const auto& r : records) {
        double v = std::isnan(r.pct_change) ? kInf : r.pct_change;
        // index of the last edge <= v, clamped to the first bin
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        std::size_t bin = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
        ++h.counts[bin];
    }
    return h;
}

Histogram build_histogram(std::span<const ImpactRecord> records) {
    auto edges = default_histogram_edges();
    return build_histogram(records, edges);
}

SystemSummary summarize(double before_demand_kw, double after_demand_kw, double before_loss_kw,
                        double after_loss_kw) {
    if (!(before_demand_kw > 0.0) || !(before_loss_kw > 0.0)) {
        throw std::invalid_argument("summarize: baseline demand and loss must be positive");
    }
    SystemSummary s;
    s.demand_before_kw = before_demand_kw;
    s.demand_after_kw = after_demand_kw;
    s.demand_pct = (after_demand_kw - before_demand_kw) / before_demand_kw * 100.0;
    s.loss_before_kw = before_loss_kw;
    s.loss_after_kw = after_loss_kw;
    s.loss_pct = (after_loss_kw - before_loss_kw) / before_loss_kw * 100.0;
    return s;
}

std::vector<std::string> filter_by_ampacity(const NetworkModel& net, double threshold_a) {
    std::vector<std::string> ids;
    for (const auto& l : net.lines()) {
        if (l.ampacity_a > threshold_a) ids.push_back(l.id);
    }
    return ids;
}

nlohmann::ordered_json to_json(const SystemSummary& s) {
    return nlohmann::ordered_json{
        {"demand_before_kw", s.demand_before_kw}, {"demand_after_kw", s.demand_after_kw},
        {"demand_pct", s.demand_pct},             {"loss_before_kw", s.loss_before_kw},
        {"loss_after_kw", s.loss_after_kw},       {"loss_pct", s.loss_pct},
    };
}

nlohmann::ordered_json to_json(const ImpactRecord& r) {
    nlohmann::ordered_json j{
        {"line_id", r.line_id},
        {"metric", to_string(r.metric)},
        {"before", r.before},
        {"after", r.after},
    };
    j["pct_change"] = std::isfinite(r.pct_change) ? nlohmann::ordered_json(r.pct_change) : nullptr;
    j["category"] = category_info(r.category).name;
    j["color"] = category_info(r.category).color_hex;
    return j;
}

nlohmann::ordered_json impact_report(const SystemSummary& summary, std::span<const ImpactRecord> records) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& r : records) list.push_back(to_json(r));
    return nlohmann::ordered_json{{"summary", to_json(summary)}, {"records", std::move(list)}};
}

std::string histogram_csv(const Histogram& h) {
    std::ostringstream os;
    os << "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        os << csv::format_double(h.bin_edges[i]) << ','
           << (i + 1 < h.bin_edges.size() ? csv::format_double(h.bin_edges[i + 1]) : std::string("inf")) << ','
           << h.counts[i] << '\n';
    }
    return os.str();
}

}  // namespace evgrid
