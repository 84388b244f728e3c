// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "evgrid/assign.hpp"
#include "evgrid/evfleet.hpp"
#include "evgrid/geoexport.hpp"
#include "evgrid/impact.hpp"
#include "evgrid/pipeline.hpp"
#include "evgrid/powerflow.hpp"
#include "evgrid/stations.hpp"
#include "newton_oracle.hpp"
#include "random_feeder.hpp"
#include "test_util.hpp"

using namespace evgrid;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return testing::rel_err(a, b); }

StationCensus published_census() {
    StationCensus c;
    c.counts = {895, 24, 18, 14};
    return c;
}

Outcome allocation_reproduction() {
    Outcome o;
    const double peaks[] = {130'000.0, 334'770.0};
    const double published[2][4] = {{115.36, 230.72, 461.44, 922.9}, {297, 594, 1188, 2376}};
    double worst = 0.0;
    auto t0 = Clock::now();
    Allocation a[2];
    for (int s = 0; s < 2; ++s) a[s] = allocate_peak(peaks[s], published_census());
    double elapsed = seconds_since(t0);
    for (int s = 0; s < 2; ++s) {
        for (std::size_t c = 0; c < 4; ++c) worst = std::max(worst, rel(a[s].per_station_kw[c], published[s][c]));
    }
    o.pass = worst <= 1e-3 && elapsed < 1e-3;
    o.detail = fmt("S1 %.2f/%.2f/%.2f/%.2f kW, S2 %.1f/%.1f/%.1f/%.1f kW, worst rel err %.2e (tol 1e-3), %.1f us",
                   a[0][CapacityLevel::L1], a[0][CapacityLevel::L2], a[0][CapacityLevel::L3], a[0][CapacityLevel::L4],
                   a[1][CapacityLevel::L1], a[1][CapacityLevel::L2], a[1][CapacityLevel::L3], a[1][CapacityLevel::L4],
                   worst, elapsed * 1e6);
    return o;
}

Outcome demand_increase() {
    Outcome o;
    const double base = 1'697'000.0;
    auto t0 = Clock::now();
    SystemSummary s1 = summarize(base, base + 130'000.0, 95'213.02, 106'650.0);
    SystemSummary s2 = summarize(base, base + 334'770.0, 95'213.02, 129'735.67);
    double elapsed = seconds_since(t0);
    double e1 = std::abs(s1.demand_pct - 7.67), e2 = std::abs(s2.demand_pct - 19.68);
    o.pass = e1 <= 0.1 && e2 <= 0.1 && elapsed < 1e-3;
    o.detail = fmt("%.4f%% vs 7.67%% (|d| %.3f pp), %.4f%% vs 19.68%% (|d| %.3f pp), tol 0.1 pp, %.1f us",
                   s1.demand_pct, e1, s2.demand_pct, e2, elapsed * 1e6);
    return o;
}

Outcome categorization() {
    Outcome o;
    struct Bound {
        const char* name;
        double lower;
        const char* color;
    };
    const Bound bounds[] = {{"Gray", 0.0, "#808080"},
                            {"Green", 0.05, "#00FF00"},
                            {"Blue", 10.0, "#0000FF"},
                            {"Pink", 50.0, "#FF00FF"},
                            {"Red", 80.0, "#e31a1c"}};
    int bad = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& c = kCategories[i];
        double upper = i + 1 < 5 ? bounds[i + 1].lower : kInf;
        if (c.name != bounds[i].name || c.lower_pct != bounds[i].lower || c.upper_pct != upper ||
            c.color_hex != bounds[i].color) {
            ++bad;
        }
    }
    const std::pair<double, const char*> sweep[] = {{0, "Gray"},      {0.049, "Gray"}, {0.05, "Green"},
                                                    {9.99, "Green"},  {10, "Blue"},    {49.99, "Blue"},
                                                    {50, "Pink"},     {79.99, "Pink"}, {80, "Red"},
                                                    {1000, "Red"}};
    std::string got;
    for (const auto& [pct, want] : sweep) {
        auto name = category_info(categorize(pct)).name;
        if (name != want) ++bad;
        got += std::string(name.substr(0, 2)) + " ";
    }
    o.pass = bad == 0;
    o.detail = fmt("table + 10-point sweep, %d mismatches [%s]", bad, got.c_str());
    return o;
}

Outcome solver_oracle() {
    Outcome o;
    auto t0 = Clock::now();
    const double kv = 12.47, zb = kv * kv;
    NetworkModel two({{"s", 37, -122, kv, {}}, {"r", 37.01, -122, kv, {}}},
                     {{"L", "s", "r", 0.01 * zb, 0.01 * zb, 400}}, {{"ld", "r", 100, 50}}, Source{"s", 1.0});
    PowerFlowSolution s = solve_snapshot(two);
    double dv = std::abs(s.voltage_pu[1] - 0.9984976176592139);
    double dl = std::abs(s.total_loss_kw / 1000.0 - 1.2537644e-4);
    bool two_ok = s.converged && dv <= 1e-4 && dl <= 2e-6;

    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    int failures = 0;
    std::size_t max_buses = 0;
    for (int trial = 0; trial < 100; ++trial) {
        testing::FeederSpec spec;
        spec.buses = 2 + static_cast<std::size_t>(trial % 19);
        max_buses = std::max(max_buses, spec.buses);
        NetworkModel net = testing::random_feeder(rng, spec);
        PowerFlowSolution sol = solve_snapshot(net);
        if (!sol.converged) {
            ++failures;
            continue;
        }
        auto ref = testing::newton_oracle(net);
        for (std::size_t i = 0; i < sol.voltage_pu.size(); ++i) {
            worst = std::max(worst, std::abs(std::polar(sol.voltage_pu[i], sol.angle_rad[i]) -
                                             std::polar(ref.vm[i], ref.va[i])));
        }
    }
    double elapsed = seconds_since(t0);
    o.pass = two_ok && failures == 0 && worst <= 1e-6 && elapsed < 30.0;
    o.detail = fmt("two-bus |dV| %.2e (tol 1e-4), |dloss| %.2e pu (tol 2e-6); 100 feeders <= %zu buses, "
                   "worst |dV| %.2e pu (tol 1e-6), %d non-converged, %.2f s",
                   dv, dl, max_buses, worst, failures, elapsed);
    return o;
}

Outcome conservation() {
    Outcome o;
    std::mt19937_64 rng(777);
    double worst_balance = 0.0, worst_inject = 0.0;
    int unconverged = 0;
    std::size_t max_buses = 0;
    for (int trial = 0; trial < 50; ++trial) {
        testing::FeederSpec spec;
        spec.buses = 2 + static_cast<std::size_t>(trial * 198 / 49);
        spec.p_max_pu = std::min(0.3, 6.0 / static_cast<double>(spec.buses));
        spec.z_max_pu = spec.buses > 50 ? 0.002 : 0.005;
        max_buses = std::max(max_buses, spec.buses);
        NetworkModel net = testing::random_feeder(rng, spec);

        std::vector<Assignment> a;
        std::uniform_int_distribution<std::size_t> bus(0, spec.buses - 1);
        std::uniform_real_distribution<double> kw(0.0, 200.0 / static_cast<double>(spec.buses));
        double assigned = 0.0;
        for (int k = 0; k < 20; ++k) {
            a.push_back({"s" + std::to_string(k), testing::bus_name(bus(rng)), 0.0, kw(rng)});
            assigned += a.back().assigned_kw;
        }
        NetworkModel after = inject_loads(net, a);
        worst_inject = std::max(worst_inject, rel(after.total_load_kw() - net.total_load_kw(), assigned));

        for (const NetworkModel* m : {&net, &after}) {
            PowerFlowSolution s = solve_snapshot(*m);
            if (!s.converged) {
                ++unconverged;
                continue;
            }
            double err = std::abs(s.source_kw - s.load_kw - s.total_loss_kw) / std::abs(s.source_kw);
            worst_balance = std::max(worst_balance, err);
        }
    }
    o.pass = worst_balance <= 1e-6 && worst_inject <= 1e-9 && unconverged == 0;
    o.detail = fmt("50 feeders <= %zu buses: worst balance rel err %.2e (tol 1e-6), worst injection rel err "
                   "%.2e (tol 1e-9), %d non-converged",
                   max_buses, worst_balance, worst_inject, unconverged);
    return o;
}

Outcome demand_model() {
    Outcome o;
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double dts[] = {0.25, 0.5, 1.0};
    const ChargingStrategy all[] = {ChargingStrategy::ImmediateFast, ChargingStrategy::ImmediateSlow,
                                    ChargingStrategy::DelayedFinishByDeparture,
                                    ChargingStrategy::DelayedStartMidnight};
    double worst_energy = 0.0;
    int peak_violations = 0, midnight_violations = 0, midnight_cases = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        double dt = dts[trial % 3];
        auto on_grid = [&](double h) { return std::floor(h / dt) * dt; };
        Cohort c;
        c.count = 1 + static_cast<std::size_t>(u(rng) * 10'000);
        c.location = ChargeLocation::Home;
        c.arrive_h = on_grid(u(rng) * 24.0);
        double dwell = dt * (1 + std::floor(u(rng) * (24.0 / dt - 1)));
        c.depart_h = std::fmod(c.arrive_h + dwell, 24.0);
        c.max_rate_kw = u(rng) < 0.5 ? 1.4 : 7.2;
        // Feasible for every strategy, including the post-midnight window.
        double window = c.dwell_h();
        if (c.arrive_h + window > 24.0) window = c.arrive_h + window - 24.0;
        c.energy_need_kwh = u(rng) * c.max_rate_kw * window;
        const double want = static_cast<double>(c.count) * c.energy_need_kwh;

        double peaks[4];
        for (int k = 0; k < 4; ++k) {
            c.strategy = all[k];
            DemandProfile p = cohort_profile(c, dt);
            worst_energy = std::max(worst_energy, rel(p.energy_kwh(), want));
            peaks[k] = find_peak(p).kw;
            if (all[k] == ChargingStrategy::DelayedStartMidnight && c.arrive_h + c.dwell_h() > 24.0 &&
                c.energy_need_kwh > 0.0) {
                ++midnight_cases;
                if (!(p.values_kw.front() > 0.0)) ++midnight_violations;
            }
        }
        for (int k : {0, 2, 3}) {
            if (peaks[1] > peaks[k] * (1.0 + 1e-12)) ++peak_violations;
        }
    }
    o.pass = worst_energy <= 1e-9 && peak_violations == 0 && midnight_violations == 0;
    o.detail = fmt("1000 cohorts x 4 strategies: worst energy rel err %.2e (tol 1e-9), %d slow-peak "
                   "violations, midnight first sample at 00:00 in %d/%d overnight cases",
                   worst_energy, peak_violations, midnight_cases - midnight_violations, midnight_cases);
    return o;
}

// Minimal, library-independent CSV reader for the recomputation oracle.
std::map<std::string, double> column_by_line(const fs::path& file, const std::string& column) {
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    std::stringstream hs(line);
    for (std::string f; std::getline(hs, f, ',');) header.push_back(f);
    std::size_t col = std::find(header.begin(), header.end(), column) - header.begin();
    std::map<std::string, double> out;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
        out[fields.at(0)] = std::stod(fields.at(col));
    }
    return out;
}

std::string expected_category(double before, double after) {
    before = std::fabs(before);
    after = std::fabs(after);
    double pct;
    if (before <= 1e-6) {
        pct = after > 1e-6 ? INFINITY : 0.0;
    } else {
        pct = std::fabs(after - before) / before * 100.0;
    }
    if (pct < 0.05) return "Gray";
    if (pct < 10.0) return "Green";
    if (pct < 50.0) return "Blue";
    if (pct < 80.0) return "Pink";
    return "Red";
}

fs::path run_fixture(const fs::path& out) {
    fs::remove_all(out);
    RunConfig cfg = load_run_config(testing::data_path("pipeline_config.json"));
    cfg.output_dir = out;
    std::ostringstream log;
    if (run_stage(Stage::Pipeline, cfg, log) != kExitOk) return {};
    return Pipeline(cfg, log).run_dir();
}

Outcome impact_recompute(const fs::path& dir) {
    Outcome o;
    if (dir.empty()) return {false, "pipeline run failed"};
    auto report = nlohmann::json::parse(testing::read_file(dir / "impact.json"));
    std::size_t lines = 0, checked = 0, mismatches = 0;
    for (const char* metric : {"flow", "loss"}) {
        const char* column = std::string(metric) == "flow" ? "kw" : "loss_kw";
        auto before = column_by_line(dir / "snapshot_before_lines.csv", column);
        auto after = column_by_line(dir / "snapshot_after_lines.csv", column);
        lines = before.size();
        for (const auto& r : report["records"]) {
            if (r["metric"] != metric) continue;
            ++checked;
            std::string id = r["line_id"];
            std::string want = expected_category(before.at(id), after.at(id));
            double b = std::fabs(before.at(id)), a = std::fabs(after.at(id));
            bool pct_ok = r["pct_change"].is_null()
                              ? (b <= 1e-6 && a > 1e-6)
                              : std::fabs(r["pct_change"].get<double>() -
                                          (b <= 1e-6 ? 0.0 : std::fabs(a - b) / b * 100.0)) <= 1e-9;
            if (r["category"] != want || !pct_ok) ++mismatches;
        }
    }
    std::size_t hist_total = 0;
    for (const char* h : {"histogram_flow.csv", "histogram_loss.csv"}) {
        std::ifstream in(dir / h);
        std::string line;
        std::getline(in, line);
        std::size_t sum = 0;
        while (std::getline(in, line)) sum += std::stoul(line.substr(line.rfind(',') + 1));
        if (sum != lines) ++mismatches;
        hist_total += sum;
    }
    o.pass = mismatches == 0 && checked == 2 * lines && lines == 39;
    o.detail = fmt("40-bus fixture: %zu records recomputed from raw CSVs, %zu mismatches; histogram sums %zu "
                   "= 2 x %zu lines",
                   checked, mismatches, hist_total, lines);
    return o;
}

Outcome geojson_goldens(const fs::path& first, const fs::path& second) {
    Outcome o;
    if (first.empty() || second.empty()) return {false, "pipeline run failed"};
    std::string a = testing::read_file(first / "network.geojson");
    std::string b = testing::read_file(second / "network.geojson");
    auto doc = nlohmann::json::parse(a);
    const std::set<std::string> colors{"#808080", "#00FF00", "#0000FF", "#FF00FF", "#e31a1c"};
    bool structure = doc["type"] == "FeatureCollection" && doc["features"].is_array();
    std::size_t bad = 0;
    std::set<std::string> ids;
    for (const auto& f : doc["features"]) {
        bool ok = f["type"] == "Feature" && f["geometry"]["type"] == "LineString" &&
                  f["geometry"]["coordinates"].size() == 2 &&
                  colors.contains(f["properties"]["line_color"].get<std::string>());
        if (!ok) ++bad;
        ids.insert(f["id"].get<std::string>());
    }
    std::size_t n = doc["features"].size();
    bool identical = a == b;
    o.pass = structure && bad == 0 && ids.size() == n && n == 39 && identical;
    o.detail = fmt("FeatureCollection with %zu features, %zu invalid, %zu unique ids, rerun byte-identical: %s",
                   n, bad, ids.size(), identical ? "yes" : "no");
    return o;
}

Outcome qsts_performance() {
    Outcome o;
    NetworkModel net = parse_network(testing::read_file(testing::data_path("feeder200.json")));
    constexpr std::size_t kSteps = 8760;
    std::map<std::string, DemandProfile> shapes;
    std::size_t k = 0;
    for (const auto& p : net.loads()) {
        DemandProfile d;
        d.dt_h = 1.0;
        d.values_kw.resize(kSteps);
        double phase = 0.3 * static_cast<double>(k++ % 7);
        for (std::size_t h = 0; h < kSteps; ++h) {
            double day = std::sin(2 * std::numbers::pi * (static_cast<double>(h % 24) - 6.0) / 24.0 + phase);
            double season = std::cos(2 * std::numbers::pi * static_cast<double>(h) / kSteps);
            d.values_kw[h] = p.kw * (0.7 + 0.25 * day + 0.15 * season);
        }
        shapes[p.id] = std::move(d);
    }
    SolverConfig cfg;
    QstsOptions seq;
    seq.steps = kSteps;
    auto t0 = Clock::now();
    QstsResult a = run_qsts(net, shapes, cfg, seq);
    double seq_s = seconds_since(t0);

    QstsOptions par = seq;
    par.threads = std::max(2u, std::thread::hardware_concurrency());
    t0 = Clock::now();
    QstsResult b = run_qsts(net, shapes, cfg, par);
    double par_s = seconds_since(t0);

    std::size_t converged = 0, differing = 0;
    for (std::size_t s = 0; s < kSteps; ++s) {
        converged += a.steps[s].converged;
        const auto& x = a.steps[s];
        const auto& y = b.steps[s];
        if (x.voltage_pu != y.voltage_pu || x.angle_rad != y.angle_rad || x.line_flow_kw != y.line_flow_kw ||
            x.line_flow_kvar != y.line_flow_kvar || x.total_loss_kw != y.total_loss_kw) {
            ++differing;
        }
    }
    std::ostringstream sa, sb;
    write_qsts_summary_csv(sa, a);
    write_qsts_summary_csv(sb, b);
    if (sa.str() != sb.str()) ++differing;
    o.pass = seq_s < 10.0 && converged == kSteps && differing == 0;
    o.detail = fmt("%zu buses x %zu steps: sequential %.2f s (limit 10 s), %u threads %.2f s, %zu/%zu "
                   "converged, %zu differing steps",
                   net.buses().size(), kSteps, seq_s, par.threads, par_s, converged, kSteps, differing);
    return o;
}

}  // namespace

int main() {
    const fs::path work = fs::current_path() / "acceptance_runs";
    fs::path run1, run2;
    auto guarded = [](const std::function<Outcome()>& f) {
        try {
            return f();
        } catch (const std::exception& e) {
            return Outcome{false, std::string("exception: ") + e.what()};
        }
    };
    run1 = run_fixture(work / "a");
    run2 = run_fixture(work / "b");

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"allocation reproduction", allocation_reproduction},
        {"demand-increase reproduction", demand_increase},
        {"categorization bit-exactness", categorization},
        {"solver oracle equivalence", solver_oracle},
        {"conservation suite", conservation},
        {"demand-model properties", demand_model},
        {"end-to-end impact recomputation", [&] { return impact_recompute(run1); }},
        {"geojson goldens", [&] { return geojson_goldens(run1, run2); }},
        {"qsts performance", qsts_performance},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o = guarded(criteria[i].second);
        failed += !o.pass;
        std::printf("criterion %zu [%s] %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str());
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
