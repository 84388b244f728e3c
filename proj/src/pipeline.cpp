#include "evgrid/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "evgrid/csv.hpp"
#include "evgrid/error.hpp"

namespace evgrid {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 9> kManifestSections{
    "config_hash", "config", "inputs", "profile", "stations", "assignments", "powerflow", "impact", "export"};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

const json* member(const json& doc, const char* key) {
    auto it = doc.find(key);
    return it == doc.end() || it->is_null() ? nullptr : &*it;
}

double number_field(const json& doc, const char* key, double fallback) {
    const json* v = member(doc, key);
    if (!v) return fallback;
    if (!v->is_number()) throw SchemaError(std::string("config: '") + key + "' must be a number");
    return v->get<double>();
}

fs::path path_field(const json& doc, const char* key, const fs::path& base, bool required) {
    const json* v = member(doc, key);
    if (!v) {
        if (required) throw SchemaError(std::string("config: missing field '") + key + "'");
        return {};
    }
    if (!v->is_string() || v->get<std::string>().empty()) {
        throw SchemaError(std::string("config: '") + key + "' must be a non-empty path");
    }
    fs::path p = v->get<std::string>();
    return p.is_absolute() ? p : base / p;
}

ojson solution_summary(const PowerFlowSolution& s) {
    return ojson{
        {"converged", s.converged},         {"iterations", s.iterations},
        {"source_kw", s.source_kw},         {"load_kw", s.load_kw},
        {"loss_kw", s.total_loss_kw},       {"min_v_pu", s.min_voltage_pu()},
        {"max_v_pu", s.max_voltage_pu()},
    };
}

ojson qsts_summary(const QstsResult& r) {
    LossTotal total = total_losses(r);
    double peak_loss = 0.0;
    for (const auto& s : r.steps) {
        if (s.converged) peak_loss = std::max(peak_loss, s.total_loss_kw);
    }
    ojson j{
        {"steps", r.steps.size()},
        {"dt_h", r.dt_h},
        {"converged_steps", total.converged_steps},
        {"loss_kwh", total.kwh},
        {"loss_kwh_complete", total.complete()},
        {"peak_step_loss_kw", peak_loss},
    };
    ojson failed = ojson::array();
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        if (!r.steps[i].converged) failed.push_back({{"step", i}, {"diagnostic", r.steps[i].diagnostic}});
    }
    j["failed_steps"] = std::move(failed);
    return j;
}

ojson category_counts(std::span<const ImpactRecord> records) {
    std::array<std::size_t, kCategoryCount> counts{};
    for (const auto& r : records) ++counts[static_cast<std::size_t>(r.category)];
    ojson j;
    for (const auto& c : kCategories) j[std::string(c.name)] = counts[static_cast<std::size_t>(c.category)];
    return j;
}

ojson histogram_json(const Histogram& h) {
    return ojson{{"bin_edges", h.bin_edges}, {"counts", h.counts}};
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace

std::string config_hash(const json& doc) {
    json canonical = doc;
    if (canonical.is_object()) canonical.erase("output_dir");
    return fnv1a_hex(canonical.dump());
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw SchemaError("config must be a JSON object");
    static const std::unordered_set<std::string> kKnown{
        "network_path", "stations_path", "load_shapes_path", "scenario", "schedule", "solver",
        "peak_kw_override", "ampacity_threshold_a", "output_dir", "dt_h", "steps", "threads",
        "assignment_targets", "target_tag", "style"};
    for (const auto& [key, value] : doc.items()) {
        if (!kKnown.contains(key)) throw SchemaError("config: unknown field '" + key + "'");
    }

    RunConfig cfg;
    cfg.document = doc;
    cfg.hash = config_hash(doc);
    cfg.network_path = path_field(doc, "network_path", base_dir, true);
    cfg.stations_path = path_field(doc, "stations_path", base_dir, true);
    if (member(doc, "load_shapes_path")) cfg.load_shapes_path = path_field(doc, "load_shapes_path", base_dir, true);
    if (member(doc, "output_dir")) cfg.output_dir = path_field(doc, "output_dir", base_dir, true);
    else cfg.output_dir = base_dir / "runs";

    const json* scenario = member(doc, "scenario");
    if (!scenario) throw SchemaError("config: missing field 'scenario'");
    cfg.scenario = parse_scenario(*scenario);
    if (const json* s = member(doc, "schedule")) cfg.schedule = parse_schedule(*s);

    if (const json* s = member(doc, "solver")) {
        if (!s->is_object()) throw SchemaError("config: 'solver' must be an object");
        for (const auto& [key, value] : s->items()) {
            if (key != "tol_pu" && key != "max_iter") throw SchemaError("solver: unknown field '" + key + "'");
        }
        cfg.solver.tol_pu = number_field(*s, "tol_pu", cfg.solver.tol_pu);
        if (const json* it = member(*s, "max_iter")) {
            if (!it->is_number_integer()) throw SchemaError("solver: max_iter must be an integer");
            cfg.solver.max_iter = it->get<int>();
        }
        cfg.solver.validate();
    }

    if (const json* p = member(doc, "peak_kw_override")) {
        if (!p->is_number() || !(p->get<double>() >= 0.0)) {
            throw SchemaError("config: peak_kw_override must be a non-negative number");
        }
        cfg.peak_kw_override = p->get<double>();
    }
    cfg.ampacity_threshold_a = number_field(doc, "ampacity_threshold_a", 0.0);
    if (!(cfg.ampacity_threshold_a >= 0.0)) throw SchemaError("config: ampacity_threshold_a must be >= 0");

    cfg.dt_h = number_field(doc, "dt_h", 1.0);
    if (cfg.dt_h != 0.25 && cfg.dt_h != 0.5 && cfg.dt_h != 1.0) {
        throw SchemaError("config: dt_h must be one of 0.25, 0.5, 1.0");
    }
    if (const json* s = member(doc, "steps")) {
        if (!s->is_number_integer() || s->get<long long>() < 1) {
            throw SchemaError("config: steps must be an integer >= 1");
        }
        cfg.steps = s->get<std::size_t>();
    }
    if (const json* t = member(doc, "threads")) {
        if (!t->is_number_integer() || t->get<long long>() < 1) {
            throw SchemaError("config: threads must be an integer >= 1");
        }
        cfg.threads = t->get<unsigned>();
    }
    if (const json* t = member(doc, "assignment_targets")) {
        if (!t->is_string()) throw SchemaError("config: assignment_targets must be a string");
        cfg.targets = parse_target_mode(t->get<std::string>());
    }
    if (const json* t = member(doc, "target_tag")) {
        if (!t->is_string()) throw SchemaError("config: target_tag must be a string");
        cfg.target_tag = t->get<std::string>();
    }
    if (const json* s = member(doc, "style")) {
        if (!s->is_object()) throw SchemaError("config: 'style' must be an object");
        cfg.style.min_width = number_field(*s, "min_width", cfg.style.min_width);
        cfg.style.max_width = number_field(*s, "max_width", cfg.style.max_width);
        cfg.style.width_slope = number_field(*s, "width_slope", cfg.style.width_slope);
        cfg.style.styled_opacity = number_field(*s, "styled_opacity", cfg.style.styled_opacity);
        cfg.style.default_opacity = number_field(*s, "default_opacity", cfg.style.default_opacity);
        const auto& st = cfg.style;
        if (!(st.min_width > 0.0 && st.max_width >= st.min_width) ||
            !(st.styled_opacity >= 0.0 && st.styled_opacity <= 1.0) ||
            !(st.default_opacity >= 0.0 && st.default_opacity <= 1.0)) {
            throw SchemaError("config: invalid style");
        }
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw SchemaError("config " + path.string() + ": " + e.what());
    }
    return parse_run_config(doc, path.parent_path());
}

std::map<std::string, DemandProfile> parse_load_shapes(std::string_view table, double dt_h) {
    auto rows = csv::parse(table);
    if (rows.empty()) throw SchemaError("load shapes: missing header");
    const auto& header = rows.front().fields;
    if (header.empty() || header.front() != "hour") throw SchemaError("load shapes: first column must be 'hour'");
    std::map<std::string, DemandProfile> shapes;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (!shapes.emplace(header[c], DemandProfile{dt_h, {}, 0.0, false}).second) {
            throw SchemaError("load shapes: duplicate column " + header[c]);
        }
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.size()) {
            throw SchemaError("load shapes: row " + std::to_string(row.line) + ": wrong number of fields");
        }
        for (std::size_t c = 1; c < header.size(); ++c) {
            double v = 0.0;
            if (!csv::parse_double(row.fields[c], v) || v < 0.0) {
                throw SchemaError("load shapes: row " + std::to_string(row.line) + ": bad value for " + header[c]);
            }
            shapes[header[c]].values_kw.push_back(v);
        }
    }
    if (rows.size() < 2) throw SchemaError("load shapes: no data rows");
    for (auto& [id, shape] : shapes) shape.declared_energy_kwh = shape.energy_kwh();
    return shapes;
}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Validate: return "validate";
        case Stage::Profile: return "profile";
        case Stage::Assign: return "assign";
        case Stage::Run: return "run";
        case Stage::Impact: return "impact";
        case Stage::Export: return "export";
        case Stage::Pipeline: return "pipeline";
    }
    return "?";
}

Pipeline::Pipeline(RunConfig cfg, std::ostream& log) : cfg_(std::move(cfg)), log_(log) {}

fs::path Pipeline::run_dir() const { return cfg_.output_dir / ("run-" + cfg_.hash); }

const NetworkModel& Pipeline::network() {
    if (!network_) {
        log_ << "[validate] reading network " << cfg_.network_path.string() << '\n';
        network_ = parse_network(read_file(cfg_.network_path));
    }
    return *network_;
}

const std::vector<EvStation>& Pipeline::stations() {
    if (!stations_) {
        log_ << "[validate] reading stations " << cfg_.stations_path.string() << '\n';
        stations_ = parse_stations(read_file(cfg_.stations_path));
    }
    return *stations_;
}

const TopologyReport& Pipeline::topology() {
    if (!topology_) topology_ = validate_radial(network());
    return *topology_;
}

void Pipeline::require_radial() {
    const TopologyReport& t = topology();
    if (!t.radial) {
        std::string msg = t.connected ? "network is not radial (contains a loop)"
                                      : "network is not connected; unreachable bus " + t.orphan_buses.front();
        throw TopologyError(msg);
    }
}

const std::map<std::string, DemandProfile>& Pipeline::load_shapes() {
    if (!load_shapes_) {
        load_shapes_.emplace();
        if (cfg_.load_shapes_path) *load_shapes_ = parse_load_shapes(read_file(*cfg_.load_shapes_path), cfg_.dt_h);
    }
    return *load_shapes_;
}

const DemandProfile& Pipeline::profile() {
    if (!profile_) {
        auto cohorts = build_cohorts(cfg_.scenario, cfg_.schedule);
        std::vector<DemandProfile> parts;
        for (const auto& c : cohorts) parts.push_back(cohort_profile(c, cfg_.dt_h));
        profile_ = aggregate_profiles(parts, cfg_.dt_h);
        log_ << "[profile] " << cohorts.size() << " cohorts, " << profile_->energy_kwh() << " kWh/day\n";
        if (profile_->truncated) log_ << "[profile] warning: some cohorts could not be fully charged\n";
    }
    return *profile_;
}

Peak Pipeline::profile_peak() { return find_peak(profile()); }

double Pipeline::peak_kw() { return cfg_.peak_kw_override.value_or(profile_peak().kw); }

const StationCensus& Pipeline::census() {
    if (!census_) census_ = take_census(stations());
    return *census_;
}

const Allocation& Pipeline::allocation() {
    if (!allocation_) allocation_ = allocate_peak(peak_kw(), census());
    return *allocation_;
}

const std::vector<Assignment>& Pipeline::assignments() {
    if (!assignments_) {
        require_radial();
        BusCatalog catalog = assignment_targets(network(), cfg_.targets, cfg_.target_tag);
        if (catalog.empty()) throw SchemaError("no assignment target buses (" + std::string(to_string(cfg_.targets)) + ")");
        assignments_ = assign_stations(stations(), allocation(), catalog);
        log_ << "[assign] " << assignments_->size() << " stations onto " << catalog.size() << " candidate buses\n";
    }
    return *assignments_;
}

const NetworkModel& Pipeline::network_after() {
    if (!network_after_) network_after_ = inject_loads(network(), assignments());
    return *network_after_;
}

const PowerFlowSolution& Pipeline::snapshot_before() {
    if (!snapshot_before_) {
        require_radial();
        auto s = solve_snapshot(network(), cfg_.solver);
        if (!s.converged) throw SolverError("before snapshot: " + s.diagnostic);
        snapshot_before_ = std::move(s);
    }
    return *snapshot_before_;
}

const PowerFlowSolution& Pipeline::snapshot_after() {
    if (!snapshot_after_) {
        auto s = solve_snapshot(network_after(), cfg_.solver);
        if (!s.converged) throw SolverError("after snapshot: " + s.diagnostic);
        snapshot_after_ = std::move(s);
    }
    return *snapshot_after_;
}

const QstsResult& Pipeline::qsts_before() {
    if (!qsts_before_) {
        require_radial();
        QstsOptions opt{cfg_.steps, cfg_.threads, cfg_.dt_h};
        qsts_before_ = run_qsts(network(), load_shapes(), cfg_.solver, opt);
        log_ << "[run] before: " << qsts_before_->steps.size() << " steps\n";
    }
    return *qsts_before_;
}

const QstsResult& Pipeline::qsts_after() {
    if (!qsts_after_) {
        // EV demand enters as separate unity-power-factor loads following the
        // normalized fleet profile; baseline loads keep their own shapes.
        const NetworkModel& before = network();
        std::map<std::string, double> ev_kw_by_bus;
        for (const auto& a : assignments()) ev_kw_by_bus[a.bus_id] += a.assigned_kw;

        const DemandProfile& fleet = profile();
        const double fleet_peak = profile_peak().kw;
        std::map<std::string, DemandProfile> shapes = load_shapes();
        std::vector<LoadPoint> loads = before.loads();
        for (const auto& [bus, kw] : ev_kw_by_bus) {
            std::string id = "ev_" + bus;
            while (before.load_index(id)) id += "_";
            loads.push_back(LoadPoint{id, bus, kw, 0.0});
            DemandProfile shape{cfg_.dt_h, {}, 0.0, false};
            shape.values_kw.reserve(fleet.values_kw.size());
            for (double v : fleet.values_kw) shape.values_kw.push_back(fleet_peak > 0.0 ? kw * v / fleet_peak : kw);
            shape.declared_energy_kwh = shape.energy_kwh();
            shapes.emplace(id, std::move(shape));
        }
        NetworkModel with_ev(before.buses(), before.lines(), std::move(loads), before.source());
        QstsOptions opt{cfg_.steps, cfg_.threads, cfg_.dt_h};
        qsts_after_ = run_qsts(with_ev, shapes, cfg_.solver, opt);
        log_ << "[run] after: " << qsts_after_->steps.size() << " steps\n";
    }
    return *qsts_after_;
}

std::vector<ImpactRecord> Pipeline::filtered(std::vector<ImpactRecord> records) {
    auto kept = filter_by_ampacity(network(), cfg_.ampacity_threshold_a);
    std::unordered_set<std::string> keep(kept.begin(), kept.end());
    std::erase_if(records, [&](const ImpactRecord& r) { return !keep.contains(r.line_id); });
    return records;
}

const std::vector<ImpactRecord>& Pipeline::flow_records() {
    if (!flow_records_) flow_records_ = filtered(build_records(snapshot_before(), snapshot_after(), Metric::Flow));
    return *flow_records_;
}

const std::vector<ImpactRecord>& Pipeline::loss_records() {
    if (!loss_records_) loss_records_ = filtered(build_records(snapshot_before(), snapshot_after(), Metric::Loss));
    return *loss_records_;
}

const SystemSummary& Pipeline::summary() {
    if (!summary_) {
        summary_ = summarize(network().total_load_kw(), network_after().total_load_kw(),
                             snapshot_before().total_loss_kw, snapshot_after().total_loss_kw);
    }
    return *summary_;
}

const std::string& Pipeline::geojson() {
    if (!geojson_) geojson_ = export_geojson(network(), flow_records(), cfg_.style);
    return *geojson_;
}

void Pipeline::write_artifact(const std::string& name, const std::string& content) {
    write_file(run_dir() / name, content);
}

void Pipeline::merge_manifest(const std::string& section, ojson value) {
    const fs::path path = run_dir() / "manifest.json";
    ojson current = ojson::object();
    if (fs::exists(path)) current = ojson::parse(read_file(path));
    current["config_hash"] = cfg_.hash;
    current["config"] = cfg_.document;
    current[section] = std::move(value);
    ojson ordered = ojson::object();
    for (std::string_view key : kManifestSections) {
        auto it = current.find(std::string(key));
        if (it != current.end()) ordered[std::string(key)] = *it;
    }
    write_file(path, ordered.dump(2) + "\n");
}

void Pipeline::write(Stage stage) {
    switch (stage) {
        case Stage::Validate: {
            const auto& t = topology();
            ojson inputs{
                {"buses", network().buses().size()},
                {"lines", network().lines().size()},
                {"loads", network().loads().size()},
                {"stations", stations().size()},
                {"topology", ojson::parse(to_json(t).dump())},
            };
            write_artifact("validation.json", inputs.dump(2) + "\n");
            merge_manifest("inputs", inputs);
            break;
        }
        case Stage::Profile: {
            const DemandProfile& p = profile();
            Peak peak = profile_peak();
            ojson cohorts = ojson::array();
            for (const auto& c : build_cohorts(cfg_.scenario, cfg_.schedule)) cohorts.push_back(to_json(c));
            ojson section{
                {"scenario", to_json(cfg_.scenario)},
                {"dt_h", p.dt_h},
                {"energy_kwh", p.energy_kwh()},
                {"truncated", p.truncated},
                {"peak_index", peak.index},
                {"peak_hour", static_cast<double>(peak.index) * p.dt_h},
                {"profile_peak_kw", peak.kw},
                {"peak_kw_override", cfg_.peak_kw_override ? ojson(*cfg_.peak_kw_override) : ojson(nullptr)},
                {"peak_kw", peak_kw()},
                {"cohorts", std::move(cohorts)},
            };
            write_artifact("profile.csv", profile_csv(p));
            merge_manifest("profile", std::move(section));
            break;
        }
        case Stage::Assign: {
            const auto& a = assignments();
            std::vector<double> kw;
            for (const auto& x : a) kw.push_back(x.assigned_kw);
            write_artifact("assignments.csv", assignments_csv(a));
            write_artifact("network_after.json", serialize_network(network_after()));
            merge_manifest("stations", ojson{{"census", to_json(census())}, {"allocation", to_json(allocation())}});
            ojson buses = ojson::array();
            std::unordered_set<std::string> seen;
            for (const auto& x : a) {
                if (seen.insert(x.bus_id).second) buses.push_back(x.bus_id);
            }
            merge_manifest("assignments", ojson{
                                              {"targets", to_string(cfg_.targets)},
                                              {"count", a.size()},
                                              {"buses", std::move(buses)},
                                              {"assigned_kw_total", pairwise_sum(kw)},
                                          });
            break;
        }
        case Stage::Run: {
            const auto& b = snapshot_before();
            const auto& s = snapshot_after();
            std::ostringstream lb, la, bb, ba;
            write_snapshot_lines_csv(lb, b);
            write_snapshot_lines_csv(la, s);
            write_snapshot_buses_csv(bb, b);
            write_snapshot_buses_csv(ba, s);
            write_artifact("snapshot_before_lines.csv", lb.str());
            write_artifact("snapshot_after_lines.csv", la.str());
            write_artifact("snapshot_before_buses.csv", bb.str());
            write_artifact("snapshot_after_buses.csv", ba.str());
            for (auto [name, result] : {std::pair{"before", &qsts_before()}, std::pair{"after", &qsts_after()}}) {
                std::ostringstream lines, summary;
                write_qsts_lines_csv(lines, *result);
                write_qsts_summary_csv(summary, *result);
                write_artifact(std::string("qsts_") + name + "_lines.csv", lines.str());
                write_artifact(std::string("qsts_") + name + "_summary.csv", summary.str());
            }
            merge_manifest("powerflow", ojson{
                                            {"snapshot_before", solution_summary(b)},
                                            {"snapshot_after", solution_summary(s)},
                                            {"qsts_before", qsts_summary(qsts_before())},
                                            {"qsts_after", qsts_summary(qsts_after())},
                                        });
            break;
        }
        case Stage::Impact: {
            std::vector<ImpactRecord> all = flow_records();
            all.insert(all.end(), loss_records().begin(), loss_records().end());
            Histogram hf = build_histogram(flow_records());
            Histogram hl = build_histogram(loss_records());
            write_artifact("impact.json", impact_report(summary(), all).dump(2) + "\n");
            write_artifact("histogram_flow.csv", histogram_csv(hf));
            write_artifact("histogram_loss.csv", histogram_csv(hl));
            merge_manifest("impact", ojson{
                                         {"summary", to_json(summary())},
                                         {"ampacity_threshold_a", cfg_.ampacity_threshold_a},
                                         {"lines_considered", flow_records().size()},
                                         {"flow_categories", category_counts(flow_records())},
                                         {"loss_categories", category_counts(loss_records())},
                                         {"flow_histogram", histogram_json(hf)},
                                         {"loss_histogram", histogram_json(hl)},
                                     });
            break;
        }
        case Stage::Export: {
            write_artifact("network.geojson", geojson());
            merge_manifest("export", ojson{{"geojson", "network.geojson"},
                                           {"features", network().lines().size()},
                                           {"styled_features", flow_records().size()}});
            break;
        }
        case Stage::Pipeline:
            for (Stage s : {Stage::Validate, Stage::Profile, Stage::Assign, Stage::Run, Stage::Impact,
                            Stage::Export}) {
                write(s);
            }
            break;
    }
}

int run_stage(Stage stage, const RunConfig& cfg, std::ostream& log) {
    Pipeline p(cfg, log);
    Stage current = Stage::Validate;
    auto fail = [&](int code, const std::string& what) {
        log << "[" << to_string(current) << "] FAILED: " << what << '\n';
        try {
            write_file(p.run_dir() / "FAILED", "stage: " + std::string(to_string(current)) + "\nerror: " + what + "\n");
        } catch (const std::exception&) {
        }
        return code;
    };
    try {
        std::error_code ec;
        fs::remove(p.run_dir() / "FAILED", ec);

        const std::array<Stage, 6> chain{Stage::Validate, Stage::Profile, Stage::Assign,
                                         Stage::Run,      Stage::Impact,  Stage::Export};
        for (Stage s : chain) {
            current = s;
            const bool emit = stage == Stage::Pipeline || stage == s;
            switch (s) {
                case Stage::Validate:
                    p.topology();
                    p.stations();
                    if (emit) p.write(s);
                    if (!p.topology().radial) {
                        const auto& t = p.topology();
                        throw TopologyError(t.connected ? "network is not radial (contains a loop)"
                                                        : "network is not connected; unreachable bus " +
                                                              t.orphan_buses.front());
                    }
                    break;
                case Stage::Profile:
                    p.profile();
                    if (emit) p.write(s);
                    break;
                case Stage::Assign:
                    p.network_after();
                    if (emit) p.write(s);
                    break;
                case Stage::Run:
                    p.snapshot_before();
                    p.snapshot_after();
                    if (emit) p.write(s);
                    break;
                case Stage::Impact:
                    p.summary();
                    p.flow_records();
                    p.loss_records();
                    if (emit) p.write(s);
                    break;
                case Stage::Export:
                    p.geojson();
                    if (emit) p.write(s);
                    break;
                case Stage::Pipeline:
                    break;
            }
            if (s == stage) break;
        }
        log << "[" << to_string(stage) << "] ok: " << p.run_dir().string() << '\n';
        return kExitOk;
    } catch (const SchemaError& e) {
        return fail(kExitSchema, e.what());
    } catch (const TopologyError& e) {
        return fail(kExitTopology, e.what());
    } catch (const SolverError& e) {
        return fail(kExitSolver, e.what());
    } catch (const std::exception& e) {
        return fail(kExitFailure, e.what());
    }
}

}  // namespace evgrid
