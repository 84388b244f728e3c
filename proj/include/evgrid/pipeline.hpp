#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evgrid/assign.hpp"
#include "evgrid/evfleet.hpp"
#include "evgrid/geoexport.hpp"
#include "evgrid/impact.hpp"
#include "evgrid/netmodel.hpp"
#include "evgrid/powerflow.hpp"
#include "evgrid/stations.hpp"

namespace evgrid {

struct RunConfig {
    std::filesystem::path network_path;
    std::filesystem::path stations_path;
    std::optional<std::filesystem::path> load_shapes_path;
    ScenarioConfig scenario;
    ChargingSchedule schedule;
    SolverConfig solver;
    std::optional<double> peak_kw_override;
    double ampacity_threshold_a = 0.0;
    std::filesystem::path output_dir = "runs";
    double dt_h = 1.0;
    std::size_t steps = 8760;
    unsigned threads = 1;
    TargetMode targets = TargetMode::LoadBuses;
    std::string target_tag = "transformer";
    LineStyle style;

    std::string hash;  // FNV-1a of the canonical document, output_dir excluded
    nlohmann::json document;
};

/// Relative paths in the document resolve against base_dir. Throws
/// SchemaError on any invalid field.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// 16 hex digits, FNV-1a 64 over the canonical (key-sorted) JSON dump.
std::string config_hash(const nlohmann::json& doc);

/// CSV "hour,<load_id>,..." of kW samples at the run's dt_h.
std::map<std::string, DemandProfile> parse_load_shapes(std::string_view table, double dt_h);

enum class Stage { Validate, Profile, Assign, Run, Impact, Export, Pipeline };

std::string_view to_string(Stage stage);

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitSchema = 2,
    kExitTopology = 3,
    kExitSolver = 4,
};

/// Lazily evaluated run. Each accessor computes (and caches) its stage and
/// every stage it depends on; write() persists one stage's artifacts and its
/// manifest section, so writing stages one by one yields the same run
/// directory as writing them all at once.
class Pipeline {
  public:
    explicit Pipeline(RunConfig cfg, std::ostream& log);

    const RunConfig& config() const { return cfg_; }
    std::filesystem::path run_dir() const;

    const NetworkModel& network();
    const std::vector<EvStation>& stations();
    const TopologyReport& topology();
    const std::map<std::string, DemandProfile>& load_shapes();

    const DemandProfile& profile();
    Peak profile_peak();
    double peak_kw();

    const StationCensus& census();
    const Allocation& allocation();
    const std::vector<Assignment>& assignments();
    const NetworkModel& network_after();

    const PowerFlowSolution& snapshot_before();
    const PowerFlowSolution& snapshot_after();
    const QstsResult& qsts_before();
    const QstsResult& qsts_after();

    const std::vector<ImpactRecord>& flow_records();
    const std::vector<ImpactRecord>& loss_records();
    const SystemSummary& summary();

    const std::string& geojson();

    void write(Stage stage);

  private:
    void require_radial();
    std::vector<ImpactRecord> filtered(std::vector<ImpactRecord> records);
    void merge_manifest(const std::string& section, nlohmann::ordered_json value);
    void write_artifact(const std::string& name, const std::string& content);

    RunConfig cfg_;
    std::ostream& log_;
    std::optional<NetworkModel> network_;
    std::optional<std::vector<EvStation>> stations_;
    std::optional<TopologyReport> topology_;
    std::optional<std::map<std::string, DemandProfile>> load_shapes_;
    std::optional<DemandProfile> profile_;
    std::optional<StationCensus> census_;
    std::optional<Allocation> allocation_;
    std::optional<std::vector<Assignment>> assignments_;
    std::optional<NetworkModel> network_after_;
    std::optional<PowerFlowSolution> snapshot_before_;
    std::optional<PowerFlowSolution> snapshot_after_;
    std::optional<QstsResult> qsts_before_;
    std::optional<QstsResult> qsts_after_;
    std::optional<std::vector<ImpactRecord>> flow_records_;
    std::optional<std::vector<ImpactRecord>> loss_records_;
    std::optional<SystemSummary> summary_;
    std::optional<std::string> geojson_;
};

/// Runs one subcommand; Stage::Pipeline writes every stage. Returns the
/// process exit code. On failure the run directory keeps what was written
/// plus a FAILED marker naming the stage.
int run_stage(Stage stage, const RunConfig& cfg, std::ostream& log);

}  // namespace evgrid
