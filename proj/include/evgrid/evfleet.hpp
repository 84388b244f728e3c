#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace evgrid {

enum class ChargingStrategy {
    ImmediateFast,             // full power from arrival until full or departure
    ImmediateSlow,             // lowest constant power that finishes by departure
    DelayedFinishByDeparture,  // full power, starting as late as possible
    DelayedStartMidnight,      // full power from 00:00 (home only)
};

enum class ChargeLocation { Home, Workplace };
enum class VehicleType { Bev, Phev };
enum class ChargerLevel { Level1, Level2 };

std::string_view to_string(ChargingStrategy s);
std::string_view to_string(ChargeLocation l);
std::string_view to_string(VehicleType t);
std::string_view to_string(ChargerLevel l);
ChargingStrategy parse_strategy(std::string_view name);

/// Fleet and behaviour factors of one charging scenario. Fractions are in
/// [0,1]. sedan_share is carried through to reports only.
struct ScenarioConfig {
    std::size_t fleet_size = 0;
    double avg_daily_miles = 25.0;
    double ambient_temp_f = 68.0;
    double bev_share = 0.5;
    double sedan_share = 0.5;
    double work_mix_l1 = 0.5;
    double home_access = 1.0;
    double home_mix_l1 = 0.5;
    double home_preference = 0.8;
    ChargingStrategy home_strategy = ChargingStrategy::ImmediateSlow;
    ChargingStrategy work_strategy = ChargingStrategy::ImmediateFast;
    double kwh_per_mile_bev = 0.30;
    double kwh_per_mile_phev = 0.28;
    double temp_multiplier = 1.0;
    double phev_battery_kwh = 10.0;

    /// Throws SchemaError describing the first violated invariant.
    void validate() const;
};

/// Plug-in windows and charger nameplates shared by all cohorts.
struct ChargingSchedule {
    double home_arrive_h = 18.0;
    double home_depart_h = 7.0;
    double work_arrive_h = 9.0;
    double work_depart_h = 17.0;
    double level1_kw = 1.4;
    double level2_kw = 7.2;

    void validate() const;
};

struct Cohort {
    std::size_t count = 0;
    double energy_need_kwh = 0.0;  // per vehicle per day
    double arrive_h = 0.0;
    double depart_h = 0.0;
    double max_rate_kw = 0.0;  // per vehicle
    ChargingStrategy strategy = ChargingStrategy::ImmediateSlow;
    ChargeLocation location = ChargeLocation::Home;
    VehicleType vehicle = VehicleType::Bev;
    ChargerLevel level = ChargerLevel::Level2;

    /// Hours parked, (depart - arrive) mod 24.
    double dwell_h() const;
};

/// kW samples covering exactly one day. Each sample is the average power
/// over [k*dt_h, (k+1)*dt_h).
struct DemandProfile {
    double dt_h = 1.0;
    std::vector<double> values_kw;
    double declared_energy_kwh = 0.0;
    // Set when a cohort could not receive its full energy within its window.
    bool truncated = false;

    /// Sum of values_kw * dt_h (pairwise summation).
    double energy_kwh() const;
    std::size_t size() const { return values_kw.size(); }
};

struct Peak {
    std::size_t index = 0;
    double kw = 0.0;
};

/// Number of samples per day for dt_h; throws SchemaError unless dt_h
/// divides 24 h into a whole number of steps.
std::size_t steps_per_day(double dt_h);

std::vector<Cohort> build_cohorts(const ScenarioConfig& cfg, const ChargingSchedule& schedule = {});

DemandProfile cohort_profile(const Cohort& cohort, double dt_h);

/// Pointwise sum; an empty list yields a zero profile of one day at dt_h.
DemandProfile aggregate_profiles(std::span<const DemandProfile> profiles, double dt_h);

/// Whole-fleet profile: all cohorts of the scenario summed.
DemandProfile scenario_profile(const ScenarioConfig& cfg, const ChargingSchedule& schedule,
                               double dt_h);

Peak find_peak(const DemandProfile& profile);

/// "hour,kw" CSV, one row per sample.
std::string profile_csv(const DemandProfile& profile);

ScenarioConfig parse_scenario(const nlohmann::json& doc);
ChargingSchedule parse_schedule(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const ScenarioConfig& cfg);
nlohmann::ordered_json to_json(const Cohort& cohort);

/// Pairwise (cascade) summation, fixed association order for a given length.
double pairwise_sum(std::span<const double> values);

}  // namespace evgrid
