#include "evgrid/evfleet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "evgrid/csv.hpp"
#include "evgrid/error.hpp"

namespace evgrid {

namespace {

using nlohmann::json;

constexpr double kDay = 24.0;

struct StrategyName {
    ChargingStrategy strategy;
    std::string_view name;
};

constexpr std::array<StrategyName, 4> kStrategyNames{{
    {ChargingStrategy::ImmediateFast, "immediate_fast"},
    {ChargingStrategy::ImmediateSlow, "immediate_slow"},
    {ChargingStrategy::DelayedFinishByDeparture, "delayed_finish_by_departure"},
    {ChargingStrategy::DelayedStartMidnight, "delayed_start_midnight"},
}};

void require_fraction(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw SchemaError(std::string("scenario: ") + name + " must be in [0,1]");
}

void require_hour(double v, const char* name) {
    if (!(v >= 0.0 && v < kDay)) throw SchemaError(std::string("schedule: ") + name + " must be in [0,24)");
}

/// One charging session of a single vehicle on the unwrapped clock.
struct Session {
    double start_h = 0.0;  // [0, 24)
    double duration_h = 0.0;
    double rate_kw = 0.0;
    double energy_kwh = 0.0;
    bool truncated = false;
};

Session full_power_session(double window_start, double window_h, double need, double rate,
                           bool late) {
    Session s;
    double deliverable = rate * window_h;
    s.truncated = need > deliverable;
    s.energy_kwh = std::min(need, deliverable);
    s.rate_kw = rate;
    s.duration_h = s.truncated ? window_h : s.energy_kwh / rate;
    s.start_h = late ? window_start + window_h - s.duration_h : window_start;
    return s;
}

Session plan_session(const Cohort& c) {
    const double dwell = c.dwell_h();
    const double need = c.energy_need_kwh;
    const double rate = c.max_rate_kw;
    switch (c.strategy) {
        case ChargingStrategy::ImmediateFast:
            return full_power_session(c.arrive_h, dwell, need, rate, false);
        case ChargingStrategy::ImmediateSlow: {
            double even = need / dwell;
            if (even > rate) return full_power_session(c.arrive_h, dwell, need, rate, false);
            return Session{c.arrive_h, dwell, even, need, false};
        }
        case ChargingStrategy::DelayedFinishByDeparture:
            return full_power_session(c.arrive_h, dwell, need, rate, true);
        case ChargingStrategy::DelayedStartMidnight: {
            if (c.location != ChargeLocation::Home) {
                throw std::invalid_argument("delayed_start_midnight is only valid for home charging");
            }
            // Midnight inside the parked window: charge from 00:00 to departure.
            bool spans_midnight = c.arrive_h == 0.0 || c.arrive_h + dwell > kDay;
            if (!spans_midnight) return full_power_session(c.arrive_h, dwell, need, rate, false);
            double window = c.arrive_h == 0.0 ? dwell : c.arrive_h + dwell - kDay;
            return full_power_session(0.0, window, need, rate, false);
        }
    }
    throw std::logic_error("unhandled charging strategy");
}

/// Adds rate over [x0, x1) to the time-averaged samples.
void spread(std::vector<double>& values, double dt, double x0, double x1, double rate) {
    if (x1 <= x0) return;
    auto k = static_cast<std::size_t>(std::floor(x0 / dt));
    for (; k < values.size(); ++k) {
        double lo = static_cast<double>(k) * dt;
        double hi = static_cast<double>(k + 1) * dt;
        if (lo >= x1) break;
        double overlap = std::min(x1, hi) - std::max(x0, lo);
        if (overlap > 0.0) values[k] += rate * overlap / dt;
    }
}

double number_or(const json& doc, const char* key, double fallback) {
    auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number()) throw SchemaError(std::string("field '") + key + "' must be a number");
    return it->get<double>();
}

void reject_unknown(const json& doc, std::initializer_list<std::string_view> allowed, const char* what) {
    for (const auto& [key, value] : doc.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw SchemaError(std::string(what) + ": unknown field '" + key + "'");
        }
    }
}

}  // namespace

std::string_view to_string(ChargingStrategy s) {
    for (const auto& n : kStrategyNames) {
        if (n.strategy == s) return n.name;
    }
    return "unknown";
}

std::string_view to_string(ChargeLocation l) {
    return l == ChargeLocation::Home ? "home" : "workplace";
}

std::string_view to_string(VehicleType t) { return t == VehicleType::Bev ? "bev" : "phev"; }

std::string_view to_string(ChargerLevel l) { return l == ChargerLevel::Level1 ? "level1" : "level2"; }

ChargingStrategy parse_strategy(std::string_view name) {
    for (const auto& n : kStrategyNames) {
        if (n.name == name) return n.strategy;
    }
    throw SchemaError("unknown charging strategy: " + std::string(name));
}

void ScenarioConfig::validate() const {
    require_fraction(bev_share, "bev_share");
    require_fraction(sedan_share, "sedan_share");
    require_fraction(work_mix_l1, "work_mix_l1");
    require_fraction(home_access, "home_access");
    require_fraction(home_mix_l1, "home_mix_l1");
    require_fraction(home_preference, "home_preference");
    if (!(avg_daily_miles > 0.0)) throw SchemaError("scenario: avg_daily_miles must be positive");
    if (!(kwh_per_mile_bev >= 0.0) || !(kwh_per_mile_phev >= 0.0)) {
        throw SchemaError("scenario: kwh_per_mile must be non-negative");
    }
    if (!(temp_multiplier >= 0.0)) throw SchemaError("scenario: temp_multiplier must be non-negative");
    if (!(phev_battery_kwh > 0.0)) throw SchemaError("scenario: phev_battery_kwh must be positive");
    if (work_strategy == ChargingStrategy::DelayedStartMidnight) {
        throw SchemaError("scenario: work_strategy cannot be delayed_start_midnight");
    }
}

void ChargingSchedule::validate() const {
    require_hour(home_arrive_h, "home_arrive_h");
    require_hour(home_depart_h, "home_depart_h");
    require_hour(work_arrive_h, "work_arrive_h");
    require_hour(work_depart_h, "work_depart_h");
    if (home_arrive_h == home_depart_h || work_arrive_h == work_depart_h) {
        throw SchemaError("schedule: arrival and departure must differ");
    }
    if (!(level1_kw > 0.0) || !(level2_kw > 0.0)) {
        throw SchemaError("schedule: charger ratings must be positive");
    }
}

double Cohort::dwell_h() const { return std::fmod(depart_h - arrive_h + kDay, kDay); }

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double DemandProfile::energy_kwh() const { return pairwise_sum(values_kw) * dt_h; }

std::size_t steps_per_day(double dt_h) {
    if (!(dt_h > 0.0) || dt_h > kDay) throw SchemaError("dt_h must be in (0, 24]");
    double n = kDay / dt_h;
    double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * rounded) throw SchemaError("dt_h must divide 24 h evenly");
    return static_cast<std::size_t>(rounded);
}

std::vector<Cohort> build_cohorts(const ScenarioConfig& cfg, const ChargingSchedule& schedule) {
    cfg.validate();
    schedule.validate();

    const double home = cfg.home_access * cfg.home_preference;
    struct Slot {
        VehicleType vehicle;
        ChargeLocation location;
        ChargerLevel level;
        double share;
    };
    std::vector<Slot> slots;
    for (VehicleType v : {VehicleType::Bev, VehicleType::Phev}) {
        double vs = v == VehicleType::Bev ? cfg.bev_share : 1.0 - cfg.bev_share;
        for (ChargeLocation loc : {ChargeLocation::Home, ChargeLocation::Workplace}) {
            double ls = loc == ChargeLocation::Home ? home : 1.0 - home;
            double l1 = loc == ChargeLocation::Home ? cfg.home_mix_l1 : cfg.work_mix_l1;
            slots.push_back({v, loc, ChargerLevel::Level1, vs * ls * l1});
            slots.push_back({v, loc, ChargerLevel::Level2, vs * ls * (1.0 - l1)});
        }
    }

    // Largest-remainder apportionment of the fleet over the slots.
    const auto fleet = static_cast<double>(cfg.fleet_size);
    std::vector<std::size_t> counts(slots.size());
    std::vector<double> remainders(slots.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        double quota = fleet * slots[i].share;
        double nearest = std::round(quota);
        if (std::abs(quota - nearest) <= 1e-9 * std::max(1.0, quota)) quota = nearest;
        double whole = std::floor(quota);
        counts[i] = static_cast<std::size_t>(whole);
        remainders[i] = quota - whole;
        assigned += counts[i];
    }
    std::vector<std::size_t> order(slots.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t i = 0; assigned < cfg.fleet_size && i < order.size(); ++i, ++assigned) {
        ++counts[order[i]];
    }

    std::vector<Cohort> cohorts;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (counts[i] == 0) continue;
        const Slot& s = slots[i];
        Cohort c;
        c.count = counts[i];
        c.vehicle = s.vehicle;
        c.location = s.location;
        c.level = s.level;
        double per_mile = s.vehicle == VehicleType::Bev ? cfg.kwh_per_mile_bev : cfg.kwh_per_mile_phev;
        c.energy_need_kwh = cfg.avg_daily_miles * per_mile * cfg.temp_multiplier;
        if (s.vehicle == VehicleType::Phev) c.energy_need_kwh = std::min(c.energy_need_kwh, cfg.phev_battery_kwh);
        bool at_home = s.location == ChargeLocation::Home;
        c.arrive_h = at_home ? schedule.home_arrive_h : schedule.work_arrive_h;
        c.depart_h = at_home ? schedule.home_depart_h : schedule.work_depart_h;
        c.max_rate_kw = s.level == ChargerLevel::Level1 ? schedule.level1_kw : schedule.level2_kw;
        c.strategy = at_home ? cfg.home_strategy : cfg.work_strategy;
        cohorts.push_back(c);
    }
    return cohorts;
}

DemandProfile cohort_profile(const Cohort& cohort, double dt_h) {
    const std::size_t n = steps_per_day(dt_h);
    if (!(cohort.energy_need_kwh >= 0.0)) throw std::invalid_argument("cohort energy_need_kwh must be >= 0");
    if (!(cohort.max_rate_kw > 0.0)) throw std::invalid_argument("cohort max_rate_kw must be > 0");
    if (!(cohort.arrive_h >= 0.0 && cohort.arrive_h < kDay) ||
        !(cohort.depart_h >= 0.0 && cohort.depart_h < kDay)) {
        throw std::invalid_argument("cohort hours must be in [0,24)");
    }
    if (!(cohort.dwell_h() > 0.0)) throw std::invalid_argument("cohort dwell must be positive");

    DemandProfile profile;
    profile.dt_h = dt_h;
    profile.values_kw.assign(n, 0.0);

    const Session s = plan_session(cohort);
    const double count = static_cast<double>(cohort.count);
    const double rate = s.rate_kw * count;
    double start = s.start_h;
    if (start >= kDay) start -= kDay;
    const double end = start + s.duration_h;
    spread(profile.values_kw, dt_h, start, std::min(end, kDay), rate);
    if (end > kDay) spread(profile.values_kw, dt_h, 0.0, end - kDay, rate);

    profile.declared_energy_kwh = count * s.energy_kwh;
    profile.truncated = s.truncated && cohort.count > 0;
    return profile;
}

DemandProfile aggregate_profiles(std::span<const DemandProfile> profiles, double dt_h) {
    const std::size_t n = steps_per_day(dt_h);
    DemandProfile total;
    total.dt_h = dt_h;
    total.values_kw.assign(n, 0.0);
    for (const auto& p : profiles) {
        if (p.dt_h != dt_h || p.values_kw.size() != n) {
            throw std::invalid_argument("aggregate_profiles: mismatched dt_h");
        }
    }
    std::vector<double> column(profiles.size());
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < profiles.size(); ++i) column[i] = profiles[i].values_kw[k];
        total.values_kw[k] = pairwise_sum(column);
    }
    std::vector<double> energies;
    energies.reserve(profiles.size());
    for (const auto& p : profiles) {
        energies.push_back(p.declared_energy_kwh);
        total.truncated = total.truncated || p.truncated;
    }
    total.declared_energy_kwh = pairwise_sum(energies);
    return total;
}

DemandProfile scenario_profile(const ScenarioConfig& cfg, const ChargingSchedule& schedule,
                               double dt_h) {
    std::vector<DemandProfile> parts;
    for (const Cohort& c : build_cohorts(cfg, schedule)) parts.push_back(cohort_profile(c, dt_h));
    return aggregate_profiles(parts, dt_h);
}

Peak find_peak(const DemandProfile& profile) {
    if (profile.values_kw.empty()) throw std::invalid_argument("find_peak: empty profile");
    auto it = std::max_element(profile.values_kw.begin(), profile.values_kw.end());
    return Peak{static_cast<std::size_t>(it - profile.values_kw.begin()), *it};
}

std::string profile_csv(const DemandProfile& profile) {
    std::ostringstream os;
    os << "hour,kw\n";
    for (std::size_t k = 0; k < profile.values_kw.size(); ++k) {
        os << csv::format_double(static_cast<double>(k) * profile.dt_h) << ','
           << csv::format_double(profile.values_kw[k]) << '\n';
    }
    return os.str();
}

ScenarioConfig parse_scenario(const json& doc) {
    if (!doc.is_object()) throw SchemaError("scenario must be a JSON object");
    reject_unknown(doc,
                   {"fleet_size", "avg_daily_miles", "ambient_temp_f", "bev_share", "sedan_share",
                    "work_mix_l1", "home_access", "home_mix_l1", "home_preference", "home_strategy",
                    "work_strategy", "kwh_per_mile_bev", "kwh_per_mile_phev", "temp_multiplier",
                    "phev_battery_kwh"},
                   "scenario");
    ScenarioConfig cfg;
    auto fleet = doc.find("fleet_size");
    if (fleet == doc.end()) throw SchemaError("scenario: missing field 'fleet_size'");
    if (!fleet->is_number_integer() || fleet->get<long long>() < 0) {
        throw SchemaError("scenario: fleet_size must be a non-negative integer");
    }
    cfg.fleet_size = fleet->get<std::size_t>();
    cfg.avg_daily_miles = number_or(doc, "avg_daily_miles", cfg.avg_daily_miles);
    cfg.ambient_temp_f = number_or(doc, "ambient_temp_f", cfg.ambient_temp_f);
    cfg.bev_share = number_or(doc, "bev_share", cfg.bev_share);
    cfg.sedan_share = number_or(doc, "sedan_share", cfg.sedan_share);
    cfg.work_mix_l1 = number_or(doc, "work_mix_l1", cfg.work_mix_l1);
    cfg.home_access = number_or(doc, "home_access", cfg.home_access);
    cfg.home_mix_l1 = number_or(doc, "home_mix_l1", cfg.home_mix_l1);
    cfg.home_preference = number_or(doc, "home_preference", cfg.home_preference);
    cfg.kwh_per_mile_bev = number_or(doc, "kwh_per_mile_bev", cfg.kwh_per_mile_bev);
    cfg.kwh_per_mile_phev = number_or(doc, "kwh_per_mile_phev", cfg.kwh_per_mile_phev);
    cfg.temp_multiplier = number_or(doc, "temp_multiplier", cfg.temp_multiplier);
    cfg.phev_battery_kwh = number_or(doc, "phev_battery_kwh", cfg.phev_battery_kwh);
    for (auto [key, target] : {std::pair{"home_strategy", &cfg.home_strategy},
                               std::pair{"work_strategy", &cfg.work_strategy}}) {
        auto it = doc.find(key);
        if (it == doc.end()) continue;
        if (!it->is_string()) throw SchemaError(std::string("scenario: ") + key + " must be a string");
        *target = parse_strategy(it->get<std::string>());
    }
    cfg.validate();
    return cfg;
}

ChargingSchedule parse_schedule(const json& doc) {
    if (!doc.is_object()) throw SchemaError("schedule must be a JSON object");
    reject_unknown(doc,
                   {"home_arrive_h", "home_depart_h", "work_arrive_h", "work_depart_h", "level1_kw",
                    "level2_kw"},
                   "schedule");
    ChargingSchedule s;
    s.home_arrive_h = number_or(doc, "home_arrive_h", s.home_arrive_h);
    s.home_depart_h = number_or(doc, "home_depart_h", s.home_depart_h);
    s.work_arrive_h = number_or(doc, "work_arrive_h", s.work_arrive_h);
    s.work_depart_h = number_or(doc, "work_depart_h", s.work_depart_h);
    s.level1_kw = number_or(doc, "level1_kw", s.level1_kw);
    s.level2_kw = number_or(doc, "level2_kw", s.level2_kw);
    s.validate();
    return s;
}

nlohmann::ordered_json to_json(const ScenarioConfig& cfg) {
    return nlohmann::ordered_json{
        {"fleet_size", cfg.fleet_size},
        {"avg_daily_miles", cfg.avg_daily_miles},
        {"ambient_temp_f", cfg.ambient_temp_f},
        {"bev_share", cfg.bev_share},
        {"sedan_share", cfg.sedan_share},
        {"work_mix_l1", cfg.work_mix_l1},
        {"home_access", cfg.home_access},
        {"home_mix_l1", cfg.home_mix_l1},
        {"home_preference", cfg.home_preference},
        {"home_strategy", to_string(cfg.home_strategy)},
        {"work_strategy", to_string(cfg.work_strategy)},
        {"kwh_per_mile_bev", cfg.kwh_per_mile_bev},
        {"kwh_per_mile_phev", cfg.kwh_per_mile_phev},
        {"temp_multiplier", cfg.temp_multiplier},
        {"phev_battery_kwh", cfg.phev_battery_kwh},
    };
}

nlohmann::ordered_json to_json(const Cohort& c) {
    return nlohmann::ordered_json{
        {"vehicle", to_string(c.vehicle)},
        {"location", to_string(c.location)},
        {"level", to_string(c.level)},
        {"count", c.count},
        {"energy_need_kwh", c.energy_need_kwh},
        {"arrive_h", c.arrive_h},
        {"depart_h", c.depart_h},
        {"max_rate_kw", c.max_rate_kw},
        {"strategy", to_string(c.strategy)},
    };
}

}  // namespace evgrid
