#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evgrid/evfleet.hpp"
#include "evgrid/netmodel.hpp"

namespace evgrid {

inline constexpr double kSystemBaseKva = 1000.0;  // 1 MVA
inline constexpr double kCollapseVoltagePu = 0.5;

struct SolverConfig {
    double tol_pu = 1e-6;  // on max |V_new - V_old|
    int max_iter = 50;

    void validate() const;
};

/// Steady-state solution of one snapshot. Bus vectors follow the model's bus
/// order and line vectors its line order; the id lists are shared between
/// all solutions of the same model.
struct PowerFlowSolution {
    std::shared_ptr<const std::vector<std::string>> bus_ids;
    std::shared_ptr<const std::vector<std::string>> line_ids;

    std::vector<double> voltage_pu;
    std::vector<double> angle_rad;
    // Measured at the from_bus terminal, positive in the from -> to direction.
    std::vector<double> line_flow_kw;
    std::vector<double> line_flow_kvar;
    std::vector<double> line_current_a;
    std::vector<double> line_loss_kw;  // I^2 R

    double total_loss_kw = 0.0;
    double source_kw = 0.0;
    double source_kvar = 0.0;
    double load_kw = 0.0;
    bool converged = false;
    int iterations = 0;
    double final_update_pu = 0.0;
    std::string diagnostic;  // non-empty when the solve failed

    double min_voltage_pu() const;
    double max_voltage_pu() const;
};

/// Backward/forward sweep over a radial feeder. Construction orders the tree
/// from the source once; solve() can then be called for any load vector.
class SweepSolver {
  public:
    /// Throws TopologyError when the network is not connected and radial.
    explicit SweepSolver(const NetworkModel& net);

    std::size_t bus_count() const { return parent_.size(); }
    std::size_t line_count() const { return line_r_pu_.size(); }

    /// Per-bus complex load in kW + j kvar, in model bus order.
    std::vector<std::complex<double>> bus_loads(const NetworkModel& net) const;

    /// Throws SolverError on voltage collapse (|V| < 0.5 pu). Returns
    /// converged=false when max_iter is exhausted.
    PowerFlowSolution solve(std::span<const std::complex<double>> bus_load_kva,
                            const SolverConfig& cfg) const;

  private:
    std::shared_ptr<const std::vector<std::string>> bus_ids_;
    std::shared_ptr<const std::vector<std::string>> line_ids_;
    std::size_t source_ = 0;
    double source_voltage_pu_ = 1.0;
    double current_base_a_ = 0.0;
    std::vector<std::size_t> order_;        // breadth-first from the source
    std::vector<std::size_t> parent_;       // parent bus, source maps to itself
    std::vector<std::size_t> parent_line_;  // line joining a bus to its parent
    std::vector<bool> line_forward_;        // from_bus is the parent side
    std::vector<std::complex<double>> line_z_pu_;
    std::vector<double> line_r_pu_;
};

PowerFlowSolution solve_snapshot(const NetworkModel& net, const SolverConfig& cfg = {});

struct QstsOptions {
    std::size_t steps = 0;  // 0: length of the longest shape
    unsigned threads = 1;
    double dt_h = 1.0;      // used only when no shapes are given
};

struct QstsResult {
    double dt_h = 1.0;
    std::vector<PowerFlowSolution> steps;
};

/// Time series of snapshots. Shaped loads take the shape's kW sample at each
/// step (shapes repeat when shorter than the run) and keep their nominal
/// power factor; other loads stay at nominal. Failed steps are recorded with
/// converged=false. Throws SchemaError for an unknown load id or mixed dt.
QstsResult run_qsts(const NetworkModel& net, const std::map<std::string, DemandProfile>& shapes,
                    const SolverConfig& cfg, const QstsOptions& options = {});

struct LossTotal {
    double kwh = 0.0;
    std::size_t converged_steps = 0;
    std::size_t total_steps = 0;
    bool complete() const { return converged_steps == total_steps; }
};

/// Sum of total_loss_kw * dt_h over converged steps.
LossTotal total_losses(const QstsResult& result);

/// "line_id,kw,kvar,amps,loss_kw"
void write_snapshot_lines_csv(std::ostream& os, const PowerFlowSolution& solution);
/// "bus_id,v_pu,angle_rad"
void write_snapshot_buses_csv(std::ostream& os, const PowerFlowSolution& solution);
/// "step,line_id,kw,kvar,amps"
void write_qsts_lines_csv(std::ostream& os, const QstsResult& result);
/// "step,source_kw,loss_kw,min_v_pu,max_v_pu"
void write_qsts_summary_csv(std::ostream& os, const QstsResult& result);

}  // namespace evgrid
