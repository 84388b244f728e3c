#include "evgrid/powerflow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "evgrid/csv.hpp"
#include "evgrid/error.hpp"

namespace evgrid {

namespace {

using cplx = std::complex<double>;

const std::string& id_at(const std::shared_ptr<const std::vector<std::string>>& ids, std::size_t i) {
    return (*ids)[i];
}

}  // namespace

void SolverConfig::validate() const {
    if (!(tol_pu > 0.0)) throw SchemaError("solver: tol_pu must be positive");
    if (max_iter < 1) throw SchemaError("solver: max_iter must be at least 1");
}

double PowerFlowSolution::min_voltage_pu() const {
    if (voltage_pu.empty()) return std::numeric_limits<double>::quiet_NaN();
    return *std::min_element(voltage_pu.begin(), voltage_pu.end());
}

double PowerFlowSolution::max_voltage_pu() const {
    if (voltage_pu.empty()) return std::numeric_limits<double>::quiet_NaN();
    return *std::max_element(voltage_pu.begin(), voltage_pu.end());
}

SweepSolver::SweepSolver(const NetworkModel& net) {
    TopologyReport topo = validate_radial(net);
    if (!topo.radial) {
        std::string msg = "network is not radial (" + std::to_string(net.buses().size()) + " buses, " +
                          std::to_string(net.lines().size()) + " lines";
        if (!topo.orphan_buses.empty()) msg += ", unreachable bus " + topo.orphan_buses.front();
        throw TopologyError(msg + ")");
    }

    auto bus_ids = std::make_shared<std::vector<std::string>>();
    for (const Bus& b : net.buses()) bus_ids->push_back(b.id);
    auto line_ids = std::make_shared<std::vector<std::string>>();
    for (const Line& l : net.lines()) line_ids->push_back(l.id);
    bus_ids_ = std::move(bus_ids);
    line_ids_ = std::move(line_ids);

    source_ = *net.bus_index(net.source().bus_id);
    source_voltage_pu_ = net.source().voltage_pu;
    const double base_kv = net.buses()[source_].base_kv;
    const double z_base = base_kv * base_kv / (kSystemBaseKva / 1000.0);
    current_base_a_ = kSystemBaseKva / (std::sqrt(3.0) * base_kv);

    const std::size_t n = net.buses().size();
    const std::size_t m = net.lines().size();
    line_z_pu_.resize(m);
    line_r_pu_.resize(m);
    line_forward_.assign(m, true);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency(n);
    for (std::size_t k = 0; k < m; ++k) {
        const Line& l = net.lines()[k];
        line_z_pu_[k] = cplx(l.resistance_ohm, l.reactance_ohm) / z_base;
        line_r_pu_[k] = l.resistance_ohm / z_base;
        std::size_t a = *net.bus_index(l.from_bus);
        std::size_t b = *net.bus_index(l.to_bus);
        adjacency[a].emplace_back(b, k);
        adjacency[b].emplace_back(a, k);
    }

    parent_.assign(n, source_);
    parent_line_.assign(n, 0);
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue{source_};
    seen[source_] = true;
    while (!queue.empty()) {
        std::size_t u = queue.front();
        queue.pop_front();
        order_.push_back(u);
        for (auto [v, k] : adjacency[u]) {
            if (seen[v]) continue;
            seen[v] = true;
            parent_[v] = u;
            parent_line_[v] = k;
            line_forward_[k] = net.lines()[k].from_bus == net.buses()[u].id;
            queue.push_back(v);
        }
    }
}

std::vector<cplx> SweepSolver::bus_loads(const NetworkModel& net) const {
    std::vector<cplx> loads(bus_count(), cplx{});
    for (const LoadPoint& p : net.loads()) loads[*net.bus_index(p.bus_id)] += cplx(p.kw, p.kvar);
    return loads;
}

PowerFlowSolution SweepSolver::solve(std::span<const cplx> bus_load_kva, const SolverConfig& cfg) const {
    cfg.validate();
    const std::size_t n = bus_count();
    if (bus_load_kva.size() != n) throw std::invalid_argument("SweepSolver::solve: load vector size mismatch");

    std::vector<cplx> s_pu(n);
    for (std::size_t i = 0; i < n; ++i) s_pu[i] = bus_load_kva[i] / kSystemBaseKva;

    std::vector<cplx> v(n, cplx(source_voltage_pu_, 0.0));
    std::vector<cplx> j(n);

    // Branch current into each bus from its parent; j[source_] is the total injection.
    auto backward = [&] {
        for (std::size_t i = 0; i < n; ++i) j[i] = std::conj(s_pu[i] / v[i]);
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            if (*it != source_) j[parent_[*it]] += j[*it];
        }
    };

    PowerFlowSolution sol;
    sol.bus_ids = bus_ids_;
    sol.line_ids = line_ids_;

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        backward();
        double update = 0.0;
        for (std::size_t b : order_) {
            if (b == source_) continue;
            cplx next = v[parent_[b]] - line_z_pu_[parent_line_[b]] * j[b];
            double mag = std::abs(next);
            if (!(mag >= kCollapseVoltagePu)) {
                throw SolverError("voltage collapse at bus " + id_at(bus_ids_, b) + " (|V| = " +
                                  csv::format_fixed(mag, 4) + " pu, iteration " +
                                  std::to_string(iter) + ")");
            }
            update = std::max(update, std::abs(next - v[b]));
            v[b] = next;
        }
        sol.iterations = iter;
        sol.final_update_pu = update;
        if (update < cfg.tol_pu) {
            sol.converged = true;
            break;
        }
    }
    if (!sol.converged) {
        sol.diagnostic = "did not converge in " + std::to_string(cfg.max_iter) +
                         " iterations (last update " + csv::format_double(sol.final_update_pu) + " pu)";
    }
    backward();

    sol.voltage_pu.resize(n);
    sol.angle_rad.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sol.voltage_pu[i] = std::abs(v[i]);
        sol.angle_rad[i] = std::arg(v[i]);
    }

    const std::size_t m = line_count();
    sol.line_flow_kw.assign(m, 0.0);
    sol.line_flow_kvar.assign(m, 0.0);
    sol.line_current_a.assign(m, 0.0);
    sol.line_loss_kw.assign(m, 0.0);
    for (std::size_t b : order_) {
        if (b == source_) continue;
        const std::size_t k = parent_line_[b];
        const cplx& current = j[b];
        cplx s = line_forward_[k] ? v[parent_[b]] * std::conj(current) : -v[b] * std::conj(current);
        sol.line_flow_kw[k] = s.real() * kSystemBaseKva;
        sol.line_flow_kvar[k] = s.imag() * kSystemBaseKva;
        sol.line_current_a[k] = std::abs(current) * current_base_a_;
        sol.line_loss_kw[k] = std::norm(current) * line_r_pu_[k] * kSystemBaseKva;
    }
    sol.total_loss_kw = pairwise_sum(sol.line_loss_kw);

    std::vector<double> load_kw(n);
    for (std::size_t i = 0; i < n; ++i) load_kw[i] = bus_load_kva[i].real();
    sol.load_kw = pairwise_sum(load_kw);
    cplx injected = v[source_] * std::conj(j[source_]) * kSystemBaseKva;
    sol.source_kw = injected.real();
    sol.source_kvar = injected.imag();
    return sol;
}

PowerFlowSolution solve_snapshot(const NetworkModel& net, const SolverConfig& cfg) {
    SweepSolver solver(net);
    return solver.solve(solver.bus_loads(net), cfg);
}

QstsResult run_qsts(const NetworkModel& net, const std::map<std::string, DemandProfile>& shapes,
                    const SolverConfig& cfg, const QstsOptions& options) {
    cfg.validate();
    QstsResult result;
    result.dt_h = options.dt_h;
    std::size_t longest = 0;
    bool first = true;
    for (const auto& [id, shape] : shapes) {
        if (!net.load_index(id)) throw SchemaError("load shape for unknown load: " + id);
        if (shape.values_kw.empty()) throw SchemaError("load shape " + id + " is empty");
        if (first) {
            result.dt_h = shape.dt_h;
            first = false;
        } else if (shape.dt_h != result.dt_h) {
            throw SchemaError("load shape " + id + " has a different dt_h");
        }
        longest = std::max(longest, shape.values_kw.size());
    }
    const std::size_t steps = options.steps != 0 ? options.steps : longest;
    if (steps == 0) throw std::invalid_argument("run_qsts: no steps to run");

    SweepSolver solver(net);
    std::vector<cplx> base(solver.bus_count(), cplx{});
    struct Shaped {
        std::size_t bus;
        double kw;
        double kvar;
        const std::vector<double>* values;
    };
    std::vector<Shaped> shaped;
    for (const LoadPoint& p : net.loads()) {
        std::size_t bus = *net.bus_index(p.bus_id);
        auto it = shapes.find(p.id);
        if (it == shapes.end()) {
            base[bus] += cplx(p.kw, p.kvar);
        } else {
            shaped.push_back({bus, p.kw, p.kvar, &it->second.values_kw});
        }
    }

    result.steps.resize(steps);
    auto solve_step = [&](std::size_t step) {
        std::vector<cplx> loads = base;
        for (const Shaped& s : shaped) {
            double kw = (*s.values)[step % s.values->size()];
            double kvar = s.kw > 0.0 ? s.kvar * kw / s.kw : s.kvar;
            loads[s.bus] += cplx(kw, kvar);
        }
        try {
            result.steps[step] = solver.solve(loads, cfg);
        } catch (const SolverError& e) {
            PowerFlowSolution failed;
            failed.converged = false;
            failed.diagnostic = e.what();
            result.steps[step] = std::move(failed);
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(steps)));
    if (threads == 1) {
        for (std::size_t s = 0; s < steps; ++s) solve_step(s);
        return result;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            try {
                for (std::size_t s = next++; s < steps; s = next++) solve_step(s);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return result;
}

LossTotal total_losses(const QstsResult& result) {
    LossTotal total;
    total.total_steps = result.steps.size();
    std::vector<double> energy;
    energy.reserve(result.steps.size());
    for (const auto& s : result.steps) {
        if (!s.converged) continue;
        ++total.converged_steps;
        energy.push_back(s.total_loss_kw * result.dt_h);
    }
    total.kwh = pairwise_sum(energy);
    return total;
}

void write_snapshot_lines_csv(std::ostream& os, const PowerFlowSolution& sol) {
    using csv::format_double;
    os << "line_id,kw,kvar,amps,loss_kw\n";
    for (std::size_t k = 0; k < sol.line_flow_kw.size(); ++k) {
        os << csv::escape(id_at(sol.line_ids, k)) << ',' << format_double(sol.line_flow_kw[k]) << ','
           << format_double(sol.line_flow_kvar[k]) << ',' << format_double(sol.line_current_a[k]) << ','
           << format_double(sol.line_loss_kw[k]) << '\n';
    }
}

void write_snapshot_buses_csv(std::ostream& os, const PowerFlowSolution& sol) {
    using csv::format_double;
    os << "bus_id,v_pu,angle_rad\n";
    for (std::size_t i = 0; i < sol.voltage_pu.size(); ++i) {
        os << csv::escape(id_at(sol.bus_ids, i)) << ',' << format_double(sol.voltage_pu[i]) << ','
           << format_double(sol.angle_rad[i]) << '\n';
    }
}

void write_qsts_lines_csv(std::ostream& os, const QstsResult& result) {
    using csv::format_double;
    os << "step,line_id,kw,kvar,amps\n";
    for (std::size_t s = 0; s < result.steps.size(); ++s) {
        const auto& sol = result.steps[s];
        for (std::size_t k = 0; k < sol.line_flow_kw.size(); ++k) {
            os << s << ',' << csv::escape(id_at(sol.line_ids, k)) << ','
               << format_double(sol.line_flow_kw[k]) << ',' << format_double(sol.line_flow_kvar[k])
               << ',' << format_double(sol.line_current_a[k]) << '\n';
        }
    }
}

void write_qsts_summary_csv(std::ostream& os, const QstsResult& result) {
    using csv::format_double;
    os << "step,source_kw,loss_kw,min_v_pu,max_v_pu\n";
    for (std::size_t s = 0; s < result.steps.size(); ++s) {
        const auto& sol = result.steps[s];
        if (sol.voltage_pu.empty()) {
            os << s << ",nan,nan,nan,nan\n";
            continue;
        }
        os << s << ',' << format_double(sol.source_kw) << ',' << format_double(sol.total_loss_kw) << ','
           << format_double(sol.min_voltage_pu()) << ',' << format_double(sol.max_voltage_pu()) << '\n';
    }
}

}  // namespace evgrid
