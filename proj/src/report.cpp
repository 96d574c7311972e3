#include "memcascade/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace memcascade {

std::string format_number(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string status_name(ConfigStatus status) {
    switch (status) {
        case ConfigStatus::Optimal: return "optimal";
        case ConfigStatus::Infeasible: return "infeasible";
        case ConfigStatus::Screened: return "screened";
        case ConfigStatus::Failed: return "failed";
    }
    return "unknown";
}

std::string cut_family_name(CutFamily family) {
    switch (family) {
        case CutFamily::StageRetentate: return "stage_retentate";
        case CutFamily::StagePermeate: return "stage_permeate";
        case CutFamily::RetentateProfile: return "retentate_profile";
        case CutFamily::PermeateProfile: return "permeate_profile";
        case CutFamily::ProductPurity: return "product_purity";
        case CutFamily::ProductRetentate: return "product_retentate";
    }
    return "unknown";
}

namespace {

// Fixed-precision text for the human-readable reports.
std::string fixed(double v, int digits) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, digits);
    return std::string(buf.data(), res.ptr);
}

std::string pressure_unit(const ProblemSpec& spec) {
    return spec.mix.phase == Phase::Gas ? "pressure ratio" : "bar";
}

void stage_table(std::ostream& out, const CascadeState& state) {
    out << "stage  flow_in     theta     x_in      x_out     y_per\n";
    for (std::size_t j = 0; j < state.stages.size(); ++j) {
        const StageState& s = state.stages[j];
        out << "  " << j + 1 << "    ";
        if (!s.has_flow) {
            out << "no flow\n";
            continue;
        }
        std::array<char, 128> line{};
        std::snprintf(line.data(), line.size(), "%-10s  %-8s  %-8s  %-8s  %s\n", fixed(s.f_in, 3).c_str(),
                      fixed(s.perm.theta, 5).c_str(), fixed(s.perm.x_in, 5).c_str(),
                      fixed(s.perm.x_out, 5).c_str(), fixed(s.perm.y_per, 5).c_str());
        out << line.data();
    }
}

void violation_lines(std::ostream& out, const std::vector<CutViolation>& violations) {
    if (violations.empty()) {
        out << "cuts: all satisfied\n";
        return;
    }
    out << "cuts violated:\n";
    for (const auto& v : violations) {
        out << "  stage " << v.stage + 1 << " " << cut_family_name(v.family) << ": " << v.what << " by "
            << format_number(v.magnitude) << "\n";
    }
}

void state_kv(std::ostream& out, const std::string& prefix, const ProblemSpec& spec, const CascadeState& st) {
    out << prefix << "u=" << format_number(pressure_display(spec.mix.phase, st.u)) << "\n";
    out << prefix << "permeate_flow=" << format_number(st.permeate_flow) << "\n";
    out << prefix << "permeate_fraction=" << format_number(st.permeate_fraction) << "\n";
    out << prefix << "retentate_flow=" << format_number(st.retentate_flow) << "\n";
    out << prefix << "retentate_fraction=" << format_number(st.retentate_fraction) << "\n";
    out << prefix << "sweeps=" << st.sweeps << "\n";
    for (std::size_t j = 0; j < st.stages.size(); ++j) {
        const StageState& s = st.stages[j];
        const std::string p = prefix + "stage." + std::to_string(j + 1) + ".";
        out << p << "has_flow=" << (s.has_flow ? 1 : 0) << "\n";
        out << p << "f_in=" << format_number(s.f_in) << "\n";
        out << p << "f_out=" << format_number(s.f_out) << "\n";
        out << p << "f_per=" << format_number(s.f_per) << "\n";
        out << p << "theta=" << format_number(s.perm.theta) << "\n";
        out << p << "x_in=" << format_number(s.perm.x_in) << "\n";
        out << p << "x_out=" << format_number(s.perm.x_out) << "\n";
        out << p << "y_in=" << format_number(s.perm.y_in) << "\n";
        out << p << "y_out=" << format_number(s.perm.y_out) << "\n";
        out << p << "y_per=" << format_number(s.perm.y_per) << "\n";
    }
}

void violations_kv(std::ostream& out, const std::vector<CutViolation>& violations) {
    out << "violations=" << violations.size() << "\n";
    for (std::size_t i = 0; i < violations.size(); ++i) {
        const auto& v = violations[i];
        const std::string p = "violation." + std::to_string(i + 1) + ".";
        out << p << "family=" << cut_family_name(v.family) << "\n";
        out << p << "stage=" << v.stage + 1 << "\n";
        out << p << "what=" << v.what << "\n";
        out << p << "magnitude=" << format_number(v.magnitude) << "\n";
    }
}

}  // namespace

void write_simulation_text(std::ostream& out, const ProblemSpec& spec, const SimulationOutcome& sim) {
    const CascadeState& st = sim.state;
    out << "configuration " << sim.config.encode() << "\n";
    out << "u " << format_number(pressure_display(spec.mix.phase, st.u)) << " (" << pressure_unit(spec) << ")\n";
    out << "power " << fixed(sim.power / 1e3, 3) << " kW\n";
    out << "permeate product " << fixed(st.permeate_flow, 4) << " mol/s at " << fixed(st.permeate_fraction, 6)
        << " (target " << format_number(spec.y_target) << ")\n";
    out << "retentate product " << fixed(st.retentate_flow, 4) << " mol/s at " << fixed(st.retentate_fraction, 6)
        << "\n";
    out << "recycle sweeps " << st.sweeps << "\n\n";
    stage_table(out, st);
    out << "\n";
    violation_lines(out, sim.violations);
}

void write_simulation_kv(std::ostream& out, const ProblemSpec& spec, const SimulationOutcome& sim) {
    out << "configuration=" << sim.config.encode() << "\n";
    out << "power_w=" << format_number(sim.power) << "\n";
    state_kv(out, "", spec, sim.state);
    violations_kv(out, sim.violations);
}

void write_optimization_text(std::ostream& out, const ProblemSpec& spec, const OptimizationReport& report) {
    const ConfigurationResult& best = report.best;
    out << "minimum-power cascade, up to " << spec.max_stages << " stages";
    if (report.machine_limit) out << ", at most " << *report.machine_limit << " intermediate machines";
    out << "\n\n";
    out << "configuration " << best.config.encode() << "\n";
    out << "power " << fixed(best.power / 1e3, 3) << " kW\n";
    out << "u " << format_number(pressure_display(spec.mix.phase, best.point.u)) << " (" << pressure_unit(spec)
        << ")\n";
    out << "intermediate machines " << count_pressure_machines(best.config) << "\n";
    out << "active stages " << report.state.active_stage_count() << "\n";
    out << "sampling coverage gap " << fixed(100.0 * report.coverage_gap, 3) << " %\n";
    out << "simulations " << report.evaluations << "\n\n";
    stage_table(out, report.state);
    out << "\n";
    violation_lines(out, report.violations);
    out << "\nconfigurations\n";
    for (const auto& c : report.configurations) {
        out << "  " << c.config.encode() << "  " << status_name(c.status);
        if (c.status == ConfigStatus::Optimal || c.status == ConfigStatus::Screened) {
            out << "  " << fixed(c.power / 1e3, 3) << " kW";
        }
        out << "\n";
    }
}

void write_optimization_kv(std::ostream& out, const ProblemSpec& spec, const OptimizationReport& report) {
    const ConfigurationResult& best = report.best;
    out << "feasible=" << (report.feasible ? 1 : 0) << "\n";
    out << "machine_limit=" << (report.machine_limit ? std::to_string(*report.machine_limit) : "none") << "\n";
    out << "configuration=" << best.config.encode() << "\n";
    out << "power_w=" << format_number(best.power) << "\n";
    out << "machines=" << count_pressure_machines(best.config) << "\n";
    out << "active_stages=" << report.state.active_stage_count() << "\n";
    out << "coverage_gap=" << format_number(report.coverage_gap) << "\n";
    out << "evaluations=" << report.evaluations << "\n";
    state_kv(out, "state.", spec, report.state);
    violations_kv(out, report.violations);
}

void write_configurations_csv(std::ostream& out, const ProblemSpec& spec, const OptimizationReport& report) {
    out << "configuration,status,machines,active_stages,power_w,coarse_power_w,u";
    for (int j = 0; j < spec.max_stages; ++j) out << ",theta_" << j + 1;
    out << ",evaluations\n";
    for (const auto& c : report.configurations) {
        const bool solved = c.status == ConfigStatus::Optimal || c.status == ConfigStatus::Screened;
        out << c.config.encode() << "," << status_name(c.status) << "," << count_pressure_machines(c.config) << ","
            << c.config.active_stage_count() << ",";
        out << (solved ? format_number(c.power) : "") << ",";
        out << (std::isfinite(c.coarse_power) ? format_number(c.coarse_power) : "") << ",";
        out << (solved ? format_number(pressure_display(spec.mix.phase, c.point.u)) : "");
        for (int j = 0; j < spec.max_stages; ++j) {
            out << "," << (solved ? format_number(c.point.thetas(j)) : "");
        }
        out << "," << c.evaluations << "\n";
    }
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows) {
    out << (axis == SweepAxis::Selectivity ? "selectivity" : "u_up") << ",feasible,power_w,u,configuration,message\n";
    for (const auto& r : rows) {
        out << format_number(r.value) << "," << (r.feasible ? 1 : 0) << ",";
        out << (r.feasible ? format_number(r.power) : "") << "," << (r.feasible ? format_number(r.u) : "") << ",";
        out << r.configuration << ",";
        std::string msg = r.message;
        for (char& ch : msg) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        out << msg << "\n";
    }
}

std::vector<ValidationRow> validation_curve(const MixtureSpec& mix, double u, double x_in, int points,
                                            bool crossflow) {
    if (points < 2) throw std::invalid_argument("validation curve needs at least 2 points");
    std::vector<ValidationRow> rows;
    const double top = 1.0 - kStageCutMargin;
    for (int i = 0; i < points; ++i) {
        const double theta = top * i / (points - 1);
        const PermeationResult r =
            crossflow ? crossflow_solve(mix, u, x_in, theta) : perfect_mixing_solve(mix, u, x_in, theta);
        rows.push_back({theta, r.y_per, r.x_out});
    }
    return rows;
}

void write_validation_csv(std::ostream& out, const std::vector<ValidationRow>& rows) {
    out << "theta,y_per,x_out\n";
    for (const auto& r : rows) {
        out << format_number(r.theta) << "," << format_number(r.y_per) << "," << format_number(r.x_out) << "\n";
    }
}

}  // namespace memcascade
