#include "memcascade/bounds_cuts.hpp"

#include <cmath>

namespace memcascade {

double excess_peak_location(double selectivity) {
    const double s = selectivity;
    return (s - std::sqrt(s)) / (s - 1.0);
}

Interval excess_bounds(Interval y, Interval k, double selectivity) {
    const double s = selectivity;
    const double peak = excess_peak_location(s);
    Interval z;
    z.lo = std::min(permeate_excess(y.lo, k.lo, s), permeate_excess(y.up, k.lo, s));
    if (y.up <= peak) {
        z.up = permeate_excess(y.up, k.up, s);
    } else if (y.lo <= peak) {
        const double root = std::sqrt(s) - 1.0;
        z.up = k.up * root * root;
    } else {
        z.up = permeate_excess(y.lo, k.up, s);
    }
    return z;
}

VariableBounds derive_bounds(const ProblemSpec& spec) {
    spec.validate();
    require_admissible(spec.mix, spec.pressure);
    const double s = spec.mix.selectivity;
    const int n = spec.max_stages;
    const double x_out = spec.x_retentate();
    const double y_target = spec.y_target;

    VariableBounds b;
    b.u = {spec.pressure.lo, spec.pressure.up};
    b.k = {compute_k(spec.mix, spec.pressure.lo), compute_k(spec.mix, spec.pressure.up)};
    b.stages.resize(n);
    for (int j = 0; j < n; ++j) {
        StageBounds& sb = b.stages[j];
        sb.theta = {0.0, 1.0 - kStageCutMargin};
        sb.x_in = {x_out, y_target};
        sb.y_in = {local_permeate_fraction(sb.x_in.lo, b.k.lo, s),
                   local_permeate_fraction(sb.x_in.up, b.k.up, s)};
        sb.x_out.lo = (j < n - 1) ? x_out : kMinRetentateFraction;
        sb.y_out.lo = local_permeate_fraction(sb.x_out.lo, b.k.lo, s);
        sb.y_out.up = (j == 0) ? sb.y_in.up : y_target;
        sb.y_per = sb.y_out;
        sb.x_out.up = local_retentate_fraction(sb.y_out.up, b.k.lo, s);
        sb.z_in = excess_bounds(sb.y_in, b.k, s);
        sb.z_out = excess_bounds(sb.y_out, b.k, s);
    }
    return b;
}

bool conjectural(CutFamily family) {
    return family != CutFamily::StageRetentate && family != CutFamily::StagePermeate;
}

std::vector<CutViolation> check_cuts(const CascadeState& state, const ProblemSpec& spec,
                                     bool include_conjectural, double tol) {
    std::vector<CutViolation> out;
    auto require = [&](CutFamily family, int stage, const char* what, double lhs, double rhs) {
        // lhs <= rhs
        if (lhs > rhs + tol && (include_conjectural || !conjectural(family))) {
            out.push_back({family, stage, what, lhs - rhs});
        }
    };

    const int n = static_cast<int>(state.stages.size());
    std::vector<int> working;  // stages with flow and a nonzero stage cut
    for (int j = 0; j < n; ++j) {
        const auto& sj = state.stages[j];
        if (!sj.has_flow) continue;
        const auto& p = sj.perm;
        require(CutFamily::StageRetentate, j, "x_out <= x_in", p.x_out, p.x_in);
        require(CutFamily::StageRetentate, j, "x_in <= y_per", p.x_in, p.y_per);
        require(CutFamily::StagePermeate, j, "y_out <= y_per", p.y_out, p.y_per);
        require(CutFamily::StagePermeate, j, "y_per <= y_in", p.y_per, p.y_in);
        if (p.theta > 0.0) working.push_back(j);
    }
    for (std::size_t i = 1; i < working.size(); ++i) {
        const auto& prev = state.stages[working[i - 1]].perm;
        const auto& cur = state.stages[working[i]].perm;
        const int j = working[i];
        require(CutFamily::RetentateProfile, j, "x_in nonincreasing", cur.x_in, prev.x_in);
        require(CutFamily::RetentateProfile, j, "x_out nonincreasing", cur.x_out, prev.x_out);
        require(CutFamily::RetentateProfile, j, "y_per nonincreasing", cur.y_per, prev.y_per);
        require(CutFamily::PermeateProfile, j, "y_in nonincreasing", cur.y_in, prev.y_in);
        require(CutFamily::PermeateProfile, j, "y_out nonincreasing", cur.y_out, prev.y_out);
    }
    if (!working.empty()) {
        if (working.front() == 0) {
            require(CutFamily::ProductPurity, 0, "Y_per <= y_per(1)", spec.y_target,
                    state.stages[0].perm.y_per);
        }
        const int last = working.back();
        require(CutFamily::ProductRetentate, last, "x_out(N) <= X_out", state.stages[last].perm.x_out,
                spec.x_retentate());
    }
    return out;
}

bool machine_limit_filter(const Configuration& config, int machines) {
    return count_pressure_machines(config) <= machines;
}

}  // namespace memcascade
