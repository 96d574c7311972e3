#pragma once

#include <string>
#include <vector>

#include "memcascade/cascade.hpp"

namespace memcascade {

struct Interval {
    double lo = 0.0;
    double up = 0.0;

    bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= up + tol; }
    bool empty() const { return !(lo <= up); }
};

struct StageBounds {
    Interval x_in, x_out, y_in, y_out, y_per, z_in, z_out, theta;
};

/// Box on every composition variable implied by the product targets and the
/// monotonic stage-profile conjecture.
struct VariableBounds {
    Interval u;
    Interval k;
    std::vector<StageBounds> stages;
};

/// Location of the maximum of z(y) on [0, 1]: (S - sqrt S) / (S - 1).
double excess_peak_location(double selectivity);

/// Bounds on z(y) over y in [y_lo, y_up], evaluated the way the bound
/// derivation does: lower end at k_lo, upper end at k_up with the peak case.
Interval excess_bounds(Interval y, Interval k, double selectivity);

/// Throws AdmissibilityError when the spec fails the selectivity gate.
VariableBounds derive_bounds(const ProblemSpec& spec);

enum class CutFamily {
    StageRetentate,   // x_out <= x_in <= y_per
    StagePermeate,    // y_out <= y_per <= y_in
    RetentateProfile, // x_in, x_out, y_per nonincreasing along the cascade
    PermeateProfile,  // y_in, y_out nonincreasing along the cascade
    ProductPurity,    // Y_per <= y_per of stage 1
    ProductRetentate, // x_out of stage N <= X_out
};

/// True for the families that rest on the monotonic-profile conjecture.
bool conjectural(CutFamily family);

struct CutViolation {
    CutFamily family;
    int stage;         // 0-based; the later stage for profile cuts
    std::string what;
    double magnitude;  // > 0
};

inline constexpr double kCutTolerance = 1e-8;

/// All violated cuts. Stages without flow are skipped, and stages with a zero
/// stage cut take no part in permeate comparisons.
std::vector<CutViolation> check_cuts(const CascadeState& state, const ProblemSpec& spec,
                                     bool include_conjectural = true, double tol = kCutTolerance);

/// True iff the configuration needs at most `machines` intermediate machines.
bool machine_limit_filter(const Configuration& config, int machines);

}  // namespace memcascade
