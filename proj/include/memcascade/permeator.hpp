#pragma once

#include <cmath>

namespace memcascade {

enum class Phase { Gas, Liquid };

inline constexpr double kGasConstant = 8.314;      // J/(mol K)
inline constexpr double kPascalPerBar = 1.0e5;
inline constexpr double kStageCutMargin = 1.0e-3;  // theta <= 1 - margin
inline constexpr double kMinRetentateFraction = 1.0e-3;

/// Binary mixture and membrane description.
///
/// Component A is the more permeable one. For a gas the driving-force
/// variable u is ln(P_out / P_per); for a liquid it is the trans-membrane
/// pressure difference in Pa and the molar volumes enter through
/// C = V / (R T).
struct MixtureSpec {
    Phase phase = Phase::Gas;
    double selectivity = 2.0;
    double molar_volume_a = 0.0;  // m^3/mol, liquid only
    double molar_volume_b = 0.0;  // m^3/mol, liquid only
    double temperature = 303.15;  // K

    static MixtureSpec gas(double selectivity, double temperature = 303.15);
    static MixtureSpec liquid(double selectivity, double molar_volume_a, double molar_volume_b,
                              double temperature);

    double c_a() const;
    double c_b() const;
    /// Exponent on the feed-side pressure in the unified flux law.
    double beta() const { return phase == Phase::Gas ? 1.0 : 0.0; }

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;

    bool operator==(const MixtureSpec&) const = default;
};

/// Admissible interval for u, in internal units (ln ratio or Pa).
struct PressureRange {
    double lo = 0.0;
    double up = 0.0;

    bool contains(double u) const { return u >= lo && u <= up; }
    bool operator==(const PressureRange&) const = default;
};

/// Internal u from a user-facing pressure figure: ratio for a gas, bar for a liquid.
double pressure_variable(Phase phase, double ratio_or_bar);
/// Inverse of pressure_variable.
double pressure_display(Phase phase, double u);

/// Solved state of one crossflow stage.
struct PermeationResult {
    double x_in = 0.0;
    double x_out = 0.0;
    double y_in = 0.0;   // local permeate at the feed end
    double y_out = 0.0;  // local permeate at the retentate end
    double y_per = 0.0;  // mixed permeate
    double z_in = 0.0;   // y_in - x_in
    double z_out = 0.0;  // y_out - x_out
    double theta = 0.0;
    double k = 0.0;

    /// |x_in - (1 - theta) x_out - theta y_per|
    double balance_residual() const;
};

/// Driving-force coefficient of the flux relation.
///
/// k = [(S-1) - (S e^{-C_A u} - e^{-C_B u})] / (S-1)^2. Returns 0 at u = 0 and
/// throws AdmissibilityError when k <= 0 at any positive u.
double compute_k(const MixtureSpec& mix, double u);

/// Permeate-minus-retentate excess z(y) = k (S-1)^2 y (1-y) / (S - (S-1) y).
double permeate_excess(double y, double k, double selectivity);

/// Local permeate mole fraction in equilibrium with retentate fraction x.
///
/// Solves (y - x)(S - (S-1) y) = k (S-1)^2 y (1 - y) for the root in [x, 1].
/// Throws NoRootError if the quadratic has no root there.
double local_permeate_fraction(double x, double k, double selectivity);

/// Retentate fraction that produces local permeate fraction y.
/// Throws DomainError when the result leaves [0, 1].
double local_retentate_fraction(double y, double k, double selectivity);

/// dy/dx along the flux curve; 0 at y = 0.
double dy_dx(double x, double y, double k, double selectivity);

/// Crossflow (plug-flow retentate, unmixed permeate) stage solved in closed form.
///
/// theta = 0 is an exact bypass. Otherwise the retentate-end permeate
/// fraction is found by a bracketed Newton iteration on
///
///   S ln(y_out/y_in) - ln((1-y_out)/(1-y_in)) - k (S-1)^2 ln(z_out/z_in) = k (S-1)^2 ln(1-theta)
///
/// and y_per follows from the component balance.
PermeationResult crossflow_solve(const MixtureSpec& mix, double u, double x_in, double theta);

/// Same as crossflow_solve with a precomputed k.
PermeationResult crossflow_solve_k(double k, double selectivity, double x_in, double theta);

/// Single well-mixed cell: permeate set by the flux relation at the exit
/// retentate composition.
PermeationResult perfect_mixing_solve(const MixtureSpec& mix, double u, double x_in, double theta);

/// Smallest selectivity that keeps k > 0 and dk/du >= 0 on [u_lo, u_up].
/// Returns 1 for a gas.
double min_selectivity(const MixtureSpec& mix, double u_lo, double u_up);

/// Throws AdmissibilityError if mix.selectivity does not exceed min_selectivity.
void require_admissible(const MixtureSpec& mix, const PressureRange& range);

}  // namespace memcascade
