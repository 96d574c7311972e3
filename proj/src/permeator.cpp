#include "memcascade/permeator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "memcascade/errors.hpp"

namespace memcascade {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kResidualTolerance = 1e-12;

std::string describe(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double selectivity_factor(double k, double s) { return k * (s - 1.0) * (s - 1.0); }

PermeationResult bypass(double k, double selectivity, double x_in) {
    PermeationResult r;
    r.x_in = r.x_out = x_in;
    r.y_in = r.y_out = r.y_per = local_permeate_fraction(x_in, k, selectivity);
    r.z_in = r.z_out = r.y_in - x_in;
    r.theta = 0.0;
    r.k = k;
    return r;
}

void check_stage_cut(double theta) {
    if (!(theta >= 0.0) || theta > 1.0 - kStageCutMargin + 1e-12) {
        throw std::invalid_argument("stage cut " + describe(theta) + " outside [0, 1 - 1e-3]");
    }
}

// Max over the two admissibility branches at a single u.
double admissibility_branch_max(double c_a, double c_b, double u) {
    const double ratio = (u == 0.0) ? c_b / c_a : std::expm1(-c_b * u) / std::expm1(-c_a * u);
    const double slope = (c_b / c_a) * std::exp((c_a - c_b) * u);
    return std::max(ratio, slope);
}

}  // namespace

MixtureSpec MixtureSpec::gas(double selectivity, double temperature) {
    MixtureSpec m;
    m.phase = Phase::Gas;
    m.selectivity = selectivity;
    m.temperature = temperature;
    return m;
}

MixtureSpec MixtureSpec::liquid(double selectivity, double molar_volume_a, double molar_volume_b,
                                double temperature) {
    MixtureSpec m;
    m.phase = Phase::Liquid;
    m.selectivity = selectivity;
    m.molar_volume_a = molar_volume_a;
    m.molar_volume_b = molar_volume_b;
    m.temperature = temperature;
    return m;
}

double MixtureSpec::c_a() const {
    return phase == Phase::Gas ? 1.0 : molar_volume_a / (kGasConstant * temperature);
}

double MixtureSpec::c_b() const {
    return phase == Phase::Gas ? 1.0 : molar_volume_b / (kGasConstant * temperature);
}

void MixtureSpec::validate() const {
    if (!std::isfinite(selectivity) || selectivity <= 1.0) {
        throw std::invalid_argument("selectivity must be > 1, got " + describe(selectivity));
    }
    if (!std::isfinite(temperature) || temperature <= 0.0) {
        throw std::invalid_argument("temperature must be > 0 K");
    }
    if (phase == Phase::Liquid) {
        if (!(molar_volume_a > 0.0) || !(molar_volume_b > 0.0)) {
            throw std::invalid_argument("liquid mixture needs positive molar volumes");
        }
    }
}

double pressure_variable(Phase phase, double ratio_or_bar) {
    if (phase == Phase::Gas) {
        if (!(ratio_or_bar >= 1.0)) {
            throw std::invalid_argument("pressure ratio must be >= 1");
        }
        return std::log(ratio_or_bar);
    }
    if (!(ratio_or_bar >= 0.0)) {
        throw std::invalid_argument("pressure difference must be >= 0");
    }
    return ratio_or_bar * kPascalPerBar;
}

double pressure_display(Phase phase, double u) {
    return phase == Phase::Gas ? std::exp(u) : u / kPascalPerBar;
}

double PermeationResult::balance_residual() const {
    return std::abs(x_in - (1.0 - theta) * x_out - theta * y_per);
}

double compute_k(const MixtureSpec& mix, double u) {
    if (u < 0.0) {
        throw std::invalid_argument("pressure variable must be >= 0");
    }
    if (u == 0.0) {
        return 0.0;
    }
    const double s = mix.selectivity;
    // S (1 - e^{-C_A u}) - (1 - e^{-C_B u}), written with expm1 so small u keeps its digits.
    const double numerator = -s * std::expm1(-mix.c_a() * u) + std::expm1(-mix.c_b() * u);
    const double k = numerator / ((s - 1.0) * (s - 1.0));
    if (!(k > 0.0)) {
        throw AdmissibilityError("driving-force coefficient k = " + describe(k) +
                                 " is not positive; selectivity " + describe(s) +
                                 " is below the admissible minimum");
    }
    return k;
}

double permeate_excess(double y, double k, double selectivity) {
    const double s = selectivity;
    return selectivity_factor(k, s) * y * (1.0 - y) / (s - (s - 1.0) * y);
}

double local_permeate_fraction(double x, double k, double selectivity) {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    const double s = selectivity;
    const double big_k = selectivity_factor(k, s);
    // (K - (S-1)) y^2 + (S + x(S-1) - K) y - x S = 0; Q(0) <= 0 <= Q(1).
    const double a = big_k - (s - 1.0);
    const double b = s + x * (s - 1.0) - big_k;
    const double c = -x * s;

    std::array<double, 2> roots{std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN()};
    if (a == 0.0) {
        roots[0] = -c / b;
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) {
            throw NoRootError("flux relation has no real root at x = " + describe(x));
        }
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        roots[0] = q / a;
        if (q != 0.0) {
            roots[1] = c / q;
        }
    }

    constexpr double slack = 1e-12;
    double y = std::numeric_limits<double>::quiet_NaN();
    for (double r : roots) {
        if (r >= x - slack && r <= 1.0 + slack && !(y <= r)) {
            y = r;
        }
    }
    if (std::isnan(y)) {
        throw NoRootError("flux relation has no root in [x, 1] at x = " + describe(x) +
                          ", k = " + describe(k));
    }
    // Newton polish on y - z(y) = x, the form the inverse evaluates; the
    // quadratic residual alone leaves errors of eps / (dy/dx) in that form.
    y = std::clamp(y, x, 1.0);
    for (int i = 0; i < 2 && y > 0.0 && y < 1.0; ++i) {
        const double d = s - (s - 1.0) * y;
        const double g = y - big_k * y * (1.0 - y) / d - x;
        const double dg = (y - big_k * y * (1.0 - y) / d + big_k * y * y / (d * d)) / y;
        const double polished = y - g / dg;
        if (!(polished >= x && polished <= 1.0)) break;
        y = polished;
    }
    return std::clamp(y, x, 1.0);
}

double local_retentate_fraction(double y, double k, double selectivity) {
    if (y < 0.0 || y > 1.0) {
        throw DomainError("permeate fraction " + describe(y) + " outside [0, 1]");
    }
    const double x = y - permeate_excess(y, k, selectivity);
    constexpr double slack = 1e-12;
    if (x < -slack || x > 1.0 + slack) {
        throw DomainError("permeate fraction " + describe(y) + " is unreachable at k = " +
                          describe(k));
    }
    return std::clamp(x, 0.0, 1.0);
}

double dy_dx(double x, double y, double k, double selectivity) {
    if (y == 0.0) {
        return 0.0;
    }
    const double s = selectivity;
    const double d = s - (s - 1.0) * y;
    return y / (x + selectivity_factor(k, s) * y * y / (d * d));
}

PermeationResult crossflow_solve(const MixtureSpec& mix, double u, double x_in, double theta) {
    check_stage_cut(theta);
    return crossflow_solve_k(compute_k(mix, u), mix.selectivity, x_in, theta);
}

PermeationResult crossflow_solve_k(double k, double selectivity, double x_in, double theta) {
    check_stage_cut(theta);
    if (!(x_in >= 0.0 && x_in <= 1.0)) {
        throw std::invalid_argument("feed fraction " + describe(x_in) + " outside [0, 1]");
    }
    if (theta == 0.0 || x_in == 0.0 || x_in == 1.0) {
        PermeationResult r = bypass(k, selectivity, x_in);
        r.theta = theta;
        return r;
    }
    if (!(k > 0.0)) {
        throw AdmissibilityError("crossflow stage needs k > 0");
    }

    const double s = selectivity;
    const double big_k = selectivity_factor(k, s);
    const double y_in = local_permeate_fraction(x_in, k, s);
    const double z_in = permeate_excess(y_in, k, s);
    const double s_in = std::log(y_in);
    const double m_in = std::log1p(-y_in);
    const double d_in = std::log(s - (s - 1.0) * y_in);
    const double target = big_k * std::log1p(-theta);

    // Residual in t = ln(y_out); the ln K and ln z_in pieces cancel analytically.
    auto residual = [&](double t) {
        const double y = std::exp(t);
        const double l = t - s_in;
        const double m = std::log1p(-y) - m_in;
        const double p = std::log(s - (s - 1.0) * y) - d_in;
        return (s - big_k) * l - (1.0 + big_k) * m + big_k * p - target;
    };
    auto slope = [&](double t) {
        const double y = std::exp(t);
        return (s - big_k) + (1.0 + big_k) * y / (1.0 - y) - big_k * (s - 1.0) * y / (s - (s - 1.0) * y);
    };

    double hi = s_in;
    double lo = s_in;
    double step = std::max(1.0, -2.0 * target / std::max(s - big_k, 1e-12));
    double g_lo = residual(lo - step);
    for (int i = 0; i < 60 && g_lo >= 0.0; ++i) {
        step *= 2.0;
        g_lo = residual(lo - step);
    }
    lo -= step;
    if (g_lo >= 0.0) {
        throw ConvergenceError("could not bracket the retentate-end composition");
    }

    double t = hi - std::min(step, -target / std::max(s - big_k, 1e-12));
    t = std::clamp(t, lo, hi);
    bool converged = false;
    for (int it = 0; it < kMaxIterations; ++it) {
        const double g = residual(t);
        if (std::abs(g) <= kResidualTolerance) {
            converged = true;
            break;
        }
        if (g > 0.0) {
            hi = t;
        } else {
            lo = t;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            converged = true;
            break;
        }
        double next = t - g / slope(t);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        t = next;
    }
    if (!converged) {
        throw ConvergenceError("crossflow stage did not converge in " +
                               std::to_string(kMaxIterations) + " iterations");
    }

    PermeationResult r;
    r.theta = theta;
    r.k = k;
    r.x_in = x_in;
    r.y_in = y_in;
    r.z_in = z_in;
    r.y_out = std::min(std::exp(t), y_in);
    r.z_out = permeate_excess(r.y_out, k, s);
    r.x_out = std::clamp(r.y_out - r.z_out, 0.0, x_in);
    r.y_per = (x_in - (1.0 - theta) * r.x_out) / theta;
    return r;
}

PermeationResult perfect_mixing_solve(const MixtureSpec& mix, double u, double x_in, double theta) {
    check_stage_cut(theta);
    const double k = compute_k(mix, u);
    const double s = mix.selectivity;
    if (!(x_in >= 0.0 && x_in <= 1.0)) {
        throw std::invalid_argument("feed fraction " + describe(x_in) + " outside [0, 1]");
    }
    PermeationResult r;
    r.theta = theta;
    r.k = k;
    r.x_in = x_in;
    if (theta == 0.0 || x_in == 0.0 || x_in == 1.0) {
        r.x_out = x_in;
    } else {
        // (1-theta) x + theta y(x) - x_in is increasing in x, negative at 0 and
        // non-negative at x_in.
        auto h = [&](double x) { return (1.0 - theta) * x + theta * local_permeate_fraction(x, k, s) - x_in; };
        double lo = 0.0;
        double hi = x_in;
        double x = x_in * (1.0 - theta);
        bool converged = false;
        for (int it = 0; it < kMaxIterations; ++it) {
            const double v = h(x);
            if (std::abs(v) <= 1e-15) {
                converged = true;
                break;
            }
            (v > 0.0 ? hi : lo) = x;
            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) {
                converged = true;
                break;
            }
            const double y = local_permeate_fraction(x, k, s);
            const double dh = (1.0 - theta) + theta * dy_dx(x, y, k, s);
            double next = dh > 0.0 ? x - v / dh : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) {
                next = 0.5 * (lo + hi);
            }
            x = next;
        }
        if (!converged) {
            throw ConvergenceError("perfect-mixing stage did not converge");
        }
        r.x_out = x;
    }
    r.y_per = local_permeate_fraction(r.x_out, k, s);
    r.y_in = r.y_out = r.y_per;
    r.z_in = r.y_in - r.x_in;
    r.z_out = r.y_out - r.x_out;
    return r;
}

double min_selectivity(const MixtureSpec& mix, double u_lo, double u_up) {
    if (!(u_lo > 0.0) || u_up < u_lo) {
        throw std::invalid_argument("pressure range must satisfy 0 < u_lo <= u_up");
    }
    if (mix.phase == Phase::Gas) {
        return 1.0;
    }
    const double c_a = mix.c_a();
    const double c_b = mix.c_b();
    auto g = [&](double u) { return admissibility_branch_max(c_a, c_b, u); };

    constexpr int kGrid = 2000;
    const double h = (u_up - u_lo) / kGrid;
    int best = 0;
    double best_value = g(u_lo);
    for (int i = 1; i <= kGrid; ++i) {
        const double v = g(u_lo + h * i);
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    if (h > 0.0 && best > 0 && best < kGrid) {
        // Golden-section refinement around an interior grid maximum.
        const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = u_lo + h * (best - 1);
        double b = u_lo + h * (best + 1);
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        for (int it = 0; it < 100 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
            if (g(c) > g(d)) {
                b = d;
            } else {
                a = c;
            }
            c = b - inv_phi * (b - a);
            d = a + inv_phi * (b - a);
        }
        best_value = std::max(best_value, g(0.5 * (a + b)));
    }
    return std::max(best_value, 1.0);
}

void require_admissible(const MixtureSpec& mix, const PressureRange& range) {
    mix.validate();
    const double threshold = min_selectivity(mix, range.lo, range.up);
    if (!(mix.selectivity > threshold)) {
        throw AdmissibilityError("selectivity " + describe(mix.selectivity) +
                                 " does not exceed the admissible minimum " + describe(threshold) +
                                 " for this pressure range");
    }
}

}  // namespace memcascade
