#pragma once

// Random inputs shared by the unit tests and the acceptance run.

#include <cstdint>
#include <random>
#include <vector>

#include "memcascade/bounds_cuts.hpp"
#include "oracles.hpp"

namespace samples {

using namespace memcascade;

struct StageInput {
    MixtureSpec mix;
    double u;
    double x_in;
    double theta;
};

// Admissible single-stage inputs: gases over a wide selectivity and pressure
// ratio range, and the xylene liquid over its pressure window.
inline std::vector<StageInput> stage_inputs(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<StageInput> out;
    for (int i = 0; i < count; ++i) {
        StageInput s;
        if (i % 4 == 3) {
            s.mix = MixtureSpec::liquid(20.0 + 280.0 * unit(rng), 1.233e-4, 1.215e-4, 303.15);
            s.u = (30.0 + 77.0 * unit(rng)) * 1e5;
        } else {
            s.mix = MixtureSpec::gas(1.5 + 98.5 * unit(rng));
            s.u = std::log(1.2 + 18.8 * unit(rng));
        }
        s.x_in = 0.05 + 0.9 * unit(rng);
        s.theta = 0.01 + 0.94 * unit(rng);
        out.push_back(s);
    }
    return out;
}

struct RestoredPoint {
    ProblemSpec spec;
    Configuration config;
    double u;
    CascadeState state;
};

// Operating points that meet both product targets and violate no cut. Random
// stage cuts are restored onto the targets through the first and last active
// stage; points that fail to restore or break a cut are redrawn.
inline std::vector<RestoredPoint> restored_points(int count, std::uint64_t seed) {
    struct Domain {
        ProblemSpec spec;
        double u_lo, u_up;
    };
    const std::vector<Domain> domains = {{oracle::xylene_split(), 70e5, 107e5},
                                         {oracle::xylene_high_purity(), 40e5, 107e5},
                                         {oracle::propylene(), std::log(3.0), std::log(9.0)}};
    std::vector<std::vector<Configuration>> configs;
    for (const auto& d : domains) configs.push_back(enumerate_configurations(d.spec.max_stages, false));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<RestoredPoint> out;
    for (int attempt = 0; static_cast<int>(out.size()) < count && attempt < 200 * count; ++attempt) {
        const std::size_t di = attempt % domains.size();
        const Domain& d = domains[di];
        const auto& pool = configs[di];
        const Configuration& c = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        std::vector<int> active;
        for (int j = 0; j < c.stages(); ++j)
            if (c.stage_active(j)) active.push_back(j);
        if (active.size() < 2) continue;
        Eigen::VectorXd th = Eigen::VectorXd::Zero(c.stages());
        for (int j : active) th(j) = 0.1 + 0.8 * unit(rng);
        const double u = d.u_lo + (d.u_up - d.u_lo) * unit(rng);
        CascadeState st;
        if (!oracle::restore_targets(d.spec, c, u, th, active.front(), active.back(), &st)) continue;
        if (!check_cuts(st, d.spec).empty()) continue;
        out.push_back({d.spec, c, u, std::move(st)});
    }
    return out;
}

// Every working stage of the point lies inside the derived box.
inline bool within_bounds(const RestoredPoint& p, double tol, std::string* failure = nullptr) {
    const VariableBounds b = derive_bounds(p.spec);
    auto fail = [&](const std::string& what) {
        if (failure) *failure = p.config.encode() + ": " + what;
        return false;
    };
    if (!b.u.contains(p.u)) return fail("u");
    for (std::size_t j = 0; j < p.state.stages.size(); ++j) {
        const StageState& s = p.state.stages[j];
        if (!s.has_flow || s.perm.theta == 0.0) continue;
        const StageBounds& sb = b.stages[j];
        const std::string at = " at stage " + std::to_string(j + 1);
        if (!sb.theta.contains(s.perm.theta, tol)) return fail("theta" + at);
        if (!sb.x_in.contains(s.perm.x_in, tol)) return fail("x_in" + at);
        if (!sb.x_out.contains(s.perm.x_out, tol)) return fail("x_out" + at);
        if (!sb.y_in.contains(s.perm.y_in, tol)) return fail("y_in" + at);
        if (!sb.y_out.contains(s.perm.y_out, tol)) return fail("y_out" + at);
        if (!sb.y_per.contains(s.perm.y_per, tol)) return fail("y_per" + at);
        if (!sb.z_in.contains(s.perm.z_in, tol)) return fail("z_in" + at);
        if (!sb.z_out.contains(s.perm.z_out, tol)) return fail("z_out" + at);
    }
    return true;
}

}  // namespace samples
