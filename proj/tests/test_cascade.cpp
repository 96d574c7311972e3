#include <doctest.h>

#include <random>
#include <set>

#include "memcascade/cascade.hpp"
#include "memcascade/errors.hpp"
#include "oracles.hpp"

using namespace memcascade;

namespace {

Eigen::VectorXd cuts(std::initializer_list<double> v) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) t(i++) = x;
    return t;
}

double mass_closure(const ProblemSpec& p, const CascadeState& st) {
    const double total = std::abs(p.feed_flow - st.permeate_flow - st.retentate_flow);
    const double fast = std::abs(p.feed_flow * p.x_feed - st.permeate_flow * st.permeate_fraction -
                                 st.retentate_flow * st.retentate_fraction);
    return std::max(total, fast) / p.feed_flow;
}

}  // namespace

TEST_CASE("two-stage superstructure has eight raw configurations") {
    CHECK(raw_configuration_count(2) == 8);
    CHECK(raw_configuration_count(4) == 64);
}

TEST_CASE("enumeration") {
    const auto four = enumerate_configurations(4, false);
    // 64 raw choices collapse to 52 once unreachable stages are merged.
    CHECK(four.size() == 52);
    std::set<std::string> seen;
    for (const auto& c : four) {
        CHECK(c.legal(true));
        CHECK(seen.insert(c.encode()).second);
        CHECK(Configuration::decode(c.encode()) == c);
    }
    CHECK(seen.count("F2|B,R1,R1,R1|N") == 1);

    const auto with_inactive = enumerate_configurations(4, true);
    CHECK(with_inactive.size() > four.size());
    for (const auto& c : with_inactive) CHECK(!(c.permeate[c.feed_stage] == PermeateRoute::Inactive));
}

TEST_CASE("canonical form marks stages no flow reaches") {
    const auto c = canonicalize(Configuration::decode("F3|B,B,R1,R1|N"));
    REQUIRE(c.has_value());
    CHECK(c->encode() == "F3|-,B,R1,R1|N");
    const auto reach = reachable_stages(Configuration::decode("F2|B,R1,R1,R1|N"));
    CHECK(std::all_of(reach.begin(), reach.end(), [](bool b) { return b; }));
}

TEST_CASE("intermediate machine count") {
    CHECK(count_pressure_machines(Configuration::decode("F1|B,B,-,-|P")) == 0);
    CHECK(count_pressure_machines(Configuration::decode("F2|B,R1,R1,R1|N")) == 3);
    // Stage 2 Recy1 and stage 3 Recy2 both return to mixer 1.
    CHECK(count_pressure_machines(Configuration::decode("F1|B,R1,R2|N")) == 1);

    std::mt19937_64 rng(5);
    for (int n : {3, 4, 5, 6}) {
        const auto all = enumerate_configurations(n, true);
        std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
        for (int i = 0; i < 13; ++i) {
            const Configuration& c = all[pick(rng)];
            CHECK(count_pressure_machines(c) == oracle::distinct_recycle_mixers(c));
        }
    }
}

TEST_CASE("single stage reproduces the stage permeate") {
    ProblemSpec p = oracle::xylene_split();
    p.max_stages = 2;
    const Configuration c = Configuration::decode("F1|B,-|P");
    const double theta = 147.0 / 250.0;
    const CascadeState st = simulate(p, c, 107e5, cuts({theta, 0.0}));
    const PermeationResult r = crossflow_solve(p.mix, 107e5, p.x_feed, theta);
    CHECK(st.permeate_flow == doctest::Approx(147.0).epsilon(1e-12));
    CHECK(st.permeate_fraction == doctest::Approx(r.y_per).epsilon(1e-12));
    CHECK(st.retentate_fraction == doctest::Approx(r.x_out).epsilon(1e-12));
    CHECK_FALSE(st.stages[1].has_flow);
}

TEST_CASE("stripping recycle matches a direct fixed-point iteration") {
    ProblemSpec p = oracle::propylene();
    p.max_stages = 2;
    const Configuration c = Configuration::decode("F1|B,R1|N");
    const double u = std::log(6.0);
    const double t1 = 0.55;
    const double t2 = 0.35;
    const CascadeState st = simulate(p, c, u, cuts({t1, t2}));

    // Direct substitution on the recycled permeate of stage 2.
    double rf = 0.0;
    double ry = p.x_feed;
    PermeationResult s1, s2;
    for (int it = 0; it < 5000; ++it) {
        const double f1 = p.feed_flow + rf;
        const double x1 = (p.feed_flow * p.x_feed + rf * ry) / f1;
        s1 = crossflow_solve(p.mix, u, x1, t1);
        const double f2 = (1.0 - t1) * f1;
        s2 = crossflow_solve(p.mix, u, s1.x_out, t2);
        rf = t2 * f2;
        ry = s2.y_per;
    }
    CHECK(st.stages[0].perm.x_in == doctest::Approx(s1.x_in).epsilon(1e-9));
    CHECK(st.permeate_fraction == doctest::Approx(s1.y_per).epsilon(1e-9));
    CHECK(st.retentate_fraction == doctest::Approx(s2.x_out).epsilon(1e-9));
    CHECK(st.f_recy1(1) == doctest::Approx(rf).epsilon(1e-9));
}

TEST_CASE("mass balances close on random operating points") {
    const ProblemSpec p = oracle::xylene_high_purity();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto configs = enumerate_configurations(4, true);
    std::uniform_int_distribution<std::size_t> pick(0, configs.size() - 1);
    int converged = 0;
    for (int i = 0; i < 300; ++i) {
        const Configuration& c = configs[pick(rng)];
        Eigen::VectorXd th(4);
        for (int j = 0; j < 4; ++j) th(j) = c.stage_active(j) ? 0.05 + 0.8 * unit(rng) : 0.0;
        const double u = (30.0 + 77.0 * unit(rng)) * 1e5;
        try {
            const CascadeState st = simulate(p, c, u, th);
            CHECK(mass_closure(p, st) <= 1e-8);
            CHECK(st.balance_residual(p, c) <= 1e-8);
            ++converged;
        } catch (const RecycleDivergence&) {
        }
    }
    CHECK(converged > 200);
}

TEST_CASE("four-stage cascade at its optimum meets the product streams") {
    const ProblemSpec p = oracle::xylene_split();
    const Configuration c = Configuration::decode("F2|B,R1,R1,R1|N");
    Eigen::VectorXd th = cuts({0.5776, 0.4044, 0.3902, 0.7575});
    CascadeState st;
    REQUIRE(oracle::restore_targets(p, c, 107e5, th, 0, 3, &st));
    CHECK(st.permeate_flow == doctest::Approx(147.0).epsilon(1e-8));
    CHECK(st.permeate_fraction == doctest::Approx(0.995).epsilon(1e-9));
    CHECK(mass_closure(p, st) <= 1e-8);
    CHECK(power(p, st) / 1e3 == doctest::Approx(1780.0).epsilon(0.05));
}

TEST_CASE("power") {
    SUBCASE("gas, no recycle") {
        ProblemSpec p = oracle::propylene();
        p.max_stages = 2;
        const CascadeState st =
            simulate(p, Configuration::decode("F1|B,-|P"), std::log(9.0), cuts({147.0 / 250.0, 0.0}));
        CHECK(power(p, st) == doctest::Approx(1085420.7314941816).epsilon(1e-12));
    }
    SUBCASE("gas power is linear in u at fixed flows") {
        const ProblemSpec p = oracle::propylene();
        const CascadeState st =
            simulate(p, Configuration::decode("F2|B,R1,R1,R1|N"), std::log(4.0), cuts({0.5, 0.4, 0.4, 0.5}));
        const Eigen::VectorXd d = objective_coefficients(p, st);
        CHECK(d(0) == 0.0);
        CHECK(d(d.size() - 1) == 0.0);
        CHECK(d(1) == doctest::Approx(kGasConstant * 303.15 / 0.75));
        CascadeState scaled = st;
        scaled.u = 2.0 * st.u;
        CHECK(power(p, scaled) == doctest::Approx(2.0 * power(p, st)));
    }
    SUBCASE("liquid coefficients") {
        const ProblemSpec p = oracle::xylene_split();
        const CascadeState st =
            simulate(p, Configuration::decode("F2|B,R1,R1,R1|N"), 107e5, cuts({0.5, 0.4, 0.4, 0.7}));
        const Eigen::VectorXd d = objective_coefficients(p, st);
        const double v_feed = 1.233e-4 * 0.65 + 1.215e-4 * 0.35;
        CHECK(d(0) == doctest::Approx(v_feed * 250.0 / 0.75));
        CHECK(d(1) == 0.0);
        const double v_out = 1.233e-4 * st.retentate_fraction + 1.215e-4 * (1.0 - st.retentate_fraction);
        CHECK(d(5) == doctest::Approx(-v_out * 0.8 / 0.75));
        const double v_per2 = 1.233e-4 * st.stages[1].perm.y_per + 1.215e-4 * (1.0 - st.stages[1].perm.y_per);
        CHECK(d(2) == doctest::Approx(v_per2 / 0.75));
    }
}

TEST_CASE("runaway recycle is reported with its arc") {
    const ProblemSpec p = oracle::xylene_split();
    const Configuration c = Configuration::decode("F2|B,R1,R1,R1|N");
    bool thrown = false;
    try {
        simulate(p, c, 107e5, cuts({0.01, 0.99, 0.99, 0.99}));
    } catch (const RecycleDivergence& e) {
        thrown = true;
        CHECK_FALSE(e.arc().empty());
    }
    CHECK(thrown);
}

TEST_CASE("stage cuts must agree with the routing") {
    const ProblemSpec p = oracle::xylene_split();
    CHECK_THROWS_AS(simulate(p, Configuration::decode("F1|B,B,-,-|P"), 107e5, cuts({0.5, 0.5, 0.5, 0.0})),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate(p, Configuration::decode("F1|B,B,-,-|P"), 107e5, cuts({0.5, 0.5})),
                    std::invalid_argument);
}
