#include <doctest.h>

#include <random>

#include "memcascade/bounds_cuts.hpp"
#include "memcascade/errors.hpp"
#include "oracles.hpp"
#include "samples.hpp"

using namespace memcascade;

namespace {

bool has_family(const std::vector<CutViolation>& v, CutFamily f) {
    return std::any_of(v.begin(), v.end(), [f](const CutViolation& c) { return c.family == f; });
}

StageState stage_from(const PermeationResult& r) {
    StageState s;
    s.has_flow = true;
    s.f_in = 100.0;
    s.f_per = 100.0 * r.theta;
    s.f_out = 100.0 - s.f_per;
    s.perm = r;
    return s;
}

}  // namespace

TEST_CASE("excess peak and its bound") {
    CHECK(excess_peak_location(4.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    const Interval z = excess_bounds({0.1, 0.9}, {0.01, 0.02}, 4.0);
    CHECK(z.up == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(z.lo == doctest::Approx(std::min(oracle::excess(0.1, 0.01, 4.0), oracle::excess(0.9, 0.01, 4.0))));
}

TEST_CASE("excess bounds agree with brute-force extremes") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const double s = 1.5 + 250.0 * unit(rng);
        double y1 = unit(rng);
        double y2 = unit(rng);
        if (y1 > y2) std::swap(y1, y2);
        const double k_lo = (0.01 + 0.5 * unit(rng)) / (s - 1.0);
        const double k_up = k_lo * (1.0 + 2.0 * unit(rng));
        const Interval z = excess_bounds({y1, y2}, {k_lo, k_up}, s);
        const auto [lo, hi] = oracle::excess_extremes(y1, y2, k_lo, k_up, s);
        CHECK(std::abs(z.lo - lo) <= 1e-9);
        CHECK(std::abs(z.up - hi) <= 1e-9);
    }
}

TEST_CASE("derived bounds contain every restored, cut-feasible operating point") {
    const auto points = samples::restored_points(100, 29);
    CHECK(points.size() == 100);
    for (const auto& p : points) {
        std::string failure;
        CHECK_MESSAGE(samples::within_bounds(p, 1e-8, &failure), failure);
    }
}

TEST_CASE("reference optimum violates no cut") {
    const ProblemSpec p = oracle::xylene_split();
    const Configuration c = Configuration::decode("F2|B,R1,R1,R1|N");
    Eigen::VectorXd th(4);
    th << 0.5776, 0.4044, 0.3902, 0.7575;
    CascadeState st;
    REQUIRE(oracle::restore_targets(p, c, 107e5, th, 0, 3, &st));
    CHECK(check_cuts(st, p).empty());
}

TEST_CASE("a reversed profile is flagged") {
    const ProblemSpec p = oracle::xylene_split();
    const MixtureSpec& m = p.mix;
    CascadeState st;
    st.stages = {stage_from(crossflow_solve(m, 107e5, 0.80, 0.4)), stage_from(crossflow_solve(m, 107e5, 0.95, 0.4))};
    const auto all = check_cuts(st, p);
    CHECK(has_family(all, CutFamily::RetentateProfile));
    CHECK(has_family(all, CutFamily::PermeateProfile));
    CHECK_FALSE(has_family(all, CutFamily::StageRetentate));
    CHECK_FALSE(has_family(all, CutFamily::StagePermeate));
    for (const auto& v : all) CHECK(v.magnitude > 0.0);

    const auto proven = check_cuts(st, p, false);
    CHECK(proven.empty());
}

TEST_CASE("a stage cut of zero takes no part in profile comparisons") {
    const ProblemSpec p = oracle::xylene_split();
    CascadeState st;
    st.stages = {stage_from(crossflow_solve(p.mix, 107e5, 0.90, 0.4)),
                 stage_from(crossflow_solve(p.mix, 107e5, 0.95, 0.0)),
                 stage_from(crossflow_solve(p.mix, 107e5, 0.80, 0.4))};
    CHECK_FALSE(has_family(check_cuts(st, p), CutFamily::RetentateProfile));
}

TEST_CASE("machine limit") {
    const Configuration split = Configuration::decode("F2|B,R1,R1,R1|N");
    CHECK(machine_limit_filter(split, 3));
    CHECK_FALSE(machine_limit_filter(split, 2));
    CHECK(machine_limit_filter(Configuration::decode("F1|B,B,-,-|P"), 0));
    CHECK(machine_limit_filter(Configuration::decode("F1|B,R1,R2|N"), 1));

    int within_one = 0;
    for (const auto& c : enumerate_configurations(4, true)) {
        CHECK(machine_limit_filter(c, 1) == (oracle::distinct_recycle_mixers(c) <= 1));
        within_one += machine_limit_filter(c, 1);
    }
    CHECK(within_one > 0);
}

TEST_CASE("bounds refuse an inadmissible mixture") {
    ProblemSpec p = oracle::xylene_split();
    p.mix = MixtureSpec::liquid(2.0, 1e-4, 3e-4, 303.15);
    CHECK_THROWS_AS(derive_bounds(p), AdmissibilityError);
}
