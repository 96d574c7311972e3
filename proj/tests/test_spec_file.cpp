#include <doctest.h>

#include <sstream>

#include "memcascade/spec_file.hpp"

using namespace memcascade;

namespace {

SpecFile parse(const std::string& text) {
    std::istringstream in(text);
    return parse_spec(in, "t.ini");
}

int error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const SpecFileError& e) {
        return e.line();
    }
    return -1;
}

const char* kGas = R"([mixture]
phase = gas
selectivity = 35
temperature_k = 303.15

[feed]
flow_mol_s = 250
x_f = 0.7

[product]
y_per = 0.92
recovery = 0.978

[pressure]
u_lo = 1.1
u_up = 9

[cascade]
max_stages = 4
)";

}  // namespace

TEST_CASE("template round trip") {
    const SpecFile t = template_spec();
    const SpecFile back = parse(format_spec(t));
    CHECK(back == t);
    CHECK(format_spec(back) == format_spec(t));
    CHECK(t.problem.mix.selectivity == 50.0);
    CHECK(t.problem.pressure.up == doctest::Approx(107e5));
}

TEST_CASE("gas spec with defaults") {
    const SpecFile s = parse(kGas);
    CHECK(s.problem.mix.phase == Phase::Gas);
    CHECK(s.problem.pressure.lo == doctest::Approx(std::log(1.1)).epsilon(1e-15));
    CHECK(s.problem.pressure.up == doctest::Approx(std::log(9.0)).epsilon(1e-15));
    CHECK(s.search == SearchSettings{});
    CHECK_FALSE(s.configuration.has_value());
    CHECK(parse(format_spec(s)) == s);
}

TEST_CASE("operating point round trip") {
    std::string text = kGas;
    text += "\n[operating]\nconfiguration = F2|B,R1,R1,R1|N\nu = 6.5\nthetas = 0.5, 0.4, 0.4, 0.5\n";
    const SpecFile s = parse(text);
    REQUIRE(s.configuration.has_value());
    REQUIRE(s.operating.has_value());
    CHECK(s.configuration->encode() == "F2|B,R1,R1,R1|N");
    CHECK(s.operating->u == doctest::Approx(std::log(6.5)).epsilon(1e-15));
    CHECK(s.operating->thetas.size() == 4);
    CHECK(s.operating->thetas(3) == 0.5);
    CHECK(parse(format_spec(s)) == s);
}

TEST_CASE("errors carry the offending line") {
    std::string typo = kGas;
    typo.replace(typo.find("selectivity"), 11, "selectivty");
    CHECK(error_line(typo) == 3);
    try {
        parse(typo);
    } catch (const SpecFileError& e) {
        CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }

    std::string bad_number = kGas;
    bad_number.replace(bad_number.find("0.978"), 5, "0.9x8");
    CHECK(error_line(bad_number) == 12);

    std::string out_of_range = kGas;
    out_of_range.replace(out_of_range.find("x_f = 0.7"), 9, "x_f = 1.7");
    CHECK_THROWS_AS(parse(out_of_range), SpecFileError);

    std::string missing = kGas;
    missing.erase(missing.find("y_per = 0.92\n"), 13);
    CHECK_THROWS_AS(parse(missing), SpecFileError);

    CHECK_THROWS_AS(parse("[mixture\nphase = gas\n"), SpecFileError);
    CHECK_THROWS_AS(read_spec_file("/nonexistent/spec.ini"), SpecFileError);
}

TEST_CASE("a liquid needs molar volumes") {
    std::string text = kGas;
    text.replace(text.find("phase = gas"), 11, "phase = liquid");
    CHECK_THROWS_AS(parse(text), SpecFileError);
}

TEST_CASE("operating stage count must match the superstructure") {
    std::string text = kGas;
    text += "\n[operating]\nconfiguration = F1|B,R1|N\nu = 6.5\nthetas = 0.5, 0.4\n";
    CHECK_THROWS_AS(parse(text), SpecFileError);
}

TEST_CASE("search overrides") {
    std::string text = kGas;
    text += "\n[search]\nseed = 18446744073709551615\np5_cuts = no\ngrid = 7\n";
    const SpecFile s = parse(text);
    CHECK(s.search.seed == 18446744073709551615ull);
    CHECK_FALSE(s.search.p5_cuts);
    CHECK(s.search.grid == 7);
    CHECK(parse(format_spec(s)) == s);

    std::string bad = kGas;
    bad += "\n[search]\ngrid = 2\n";
    CHECK_THROWS_AS(parse(bad), SpecFileError);
}
