#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "memcascade/errors.hpp"
#include "memcascade/report.hpp"
#include "memcascade/spec_file.hpp"

namespace fs = std::filesystem;
using namespace memcascade;

namespace {

enum ExitCode { kOk = 0, kInfeasible = 2, kParseError = 3, kNumericalError = 4 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string input;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> machines;
    bool no_p5_cuts = false;
    std::optional<int> starts;
    std::optional<int> grid;
};

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << text;
    if (!f) throw IoError("write failed for " + path.string());
}

SpecFile load(const Options& opt) {
    if (opt.input.empty()) throw SpecFileError("<command line>", 0, "--input is required");
    SpecFile spec = read_spec_file(opt.input);
    if (opt.seed) spec.search.seed = *opt.seed;
    if (opt.no_p5_cuts) spec.search.p5_cuts = false;
    if (opt.starts) spec.search.starts = *opt.starts;
    if (opt.grid) spec.search.grid = *opt.grid;
    try {
        spec.search.validate();
    } catch (const std::invalid_argument& e) {
        throw SpecFileError("<command line>", 0, e.what());
    }
    return spec;
}

template <class Fn>
std::string render(Fn fn) {
    std::ostringstream o;
    fn(o);
    return o.str();
}

struct Preset {
    std::string name;
    double selectivity;
    double ratio;
    double x_in;
};

// Single-stage parameter sets with measured validation data.
const std::vector<Preset> kPresets = {
    {"o2_n2", 5.3, 8.4, 0.205},
    {"co2_ch4_25c", 3.58, 4.0, 0.60},
    {"co2_ch4_65c", 2.9, 4.0, 0.60},
};

int cmd_validate(const Options& opt, const std::string& preset, int points) {
    auto emit = [&](const std::string& name, const MixtureSpec& mix, double u, double x_in) {
        const fs::path dir(opt.out);
        write_file(dir / (name + "_crossflow.csv"),
                   render([&](std::ostream& o) { write_validation_csv(o, validation_curve(mix, u, x_in, points, true)); }));
        write_file(dir / (name + "_perfect_mixing.csv"), render([&](std::ostream& o) {
                       write_validation_csv(o, validation_curve(mix, u, x_in, points, false));
                   }));
        std::cout << "wrote " << (dir / (name + "_crossflow.csv")).string() << " and "
                  << (dir / (name + "_perfect_mixing.csv")).string() << "\n";
    };
    if (!opt.input.empty()) {
        const SpecFile spec = load(opt);
        const ProblemSpec& p = spec.problem;
        const double u = spec.operating ? spec.operating->u : p.pressure.up;
        emit(fs::path(opt.input).stem().string(), p.mix, u, p.x_feed);
        return kOk;
    }
    bool matched = false;
    for (const auto& ps : kPresets) {
        if (preset != "all" && preset != ps.name) continue;
        matched = true;
        emit(ps.name, MixtureSpec::gas(ps.selectivity), pressure_variable(Phase::Gas, ps.ratio), ps.x_in);
    }
    if (!matched) throw SpecFileError("<command line>", 0, "unknown preset '" + preset + "'");
    return kOk;
}

int cmd_simulate(const Options& opt) {
    const SpecFile spec = load(opt);
    if (!spec.configuration || !spec.operating) {
        throw SpecFileError(opt.input, 0, "simulate needs [operating] configuration, u and thetas");
    }
    const ProblemSpec& p = spec.problem;
    SimulationOutcome sim;
    sim.config = *spec.configuration;
    sim.state = simulate(p, sim.config, spec.operating->u, spec.operating->thetas);
    sim.power = power(p, sim.state);
    sim.violations = check_cuts(sim.state, p, spec.search.p5_cuts);
    const std::string text = render([&](std::ostream& o) { write_simulation_text(o, p, sim); });
    std::cout << text;
    write_file(fs::path(opt.out) / "simulation.txt", text);
    write_file(fs::path(opt.out) / "simulation.kv", render([&](std::ostream& o) { write_simulation_kv(o, p, sim); }));
    return kOk;
}

int cmd_optimize(const Options& opt) {
    const SpecFile spec = load(opt);
    const ProblemSpec& p = spec.problem;
    const OptimizationReport report = solve_problem(p, spec.search, opt.machines);
    const std::string text = render([&](std::ostream& o) { write_optimization_text(o, p, report); });
    std::cout << text;
    std::fprintf(stderr, "search took %.1f s\n", report.wall_seconds);
    const fs::path dir(opt.out);
    write_file(dir / "report.txt", text);
    write_file(dir / "report.kv", render([&](std::ostream& o) { write_optimization_kv(o, p, report); }));
    write_file(dir / "configurations.csv", render([&](std::ostream& o) { write_configurations_csv(o, p, report); }));
    return kOk;
}

int cmd_sweep(const Options& opt, const std::string& axis_name, const std::vector<double>& values, bool fixed) {
    const SpecFile spec = load(opt);
    SweepAxis axis;
    if (axis_name == "selectivity") {
        axis = SweepAxis::Selectivity;
    } else if (axis_name == "u_up") {
        axis = SweepAxis::PressureUpper;
    } else {
        throw SpecFileError("<command line>", 0, "unknown sweep axis '" + axis_name + "'");
    }
    std::optional<Configuration> config;
    if (fixed) {
        if (!spec.configuration) throw SpecFileError(opt.input, 0, "--fixed needs [operating] configuration");
        config = spec.configuration;
    }
    const auto rows = sweep(spec.problem, spec.search, axis, values, config, opt.machines);
    const std::string csv = render([&](std::ostream& o) { write_sweep_csv(o, axis, rows); });
    std::cout << csv;
    write_file(fs::path(opt.out) / "sweep.csv", csv);
    for (const auto& r : rows) {
        if (r.feasible) return kOk;
    }
    return kInfeasible;
}

int cmd_init(const Options& opt) {
    const fs::path path = opt.out == "." ? fs::path("memcascade.ini") : fs::path(opt.out);
    if (fs::exists(path)) throw IoError(path.string() + " exists; refusing to overwrite");
    write_file(path, format_spec(template_spec()));
    std::cout << "wrote " << path.string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimum-power membrane cascade design"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub, bool search_flags) {
        sub->add_option("--input,-i", opt.input, "problem file");
        sub->add_option("--out,-o", opt.out, "output directory");
        if (!search_flags) return;
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--machines", opt.machines, "maximum intermediate pumps or compressors")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--no-p5-cuts", opt.no_p5_cuts, "drop the profile-conjecture cuts");
        sub->add_option("--starts", opt.starts, "random starts per configuration")->check(CLI::NonNegativeNumber);
        sub->add_option("--grid", opt.grid, "coarse points per free dimension")->check(CLI::Range(3, 1000));
    };

    auto* validate_cmd = app.add_subcommand("validate", "write single-stage validation curves");
    std::string preset = "all";
    int points = 50;
    add_common(validate_cmd, false);
    validate_cmd->add_option("--preset", preset, "o2_n2, co2_ch4_25c, co2_ch4_65c or all");
    validate_cmd->add_option("--points", points, "stage cuts per curve")->check(CLI::Range(2, 100000));

    auto* simulate_cmd = app.add_subcommand("simulate", "simulate the [operating] point of a problem file");
    add_common(simulate_cmd, false);
    simulate_cmd->add_flag("--no-p5-cuts", opt.no_p5_cuts, "drop the profile-conjecture cuts");

    auto* optimize_cmd = app.add_subcommand("optimize", "find the minimum-power cascade");
    add_common(optimize_cmd, true);

    auto* sweep_cmd = app.add_subcommand("sweep", "re-optimize along a parameter axis");
    add_common(sweep_cmd, true);
    std::string axis = "u_up";
    std::vector<double> values;
    bool fixed = false;
    sweep_cmd->add_option("--axis", axis, "selectivity or u_up");
    sweep_cmd->add_option("--values", values, "comma-separated values in user units")->delimiter(',')->required();
    sweep_cmd->add_flag("--fixed", fixed, "optimize only the [operating] configuration");

    auto* init_cmd = app.add_subcommand("init", "write a template problem file");
    init_cmd->add_option("--out,-o", opt.out, "file to create (default memcascade.ini)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kParseError;
    }

    try {
        if (*validate_cmd) return cmd_validate(opt, preset, points);
        if (*simulate_cmd) return cmd_simulate(opt);
        if (*optimize_cmd) return cmd_optimize(opt);
        if (*sweep_cmd) return cmd_sweep(opt, axis, values, fixed);
        if (*init_cmd) return cmd_init(opt);
    } catch (const SpecFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParseError;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParseError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParseError;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const RecycleDivergence& e) {
        std::cerr << "numerical failure: " << e.what() << " (arc " << e.arc() << ")\n";
        return kNumericalError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParseError;
    }
    return kOk;
}
