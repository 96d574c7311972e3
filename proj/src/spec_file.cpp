#include "memcascade/spec_file.hpp"

#include "memcascade/report.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace memcascade {

namespace pt = boost::property_tree;

SpecFileError::SpecFileError(const std::string& origin, int line, const std::string& what)
    : std::runtime_error(origin + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

bool SpecFile::operator==(const SpecFile& other) const {
    if (!(problem == other.problem && search == other.search && configuration == other.configuration)) {
        return false;
    }
    if (operating.has_value() != other.operating.has_value()) return false;
    if (!operating) return true;
    return operating->u == other.operating->u && operating->thetas.size() == other.operating->thetas.size() &&
           operating->thetas == other.operating->thetas;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// A user-unit figure whose conversion reproduces u exactly.
double exact_display(Phase phase, double u) {
    const double v = pressure_display(phase, u);
    double lo = v;
    double hi = v;
    for (int i = 0; i < 8; ++i) {
        if (pressure_variable(phase, hi) == u) return hi;
        if (lo >= 0.0 && (phase == Phase::Liquid || lo >= 1.0) && pressure_variable(phase, lo) == u) return lo;
        hi = std::nextafter(hi, INFINITY);
        lo = std::nextafter(lo, -INFINITY);
    }
    return v;
}

// Line of every "[section]" key, for diagnostics the tree does not keep.
class LineIndex {
public:
    explicit LineIndex(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        for (int n = 1; std::getline(in, line); ++n) {
            const std::string t = trim(line);
            if (t.empty() || t[0] == ';' || t[0] == '#') continue;
            if (t.front() == '[' && t.back() == ']') {
                section = trim(t.substr(1, t.size() - 2));
                lines_[section] = n;
                continue;
            }
            const auto eq = t.find('=');
            if (eq != std::string::npos) lines_[section + "." + trim(t.substr(0, eq))] = n;
        }
    }

    int at(const std::string& path) const {
        const auto it = lines_.find(path);
        return it == lines_.end() ? 0 : it->second;
    }

private:
    std::map<std::string, int> lines_;
};

const std::set<std::string> kKnownKeys = {
    "mixture.phase", "mixture.selectivity", "mixture.v_a", "mixture.v_b", "mixture.temperature_k",
    "feed.flow_mol_s", "feed.x_f", "feed.pressure_bar",
    "product.y_per", "product.recovery",
    "pressure.u_lo", "pressure.u_up",
    "efficiency.comp", "efficiency.pump", "efficiency.turbocharger",
    "cascade.max_stages",
    "search.starts", "search.grid", "search.basins", "search.refine_tolerance", "search.max_refine_iterations",
    "search.purity_tolerance", "search.recovery_tolerance", "search.penalty_weight", "search.penalty_doublings",
    "search.p5_cuts", "search.seed", "search.threads", "search.relative_target", "search.screen_ratio",
    "operating.configuration", "operating.u", "operating.thetas",
};

class Reader {
public:
    Reader(const pt::ptree& tree, const LineIndex& lines, std::string origin)
        : tree_(tree), lines_(lines), origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& what) const {
        throw SpecFileError(origin_, lines_.at(path), path + ": " + what);
    }

    bool has(const std::string& path) const {
        return static_cast<bool>(tree_.get_optional<std::string>(pt::ptree::path_type(path, '.')));
    }

    std::string text(const std::string& path) const {
        const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
        if (!v) fail(path, "missing required key");
        return trim(*v);
    }

    double number(const std::string& path) const { return to_number(path, text(path)); }

    double number(const std::string& path, double fallback) const {
        return has(path) ? number(path) : fallback;
    }

    template <class T = long>
    T integer(const std::string& path, T fallback) const {
        if (!has(path)) return fallback;
        const std::string s = text(path);
        T v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail(path, "expected an integer, got '" + s + "'");
        return v;
    }

    bool boolean(const std::string& path, bool fallback) const {
        if (!has(path)) return fallback;
        const std::string s = text(path);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        fail(path, "expected true or false, got '" + s + "'");
    }

    double to_number(const std::string& path, const std::string& s) const {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
            fail(path, "expected a number, got '" + s + "'");
        }
        return v;
    }

    // Runs before any lookup so a misspelled key is named as such rather than
    // reported as a missing one.
    void reject_unknown() const {
        for (const auto& [section, keys] : tree_) {
            if (keys.empty() && !keys.data().empty()) fail(section, "key outside any section");
            for (const auto& entry : keys) {
                const std::string path = section + "." + entry.first;
                if (!kKnownKeys.count(path)) fail(path, "unknown key");
            }
        }
    }

private:
    const pt::ptree& tree_;
    const LineIndex& lines_;
    std::string origin_;
};

}  // namespace

SpecFile parse_spec(std::istream& in, const std::string& origin) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    pt::ptree tree;
    try {
        std::istringstream stream(text);
        pt::ini_parser::read_ini(stream, tree);
    } catch (const pt::ini_parser_error& e) {
        throw SpecFileError(origin, static_cast<int>(e.line()), e.message());
    }
    const LineIndex lines(text);
    const Reader r(tree, lines, origin);
    r.reject_unknown();

    SpecFile out;
    ProblemSpec& p = out.problem;
    const std::string phase = r.text("mixture.phase");
    if (phase == "gas") {
        p.mix.phase = Phase::Gas;
    } else if (phase == "liquid") {
        p.mix.phase = Phase::Liquid;
    } else {
        r.fail("mixture.phase", "expected gas or liquid, got '" + phase + "'");
    }
    p.mix.selectivity = r.number("mixture.selectivity");
    p.mix.temperature = r.number("mixture.temperature_k");
    if (p.mix.phase == Phase::Liquid) {
        p.mix.molar_volume_a = r.number("mixture.v_a");
        p.mix.molar_volume_b = r.number("mixture.v_b");
    } else {
        p.mix.molar_volume_a = r.number("mixture.v_a", 0.0);
        p.mix.molar_volume_b = r.number("mixture.v_b", 0.0);
    }
    p.feed_flow = r.number("feed.flow_mol_s");
    p.x_feed = r.number("feed.x_f");
    p.feed_pressure_bar = r.number("feed.pressure_bar", p.feed_pressure_bar);
    p.y_target = r.number("product.y_per");
    p.recovery = r.number("product.recovery");
    for (const char* key : {"pressure.u_lo", "pressure.u_up"}) {
        try {
            const double v = pressure_variable(p.mix.phase, r.number(key));
            (std::string(key) == "pressure.u_lo" ? p.pressure.lo : p.pressure.up) = v;
        } catch (const std::invalid_argument& e) {
            r.fail(key, e.what());
        }
    }
    p.eta_comp = r.number("efficiency.comp", p.eta_comp);
    p.eta_pump = r.number("efficiency.pump", p.eta_pump);
    p.eta_tc = r.number("efficiency.turbocharger", p.eta_tc);
    p.max_stages = static_cast<int>(r.integer<long>("cascade.max_stages", p.max_stages));
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw SpecFileError(origin, 0, e.what());
    }

    SearchSettings& s = out.search;
    s.starts = static_cast<int>(r.integer("search.starts", s.starts));
    s.grid = static_cast<int>(r.integer("search.grid", s.grid));
    s.basins = static_cast<int>(r.integer("search.basins", s.basins));
    s.refine_tolerance = r.number("search.refine_tolerance", s.refine_tolerance);
    s.max_refine_iterations = static_cast<int>(r.integer("search.max_refine_iterations", s.max_refine_iterations));
    s.purity_tolerance = r.number("search.purity_tolerance", s.purity_tolerance);
    s.recovery_tolerance = r.number("search.recovery_tolerance", s.recovery_tolerance);
    s.penalty_weight = r.number("search.penalty_weight", s.penalty_weight);
    s.penalty_doublings = static_cast<int>(r.integer("search.penalty_doublings", s.penalty_doublings));
    s.p5_cuts = r.boolean("search.p5_cuts", s.p5_cuts);
    s.seed = r.integer<std::uint64_t>("search.seed", s.seed);
    s.threads = static_cast<int>(r.integer("search.threads", s.threads));
    s.relative_target = r.number("search.relative_target", s.relative_target);
    s.screen_ratio = r.number("search.screen_ratio", s.screen_ratio);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw SpecFileError(origin, lines.at("search"), e.what());
    }

    if (r.has("operating.configuration")) {
        try {
            out.configuration = Configuration::decode(r.text("operating.configuration"));
        } catch (const std::invalid_argument& e) {
            r.fail("operating.configuration", e.what());
        }
        if (out.configuration->stages() != p.max_stages) {
            r.fail("operating.configuration", "stage count differs from cascade.max_stages");
        }
    }
    if (r.has("operating.u") || r.has("operating.thetas")) {
        if (!out.configuration) r.fail("operating.u", "an operating point needs operating.configuration");
        OperatingPoint op;
        try {
            op.u = pressure_variable(p.mix.phase, r.number("operating.u"));
        } catch (const std::invalid_argument& e) {
            r.fail("operating.u", e.what());
        }
        std::vector<double> thetas;
        std::istringstream list(r.text("operating.thetas"));
        std::string item;
        while (std::getline(list, item, ',')) thetas.push_back(r.to_number("operating.thetas", trim(item)));
        if (static_cast<int>(thetas.size()) != p.max_stages) {
            r.fail("operating.thetas", "expected " + std::to_string(p.max_stages) + " stage cuts");
        }
        op.thetas = Eigen::Map<const Eigen::VectorXd>(thetas.data(), static_cast<Eigen::Index>(thetas.size()));
        out.operating = op;
    }
    return out;
}

SpecFile read_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecFileError(path, 0, "cannot open file");
    return parse_spec(in, path);
}

std::string format_spec(const SpecFile& spec) {
    const ProblemSpec& p = spec.problem;
    const SearchSettings& s = spec.search;
    const bool gas = p.mix.phase == Phase::Gas;
    std::ostringstream o;
    auto kv = [&](const char* key, const std::string& value) { o << key << " = " << value << '\n'; };
    auto num = [&](const char* key, double v) { kv(key, format_number(v)); };

    o << "[mixture]\n";
    kv("phase", gas ? "gas" : "liquid");
    num("selectivity", p.mix.selectivity);
    num("temperature_k", p.mix.temperature);
    if (!gas || p.mix.molar_volume_a != 0.0 || p.mix.molar_volume_b != 0.0) {
        o << "; molar volumes in m^3/mol\n";
        num("v_a", p.mix.molar_volume_a);
        num("v_b", p.mix.molar_volume_b);
    }
    o << "\n[feed]\n";
    num("flow_mol_s", p.feed_flow);
    num("x_f", p.x_feed);
    num("pressure_bar", p.feed_pressure_bar);
    o << "\n[product]\n";
    num("y_per", p.y_target);
    num("recovery", p.recovery);
    o << "\n[pressure]\n";
    o << (gas ? "; retentate to permeate pressure ratio\n" : "; trans-membrane pressure difference, bar\n");
    num("u_lo", exact_display(p.mix.phase, p.pressure.lo));
    num("u_up", exact_display(p.mix.phase, p.pressure.up));
    o << "\n[efficiency]\n";
    num("comp", p.eta_comp);
    num("pump", p.eta_pump);
    num("turbocharger", p.eta_tc);
    o << "\n[cascade]\n";
    kv("max_stages", std::to_string(p.max_stages));
    o << "\n[search]\n";
    kv("starts", std::to_string(s.starts));
    kv("grid", std::to_string(s.grid));
    kv("basins", std::to_string(s.basins));
    num("refine_tolerance", s.refine_tolerance);
    kv("max_refine_iterations", std::to_string(s.max_refine_iterations));
    num("purity_tolerance", s.purity_tolerance);
    num("recovery_tolerance", s.recovery_tolerance);
    num("penalty_weight", s.penalty_weight);
    kv("penalty_doublings", std::to_string(s.penalty_doublings));
    kv("p5_cuts", s.p5_cuts ? "true" : "false");
    kv("seed", std::to_string(s.seed));
    kv("threads", std::to_string(s.threads));
    num("relative_target", s.relative_target);
    num("screen_ratio", s.screen_ratio);
    if (spec.configuration) {
        o << "\n[operating]\n";
        kv("configuration", spec.configuration->encode());
        if (spec.operating) {
            num("u", exact_display(p.mix.phase, spec.operating->u));
            std::string list;
            for (Eigen::Index i = 0; i < spec.operating->thetas.size(); ++i) {
                if (i > 0) list += ", ";
                list += format_number(spec.operating->thetas(i));
            }
            kv("thetas", list);
        }
    }
    return o.str();
}

SpecFile template_spec() {
    SpecFile f;
    ProblemSpec& p = f.problem;
    p.max_stages = 4;
    p.feed_flow = 250.0;
    p.x_feed = 0.9;
    p.y_target = 0.995;
    p.recovery = 0.99;
    p.mix = MixtureSpec::liquid(50.0, 1.233e-4, 1.215e-4, 303.15);
    p.pressure = {pressure_variable(Phase::Liquid, 30.0), pressure_variable(Phase::Liquid, 107.0)};
    p.eta_pump = 0.75;
    p.eta_tc = 0.8;
    return f;
}

}  // namespace memcascade
