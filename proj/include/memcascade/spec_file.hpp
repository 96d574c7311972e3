#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "memcascade/cascade.hpp"
#include "memcascade/optimizer.hpp"

namespace memcascade {

/// Malformed or unreadable input. line() is 0 when no line applies.
class SpecFileError : public std::runtime_error {
public:
    SpecFileError(const std::string& origin, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

/// Contents of one input file.
///
/// Sections: [mixture] phase, selectivity, v_a, v_b, temperature_k;
/// [feed] flow_mol_s, x_f, pressure_bar; [product] y_per, recovery;
/// [pressure] u_lo, u_up (bar for a liquid, pressure ratio for a gas);
/// [efficiency] comp, pump, turbocharger; [cascade] max_stages;
/// [search] overrides of SearchSettings; [operating] configuration, u, thetas.
struct SpecFile {
    ProblemSpec problem;
    SearchSettings search;
    std::optional<Configuration> configuration;
    std::optional<OperatingPoint> operating;  // u in internal units

    bool operator==(const SpecFile& other) const;
};

SpecFile parse_spec(std::istream& in, const std::string& origin = "<input>");
SpecFile read_spec_file(const std::string& path);

/// Text that parse_spec reads back to an identical SpecFile.
std::string format_spec(const SpecFile& spec);

/// Starting template written by `init`: the xylene separation case.
SpecFile template_spec();

}  // namespace memcascade
