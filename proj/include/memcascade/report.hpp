#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "memcascade/bounds_cuts.hpp"
#include "memcascade/cascade.hpp"
#include "memcascade/optimizer.hpp"

namespace memcascade {

/// Shortest text that reads back to the same double, with a '.' decimal
/// point regardless of locale.
std::string format_number(double v);

struct SimulationOutcome {
    Configuration config;
    CascadeState state;
    double power = 0.0;
    std::vector<CutViolation> violations;
};

void write_simulation_text(std::ostream& out, const ProblemSpec& spec, const SimulationOutcome& sim);
void write_simulation_kv(std::ostream& out, const ProblemSpec& spec, const SimulationOutcome& sim);

/// Neither writer includes wall time, so equal searches give equal bytes.
void write_optimization_text(std::ostream& out, const ProblemSpec& spec, const OptimizationReport& report);
void write_optimization_kv(std::ostream& out, const ProblemSpec& spec, const OptimizationReport& report);

/// One row per enumerated configuration.
void write_configurations_csv(std::ostream& out, const ProblemSpec& spec, const OptimizationReport& report);

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows);

struct ValidationRow {
    double theta = 0.0;
    double y_per = 0.0;
    double x_out = 0.0;
};

/// Single-stage curve over `points` stage cuts evenly spaced on [0, 1 - margin].
std::vector<ValidationRow> validation_curve(const MixtureSpec& mix, double u, double x_in, int points,
                                            bool crossflow);
void write_validation_csv(std::ostream& out, const std::vector<ValidationRow>& rows);

std::string status_name(ConfigStatus status);
std::string cut_family_name(CutFamily family);

}  // namespace memcascade
