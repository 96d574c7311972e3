#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memcascade/bounds_cuts.hpp"
#include "memcascade/cascade.hpp"

namespace memcascade {

struct SearchSettings {
    int starts = 16;              // random start points per configuration
    int grid = 5;                 // coarse points per free dimension
    int basins = 4;               // candidates refined per configuration
    double refine_tolerance = 1e-7;   // relative power change that ends refinement
    int max_refine_iterations = 80;
    double purity_tolerance = 1e-4;
    double recovery_tolerance = 1e-4;
    double penalty_weight = 1e9;  // W per unit spec residual
    int penalty_doublings = 2;
    bool p5_cuts = true;
    std::uint64_t seed = 1;
    int threads = 0;              // 0: MEMCASCADE_THREADS or hardware concurrency
    double relative_target = 0.05;
    // Configurations whose coarse best exceeds this multiple of the overall
    // coarse best are not refined.
    double screen_ratio = 1.35;

    /// Throws std::invalid_argument.
    void validate() const;

    bool operator==(const SearchSettings&) const = default;
};

/// Operating point of one configuration: u plus one stage cut per stage.
struct OperatingPoint {
    double u = 0.0;
    Eigen::VectorXd thetas;
};

enum class ConfigStatus { Optimal, Infeasible, Screened, Failed };

struct ConfigurationResult {
    Configuration config;
    ConfigStatus status = ConfigStatus::Infeasible;
    OperatingPoint point;
    double power = 0.0;          // W, valid when Optimal
    double coarse_power = 0.0;   // best restored coarse sample, W; infinity if none
    long evaluations = 0;        // cascade simulations
    std::string message;
};

struct OptimizationReport {
    bool feasible = false;
    ConfigurationResult best;
    CascadeState state;
    std::vector<ConfigurationResult> configurations;  // in enumeration order
    std::vector<CutViolation> violations;
    double coverage_gap = 0.0;  // (coarse envelope - best) / best for the winner
    double wall_seconds = 0.0;  // not part of the serialized report
    std::optional<int> machine_limit;
    long evaluations = 0;
};

/// Minimizes power over u and the active stage cuts of a single configuration
/// subject to the purity and recovery targets. Throws Infeasible when no
/// sampled or refined point meets the targets.
ConfigurationResult solve_configuration(const ProblemSpec& spec, const Configuration& config,
                                        const SearchSettings& settings);

/// Local refinement only, started from `start` (no grid, no random starts).
ConfigurationResult refine_from(const ProblemSpec& spec, const Configuration& config,
                                const SearchSettings& settings, const OperatingPoint& start);

/// Enumerates configurations (with Inactive stages when a machine limit is
/// given), solves each and returns the minimum-power design. Throws
/// AllInfeasible when no configuration meets the targets.
OptimizationReport solve_problem(const ProblemSpec& spec, const SearchSettings& settings,
                                 std::optional<int> machine_limit = std::nullopt);

enum class SweepAxis { Selectivity, PressureUpper };

struct SweepRow {
    double value = 0.0;
    bool feasible = false;
    double power = 0.0;
    double u = 0.0;
    std::string configuration;
    std::string message;
};

/// Re-solves the design for each value along the axis. Values are given in
/// user units (bar or pressure ratio for PressureUpper). When `fixed` is set
/// only that configuration is optimized.
std::vector<SweepRow> sweep(const ProblemSpec& spec, const SearchSettings& settings, SweepAxis axis,
                            const std::vector<double>& values,
                            const std::optional<Configuration>& fixed = std::nullopt,
                            std::optional<int> machine_limit = std::nullopt);

/// Worker count: settings.threads, else MEMCASCADE_THREADS, else hardware.
int resolve_thread_count(const SearchSettings& settings);

}  // namespace memcascade
