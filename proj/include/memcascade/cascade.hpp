#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "memcascade/permeator.hpp"

namespace memcascade {

/// Design problem: feed, product targets, membrane and utility data.
struct ProblemSpec {
    int max_stages = 4;
    double feed_flow = 250.0;  // mol/s
    double x_feed = 0.5;
    double y_target = 0.9;     // permeate product purity
    double recovery = 0.9;     // fraction of feed A leaving in the permeate product
    MixtureSpec mix;
    PressureRange pressure;    // internal units
    double feed_pressure_bar = 1.0;  // informational; gas products leave at feed pressure
    double eta_comp = 0.75;
    double eta_pump = 0.75;
    double eta_tc = 0.8;

    double permeate_flow() const;
    double retentate_flow() const;
    double x_retentate() const;
    /// Throws std::invalid_argument with the offending field.
    void validate() const;

    bool operator==(const ProblemSpec&) const = default;
};

enum class PermeateRoute { Bypass, Recy1, Recy2, Inactive };
enum class RetentateRoute { ToStageN, ToProduct };

/// Discrete routing of the superstructure. Stage indices are 0-based here and
/// 1-based in the text encoding.
///
/// Inactive marks a stage with theta = 0: it passes its feed straight to its
/// retentate arc. Canonical configurations also use it for stages that no
/// flow can reach.
struct Configuration {
    int feed_stage = 0;
    std::vector<PermeateRoute> permeate;
    RetentateRoute retentate = RetentateRoute::ToStageN;

    int stages() const { return static_cast<int>(permeate.size()); }
    bool stage_active(int j) const { return permeate[j] != PermeateRoute::Inactive; }
    int active_stage_count() const;

    /// Mixer index fed by the retentate of stage j, or -1 for the product.
    int retentate_destination(int j) const;
    /// Mixer index fed by the permeate of stage j, or -1 for the product.
    int permeate_destination(int j) const;

    /// True when every choice lies in its allowed domain.
    bool legal(bool allow_inactive) const;

    /// "F2|B,R1,R1,R1|N": feed stage, permeate routes (B, R1, R2, -), and
    /// the stage N-1 retentate route (N to stage N, P to product).
    std::string encode() const;
    static Configuration decode(const std::string& text);

    bool operator==(const Configuration&) const = default;
};

/// Stages reachable from the feed, with Inactive stages acting as pass-throughs.
std::vector<bool> reachable_stages(const Configuration& config);

/// Marks unreachable stages Inactive and fixes moot retentate choices. Returns
/// std::nullopt when a product mixer receives no flow.
std::optional<Configuration> canonicalize(const Configuration& config);

/// Product of the per-choice domain sizes, before deduplication.
long raw_configuration_count(int n);

/// All legal canonical configurations, deduplicated and sorted by encoding.
std::vector<Configuration> enumerate_configurations(int n, bool allow_inactive);

/// Intermediate pressure machines: recycle arcs minus shared destinations.
int count_pressure_machines(const Configuration& config);

struct StageState {
    bool has_flow = false;
    double f_in = 0.0;
    double f_out = 0.0;
    double f_per = 0.0;
    PermeationResult perm;
};

/// Converged stream table of one cascade.
struct CascadeState {
    double u = 0.0;
    std::vector<StageState> stages;
    // Arc flows indexed by source stage (0-based), mol/s.
    Eigen::VectorXd f_feed;
    Eigen::VectorXd f_recy1;
    Eigen::VectorXd f_recy2;
    Eigen::VectorXd f_per_bypass;
    Eigen::VectorXd f_out_bypass;
    Eigen::VectorXd f_out_next;
    double permeate_flow = 0.0;
    double permeate_fraction = 0.0;
    double retentate_flow = 0.0;
    double retentate_fraction = 0.0;
    int sweeps = 0;

    /// Worst overall and component balance error over all mixers, relative to F.
    double balance_residual(const ProblemSpec& spec, const Configuration& config) const;
    int active_stage_count() const;
};

inline constexpr double kFlowCapFactor = 10.0;
inline constexpr double kRecycleTolerance = 1e-10;
inline constexpr int kMaxSweeps = 500;

/// Sequential-modular simulation at fixed (u, theta). Flows are linear in the
/// feed at fixed stage cuts and are solved directly; compositions are swept in
/// stage order with Wegstein-accelerated recycle tears.
///
/// Throws RecycleDivergence when flows exceed the cap or the sweep stalls, and
/// std::invalid_argument on inconsistent stage cuts.
CascadeState simulate(const ProblemSpec& spec, const Configuration& config, double u,
                      const Eigen::VectorXd& thetas);

/// Power coefficients D_0..D_{N+1}: the power is u * (D_0 + D_1 F_per +
/// sum_j D_j recycle_j + D_{N+1} F_out).
Eigen::VectorXd objective_coefficients(const ProblemSpec& spec, const CascadeState& state);

/// Net power in W.
double power(const ProblemSpec& spec, const CascadeState& state);

}  // namespace memcascade
