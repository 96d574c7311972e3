#include "memcascade/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <thread>

#include "memcascade/errors.hpp"

namespace memcascade {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRestoreTolerance = 1e-9;
constexpr int kRestoreIterations = 30;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t configuration_seed(std::uint64_t seed, const Configuration& config) {
    std::uint64_t h = splitmix64(seed);
    for (char ch : config.encode()) h = splitmix64(h ^ static_cast<unsigned char>(ch));
    return h;
}

struct Sample {
    bool simulated = false;
    double power = kInf;
    Eigen::Vector2d residual = Eigen::Vector2d::Constant(kInf);
    double cut_excess = 0.0;

    bool meets_targets(double tol) const {
        return simulated && residual.cwiseAbs().maxCoeff() <= tol;
    }
};

struct Evaluated {
    Eigen::VectorXd z;  // full normalized decision vector
    double value = kInf;
    bool clean = false;
    double power = kInf;
    double excess = 0.0;  // unweighted residual and cut excess
};

// Search over one configuration in the normalized box [0, 1]^(1 + active).
// Coordinate 0 is u; coordinate 1 + i is the stage cut of active[i].
class ConfigSearch {
public:
    ConfigSearch(const ProblemSpec& spec, const Configuration& config, const SearchSettings& settings)
        : spec_(spec), config_(config), settings_(settings), rng_(configuration_seed(settings.seed, config)) {
        for (int j = 0; j < config.stages(); ++j) {
            if (config.stage_active(j)) active_.push_back(j);
        }
        dim_ = 1 + static_cast<int>(active_.size());
        pairs_ = candidate_pairs();
        weight_ = settings.penalty_weight;
    }

    void coarse() {
        for (std::size_t p = 0; p < pairs_.size() && p < 3; ++p) {
            pair_ = pairs_[p];
            candidates_.clear();
            sample_grid();
            sample_random();
            if (best_.clean) break;
        }
        coarse_power_ = best_.clean ? best_.power : kInf;
    }

    void refine_candidates() {
        for (int attempt = 0; attempt <= settings_.penalty_doublings; ++attempt) {
            weight_ = settings_.penalty_weight * std::pow(2.0, attempt);
            for (auto& c : candidates_) c.value = penalized(c);
            std::sort(candidates_.begin(), candidates_.end(),
                      [](const Evaluated& a, const Evaluated& b) { return a.value < b.value; });
            std::vector<Eigen::VectorXd> chosen;
            const double separation = 0.5 / settings_.grid;
            for (const auto& c : candidates_) {
                if (static_cast<int>(chosen.size()) >= settings_.basins || !std::isfinite(c.value)) break;
                bool distinct = std::all_of(chosen.begin(), chosen.end(), [&](const Eigen::VectorXd& z) {
                    return (free_part(z) - free_part(c.z)).cwiseAbs().maxCoeff() > separation;
                });
                if (distinct) chosen.push_back(c.z);
            }
            for (const auto& z : chosen) refine(z);
            if (best_.clean) break;
        }
    }

    void refine_single(const OperatingPoint& start) {
        const Eigen::VectorXd z = normalize(start);
        pair_ = pairs_.front();
        for (const auto& p : pairs_) {
            pair_ = p;
            warm_ = Eigen::Vector2d(z(p.first), z(p.second));
            if (evaluate(z).clean) break;
        }
        if (!best_.clean) pair_ = pairs_.front();
        refine(z);
    }

    ConfigurationResult result() const {
        ConfigurationResult r;
        r.config = config_;
        r.evaluations = simulations_;
        r.coarse_power = coarse_power_;
        if (!best_.clean) {
            r.status = ConfigStatus::Infeasible;
            r.message = "no point met the product targets";
            return r;
        }
        r.status = ConfigStatus::Optimal;
        r.point = denormalize(best_.z);
        r.power = best_.power;
        return r;
    }

    double coarse_power() const { return coarse_power_; }

private:
    const ProblemSpec& spec_;
    const Configuration& config_;
    const SearchSettings& settings_;
    std::mt19937_64 rng_;
    std::vector<int> active_;
    int dim_ = 1;
    std::vector<std::pair<int, int>> pairs_;
    std::pair<int, int> pair_{0, 1};
    std::vector<Evaluated> candidates_;
    Evaluated best_;
    double coarse_power_ = kInf;
    double weight_ = 1e6;
    long simulations_ = 0;
    Eigen::Vector2d warm_ = Eigen::Vector2d::Constant(0.5);

    double theta_lo() const { return kStageCutMargin; }
    double theta_up() const { return 1.0 - kStageCutMargin; }

    OperatingPoint denormalize(const Eigen::VectorXd& z) const {
        OperatingPoint p;
        const auto& range = spec_.pressure;
        p.u = z(0) >= 1.0 ? range.up : range.lo + z(0) * (range.up - range.lo);
        p.thetas = Eigen::VectorXd::Zero(config_.stages());
        for (std::size_t i = 0; i < active_.size(); ++i) {
            p.thetas(active_[i]) = theta_lo() + z(1 + i) * (theta_up() - theta_lo());
        }
        return p;
    }

    Eigen::VectorXd normalize(const OperatingPoint& p) const {
        Eigen::VectorXd z(dim_);
        const auto& range = spec_.pressure;
        z(0) = range.up > range.lo ? (p.u - range.lo) / (range.up - range.lo) : 0.0;
        for (std::size_t i = 0; i < active_.size(); ++i) {
            z(1 + i) = (p.thetas(active_[i]) - theta_lo()) / (theta_up() - theta_lo());
        }
        return z.cwiseMax(0.0).cwiseMin(1.0);
    }

    std::vector<std::pair<int, int>> candidate_pairs() const {
        const int n = static_cast<int>(active_.size());
        std::vector<std::pair<int, int>> out;
        if (n == 1) {
            out.push_back({0, 1});
            return out;
        }
        int contributor = -1;
        for (int i = 0; i < n; ++i) {
            if (config_.permeate_destination(active_[i]) < 0) {
                contributor = i;
                break;
            }
        }
        if (contributor < 0) contributor = 0;
        const int last = (n - 1 != contributor) ? n - 1 : 0;
        out.push_back({1 + contributor, 1 + last});
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                std::pair<int, int> p{1 + a, 1 + b};
                std::pair<int, int> q{1 + b, 1 + a};
                if (p != out.front() && q != out.front()) out.push_back(p);
            }
        }
        out.push_back({1 + contributor, 0});
        return out;
    }

    std::vector<int> free_indices() const {
        std::vector<int> idx;
        for (int i = 0; i < dim_; ++i) {
            if (i != pair_.first && i != pair_.second) idx.push_back(i);
        }
        return idx;
    }

    Eigen::VectorXd free_part(const Eigen::VectorXd& z) const {
        const auto idx = free_indices();
        Eigen::VectorXd f(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) f(i) = z(idx[i]);
        return f;
    }

    Sample measure(const Eigen::VectorXd& z) {
        Sample s;
        const OperatingPoint p = denormalize(z);
        ++simulations_;
        try {
            const CascadeState st = simulate(spec_, config_, p.u, p.thetas);
            s.simulated = true;
            s.power = power(spec_, st);
            s.residual(0) = st.permeate_fraction - spec_.y_target;
            s.residual(1) = st.permeate_flow * st.permeate_fraction / (spec_.feed_flow * spec_.x_feed) -
                            spec_.recovery;
            if (settings_.p5_cuts) {
                for (const auto& v : check_cuts(st, spec_, true)) s.cut_excess += v.magnitude;
            }
        } catch (const NumericalError&) {
            s.simulated = false;
        }
        return s;
    }

    // Newton solve of the two product residuals in the pair coordinates.
    std::pair<Eigen::VectorXd, Sample> restore(Eigen::VectorXd z) {
        const int a = pair_.first;
        const int b = pair_.second;
        Sample s = measure(z);
        int slow = 0;
        for (int it = 0; it < kRestoreIterations && s.simulated; ++it) {
            if (s.residual.cwiseAbs().maxCoeff() <= kRestoreTolerance) break;
            Eigen::Matrix2d jac;
            bool ok = true;
            for (int c = 0; c < 2 && ok; ++c) {
                const int i = c == 0 ? a : b;
                const double h = z(i) + 1e-7 <= 1.0 ? 1e-7 : -1e-7;
                Eigen::VectorXd zh = z;
                zh(i) += h;
                const Sample sh = measure(zh);
                ok = sh.simulated;
                if (ok) jac.col(c) = (sh.residual - s.residual) / h;
            }
            if (!ok) break;
            const Eigen::FullPivLU<Eigen::Matrix2d> lu(jac);
            if (!lu.isInvertible()) break;
            const Eigen::Vector2d step = -lu.solve(s.residual);
            double lambda = 1.0;
            bool improved = false;
            const double before = s.residual.norm();
            for (int ls = 0; ls < 12; ++ls) {
                Eigen::VectorXd trial = z;
                trial(a) = std::clamp(z(a) + lambda * step(0), 0.0, 1.0);
                trial(b) = std::clamp(z(b) + lambda * step(1), 0.0, 1.0);
                const Sample st = measure(trial);
                if (st.simulated && st.residual.norm() < (1.0 - 1e-4 * lambda) * s.residual.norm()) {
                    z = trial;
                    s = st;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!improved) break;
            // Steps pinned against the box shrink the residual only slowly.
            slow = s.residual.norm() > 0.5 * before ? slow + 1 : 0;
            if (slow >= 3) break;
        }
        return {z, s};
    }

    double penalized(const Evaluated& e) const {
        return std::isfinite(e.power) ? e.power + weight_ * e.excess : kInf;
    }

    double excess(const Sample& s) const {
        const double tol = std::min(settings_.purity_tolerance, settings_.recovery_tolerance);
        double out = s.cut_excess;
        if (!s.meets_targets(tol)) out += s.residual.cwiseAbs().sum();
        return out;
    }

    double penalty_value(const Sample& s) const {
        return s.simulated ? s.power + weight_ * excess(s) : kInf;
    }

    // Restored evaluation at the free coordinates of z, warm-started from the
    // last successful pair values.
    Evaluated evaluate(Eigen::VectorXd z) {
        z(pair_.first) = warm_(0);
        z(pair_.second) = warm_(1);
        auto [zr, s] = restore(z);
        const bool warm_failed = !(s.simulated && s.residual.cwiseAbs().maxCoeff() <= kRestoreTolerance);
        if (warm_failed && (warm_ - Eigen::Vector2d::Constant(0.5)).norm() > 1e-12) {
            Eigen::VectorXd alt = z;
            alt(pair_.first) = 0.5;
            alt(pair_.second) = 0.5;
            auto [zr2, s2] = restore(alt);
            if (penalty_value(s2) < penalty_value(s)) {
                zr = zr2;
                s = s2;
            }
        }
        Evaluated e;
        e.z = zr;
        e.value = penalty_value(s);
        e.power = s.power;
        e.excess = s.simulated ? excess(s) : kInf;
        const double tol = std::min(settings_.purity_tolerance, settings_.recovery_tolerance);
        e.clean = s.meets_targets(tol) && s.cut_excess == 0.0;
        if (e.clean) {
            warm_ = Eigen::Vector2d(zr(pair_.first), zr(pair_.second));
            if (!best_.clean || e.power < best_.power) best_ = e;
        }
        return e;
    }

    void sample_grid() {
        const auto idx = free_indices();
        const int d = static_cast<int>(idx.size());
        const int g = settings_.grid;
        std::vector<int> counter(d, 0);
        Eigen::VectorXd z = Eigen::VectorXd::Constant(dim_, 0.5);
        while (true) {
            for (int i = 0; i < d; ++i) {
                // u grid spans both ends; stage-cut grids use cell centres.
                z(idx[i]) = idx[i] == 0 ? static_cast<double>(counter[i]) / (g - 1)
                                         : (counter[i] + 0.5) / g;
            }
            candidates_.push_back(evaluate(z));
            int i = d - 1;
            while (i >= 0 && ++counter[i] == g) counter[i--] = 0;
            if (i < 0) break;
        }
    }

    void sample_random() {
        const auto idx = free_indices();
        if (idx.empty()) return;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < settings_.starts; ++k) {
            Eigen::VectorXd z = Eigen::VectorXd::Constant(dim_, 0.5);
            for (int i : idx) z(i) = unit(rng_);
            candidates_.push_back(evaluate(z));
        }
    }

    // Box-constrained trust region on a finite-difference quadratic model of
    // the restored power over the free coordinates.
    void refine(const Eigen::VectorXd& start) {
        const auto idx = free_indices();
        const int d = static_cast<int>(idx.size());
        warm_ = Eigen::Vector2d(start(pair_.first), start(pair_.second));
        Evaluated center = evaluate(start);
        if (d == 0 || !std::isfinite(center.value)) return;

        auto at = [&](const Eigen::VectorXd& base, const Eigen::VectorXd& step) {
            Eigen::VectorXd z = base;
            for (int i = 0; i < d; ++i) z(idx[i]) = std::clamp(base(idx[i]) + step(i), 0.0, 1.0);
            return z;
        };
        auto free_of = [&](const Eigen::VectorXd& z) {
            Eigen::VectorXd f(d);
            for (int i = 0; i < d; ++i) f(i) = z(idx[i]);
            return f;
        };

        double radius = 0.1;
        int stalls = 0;
        for (int it = 0; it < settings_.max_refine_iterations && radius > 1e-7; ++it) {
            const Eigen::VectorXd x = free_of(center.z);
            const double h = std::clamp(0.1 * radius, 1e-6, 1e-2);
            // Probe offsets stay inside the box.
            Eigen::VectorXd hp(d), hm(d);
            for (int i = 0; i < d; ++i) {
                hp(i) = std::min(h, 1.0 - x(i));
                hm(i) = std::min(h, x(i));
            }
            const Eigen::Vector2d saved_warm = warm_;
            auto probe = [&](const Eigen::VectorXd& step) {
                warm_ = saved_warm;
                return evaluate(at(center.z, step)).value;
            };
            Eigen::VectorXd grad(d);
            Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
            std::vector<double> fp(d), fm(d);
            bool finite = true;
            for (int i = 0; i < d; ++i) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
                if (hp(i) > 0.0) {
                    e(i) = hp(i);
                    fp[i] = probe(e);
                } else {
                    fp[i] = center.value;
                }
                e(i) = hm(i) > 0.0 ? -hm(i) : 0.0;
                fm[i] = hm(i) > 0.0 ? probe(e) : center.value;
                finite = finite && std::isfinite(fp[i]) && std::isfinite(fm[i]);
                const double span = hp(i) + hm(i);
                if (span <= 0.0) {
                    grad(i) = 0.0;
                    continue;
                }
                grad(i) = (fp[i] - fm[i]) / span;
                if (hp(i) > 0.0 && hm(i) > 0.0) {
                    hess(i, i) = 2.0 * (hp(i) * fm[i] + hm(i) * fp[i] - span * center.value) /
                                 (hp(i) * hm(i) * span);
                }
            }
            if (!finite) {
                radius *= 0.5;
                warm_ = saved_warm;
                continue;
            }
            for (int i = 0; i < d; ++i) {
                for (int j = i + 1; j < d; ++j) {
                    if (hp(i) <= 0.0 || hp(j) <= 0.0) continue;
                    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
                    e(i) = hp(i);
                    e(j) = hp(j);
                    const double fij = probe(e);
                    if (!std::isfinite(fij)) continue;
                    hess(i, j) = hess(j, i) = (fij - fp[i] - fp[j] + center.value) / (hp(i) * hp(j));
                }
            }
            warm_ = saved_warm;

            const Eigen::VectorXd lo = -x;
            const Eigen::VectorXd up = Eigen::VectorXd::Ones(d) - x;
            auto clip = [&](Eigen::VectorXd s) {
                for (int i = 0; i < d; ++i) s(i) = std::clamp(s(i), std::max(lo(i), -radius), std::min(up(i), radius));
                return s;
            };
            auto model = [&](const Eigen::VectorXd& s) { return grad.dot(s) + 0.5 * s.dot(hess * s); };

            std::vector<Eigen::VectorXd> steps;
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
            const double lmin = eig.eigenvalues().minCoeff();
            const double scale = std::max(1e-12, eig.eigenvalues().cwiseAbs().maxCoeff());
            const double shift = lmin > 1e-8 * scale ? 0.0 : -lmin + 1e-3 * scale;
            const Eigen::MatrixXd reg = hess + shift * Eigen::MatrixXd::Identity(d, d);
            steps.push_back(clip(-reg.ldlt().solve(grad)));
            if (grad.cwiseAbs().maxCoeff() > 0.0) {
                steps.push_back(clip(-radius * grad / grad.cwiseAbs().maxCoeff()));
            }
            // Projected variant: drop coordinates pinned at a bound by the gradient.
            Eigen::VectorXd g_free = grad;
            for (int i = 0; i < d; ++i) {
                if ((x(i) <= 0.0 && grad(i) > 0.0) || (x(i) >= 1.0 && grad(i) < 0.0)) g_free(i) = 0.0;
            }
            if (g_free.cwiseAbs().maxCoeff() > 0.0) {
                steps.push_back(clip(-radius * g_free / g_free.cwiseAbs().maxCoeff()));
            }
            Eigen::VectorXd step = steps.front();
            for (const auto& s : steps) {
                if (model(s) < model(step)) step = s;
            }
            const double predicted = -model(step);
            if (!(predicted > 0.0) || step.cwiseAbs().maxCoeff() < 1e-12) {
                radius *= 0.25;
                continue;
            }
            const Evaluated trial = evaluate(at(center.z, step));
            const double actual = center.value - trial.value;
            const double rho = actual / predicted;
            // Off the target manifold the penalized model is poor; any decrease
            // that lands back on it is taken.
            const bool regained = trial.clean && !center.clean;
            if (std::isfinite(trial.value) && actual > 0.0 && (rho > 0.05 || regained)) {
                const double rel = actual / std::max(std::abs(center.value), 1e-300);
                center = trial;
                warm_ = Eigen::Vector2d(center.z(pair_.first), center.z(pair_.second));
                if (rho > 0.75 && step.cwiseAbs().maxCoeff() > 0.9 * radius) radius = std::min(2.0 * radius, 0.5);
                else if (rho < 0.25) radius *= 0.5;
                stalls = rel < settings_.refine_tolerance ? stalls + 1 : 0;
                if (stalls >= 3) break;
            } else {
                radius *= 0.5;
                warm_ = Eigen::Vector2d(center.z(pair_.first), center.z(pair_.second));
            }
        }
    }
};

ConfigurationResult finish(const ProblemSpec& spec, ConfigurationResult r) {
    if (r.status == ConfigStatus::Optimal) {
        // Re-simulating the reported point keeps the stored power consistent with it.
        const CascadeState st = simulate(spec, r.config, r.point.u, r.point.thetas);
        r.power = power(spec, st);
    }
    return r;
}

}  // namespace

void SearchSettings::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (grid < 3) fail("grid resolution must be >= 3");
    if (starts < 0) fail("start count must be >= 0");
    if (basins < 1) fail("basin count must be >= 1");
    if (!(refine_tolerance > 0.0) || !(purity_tolerance > 0.0) || !(recovery_tolerance > 0.0)) {
        fail("tolerances must be > 0");
    }
    if (!(penalty_weight > 0.0)) fail("penalty weight must be > 0");
    if (penalty_doublings < 0) fail("penalty doublings must be >= 0");
    if (!(relative_target > 0.0 && relative_target < 1.0)) fail("relative target must lie in (0, 1)");
    if (!(screen_ratio >= 1.0)) fail("screen ratio must be >= 1");
    if (threads < 0) fail("thread count must be >= 0");
}

int resolve_thread_count(const SearchSettings& settings) {
    if (settings.threads > 0) return settings.threads;
    if (const char* env = std::getenv("MEMCASCADE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

ConfigurationResult solve_configuration(const ProblemSpec& spec, const Configuration& config,
                                        const SearchSettings& settings) {
    settings.validate();
    ConfigSearch search(spec, config, settings);
    search.coarse();
    search.refine_candidates();
    ConfigurationResult r = finish(spec, search.result());
    if (r.status != ConfigStatus::Optimal) {
        throw Infeasible("configuration " + config.encode() + " cannot meet the product targets");
    }
    return r;
}

ConfigurationResult refine_from(const ProblemSpec& spec, const Configuration& config,
                                const SearchSettings& settings, const OperatingPoint& start) {
    settings.validate();
    ConfigSearch search(spec, config, settings);
    search.refine_single(start);
    return finish(spec, search.result());
}

namespace {

template <class Fn>
void parallel_for(int count, int threads, Fn fn) {
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next++; i < count; i = next++) fn(i);
    };
    const int n = std::min(threads, count);
    if (n <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

// Powers this close are refinement noise; a degenerate extra stage with a
// near-zero cut must not beat the same design without it.
constexpr double kPowerTieTolerance = 1e-6;

// Fewer machines, then fewer active stages, then encoding.
bool preferred(const ConfigurationResult& a, const ConfigurationResult& b) {
    if (std::abs(a.power - b.power) > kPowerTieTolerance * std::min(a.power, b.power)) {
        return a.power < b.power;
    }
    const int ma = count_pressure_machines(a.config);
    const int mb = count_pressure_machines(b.config);
    if (ma != mb) return ma < mb;
    const int sa = a.config.active_stage_count();
    const int sb = b.config.active_stage_count();
    if (sa != sb) return sa < sb;
    return a.config.encode() < b.config.encode();
}

}  // namespace

OptimizationReport solve_problem(const ProblemSpec& spec, const SearchSettings& settings,
                                 std::optional<int> machine_limit) {
    const auto t0 = std::chrono::steady_clock::now();
    spec.validate();
    settings.validate();
    require_admissible(spec.mix, spec.pressure);

    std::vector<Configuration> configs;
    for (auto& c : enumerate_configurations(spec.max_stages, machine_limit.has_value())) {
        if (!machine_limit || machine_limit_filter(c, *machine_limit)) configs.push_back(std::move(c));
    }
    const int count = static_cast<int>(configs.size());
    const int threads = resolve_thread_count(settings);

    std::vector<std::unique_ptr<ConfigSearch>> searches(count);
    for (int i = 0; i < count; ++i) searches[i] = std::make_unique<ConfigSearch>(spec, configs[i], settings);
    parallel_for(count, threads, [&](int i) { searches[i]->coarse(); });

    double envelope = kInf;
    for (const auto& s : searches) envelope = std::min(envelope, s->coarse_power());
    std::vector<bool> refine(count, false);
    for (int i = 0; i < count; ++i) {
        refine[i] = std::isfinite(envelope) && searches[i]->coarse_power() <= settings.screen_ratio * envelope;
    }
    parallel_for(count, threads, [&](int i) {
        if (refine[i]) searches[i]->refine_candidates();
    });

    OptimizationReport report;
    report.machine_limit = machine_limit;
    for (int i = 0; i < count; ++i) {
        ConfigurationResult r = finish(spec, searches[i]->result());
        if (!refine[i] && r.status == ConfigStatus::Optimal) {
            r.status = ConfigStatus::Screened;
            r.message = "coarse best above the screening ratio";
        }
        report.evaluations += r.evaluations;
        if (r.status == ConfigStatus::Optimal && (!report.feasible || preferred(r, report.best))) {
            report.best = r;
            report.feasible = true;
        }
        report.configurations.push_back(std::move(r));
    }
    if (!report.feasible) {
        throw AllInfeasible("no configuration with at most " + std::to_string(spec.max_stages) +
                            " stages meets the product targets");
    }
    const auto& best = report.best;
    report.state = simulate(spec, best.config, best.point.u, best.point.thetas);
    report.violations = check_cuts(report.state, spec, settings.p5_cuts);
    report.coverage_gap = (best.coarse_power - best.power) / best.power;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::vector<SweepRow> sweep(const ProblemSpec& spec, const SearchSettings& settings, SweepAxis axis,
                            const std::vector<double>& values, const std::optional<Configuration>& fixed,
                            std::optional<int> machine_limit) {
    std::vector<SweepRow> rows;
    for (double v : values) {
        SweepRow row;
        row.value = v;
        ProblemSpec s = spec;
        try {
            if (axis == SweepAxis::Selectivity) {
                s.mix.selectivity = v;
            } else {
                s.pressure.up = pressure_variable(s.mix.phase, v);
            }
            require_admissible(s.mix, s.pressure);
            ConfigurationResult best;
            if (fixed) {
                best = solve_configuration(s, *fixed, settings);
            } else {
                best = solve_problem(s, settings, machine_limit).best;
            }
            row.feasible = true;
            row.power = best.power;
            row.u = pressure_display(s.mix.phase, best.point.u);
            row.configuration = best.config.encode();
        } catch (const std::exception& e) {
            row.message = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace memcascade
