#include "memcascade/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "memcascade/errors.hpp"

namespace memcascade {

double ProblemSpec::permeate_flow() const { return recovery * feed_flow * x_feed / y_target; }

double ProblemSpec::retentate_flow() const { return feed_flow - permeate_flow(); }

double ProblemSpec::x_retentate() const {
    return (feed_flow * x_feed - permeate_flow() * y_target) / retentate_flow();
}

void ProblemSpec::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    mix.validate();
    if (max_stages < 2 || max_stages > 6) fail("max_stages must lie in [2, 6]");
    if (!(feed_flow > 0.0)) fail("feed flow must be > 0");
    if (!(x_feed > 0.0 && x_feed < 1.0)) fail("feed fraction must lie in (0, 1)");
    if (!(y_target > x_feed && y_target < 1.0)) fail("permeate purity must lie in (x_feed, 1)");
    if (!(recovery > 0.0 && recovery < 1.0)) fail("recovery must lie in (0, 1)");
    if (!(retentate_flow() > 0.0)) fail("targets leave no retentate product");
    const double x_out = x_retentate();
    if (!(x_out > 0.0 && x_out < x_feed)) fail("targets imply a retentate fraction outside (0, x_feed)");
    if (!(pressure.lo > 0.0 && pressure.up >= pressure.lo)) fail("pressure range must satisfy 0 < lo <= up");
    for (double eta : {eta_comp, eta_pump, eta_tc}) {
        if (!(eta > 0.0 && eta <= 1.0)) fail("efficiencies must lie in (0, 1]");
    }
}

int Configuration::active_stage_count() const {
    return static_cast<int>(std::count_if(permeate.begin(), permeate.end(),
                                          [](PermeateRoute r) { return r != PermeateRoute::Inactive; }));
}

int Configuration::retentate_destination(int j) const {
    const int n = stages();
    if (j <= n - 3) return j + 1;
    if (j == n - 2) return retentate == RetentateRoute::ToStageN ? n - 1 : -1;
    return -1;
}

int Configuration::permeate_destination(int j) const {
    switch (permeate[j]) {
        case PermeateRoute::Recy1: return j - 1;
        case PermeateRoute::Recy2: return j - 2;
        default: return -1;
    }
}

bool Configuration::legal(bool allow_inactive) const {
    const int n = stages();
    if (n < 2 || feed_stage < 0 || feed_stage >= n) return false;
    for (int j = 0; j < n; ++j) {
        switch (permeate[j]) {
            case PermeateRoute::Bypass:
                if (j > 1) return false;
                break;
            case PermeateRoute::Recy1:
                if (j < 1) return false;
                break;
            case PermeateRoute::Recy2:
                if (j < 2) return false;
                break;
            case PermeateRoute::Inactive:
                if (!allow_inactive) return false;
                break;
        }
    }
    return true;
}

std::string Configuration::encode() const {
    std::string out = "F" + std::to_string(feed_stage + 1) + "|";
    for (int j = 0; j < stages(); ++j) {
        if (j > 0) out += ',';
        switch (permeate[j]) {
            case PermeateRoute::Bypass: out += 'B'; break;
            case PermeateRoute::Recy1: out += "R1"; break;
            case PermeateRoute::Recy2: out += "R2"; break;
            case PermeateRoute::Inactive: out += '-'; break;
        }
    }
    out += retentate == RetentateRoute::ToStageN ? "|N" : "|P";
    return out;
}

Configuration Configuration::decode(const std::string& text) {
    auto bad = [&text]() { return std::invalid_argument("malformed configuration '" + text + "'"); };
    const auto first = text.find('|');
    const auto last = text.rfind('|');
    if (first == std::string::npos || first == last || text.empty() || text[0] != 'F') throw bad();
    Configuration c;
    try {
        c.feed_stage = std::stoi(text.substr(1, first - 1)) - 1;
    } catch (const std::exception&) {
        throw bad();
    }
    std::stringstream routes(text.substr(first + 1, last - first - 1));
    std::string token;
    while (std::getline(routes, token, ',')) {
        if (token == "B") c.permeate.push_back(PermeateRoute::Bypass);
        else if (token == "R1") c.permeate.push_back(PermeateRoute::Recy1);
        else if (token == "R2") c.permeate.push_back(PermeateRoute::Recy2);
        else if (token == "-") c.permeate.push_back(PermeateRoute::Inactive);
        else throw bad();
    }
    const std::string tail = text.substr(last + 1);
    if (tail == "N") c.retentate = RetentateRoute::ToStageN;
    else if (tail == "P") c.retentate = RetentateRoute::ToProduct;
    else throw bad();
    if (!c.legal(true)) throw bad();
    return c;
}

std::vector<bool> reachable_stages(const Configuration& config) {
    const int n = config.stages();
    std::vector<bool> seen(n, false);
    std::vector<int> stack{config.feed_stage};
    seen[config.feed_stage] = true;
    while (!stack.empty()) {
        const int j = stack.back();
        stack.pop_back();
        for (int next : {config.retentate_destination(j), config.permeate_destination(j)}) {
            if (next >= 0 && !seen[next]) {
                seen[next] = true;
                stack.push_back(next);
            }
        }
    }
    return seen;
}

std::optional<Configuration> canonicalize(const Configuration& config) {
    Configuration c = config;
    const int n = c.stages();
    const auto reach = reachable_stages(c);
    for (int j = 0; j < n; ++j) {
        if (!reach[j]) c.permeate[j] = PermeateRoute::Inactive;
    }
    // The N-1 retentate choice is moot when stage N-1 sees no flow.
    if (!reach[n - 2]) c.retentate = RetentateRoute::ToProduct;

    bool permeate_product = false;
    bool retentate_product = false;
    for (int j = 0; j < n; ++j) {
        if (!reach[j]) continue;
        if (c.stage_active(j) && c.permeate_destination(j) < 0) permeate_product = true;
        if (c.retentate_destination(j) < 0) retentate_product = true;
    }
    if (!permeate_product || !retentate_product) return std::nullopt;
    return c;
}

namespace {

std::vector<PermeateRoute> route_domain(int j, bool allow_inactive) {
    std::vector<PermeateRoute> d;
    if (j <= 1) d.push_back(PermeateRoute::Bypass);
    if (j >= 1) d.push_back(PermeateRoute::Recy1);
    if (j >= 2) d.push_back(PermeateRoute::Recy2);
    if (allow_inactive) d.push_back(PermeateRoute::Inactive);
    return d;
}

}  // namespace

long raw_configuration_count(int n) {
    long count = n * 2L;
    for (int j = 0; j < n; ++j) count *= static_cast<long>(route_domain(j, false).size());
    return count;
}

std::vector<Configuration> enumerate_configurations(int n, bool allow_inactive) {
    if (n < 2 || n > 6) throw std::invalid_argument("stage count must lie in [2, 6]");
    std::vector<std::vector<PermeateRoute>> domains;
    for (int j = 0; j < n; ++j) domains.push_back(route_domain(j, allow_inactive));

    std::set<std::string> seen;
    std::vector<Configuration> out;
    std::vector<std::size_t> index(n, 0);
    Configuration c;
    c.permeate.resize(n);
    while (true) {
        for (int j = 0; j < n; ++j) c.permeate[j] = domains[j][index[j]];
        for (int feed = 0; feed < n; ++feed) {
            for (auto ret : {RetentateRoute::ToStageN, RetentateRoute::ToProduct}) {
                c.feed_stage = feed;
                c.retentate = ret;
                if (c.permeate[feed] == PermeateRoute::Inactive) continue;
                auto canon = canonicalize(c);
                if (canon && seen.insert(canon->encode()).second) out.push_back(*canon);
            }
        }
        int j = 0;
        while (j < n && ++index[j] == domains[j].size()) index[j++] = 0;
        if (j == n) break;
    }
    std::sort(out.begin(), out.end(),
              [](const Configuration& a, const Configuration& b) { return a.encode() < b.encode(); });
    return out;
}

int count_pressure_machines(const Configuration& config) {
    int count = 0;
    for (int j = 0; j < config.stages(); ++j) {
        const auto r = config.permeate[j];
        if (r == PermeateRoute::Recy1 || r == PermeateRoute::Recy2) ++count;
        if (j >= 1 && r == PermeateRoute::Recy2 && config.permeate[j - 1] == PermeateRoute::Recy1) --count;
    }
    return count;
}

int CascadeState::active_stage_count() const {
    return static_cast<int>(std::count_if(stages.begin(), stages.end(), [](const StageState& s) {
        return s.has_flow && s.perm.theta > 0.0;
    }));
}

double CascadeState::balance_residual(const ProblemSpec& spec, const Configuration& config) const {
    const int n = static_cast<int>(stages.size());
    Eigen::VectorXd flow = Eigen::VectorXd::Zero(n + 2);  // mixers, then P and R
    Eigen::VectorXd comp = Eigen::VectorXd::Zero(n + 2);
    flow(config.feed_stage) += spec.feed_flow;
    comp(config.feed_stage) += spec.feed_flow * spec.x_feed;
    for (int j = 0; j < n; ++j) {
        const auto& s = stages[j];
        const int dr = config.retentate_destination(j);
        const int dp = config.permeate_destination(j);
        const int ret = dr >= 0 ? dr : n + 1;
        const int per = dp >= 0 ? dp : n;
        flow(ret) += s.f_out;
        comp(ret) += s.f_out * s.perm.x_out;
        flow(per) += s.f_per;
        comp(per) += s.f_per * s.perm.y_per;
        flow(j) -= s.f_in;
        comp(j) -= s.f_in * s.perm.x_in;
    }
    flow(n) -= permeate_flow;
    comp(n) -= permeate_flow * permeate_fraction;
    flow(n + 1) -= retentate_flow;
    comp(n + 1) -= retentate_flow * retentate_fraction;
    double worst = std::max(flow.cwiseAbs().maxCoeff(), comp.cwiseAbs().maxCoeff());
    for (const auto& s : stages) {
        worst = std::max(worst, std::abs(s.f_in - s.f_out - s.f_per));
        worst = std::max(worst, s.f_in * s.perm.balance_residual());
    }
    return worst / spec.feed_flow;
}

namespace {

struct Inflow {
    int source;
    bool permeate;
};

}  // namespace

CascadeState simulate(const ProblemSpec& spec, const Configuration& config, double u,
                      const Eigen::VectorXd& thetas) {
    const int n = config.stages();
    if (thetas.size() != n) throw std::invalid_argument("one stage cut per stage required");
    for (int j = 0; j < n; ++j) {
        const double t = thetas(j);
        if (!(t >= 0.0) || t > 1.0 - kStageCutMargin + 1e-12) {
            throw std::invalid_argument("stage cut outside [0, 1 - 1e-3] at stage " + std::to_string(j + 1));
        }
        if (!config.stage_active(j) && t != 0.0) {
            throw std::invalid_argument("inactive stage " + std::to_string(j + 1) + " needs a zero stage cut");
        }
    }
    const double k = compute_k(spec.mix, u);
    const double s = spec.mix.selectivity;
    const double feed = spec.feed_flow;

    // Flows: f = A f + b with A(dest, src) the split fraction routed there.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(config.feed_stage) = feed;
    std::vector<std::vector<Inflow>> inflows(n);
    for (int j = 0; j < n; ++j) {
        const int dr = config.retentate_destination(j);
        const int dp = config.permeate_destination(j);
        if (dr >= 0) {
            a(dr, j) += 1.0 - thetas(j);
            inflows[dr].push_back({j, false});
        }
        if (dp >= 0 && thetas(j) > 0.0) {
            a(dp, j) += thetas(j);
            inflows[dp].push_back({j, true});
        }
    }
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - a;
    Eigen::VectorXd f_in = system.partialPivLu().solve(b);
    const double cap = kFlowCapFactor * feed;
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(f_in(j)) || f_in(j) > cap || f_in(j) < -1e-9 * feed) {
            throw RecycleDivergence("stage " + std::to_string(j + 1) + " inlet flow exceeds the cap",
                                    "M" + std::to_string(j + 1));
        }
        f_in(j) = std::max(f_in(j), 0.0);
    }

    CascadeState st;
    st.u = u;
    st.stages.resize(n);
    for (int j = 0; j < n; ++j) {
        auto& sj = st.stages[j];
        sj.has_flow = f_in(j) > 1e-12 * feed;
        sj.f_in = sj.has_flow ? f_in(j) : 0.0;
        sj.f_per = thetas(j) * sj.f_in;
        sj.f_out = sj.f_in - sj.f_per;
    }

    // Tear streams: permeates recycled to a stage that is swept earlier.
    std::vector<int> tears;
    for (int j = 0; j < n; ++j) {
        if (config.permeate_destination(j) >= 0 && st.stages[j].f_per > 0.0) tears.push_back(j);
    }
    const int m = static_cast<int>(tears.size());
    Eigen::VectorXd y_per = Eigen::VectorXd::Constant(n, spec.x_feed);
    std::vector<double> x_out(n, spec.x_feed);

    auto sweep = [&](const Eigen::VectorXd& tear_values) {
        // Recycled permeate always comes from a later stage, so it is read from the tears.
        Eigen::VectorXd recycled = y_per;
        for (int i = 0; i < m; ++i) recycled(tears[i]) = tear_values(i);
        for (int j = 0; j < n; ++j) {
            auto& sj = st.stages[j];
            if (!sj.has_flow) continue;
            double moles = (j == config.feed_stage) ? feed * spec.x_feed : 0.0;
            for (const auto& in : inflows[j]) {
                const auto& src = st.stages[in.source];
                moles += in.permeate ? src.f_per * recycled(in.source) : src.f_out * x_out[in.source];
            }
            const double x_in = std::clamp(moles / sj.f_in, 0.0, 1.0);
            sj.perm = crossflow_solve_k(k, s, x_in, thetas(j));
            x_out[j] = sj.perm.x_out;
            y_per(j) = sj.perm.y_per;
        }
        Eigen::VectorXd out(m);
        for (int i = 0; i < m; ++i) out(i) = y_per(tears[i]);
        return out;
    };

    Eigen::VectorXd t(m);
    for (int i = 0; i < m; ++i) t(i) = spec.x_feed;
    Eigen::VectorXd g = sweep(t);
    int sweeps = 1;
    Eigen::VectorXd t_prev = t;
    Eigen::VectorXd g_prev = g;
    bool converged = m == 0;
    while (!converged) {
        const double change = ((g - t).array().abs() / g.array().abs().max(1e-300)).maxCoeff();
        if (change <= kRecycleTolerance) {
            converged = true;
            break;
        }
        if (sweeps >= kMaxSweeps) break;
        Eigen::VectorXd next = g;
        if (sweeps >= 2) {
            for (int i = 0; i < m; ++i) {
                const double dt = t(i) - t_prev(i);
                if (std::abs(dt) > 1e-300) {
                    const double slope = (g(i) - g_prev(i)) / dt;
                    double q = slope / (slope - 1.0);
                    if (!std::isfinite(q)) q = 0.0;
                    q = std::clamp(q, -5.0, 0.0);
                    next(i) = q * t(i) + (1.0 - q) * g(i);
                }
            }
        }
        next = next.cwiseMax(0.0).cwiseMin(1.0);
        t_prev = t;
        g_prev = g;
        t = next;
        g = sweep(t);
        ++sweeps;
    }
    if (!converged) {
        std::string arc = "S" + std::to_string(tears.front() + 1);
        throw RecycleDivergence("recycle compositions did not settle in " + std::to_string(kMaxSweeps) +
                                    " sweeps",
                                arc);
    }
    st.sweeps = sweeps;

    // Stages without flow still report a consistent bypass state.
    for (int j = 0; j < n; ++j) {
        auto& sj = st.stages[j];
        if (!sj.has_flow) sj.perm = crossflow_solve_k(k, s, spec.x_feed, 0.0);
    }

    st.f_feed = Eigen::VectorXd::Zero(n);
    st.f_recy1 = Eigen::VectorXd::Zero(n);
    st.f_recy2 = Eigen::VectorXd::Zero(n);
    st.f_per_bypass = Eigen::VectorXd::Zero(n);
    st.f_out_bypass = Eigen::VectorXd::Zero(n);
    st.f_out_next = Eigen::VectorXd::Zero(n);
    st.f_feed(config.feed_stage) = feed;
    double p_moles = 0.0;
    double r_moles = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto& sj = st.stages[j];
        switch (config.permeate[j]) {
            case PermeateRoute::Recy1: st.f_recy1(j) = sj.f_per; break;
            case PermeateRoute::Recy2: st.f_recy2(j) = sj.f_per; break;
            default: st.f_per_bypass(j) = sj.f_per; break;
        }
        if (config.permeate_destination(j) < 0) p_moles += sj.f_per * sj.perm.y_per;
        if (config.retentate_destination(j) < 0) {
            st.f_out_bypass(j) = sj.f_out;
            r_moles += sj.f_out * sj.perm.x_out;
        } else {
            st.f_out_next(j) = sj.f_out;
        }
    }
    st.permeate_flow = st.f_per_bypass.sum();
    st.retentate_flow = st.f_out_bypass.sum();
    st.permeate_fraction = st.permeate_flow > 0.0 ? p_moles / st.permeate_flow : 0.0;
    st.retentate_fraction = st.retentate_flow > 0.0 ? r_moles / st.retentate_flow : 0.0;
    return st;
}

Eigen::VectorXd objective_coefficients(const ProblemSpec& spec, const CascadeState& state) {
    const int n = static_cast<int>(state.stages.size());
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n + 2);
    const auto& mix = spec.mix;
    if (mix.phase == Phase::Gas) {
        const double c = kGasConstant * mix.temperature / spec.eta_comp;
        d.segment(1, n).setConstant(c);
        return d;
    }
    auto volume = [&mix](double x) { return mix.molar_volume_a * x + mix.molar_volume_b * (1.0 - x); };
    d(0) = volume(spec.x_feed) * spec.feed_flow / spec.eta_pump;
    for (int j = 1; j < n; ++j) d(j + 1) = volume(state.stages[j].perm.y_per) / spec.eta_pump;
    d(n + 1) = -volume(state.retentate_fraction) * spec.eta_tc / spec.eta_pump;
    return d;
}

double power(const ProblemSpec& spec, const CascadeState& state) {
    const int n = static_cast<int>(state.stages.size());
    const Eigen::VectorXd d = objective_coefficients(spec, state);
    // Flows paired with D: [1, F_per, recycle_2..recycle_N, F_out].
    Eigen::VectorXd flows(n + 2);
    flows(0) = 1.0;
    flows(1) = state.permeate_flow;
    for (int j = 1; j < n; ++j) flows(j + 1) = state.f_recy1(j) + state.f_recy2(j);
    flows(n + 1) = state.retentate_flow;
    return state.u * d.dot(flows);
}

}  // namespace memcascade
