#include "mfabc/kuramoto.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>
#include <nlohmann/json.hpp>

#include "mean_field.hpp"

namespace mfabc::kuramoto {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

Params Params::from_vector(const ParameterVector& theta)
{
    if (theta.size() != 3) throw std::invalid_argument("Kuramoto parameters are (K, omega0, gamma)");
    return {theta[0], theta[1], theta[2]};
}

void Params::validate() const
{
    if (!std::isfinite(K) || !std::isfinite(omega0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("Kuramoto parameters must be finite");
    }
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}

void Config::validate() const
{
    if (oscillators < 2) throw std::invalid_argument("need at least two oscillators");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (grid_points < 2) throw std::invalid_argument("need at least two grid points");
    if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("solver tolerances must be positive");
    if (max_rhs_evaluations == 0) throw std::invalid_argument("evaluation budget must be positive");
}

std::vector<double> Config::grid() const
{
    std::vector<double> t(grid_points);
    const double n = static_cast<double>(grid_points - 1);
    for (std::size_t k = 0; k < grid_points; ++k) t[k] = t_end * (static_cast<double>(k) / n);
    t.back() = t_end;
    return t;
}

std::vector<double> draw_velocities(const Params& p, std::size_t m, Rng& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> omega(m);
    for (auto& w : omega) w = p.omega0 + p.gamma * std::tan(std::numbers::pi * (unif(rng) - 0.5));
    return omega;
}

namespace {

struct BudgetExceeded {};

// Writes cos/sin of phi into the scratch arrays and returns the mean field.
std::pair<double, double> mean_field(const State& phi, std::vector<double>& c, std::vector<double>& s)
{
    double zr = 0.0;
    double zi = 0.0;
    detail::mean_field_sums(phi.data(), c.data(), s.data(), phi.size(), zr, zi);
    const double m = static_cast<double>(phi.size());
    return {zr / m, zi / m};
}

struct NetworkSystem {
    const std::vector<double>* omega;
    double K;
    std::vector<double>* c;
    std::vector<double>* s;
    std::size_t* evaluations;
    std::size_t budget;

    void operator()(const State& phi, State& dphi, double /*t*/) const
    {
        if (++*evaluations > budget) throw BudgetExceeded{};
        const auto [zr, zi] = mean_field(phi, *c, *s);
        const auto& w = *omega;
        for (std::size_t i = 0; i < phi.size(); ++i) dphi[i] = w[i] + K * (zi * (*c)[i] - zr * (*s)[i]);
    }
};

template <class System, class Observe>
bool integrate_on_grid(System system, State x, const Config& c, const std::vector<double>& grid,
                       Observe observe)
{
    auto stepper = odeint::make_dense_output(c.atol, c.rtol, odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_times(stepper, system, x, grid.begin(), grid.end(), grid[1] - grid[0], observe);
    } catch (const BudgetExceeded&) {
        return false;
    } catch (const odeint::step_adjustment_error&) {
        return false;
    }
    return true;
}

bool all_finite(const Trajectory& tr)
{
    return std::all_of(tr.R.begin(), tr.R.end(), [](double v) { return std::isfinite(v); }) &&
           std::all_of(tr.Phi.begin(), tr.Phi.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

void network_rhs(const std::vector<double>& omega, double K, const std::vector<double>& phi,
                 std::vector<double>& dphi)
{
    std::vector<double> c(phi.size());
    std::vector<double> s(phi.size());
    std::size_t evaluations = 0;
    dphi.resize(phi.size());
    NetworkSystem{&omega, K, &c, &s, &evaluations, 1}(phi, dphi, 0.0);
}

Trajectory simulate_network(const Params& p, const Config& c, Rng& rng)
{
    p.validate();
    c.validate();
    const std::size_t m = c.oscillators;
    const std::vector<double> omega = draw_velocities(p, m, rng);

    Trajectory tr;
    tr.t = c.grid();
    tr.R.reserve(c.grid_points);
    tr.Phi.reserve(c.grid_points);
    std::vector<double> cs(m);
    std::vector<double> sn(m);
    NetworkSystem system{&omega, p.K, &cs, &sn, &tr.rhs_evaluations, c.max_rhs_evaluations};
    std::vector<double> oc(m);
    std::vector<double> os(m);
    const auto observe = [&](const State& phi, double) {
        const auto [zr, zi] = mean_field(phi, oc, os);
        tr.R.push_back(std::min(1.0, std::hypot(zr, zi)));
        tr.Phi.push_back(std::atan2(zi, zr));
    };
    const bool ok = integrate_on_grid(system, State(m, 0.0), c, tr.t, observe);
    tr.failed = !ok || tr.R.size() != c.grid_points || !all_finite(tr);
    return tr;
}

Trajectory simulate_reduced(const Params& p, const Config& c)
{
    p.validate();
    c.validate();
    Trajectory tr;
    tr.t = c.grid();
    tr.R.reserve(c.grid_points);
    tr.Phi.reserve(c.grid_points);
    const double growth = 0.5 * p.K - p.gamma;
    const double cubic = 0.5 * p.K;
    const double omega0 = p.omega0;
    std::size_t* evaluations = &tr.rhs_evaluations;
    const std::size_t budget = c.max_rhs_evaluations;
    const auto system = [=](const State& x, State& dx, double) {
        if (++*evaluations > budget) throw BudgetExceeded{};
        dx[0] = growth * x[0] - cubic * x[0] * x[0] * x[0];
        dx[1] = omega0;
    };
    const auto observe = [&](const State& x, double) {
        tr.R.push_back(x[0]);
        tr.Phi.push_back(x[1]);
    };
    const bool ok = integrate_on_grid(system, State{1.0, 0.0}, c, tr.t, observe);
    tr.failed = !ok || tr.R.size() != c.grid_points || !all_finite(tr);
    return tr;
}

void unwrap(std::vector<double>& phase)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double offset = 0.0;
    for (std::size_t k = 1; k < phase.size(); ++k) {
        const double raw = phase[k] + offset;
        const double jump = raw - phase[k - 1];
        if (std::abs(jump) > std::numbers::pi) offset -= two_pi * std::round(jump / two_pi);
        phase[k] += offset;
    }
}

SummaryVector summarize(const std::vector<double>& t, const std::vector<double>& R,
                        std::vector<double> Phi, double t_half)
{
    const std::size_t n = t.size();
    if (n < 2 || R.size() != n || Phi.size() != n) {
        throw std::invalid_argument("trajectory arrays must share a grid of at least two points");
    }
    if (!(t_half >= t.front() && t_half <= t.back())) {
        throw std::invalid_argument("t_half lies outside the trajectory grid");
    }
    double integral = 0.0;
    for (std::size_t k = 1; k < n; ++k) integral += 0.5 * (R[k] + R[k - 1]) * (t[k] - t[k - 1]);
    const double span = t.back() - t.front();
    const double mean_r = integral / span;

    unwrap(Phi);
    const double velocity = (Phi.back() - Phi.front()) / span;

    const auto hi = std::lower_bound(t.begin(), t.end(), t_half);
    double at_half = 0.0;
    if (*hi == t_half) {
        at_half = R[static_cast<std::size_t>(hi - t.begin())];
    } else {
        const std::size_t k = static_cast<std::size_t>(hi - t.begin());
        const double f = (t_half - t[k - 1]) / (t[k] - t[k - 1]);
        at_half = R[k - 1] + f * (R[k] - R[k - 1]);
    }
    return {mean_r * mean_r, velocity, at_half};
}

double distance(const SummaryVector& a, const SummaryVector& b)
{
    if (a.size() != 3 || b.size() != 3) throw std::invalid_argument("Kuramoto summaries have length 3");
    const double d1 = a[0] - b[0];
    const double d2 = a[1] - b[1];
    const double d3 = a[2] - b[2];
    return std::sqrt(4.0 * d1 * d1 + d2 * d2 + d3 * d3);
}

double half_time(const Trajectory& traj)
{
    const auto s = summarize(traj.t, traj.R, traj.Phi, traj.t.front());
    const double target = 0.5 * (1.0 + std::sqrt(s[0]));
    for (std::size_t k = 1; k < traj.t.size(); ++k) {
        if (traj.R[k] <= target) return traj.t[k];
    }
    throw std::runtime_error("order parameter never reaches the half-way level; try a different data seed");
}

std::string ObservedData::to_json() const
{
    nlohmann::ordered_json j;
    j["s1"] = summary.at(0);
    j["s2"] = summary.at(1);
    j["s3"] = summary.at(2);
    j["t_half"] = t_half;
    j["seed"] = seed;
    j["true_params"] = {{"K", true_params.K}, {"omega0", true_params.omega0}, {"gamma", true_params.gamma}};
    return j.dump(2) + "\n";
}

ObservedData ObservedData::from_json(const std::string& text)
{
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, _] : j.items()) {
        if (key != "s1" && key != "s2" && key != "s3" && key != "t_half" && key != "seed" &&
            key != "true_params") {
            throw std::invalid_argument("unknown key in observed data: " + key);
        }
    }
    ObservedData d;
    d.summary = {j.at("s1").get<double>(), j.at("s2").get<double>(), j.at("s3").get<double>()};
    d.t_half = j.at("t_half").get<double>();
    d.seed = j.at("seed").get<std::uint64_t>();
    const auto& tp = j.at("true_params");
    d.true_params = {tp.at("K").get<double>(), tp.at("omega0").get<double>(), tp.at("gamma").get<double>()};
    if (!(d.t_half > 0.0)) throw std::invalid_argument("t_half must be positive");
    return d;
}

ObservedData generate_observed(const Config& c, const Params& truth, std::uint64_t seed)
{
    Rng rng = substream(seed, 0, 0, Stream::data);
    const Trajectory tr = simulate_network(truth, c, rng);
    if (tr.failed) throw std::runtime_error("observed-data simulation failed; try a different data seed");
    ObservedData d;
    d.t_half = half_time(tr);
    d.summary = summarize(tr.t, tr.R, tr.Phi, d.t_half);
    d.seed = seed;
    d.true_params = truth;
    return d;
}

Model::Model(Config config, double t_half) : config_(config), t_half_(t_half)
{
    config_.validate();
    if (!(t_half > 0.0 && t_half <= config_.t_end)) throw std::invalid_argument("t_half must lie in (0, t_end]");
}

namespace {

SimulationOutput to_output(const Trajectory& tr, double t_half, double components)
{
    SimulationOutput out;
    out.work = kCostPerComponentEvaluation * components *
               static_cast<double>(tr.rhs_evaluations + tr.R.size());
    out.failed = tr.failed;
    if (!tr.failed) out.summary = summarize(tr.t, tr.R, tr.Phi, t_half);
    return out;
}

}  // namespace

SimulationOutput Model::simulate_lo(const ParameterVector& theta, Rng& /*rng*/) const
{
    const Params p = Params::from_vector(theta);
    if (!(p.gamma > 0.0)) return {{}, 0.0, true};
    return to_output(simulate_reduced(p, config_), t_half_, 2.0);
}

SimulationOutput Model::simulate_hi(const ParameterVector& theta, const SummaryVector* /*lo*/,
                                    Rng& rng) const
{
    const Params p = Params::from_vector(theta);
    if (!(p.gamma > 0.0)) return {{}, 0.0, true};
    return to_output(simulate_network(p, config_, rng), t_half_,
                     static_cast<double>(config_.oscillators));
}

double Model::distance(const SummaryVector& a, const SummaryVector& b) const
{
    return kuramoto::distance(a, b);
}

}  // namespace mfabc::kuramoto
