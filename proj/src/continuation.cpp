#include "mfabc/continuation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace mfabc {

void EfficiencyCoefficients::validate() const
{
    for (double v : {z, w, w_fp, w_fn, t_lo, t_hi_p, t_hi_n}) {
        if (!std::isfinite(v)) throw std::invalid_argument("efficiency coefficients must be finite");
    }
    if (w_fp < 0.0 || w_fn < 0.0 || t_lo < 0.0 || t_hi_p < 0.0 || t_hi_n < 0.0) {
        throw std::invalid_argument("false-positive/negative rates and times must be non-negative");
    }
}

void EtaBounds::validate() const
{
    if (!(rho1 > 0.0 && rho1 < 1.0) || !(rho2 > 0.0 && rho2 < 1.0)) {
        throw std::invalid_argument("continuation lower bounds must lie in (0, 1)");
    }
}

double phi(const EfficiencyCoefficients& c, double eta1, double eta2)
{
    if (!(eta1 > 0.0) || !(eta2 > 0.0)) {
        throw std::invalid_argument("continuation probabilities must be positive");
    }
    const double weight_term = c.w + (1.0 / eta1 - 1.0) * c.w_fp + (1.0 / eta2 - 1.0) * c.w_fn;
    const double time_term = c.t_lo + eta1 * c.t_hi_p + eta2 * c.t_hi_n;
    return weight_term * time_term;
}

double theoretical_efficiency(const EfficiencyCoefficients& c, double eta1, double eta2)
{
    return c.z * c.z / phi(c, eta1, eta2);
}

std::optional<UnconstrainedOptimum> unconstrained_optimum(const EfficiencyCoefficients& c)
{
    const double excess = c.w - c.w_fp - c.w_fn;
    if (!(excess > 0.0)) return std::nullopt;
    UnconstrainedOptimum opt;
    opt.eta1 = std::sqrt(c.t_lo / excess * (c.w_fp / c.t_hi_p));
    opt.eta2 = std::sqrt(c.t_lo / excess * (c.w_fn / c.t_hi_n));
    const double root = std::sqrt(excess * c.t_lo) + std::sqrt(c.w_fp * c.t_hi_p) +
                        std::sqrt(c.w_fn * c.t_hi_n);
    opt.phi = root * root;
    return opt;
}

namespace {

// Minimises (a + b/eta)(c + d eta) over [rho, 1], given b, c >= 0.
double edge_minimiser(double a, double b, double c, double d, double rho)
{
    const double ad = a * d;
    const double bc = b * c;
    if (ad > 0.0 && bc > 0.0) return std::clamp(std::sqrt(c / a * (b / d)), rho, 1.0);
    if (bc > 0.0) return 1.0;  // decreasing in eta
    if (ad > 0.0) return rho;  // increasing in eta
    return 1.0;                // constant
}

}  // namespace

double boundary_eta(const EfficiencyCoefficients& c, const EtaBounds& bounds, EtaComponent which,
                    double x)
{
    if (!(x > 0.0)) throw std::invalid_argument("boundary coordinate must be positive");
    if (which == EtaComponent::first) {
        const double a = c.w - c.w_fp - (1.0 - 1.0 / x) * c.w_fn;
        return edge_minimiser(a, c.w_fp, c.t_lo + c.t_hi_n * x, c.t_hi_p, bounds.rho1);
    }
    const double a = c.w - (1.0 - 1.0 / x) * c.w_fp - c.w_fn;
    return edge_minimiser(a, c.w_fn, c.t_lo + c.t_hi_p * x, c.t_hi_n, bounds.rho2);
}

OptimalContinuation optimal_continuation(const EfficiencyCoefficients& c, const EtaBounds& bounds)
{
    bounds.validate();
    if (auto opt = unconstrained_optimum(c)) {
        const bool inside = std::isfinite(opt->eta1) && std::isfinite(opt->eta2) &&
                            opt->eta1 >= bounds.rho1 && opt->eta1 <= 1.0 &&
                            opt->eta2 >= bounds.rho2 && opt->eta2 <= 1.0;
        if (inside) return {{opt->eta1, opt->eta2}, opt->phi, true};
    }

    const std::array<ContinuationPolicy, 4> candidates{{
        {1.0, boundary_eta(c, bounds, EtaComponent::second, 1.0)},
        {boundary_eta(c, bounds, EtaComponent::first, 1.0), 1.0},
        {bounds.rho1, boundary_eta(c, bounds, EtaComponent::second, bounds.rho1)},
        {boundary_eta(c, bounds, EtaComponent::first, bounds.rho2), bounds.rho2},
    }};
    OptimalContinuation best{candidates[0], phi(c, candidates[0].eta1, candidates[0].eta2), false};
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& p = candidates[i];
        const double value = phi(c, p.eta1, p.eta2);
        const bool larger = std::pair(p.eta1, p.eta2) > std::pair(best.policy.eta1, best.policy.eta2);
        if (value < best.phi || (value == best.phi && larger)) best = {p, value, false};
    }
    return best;
}

CoefficientEstimator::CoefficientEstimator(const ParticleCache& cache, const UniformPrior& prior,
                                           const ImportanceDistribution& q_star, double q_floor)
    : cache_epsilon_(cache.epsilon)
{
    if (cache.entries.empty()) throw std::invalid_argument("cannot estimate coefficients from an empty cache");
    terms_.reserve(cache.entries.size());
    for (const auto& e : cache.entries) {
        const double pi = prior.density(e.theta);
        double qs = q_star.density(e.theta);
        if (pi > 0.0 && qs < q_floor) {
            qs = q_floor;
            ++floored_;
        }
        if (pi > 0.0 && !(qs > 0.0)) {
            throw std::domain_error("new importance function vanishes at a cached parameter inside the prior support");
        }
        Term t{};
        t.ratio = pi / e.q_value;
        t.sq_ratio = pi > 0.0 ? pi * pi / (qs * e.q_value) : 0.0;
        t.time_ratio = qs / e.q_value;
        t.inv_alpha = 1.0 / e.alpha;
        t.tilde_d = e.tilde_d;
        t.tilde_t = e.tilde_t;
        t.has_hi = e.hi.has_value();
        t.d = e.hi ? e.hi->d : 0.0;
        t.t = e.hi ? e.hi->t : 0.0;
        terms_.push_back(t);
    }
}

EfficiencyCoefficients CoefficientEstimator::at(double epsilon) const
{
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (epsilon > cache_epsilon_) {
        throw std::invalid_argument("coefficients can only be re-estimated at a threshold no larger than the cache's");
    }
    EfficiencyCoefficients c;
    for (const auto& t : terms_) {
        const double lo_in = t.tilde_d < epsilon ? 1.0 : 0.0;
        c.z += t.ratio * lo_in;
        c.w += t.sq_ratio * lo_in;
        c.t_lo += t.time_ratio * t.tilde_t;
        if (!t.has_hi) continue;
        const double hi_in = t.d < epsilon ? 1.0 : 0.0;
        c.z += t.ratio * t.inv_alpha * (hi_in - lo_in);
        c.w += t.sq_ratio * t.inv_alpha * (hi_in - lo_in);
        c.w_fp += t.sq_ratio * t.inv_alpha * lo_in * (1.0 - hi_in);
        c.w_fn += t.sq_ratio * t.inv_alpha * (1.0 - lo_in) * hi_in;
        c.t_hi_p += t.time_ratio * t.inv_alpha * lo_in * t.t;
        c.t_hi_n += t.time_ratio * t.inv_alpha * (1.0 - lo_in) * t.t;
    }
    const double n = static_cast<double>(terms_.size());
    for (double* v : {&c.z, &c.w, &c.w_fp, &c.w_fn, &c.t_lo, &c.t_hi_p, &c.t_hi_n}) *v /= n;
    return c;
}

std::vector<double> CoefficientEstimator::finite_low_fidelity_distances() const
{
    std::vector<double> d;
    d.reserve(terms_.size());
    for (const auto& t : terms_) {
        if (std::isfinite(t.tilde_d)) d.push_back(t.tilde_d);
    }
    return d;
}

EfficiencyCoefficients estimate_coefficients(const ParticleCache& cache, const UniformPrior& prior,
                                             const ImportanceDistribution& q_star,
                                             double epsilon_new, double q_floor)
{
    return CoefficientEstimator(cache, prior, q_star, q_floor).at(epsilon_new);
}

double predicted_efficiency(const EfficiencyCoefficients& c, const ContinuationPolicy& policy)
{
    if (!(c.z > 0.0)) return 0.0;
    const double p = phi(c, policy.eta1, policy.eta2);
    if (!(p > 0.0) || !std::isfinite(p)) return 0.0;
    return c.z * c.z / p;
}

AdaptiveEpsilonResult adaptive_epsilon(const CoefficientEstimator& estimator, double epsilon_t,
                                       double psi_target, const EtaBounds& bounds,
                                       bool multifidelity)
{
    if (!(psi_target > 0.0)) throw std::invalid_argument("efficiency target must be positive");
    bounds.validate();

    AdaptiveEpsilonResult result;
    if (multifidelity) {
        const auto at_current = estimator.at(epsilon_t);
        at_current.validate();
        result.policy = optimal_continuation(at_current, bounds).policy;
    }
    const auto psi = [&](double eps) { return predicted_efficiency(estimator.at(eps), result.policy); };
    const auto finish = [&](double eps) {
        result.epsilon = eps;
        result.target_unreachable = eps == epsilon_t;
        result.coefficients = estimator.at(eps);
        result.predicted_efficiency = predicted_efficiency(result.coefficients, result.policy);
        return result;
    };

    auto distances = estimator.finite_low_fidelity_distances();
    double floor = 0.0;
    if (!distances.empty()) {
        const auto k = static_cast<std::size_t>(kEpsilonGridQuantile * static_cast<double>(distances.size() - 1));
        std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(k), distances.end());
        floor = distances[k];
    }
    if (!(floor > 0.0) || floor >= epsilon_t) return finish(epsilon_t);

    // Descending geometric grid from epsilon_t to the floor; take the largest
    // admissible point and refine against its inadmissible neighbour.
    const double ratio = floor / epsilon_t;
    double previous = epsilon_t;
    for (std::size_t k = 0; k < kEpsilonGridSize; ++k) {
        const double eps = k == 0 ? epsilon_t
                                  : epsilon_t * std::pow(ratio, static_cast<double>(k) /
                                                                    static_cast<double>(kEpsilonGridSize - 1));
        if (psi(eps) > psi_target) {
            previous = eps;
            continue;
        }
        if (k == 0) return finish(epsilon_t);
        double admissible = eps;
        double rejected = previous;
        for (std::size_t i = 0; i < kEpsilonBisectionSteps; ++i) {
            const double mid = 0.5 * (admissible + rejected);
            (psi(mid) <= psi_target ? admissible : rejected) = mid;
        }
        return finish(admissible);
    }
    return finish(epsilon_t);
}

AdaptiveEpsilonResult adaptive_epsilon(const ParticleCache& cache, const UniformPrior& prior,
                                       const ImportanceDistribution& q_star, double epsilon_t,
                                       double psi_target, const EtaBounds& bounds,
                                       bool multifidelity, double q_floor)
{
    return adaptive_epsilon(CoefficientEstimator(cache, prior, q_star, q_floor), epsilon_t,
                            psi_target, bounds, multifidelity);
}

}  // namespace mfabc
