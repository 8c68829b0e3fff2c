#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mfabc/models.hpp"
#include "mfabc/samplers.hpp"

namespace mfabc {

/// The scalars that determine the theoretical efficiency of a multifidelity
/// importance sampler as a function of (eta1, eta2).
struct EfficiencyCoefficients {
    double z = 0.0;
    double w = 0.0;
    double w_fp = 0.0;  // weighted false-positive rate
    double w_fn = 0.0;  // weighted false-negative rate
    double t_lo = 0.0;
    double t_hi_p = 0.0;
    double t_hi_n = 0.0;

    void validate() const;
};

/// Lower bounds on (eta1, eta2); the search region is [rho1,1] x [rho2,1].
struct EtaBounds {
    double rho1 = 0.01;
    double rho2 = 0.01;

    void validate() const;
};

/// (W + (1/eta1 - 1) W_fp + (1/eta2 - 1) W_fn) (T_lo + eta1 T_hi,p + eta2 T_hi,n)
double phi(const EfficiencyCoefficients& c, double eta1, double eta2);

/// Z^2 / phi.
double theoretical_efficiency(const EfficiencyCoefficients& c, double eta1, double eta2);

struct UnconstrainedOptimum {
    double eta1 = 0.0;
    double eta2 = 0.0;
    double phi = 0.0;
};

/// Minimiser of phi over the closed positive quadrant; empty when
/// W <= W_fp + W_fn, in which case phi has no minimum there. Components may be
/// zero, or non-finite when a high-fidelity time coefficient vanishes.
std::optional<UnconstrainedOptimum> unconstrained_optimum(const EfficiencyCoefficients& c);

enum class EtaComponent { first, second };

/// Minimiser over [rho, 1] of phi along the line where the other component is
/// fixed at x.
double boundary_eta(const EfficiencyCoefficients& c, const EtaBounds& bounds, EtaComponent which,
                    double x);

struct OptimalContinuation {
    ContinuationPolicy policy;
    double phi = 0.0;
    bool interior = false;
};

/// Minimiser of phi over [rho1,1] x [rho2,1]: the unconstrained optimum when
/// it lies inside, otherwise the best of the four edge candidates. Exact ties
/// go to the lexicographically larger pair.
OptimalContinuation optimal_continuation(const EfficiencyCoefficients& c, const EtaBounds& bounds);

/// Monte Carlo estimates of the efficiency coefficients from a stored
/// generation, for a new importance function q* and any threshold no larger
/// than the one the cache was built with. Per-entry ratios are computed once
/// so that re-evaluating at many thresholds is O(N) each.
class CoefficientEstimator {
public:
    /// q*(theta_n) values below `q_floor` are raised to it and counted; with a
    /// zero floor a vanishing q* on the prior support is an error.
    CoefficientEstimator(const ParticleCache& cache, const UniformPrior& prior,
                         const ImportanceDistribution& q_star, double q_floor = 0.0);

    EfficiencyCoefficients at(double epsilon) const;
    double cache_epsilon() const { return cache_epsilon_; }
    std::size_t floored_entries() const { return floored_; }
    /// Low-fidelity distances of all entries (finite ones only).
    std::vector<double> finite_low_fidelity_distances() const;

private:
    struct Term {
        double ratio;        // pi / q
        double sq_ratio;     // pi^2 / (q* q)
        double time_ratio;   // q* / q
        double inv_alpha;
        double tilde_d;
        double tilde_t;
        bool has_hi;
        double d;
        double t;
    };
    std::vector<Term> terms_;
    double cache_epsilon_ = 0.0;
    std::size_t floored_ = 0;
};

EfficiencyCoefficients estimate_coefficients(const ParticleCache& cache, const UniformPrior& prior,
                                             const ImportanceDistribution& q_star,
                                             double epsilon_new, double q_floor = 0.0);

/// Predicted efficiency Z^2/phi, defined as zero when no positive mass is
/// estimated.
double predicted_efficiency(const EfficiencyCoefficients& c, const ContinuationPolicy& policy);

struct AdaptiveEpsilonResult {
    double epsilon = 0.0;
    ContinuationPolicy policy;
    /// The returned threshold equals the previous one; the efficiency target
    /// is not achievable and should be reviewed.
    bool target_unreachable = false;
    double predicted_efficiency = 0.0;
    EfficiencyCoefficients coefficients;
};

inline constexpr std::size_t kEpsilonGridSize = 64;
inline constexpr std::size_t kEpsilonBisectionSteps = 40;
inline constexpr double kEpsilonGridQuantile = 0.01;

/// Chooses the next threshold as the largest epsilon <= epsilon_t whose
/// predicted efficiency does not exceed psi_target, with continuation
/// probabilities optimised at epsilon_t (or fixed at (1,1) when
/// `multifidelity` is false).
AdaptiveEpsilonResult adaptive_epsilon(const CoefficientEstimator& estimator, double epsilon_t,
                                       double psi_target, const EtaBounds& bounds,
                                       bool multifidelity);

AdaptiveEpsilonResult adaptive_epsilon(const ParticleCache& cache, const UniformPrior& prior,
                                       const ImportanceDistribution& q_star, double epsilon_t,
                                       double psi_target, const EtaBounds& bounds,
                                       bool multifidelity, double q_floor = 0.0);

}  // namespace mfabc
