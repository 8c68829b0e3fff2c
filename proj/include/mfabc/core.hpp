#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfabc {

using ParameterVector = std::vector<double>;

struct WeightedParticle {
    ParameterVector theta;
    double weight = 0.0;
};

/// A weighted Monte Carlo sample together with the simulation time spent
/// producing it (seconds).
struct WeightedSample {
    std::vector<WeightedParticle> particles;
    double total_sim_time = 0.0;

    std::vector<double> weights() const;
    double weight_sum() const;
};

struct EfficiencyReport {
    double ess = 0.0;
    double sim_time = 0.0;
    double observed_efficiency = 0.0;  // effective samples per second
};

/// Raised when a sample cannot support a normalised estimate (all-zero
/// weights, or a zero weight sum).
class DegenerateSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// (sum w)^2 / sum w^2, using signed weights as given.
double compute_ess(std::span<const double> weights);

/// sum w F(theta) / sum w.
double posterior_estimate(const WeightedSample& sample,
                          const std::function<double(const ParameterVector&)>& f);

/// Weighted mean of each parameter component.
ParameterVector posterior_mean(const WeightedSample& sample);

EfficiencyReport efficiency_report(const WeightedSample& sample);

}  // namespace mfabc
