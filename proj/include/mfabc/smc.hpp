#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfabc/continuation.hpp"
#include "mfabc/models.hpp"
#include "mfabc/samplers.hpp"

namespace mfabc {

/// Threshold rule for SMC: an explicit strictly decreasing list, or adaptive
/// selection against an efficiency target.
struct AdaptiveThresholds {
    double initial_epsilon = 0.0;
    std::size_t generations = 0;
    /// Absolute efficiency target (effective samples per second). When empty,
    /// the target is `target_factor` times the observed efficiency of
    /// generation 1.
    std::optional<double> psi_target;
    double target_factor = 1.0;
};

struct SmcSchedule {
    std::vector<double> thresholds;              // explicit mode
    std::optional<AdaptiveThresholds> adaptive;  // adaptive mode when set
    std::vector<StoppingCondition> stops;        // one per generation, or one reused
    EtaBounds bounds;
    ContinuationPolicy initial_policy{1.0, 1.0};
    /// Optional initial importance distribution; the prior when empty.
    std::optional<ImportanceDistribution> initial_importance;

    std::size_t generation_count() const;
    const StoppingCondition& stop_for(std::size_t t) const;
    void validate() const;
};

struct GenerationResult {
    std::size_t index = 0;  // 1-based
    WeightedSample sample;
    ParticleCache cache;
    ContinuationPolicy policy_used;
    double epsilon_used = 0.0;
    /// Kernel fitted to this generation's sample (feeds the next generation).
    std::optional<PerturbationKernel> kernel;
    /// Estimates that chose this generation's policy and/or threshold.
    std::optional<EfficiencyCoefficients> coefficients;
    double predicted_efficiency = 0.0;
    bool target_unreachable = false;
    std::size_t floored_importance_values = 0;
    std::vector<std::string> warnings;
};

/// A generation ended with no usable weight.
class DegenerateRunError : public std::runtime_error {
public:
    DegenerateRunError(std::size_t generation, const std::string& what);
    std::size_t generation() const { return generation_; }

private:
    std::size_t generation_;
};

/// Floor applied to q* evaluations of earlier particles.
inline constexpr double kImportanceDensityFloor = 1e-300;

/// Called after each generation completes.
using GenerationCallback = std::function<void(const GenerationResult&)>;

std::vector<GenerationResult> abc_smc(const CoupledModel& model, const UniformPrior& prior,
                                      const SummaryVector& observed, const SmcSchedule& schedule,
                                      const SamplerOptions& options,
                                      const GenerationCallback& on_generation = {});

std::vector<GenerationResult> mf_abc_smc_alpha(const CoupledModel& model, const UniformPrior& prior,
                                               const SummaryVector& observed,
                                               const SmcSchedule& schedule,
                                               const std::vector<ContinuationPolicy>& policies,
                                               const SamplerOptions& options,
                                               const GenerationCallback& on_generation = {});

std::vector<GenerationResult> mf_abc_smc(const CoupledModel& model, const UniformPrior& prior,
                                         const SummaryVector& observed, const SmcSchedule& schedule,
                                         const SamplerOptions& options,
                                         const GenerationCallback& on_generation = {});

/// ESS of the final generation over the simulation time of all generations.
EfficiencyReport overall_efficiency(const std::vector<GenerationResult>& generations);

}  // namespace mfabc
