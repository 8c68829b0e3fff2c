#include "mfabc/smc.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace mfabc {

std::size_t SmcSchedule::generation_count() const
{
    return adaptive ? adaptive->generations : thresholds.size();
}

const StoppingCondition& SmcSchedule::stop_for(std::size_t t) const
{
    return stops.size() == 1 ? stops.front() : stops.at(t);
}

void SmcSchedule::validate() const
{
    const std::size_t n = generation_count();
    if (n == 0) throw std::invalid_argument("schedule needs at least one generation");
    if (adaptive) {
        if (!thresholds.empty()) throw std::invalid_argument("adaptive schedules take no explicit thresholds");
        if (!(adaptive->initial_epsilon > 0.0)) throw std::invalid_argument("initial epsilon must be positive");
        if (adaptive->psi_target && !(*adaptive->psi_target > 0.0)) {
            throw std::invalid_argument("efficiency target must be positive");
        }
        if (!(adaptive->target_factor > 0.0)) throw std::invalid_argument("target factor must be positive");
    } else {
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            if (!(thresholds[i] > 0.0)) throw std::invalid_argument("thresholds must be positive");
            if (i > 0 && !(thresholds[i] < thresholds[i - 1])) {
                throw std::invalid_argument("thresholds must be strictly decreasing");
            }
        }
    }
    if (stops.size() != 1 && stops.size() != n) {
        throw std::invalid_argument("need one stopping condition, or one per generation");
    }
    for (const auto& s : stops) s.validate();
    bounds.validate();
    initial_policy.validate();
}

DegenerateRunError::DegenerateRunError(std::size_t generation, const std::string& what)
    : std::runtime_error("generation " + std::to_string(generation) + ": " + what), generation_(generation)
{
}

namespace {

enum class Mode { abc, fixed_alpha, adaptive_alpha };

// What the previous generation decided for the next one.
struct Plan {
    Plan(ImportanceDistribution q, double eps) : importance(std::move(q)), epsilon(eps) {}

    ImportanceDistribution importance;
    double epsilon;
    ContinuationPolicy policy;
    std::optional<EfficiencyCoefficients> coefficients;
    double predicted_efficiency = 0.0;
    bool target_unreachable = false;
    std::size_t floored = 0;
    std::vector<std::string> warnings;
};

std::vector<GenerationResult> run_smc(Mode mode, const CoupledModel& model, const UniformPrior& prior,
                                      const SummaryVector& observed, const SmcSchedule& schedule,
                                      const std::vector<ContinuationPolicy>& policies,
                                      const SamplerOptions& options,
                                      const GenerationCallback& on_generation)
{
    schedule.validate();
    const std::size_t total = schedule.generation_count();
    if (mode == Mode::fixed_alpha) {
        if (policies.size() != total) throw std::invalid_argument("need one continuation policy per generation");
        for (const auto& p : policies) p.validate();
    }
    const bool multifidelity = mode != Mode::abc;

    Plan plan(schedule.initial_importance ? *schedule.initial_importance
                                          : ImportanceDistribution::from_prior(prior),
              schedule.adaptive ? schedule.adaptive->initial_epsilon : schedule.thresholds.front());
    if (mode == Mode::fixed_alpha) plan.policy = policies.front();
    if (mode == Mode::adaptive_alpha) plan.policy = schedule.initial_policy;
    std::optional<double> psi_target;
    if (schedule.adaptive) psi_target = schedule.adaptive->psi_target;

    std::vector<GenerationResult> out;
    out.reserve(total);
    for (std::size_t t = 0; t < total; ++t) {
        SamplerOptions opts = options;
        opts.generation = t + 1;
        const Neighborhood hood{plan.epsilon, observed};
        const StoppingCondition& stop = schedule.stop_for(t);

        SamplerResult r;
        try {
            r = multifidelity ? mf_abc_is(model, prior, plan.importance, hood, plan.policy, stop, opts)
                              : abc_is(model, prior, plan.importance, hood, stop, opts);
        } catch (const GenerationAbort& e) {
            throw DegenerateRunError(t + 1, e.what());
        } catch (const ImportanceSamplingError& e) {
            throw DegenerateRunError(t + 1, e.what());
        }
        if (!(r.sample.weight_sum() > 0.0)) {
            throw DegenerateRunError(t + 1, "sample has no positive total weight");
        }

        GenerationResult g;
        g.index = t + 1;
        g.policy_used = plan.policy;
        g.epsilon_used = plan.epsilon;
        g.coefficients = plan.coefficients;
        g.predicted_efficiency = plan.predicted_efficiency;
        g.target_unreachable = plan.target_unreachable;
        g.floored_importance_values = plan.floored;
        g.warnings = std::move(plan.warnings);

        if (t + 1 < total) {
            const PerturbationKernel kernel = fit_kernel(r.sample, prior);
            g.kernel = kernel;
            Plan next(ImportanceDistribution::mixture(r.sample, kernel, prior), plan.epsilon);
            if (mode == Mode::fixed_alpha) next.policy = policies[t + 1];

            if (schedule.adaptive) {
                if (!psi_target) {
                    psi_target = schedule.adaptive->target_factor *
                                 efficiency_report(r.sample).observed_efficiency;
                }
                try {
                    const CoefficientEstimator estimator(r.cache, prior, next.importance,
                                                         kImportanceDensityFloor);
                    next.floored = estimator.floored_entries();
                    const auto chosen = adaptive_epsilon(estimator, plan.epsilon, *psi_target,
                                                         schedule.bounds, mode == Mode::adaptive_alpha);
                    next.epsilon = chosen.epsilon;
                    if (mode == Mode::adaptive_alpha) next.policy = chosen.policy;
                    next.coefficients = chosen.coefficients;
                    next.predicted_efficiency = chosen.predicted_efficiency;
                    next.target_unreachable = chosen.target_unreachable;
                    if (chosen.target_unreachable) {
                        next.warnings.push_back("efficiency target not achievable below the current threshold");
                    }
                } catch (const std::exception& e) {
                    next.target_unreachable = true;
                    next.warnings.push_back(std::string("threshold selection failed, keeping epsilon: ") + e.what());
                }
            } else {
                next.epsilon = schedule.thresholds[t + 1];
                if (mode == Mode::adaptive_alpha) {
                    try {
                        const CoefficientEstimator estimator(r.cache, prior, next.importance,
                                                             kImportanceDensityFloor);
                        next.floored = estimator.floored_entries();
                        const auto c = estimator.at(next.epsilon);
                        c.validate();
                        const auto opt = optimal_continuation(c, schedule.bounds);
                        next.policy = opt.policy;
                        next.coefficients = c;
                        next.predicted_efficiency = predicted_efficiency(c, opt.policy);
                    } catch (const std::exception& e) {
                        next.warnings.push_back(std::string("coefficient estimation failed, using (1,1): ") + e.what());
                    }
                }
            }
            plan = std::move(next);
        }

        g.sample = std::move(r.sample);
        g.cache = std::move(r.cache);
        if (on_generation) on_generation(g);
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace

std::vector<GenerationResult> abc_smc(const CoupledModel& model, const UniformPrior& prior,
                                      const SummaryVector& observed, const SmcSchedule& schedule,
                                      const SamplerOptions& options,
                                      const GenerationCallback& on_generation)
{
    return run_smc(Mode::abc, model, prior, observed, schedule, {}, options, on_generation);
}

std::vector<GenerationResult> mf_abc_smc_alpha(const CoupledModel& model, const UniformPrior& prior,
                                               const SummaryVector& observed,
                                               const SmcSchedule& schedule,
                                               const std::vector<ContinuationPolicy>& policies,
                                               const SamplerOptions& options,
                                               const GenerationCallback& on_generation)
{
    return run_smc(Mode::fixed_alpha, model, prior, observed, schedule, policies, options, on_generation);
}

std::vector<GenerationResult> mf_abc_smc(const CoupledModel& model, const UniformPrior& prior,
                                         const SummaryVector& observed, const SmcSchedule& schedule,
                                         const SamplerOptions& options,
                                         const GenerationCallback& on_generation)
{
    return run_smc(Mode::adaptive_alpha, model, prior, observed, schedule, {}, options, on_generation);
}

EfficiencyReport overall_efficiency(const std::vector<GenerationResult>& generations)
{
    if (generations.empty()) throw std::invalid_argument("no generations");
    WeightedSample last = generations.back().sample;
    last.total_sim_time = 0.0;
    for (const auto& g : generations) last.total_sim_time += g.sample.total_sim_time;
    return efficiency_report(last);
}

}  // namespace mfabc
