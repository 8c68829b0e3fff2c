#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mfabc/core.hpp"
#include "mfabc/models.hpp"

namespace mfabc {

/// The open ball {y : d(y, y_obs) < epsilon}.
struct Neighborhood {
    double epsilon = 0.0;
    SummaryVector observed;

    bool contains(double distance) const { return distance < epsilon; }
};

/// Piecewise-constant continuation probability: eta1 after a low-fidelity
/// simulation inside the neighbourhood, eta2 after one outside it.
struct ContinuationPolicy {
    double eta1 = 1.0;
    double eta2 = 1.0;

    double alpha(bool low_fidelity_inside) const { return low_fidelity_inside ? eta1 : eta2; }
    void validate() const;

    friend bool operator==(const ContinuationPolicy&, const ContinuationPolicy&) = default;
};

struct HighFidelityRecord {
    double d = 0.0;  // +inf when the simulation failed
    double t = 0.0;  // seconds
};

/// Everything stored about one proposal. When the low-fidelity model is
/// skipped (plain ABC-IS) `tilde_d` mirrors the high-fidelity distance and
/// `tilde_t` is zero, so the multifidelity weight formula still applies.
struct CacheEntry {
    ParameterVector theta;
    double q_value = 0.0;
    double tilde_d = 0.0;
    double tilde_t = 0.0;
    double alpha = 1.0;
    double u = 0.0;
    std::optional<HighFidelityRecord> hi;
    double weight = 0.0;
};

struct ParticleCache {
    std::vector<CacheEntry> entries;
    double epsilon = 0.0;
    double total_sim_time = 0.0;
    bool low_fidelity = true;

    std::size_t high_fidelity_count() const;
    WeightedSample to_sample() const;
};

struct StoppingCondition {
    enum class Kind { max_proposals, ess_target, time_budget };

    Kind kind = Kind::max_proposals;
    std::size_t proposals = 0;
    double ess = 0.0;
    std::size_t check_every = 100;
    double seconds = 0.0;

    static StoppingCondition max_proposals(std::size_t n);
    static StoppingCondition ess_target(double ess, std::size_t check_every = 100);
    static StoppingCondition time_budget(double seconds);
    void validate() const;
};

enum class TimingMode {
    wall_clock,  // measured around each model call
    cost_model,  // the model's deterministic work estimate
};

struct SamplerOptions {
    std::uint64_t seed = 0;
    std::uint64_t generation = 0;
    std::size_t batch_size = 100;
    std::size_t proposal_ceiling = 1'000'000;
    std::size_t max_rejections = 1'000'000;
    TimingMode timing = TimingMode::wall_clock;
    unsigned threads = 1;
};

struct SamplerResult {
    WeightedSample sample;
    ParticleCache cache;
};

/// The sampler hit its proposal ceiling before the stopping condition held.
class GenerationAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double importance_weight(double prior_density, double q_value, bool in_neighborhood);

/// (pi/q) * [I(y~ in) + I(u < alpha)/alpha * (I(y in) - I(y~ in))].
/// `hi_in` must be present exactly when u < alpha.
double multifidelity_weight(double prior_density, double q_value, bool tilde_in, double u,
                            double alpha, std::optional<bool> hi_in);

/// Recomputes an entry's weight from its stored fields at threshold epsilon.
double recompute_weight(const CacheEntry& entry, double prior_density, double epsilon);

SamplerResult abc_is(const CoupledModel& model, const UniformPrior& prior,
                     const ImportanceDistribution& importance, const Neighborhood& neighborhood,
                     const StoppingCondition& stop, const SamplerOptions& options);

SamplerResult mf_abc_is(const CoupledModel& model, const UniformPrior& prior,
                        const ImportanceDistribution& importance,
                        const Neighborhood& neighborhood, const ContinuationPolicy& policy,
                        const StoppingCondition& stop, const SamplerOptions& options);

}  // namespace mfabc
