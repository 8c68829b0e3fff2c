#include "mfabc/samplers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace mfabc {

void ContinuationPolicy::validate() const
{
    if (!(eta1 > 0.0 && eta1 <= 1.0) || !(eta2 > 0.0 && eta2 <= 1.0)) {
        throw std::invalid_argument("continuation probabilities must lie in (0, 1]");
    }
}

std::size_t ParticleCache::high_fidelity_count() const
{
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const CacheEntry& e) { return e.hi.has_value(); }));
}

WeightedSample ParticleCache::to_sample() const
{
    WeightedSample sample;
    sample.particles.reserve(entries.size());
    for (const auto& e : entries) sample.particles.push_back({e.theta, e.weight});
    sample.total_sim_time = total_sim_time;
    return sample;
}

StoppingCondition StoppingCondition::max_proposals(std::size_t n)
{
    StoppingCondition s;
    s.kind = Kind::max_proposals;
    s.proposals = n;
    return s;
}

StoppingCondition StoppingCondition::ess_target(double ess, std::size_t check_every)
{
    StoppingCondition s;
    s.kind = Kind::ess_target;
    s.ess = ess;
    s.check_every = check_every;
    return s;
}

StoppingCondition StoppingCondition::time_budget(double seconds)
{
    StoppingCondition s;
    s.kind = Kind::time_budget;
    s.seconds = seconds;
    return s;
}

void StoppingCondition::validate() const
{
    switch (kind) {
    case Kind::max_proposals:
        if (proposals == 0) throw std::invalid_argument("max_proposals must be positive");
        break;
    case Kind::ess_target:
        if (!(ess > 0.0) || check_every == 0) {
            throw std::invalid_argument("ESS target and check interval must be positive");
        }
        break;
    case Kind::time_budget:
        if (!(seconds > 0.0)) throw std::invalid_argument("time budget must be positive");
        break;
    }
}

double importance_weight(double prior_density, double q_value, bool in_neighborhood)
{
    if (!(q_value > 0.0)) throw std::invalid_argument("importance function value must be positive");
    return in_neighborhood ? prior_density / q_value : 0.0;
}

double multifidelity_weight(double prior_density, double q_value, bool tilde_in, double u,
                            double alpha, std::optional<bool> hi_in)
{
    if (!(q_value > 0.0)) throw std::invalid_argument("importance function value must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    const bool continued = u < alpha;
    if (continued != hi_in.has_value()) {
        throw std::invalid_argument("high-fidelity outcome must be present exactly when u < alpha");
    }
    double w = tilde_in ? 1.0 : 0.0;
    if (continued) {
        const double hi = *hi_in ? 1.0 : 0.0;
        w = w + (hi - w) / alpha;
    }
    return (prior_density / q_value) * w;
}

double recompute_weight(const CacheEntry& entry, double prior_density, double epsilon)
{
    std::optional<bool> hi_in;
    if (entry.hi) hi_in = entry.hi->d < epsilon;
    return multifidelity_weight(prior_density, entry.q_value, entry.tilde_d < epsilon, entry.u,
                                entry.alpha, hi_in);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Timed {
    SimulationOutput out;
    double seconds = 0.0;
};

template <class F>
Timed timed_call(F&& f, TimingMode mode)
{
    const auto start = std::chrono::steady_clock::now();
    SimulationOutput out = f();
    const auto stop = std::chrono::steady_clock::now();
    long long ns = 0;
    if (mode == TimingMode::wall_clock) {
        ns = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
    } else {
        ns = std::llround(out.work * 1e9);
    }
    return {std::move(out), static_cast<double>(ns) * 1e-9};
}

struct SamplerSetup {
    const CoupledModel& model;
    const UniformPrior& prior;
    const ImportanceDistribution& importance;
    const Neighborhood& neighborhood;
    ContinuationPolicy policy;
    bool low_fidelity;
    const SamplerOptions& options;
};

CacheEntry propose(const SamplerSetup& s, std::size_t index)
{
    const auto& opt = s.options;
    Rng prng = substream(opt.seed, opt.generation, index, Stream::proposal);

    CacheEntry e;
    e.theta = s.importance.sample(prng, opt.max_rejections);
    e.q_value = s.importance.density(e.theta);
    const double pi = s.prior.density(e.theta);
    e.u = std::uniform_real_distribution<double>(0.0, 1.0)(prng);

    SummaryVector lo_summary;
    bool have_lo = false;
    if (s.low_fidelity) {
        Rng lrng = substream(opt.seed, opt.generation, index, Stream::low_fidelity);
        Timed lo = timed_call([&] { return s.model.simulate_lo(e.theta, lrng); }, opt.timing);
        e.tilde_t = lo.seconds;
        e.tilde_d = lo.out.failed ? kInf : s.model.distance(lo.out.summary, s.neighborhood.observed);
        lo_summary = std::move(lo.out.summary);
        have_lo = !lo.out.failed;
        e.alpha = s.policy.alpha(s.neighborhood.contains(e.tilde_d));
    } else {
        e.alpha = 1.0;
    }

    if (e.u < e.alpha) {
        Rng hrng = substream(opt.seed, opt.generation, index, Stream::high_fidelity);
        Timed hi = timed_call(
            [&] { return s.model.simulate_hi(e.theta, have_lo ? &lo_summary : nullptr, hrng); },
            opt.timing);
        const double d = hi.out.failed ? kInf : s.model.distance(hi.out.summary, s.neighborhood.observed);
        e.hi = HighFidelityRecord{d, hi.seconds};
    }
    if (!s.low_fidelity) {
        e.tilde_d = e.hi->d;
        e.tilde_t = 0.0;
    }

    std::optional<bool> hi_in;
    if (e.hi) hi_in = s.neighborhood.contains(e.hi->d);
    e.weight = multifidelity_weight(pi, e.q_value, s.neighborhood.contains(e.tilde_d), e.u, e.alpha,
                                    hi_in);
    return e;
}

void run_batch(const SamplerSetup& s, std::size_t first, std::vector<CacheEntry>& batch)
{
    const unsigned threads = std::max(1u, s.options.threads);
    if (threads == 1 || batch.size() < 2) {
        for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = propose(s, first + i);
        return;
    }
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < batch.size(); i += threads) batch[i] = propose(s, first + i);
        });
    }
}

SamplerResult run_sampler(const SamplerSetup& s, const StoppingCondition& stop)
{
    stop.validate();
    if (!(s.neighborhood.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    s.policy.validate();

    SamplerResult result;
    ParticleCache& cache = result.cache;
    cache.epsilon = s.neighborhood.epsilon;
    cache.low_fidelity = s.low_fidelity;

    std::size_t batch_size = stop.kind == StoppingCondition::Kind::ess_target ? stop.check_every
                                                                              : s.options.batch_size;
    batch_size = std::max<std::size_t>(batch_size, 1);

    double sum_w = 0.0;
    double sum_w2 = 0.0;
    std::vector<CacheEntry> batch;
    for (;;) {
        const std::size_t done = cache.entries.size();
        std::size_t n = batch_size;
        if (stop.kind == StoppingCondition::Kind::max_proposals) n = std::min(n, stop.proposals - done);
        if (done + n > s.options.proposal_ceiling) {
            throw GenerationAbort("stopping condition not met after " + std::to_string(done) +
                                  " proposals (ceiling " + std::to_string(s.options.proposal_ceiling) + ")");
        }
        batch.assign(n, CacheEntry{});
        run_batch(s, done, batch);
        for (auto& e : batch) {
            sum_w += e.weight;
            sum_w2 += e.weight * e.weight;
            cache.total_sim_time += e.tilde_t + (e.hi ? e.hi->t : 0.0);
            cache.entries.push_back(std::move(e));
        }

        bool satisfied = false;
        switch (stop.kind) {
        case StoppingCondition::Kind::max_proposals:
            satisfied = cache.entries.size() >= stop.proposals;
            break;
        case StoppingCondition::Kind::ess_target:
            satisfied = sum_w > 0.0 && sum_w2 > 0.0 && sum_w * sum_w / sum_w2 >= stop.ess;
            break;
        case StoppingCondition::Kind::time_budget:
            satisfied = cache.total_sim_time >= stop.seconds;
            break;
        }
        if (satisfied) break;
    }

    result.sample = cache.to_sample();
    return result;
}

}  // namespace

SamplerResult abc_is(const CoupledModel& model, const UniformPrior& prior,
                     const ImportanceDistribution& importance, const Neighborhood& neighborhood,
                     const StoppingCondition& stop, const SamplerOptions& options)
{
    SamplerSetup setup{model, prior, importance, neighborhood, ContinuationPolicy{1.0, 1.0}, false, options};
    return run_sampler(setup, stop);
}

SamplerResult mf_abc_is(const CoupledModel& model, const UniformPrior& prior,
                        const ImportanceDistribution& importance,
                        const Neighborhood& neighborhood, const ContinuationPolicy& policy,
                        const StoppingCondition& stop, const SamplerOptions& options)
{
    SamplerSetup setup{model, prior, importance, neighborhood, policy, true, options};
    return run_sampler(setup, stop);
}

}  // namespace mfabc
