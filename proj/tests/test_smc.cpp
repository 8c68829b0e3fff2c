#include <doctest.h>

#include <cmath>

#include "mfabc/smc.hpp"
#include "toy_models.hpp"

using namespace mfabc;

namespace {

const UniformPrior kPrior({-5.0}, {5.0});
const SummaryVector kObserved{1.0};

SamplerOptions options(std::uint64_t seed)
{
    SamplerOptions o;
    o.seed = seed;
    o.timing = TimingMode::cost_model;
    return o;
}

SmcSchedule schedule(std::vector<double> eps, std::size_t proposals)
{
    SmcSchedule s;
    s.thresholds = std::move(eps);
    s.stops = {StoppingCondition::max_proposals(proposals)};
    s.bounds = {0.05, 0.05};
    return s;
}

void require_same_cache(const ParticleCache& a, const ParticleCache& b)
{
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        REQUIRE(a.entries[i].theta == b.entries[i].theta);
        REQUIRE(a.entries[i].weight == b.entries[i].weight);
        REQUIRE(a.entries[i].q_value == b.entries[i].q_value);
    }
}

}  // namespace

TEST_CASE("schedule validation")
{
    auto s = schedule({2.0, 1.0, 1.0}, 100);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = schedule({2.0, 1.0}, 100);
    CHECK_NOTHROW(s.validate());
    CHECK(s.generation_count() == 2);
    s.stops = {StoppingCondition::max_proposals(10), StoppingCondition::max_proposals(10),
               StoppingCondition::max_proposals(10)};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("a one-generation run is plain ABC-IS from the prior")
{
    const toy::GaussianPair model;
    const auto gens = abc_smc(model, kPrior, kObserved, schedule({0.5}, 700), options(4));
    REQUIRE(gens.size() == 1);
    auto o = options(4);
    o.generation = 1;
    const auto direct = abc_is(model, kPrior, ImportanceDistribution::from_prior(kPrior), {0.5, kObserved},
                               StoppingCondition::max_proposals(700), o);
    require_same_cache(gens[0].cache, direct.cache);
}

TEST_CASE("ABC-SMC weights are non-negative and thresholds decrease")
{
    const toy::GaussianPair model;
    const auto gens = abc_smc(model, kPrior, kObserved, schedule({3.0, 2.0, 1.0, 0.5}, 800), options(5));
    REQUIRE(gens.size() == 4);
    for (std::size_t t = 0; t < gens.size(); ++t) {
        CHECK(gens[t].index == t + 1);
        if (t > 0) CHECK(gens[t].epsilon_used < gens[t - 1].epsilon_used);
        for (const auto& p : gens[t].sample.particles) REQUIRE(p.weight >= 0.0);
    }
    CHECK(gens.back().kernel == std::nullopt);
    CHECK(gens.front().kernel.has_value());
}

TEST_CASE("stored weights recompute from the caches")
{
    const toy::GaussianPair model;
    const auto gens = mf_abc_smc(model, kPrior, kObserved, schedule({3.0, 1.5, 0.8}, 1500), options(6));
    for (const auto& g : gens) {
        for (const auto& e : g.cache.entries) {
            REQUIRE(recompute_weight(e, kPrior.density(e.theta), g.epsilon_used) == e.weight);
        }
    }
}

TEST_CASE("MF-ABC-SMC runs generation one at full fidelity and keeps eta in H")
{
    const toy::GaussianPair model;
    const auto sched = schedule({3.0, 1.5, 0.8, 0.5}, 1500);
    const auto gens = mf_abc_smc(model, kPrior, kObserved, sched, options(7));
    REQUIRE(gens.size() == 4);
    CHECK(gens[0].cache.high_fidelity_count() == gens[0].cache.entries.size());
    CHECK(gens[0].policy_used == ContinuationPolicy{1.0, 1.0});
    for (std::size_t t = 1; t < gens.size(); ++t) {
        const auto& p = gens[t].policy_used;
        CHECK(p.eta1 >= sched.bounds.rho1);
        CHECK(p.eta1 <= 1.0);
        CHECK(p.eta2 >= sched.bounds.rho2);
        CHECK(p.eta2 <= 1.0);
        CHECK(gens[t].coefficients.has_value());
    }
    // A low-fidelity model 100x cheaper should be exploited at least once.
    std::size_t saved = 0;
    for (std::size_t t = 1; t < gens.size(); ++t) saved += gens[t].cache.entries.size() - gens[t].cache.high_fidelity_count();
    CHECK(saved > 0);
}

TEST_CASE("fixed (1,1) policies simulate every proposal at high fidelity")
{
    const toy::GaussianPair model;
    const auto gens = mf_abc_smc_alpha(model, kPrior, kObserved, schedule({2.0, 1.0}, 600),
                                       {{1.0, 1.0}, {1.0, 1.0}}, options(8));
    for (const auto& g : gens) {
        CHECK(g.cache.high_fidelity_count() == g.cache.entries.size());
        for (const auto& e : g.cache.entries) {
            REQUIRE(e.weight == importance_weight(kPrior.density(e.theta), e.q_value, e.hi->d < g.epsilon_used));
        }
    }
}

TEST_CASE("runs are reproducible from the seed")
{
    const toy::GaussianPair model;
    const auto sched = schedule({3.0, 1.5, 0.8}, 500);
    const auto a = mf_abc_smc(model, kPrior, kObserved, sched, options(9));
    const auto b = mf_abc_smc(model, kPrior, kObserved, sched, options(9));
    auto o3 = options(9);
    o3.threads = 3;
    const auto c = mf_abc_smc(model, kPrior, kObserved, sched, o3);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        require_same_cache(a[t].cache, b[t].cache);
        require_same_cache(a[t].cache, c[t].cache);
        CHECK(a[t].policy_used == b[t].policy_used);
    }
}

TEST_CASE("eight generations reach an ESS target and concentrate the posterior")
{
    // Posterior under the flat prior is approximately N(1, 1 + 0.09).
    const toy::GaussianPair model;
    SmcSchedule s;
    s.thresholds = {4.0, 3.0, 2.0, 1.5, 1.0, 0.7, 0.5, 0.3};
    s.stops = {StoppingCondition::ess_target(400.0)};
    s.bounds = {0.05, 0.05};
    std::size_t callbacks = 0;
    const auto gens = mf_abc_smc(model, kPrior, kObserved, s, options(10),
                                 [&](const GenerationResult&) { ++callbacks; });
    REQUIRE(gens.size() == 8);
    CHECK(callbacks == 8);
    for (const auto& g : gens) CHECK(compute_ess(g.sample.weights()) >= 400.0);
    const double m = posterior_mean(gens.back().sample)[0];
    CHECK(std::abs(m - 1.0) < 0.25);
    const auto rep = overall_efficiency(gens);
    double total = 0.0;
    for (const auto& g : gens) total += g.sample.total_sim_time;
    CHECK(rep.sim_time == doctest::Approx(total));
    CHECK(rep.ess == doctest::Approx(compute_ess(gens.back().sample.weights())));
}

TEST_CASE("adaptive thresholds decrease and never exceed the previous one")
{
    const toy::GaussianPair model;
    SmcSchedule s;
    s.adaptive = AdaptiveThresholds{3.0, 5, std::nullopt, 0.5};
    s.stops = {StoppingCondition::ess_target(200.0)};
    s.bounds = {0.05, 0.05};
    const auto gens = mf_abc_smc(model, kPrior, kObserved, s, options(11));
    REQUIRE(gens.size() == 5);
    CHECK(gens[0].epsilon_used == 3.0);
    for (std::size_t t = 1; t < gens.size(); ++t) CHECK(gens[t].epsilon_used <= gens[t - 1].epsilon_used);
    CHECK(gens.back().epsilon_used < 3.0);
}

TEST_CASE("a generation with no accepted mass is reported as degenerate")
{
    const toy::TwoCellModel never({toy::CellLaw{0.0, 0.0, 0.0, 1e-3, 1e-2}, toy::CellLaw{0.0, 0.0, 0.0, 1e-3, 1e-2}});
    const UniformPrior unit({0.0}, {1.0});
    SmcSchedule s;
    s.thresholds = {0.5};
    s.stops = {StoppingCondition::max_proposals(100)};
    try {
        abc_smc(never, unit, {0.0}, s, options(1));
        FAIL("expected DegenerateRunError");
    } catch (const DegenerateRunError& e) {
        CHECK(e.generation() == 1);
    }
}
