#include <doctest.h>

#include <cmath>
#include <limits>

#include "mfabc/samplers.hpp"
#include "toy_models.hpp"

using namespace mfabc;

namespace {

const UniformPrior kUnit({0.0}, {1.0});

toy::TwoCellModel cells()
{
    return toy::TwoCellModel({toy::CellLaw{0.8, 0.9, 0.2, 1e-3, 1e-1}, toy::CellLaw{0.3, 0.6, 0.05, 1e-3, 1e-1}});
}

SamplerOptions options(std::uint64_t seed)
{
    SamplerOptions o;
    o.seed = seed;
    o.timing = TimingMode::cost_model;
    return o;
}

}  // namespace

TEST_CASE("multifidelity weight cases")
{
    // pi/q = 2 throughout.
    CHECK(multifidelity_weight(1.0, 0.5, true, 0.9, 0.5, std::nullopt) == 2.0);
    CHECK(multifidelity_weight(1.0, 0.5, false, 0.9, 0.5, std::nullopt) == 0.0);
    CHECK(multifidelity_weight(1.0, 0.5, true, 0.1, 0.5, true) == 2.0);
    CHECK(multifidelity_weight(1.0, 0.5, true, 0.1, 0.5, false) == -2.0);  // (1 + (0 - 1)/0.5) * 2
    CHECK(multifidelity_weight(1.0, 0.5, false, 0.1, 0.25, true) == 8.0);
    CHECK(multifidelity_weight(1.0, 0.5, false, 0.1, 0.25, false) == 0.0);
    CHECK_THROWS_AS(multifidelity_weight(1.0, 0.5, false, 0.1, 0.25, std::nullopt), std::invalid_argument);
    CHECK_THROWS_AS(multifidelity_weight(1.0, 0.5, false, 0.9, 0.25, true), std::invalid_argument);
    CHECK_THROWS_AS(multifidelity_weight(1.0, 0.0, true, 0.9, 0.5, std::nullopt), std::invalid_argument);
    CHECK(importance_weight(0.5, 0.25, true) == 2.0);
    CHECK(importance_weight(0.5, 0.25, false) == 0.0);
}

TEST_CASE("stored weights recompute exactly from the cache")
{
    const auto model = cells();
    const auto q = ImportanceDistribution::from_prior(kUnit);
    const auto r = mf_abc_is(model, kUnit, q, {0.5, {0.0}}, {0.4, 0.2}, StoppingCondition::max_proposals(2000),
                             options(7));
    for (const auto& e : r.cache.entries) REQUIRE(recompute_weight(e, kUnit.density(e.theta), 0.5) == e.weight);
    CHECK(r.sample.total_sim_time == doctest::Approx(2000 * 1e-3 + r.cache.high_fidelity_count() * 1e-1));
}

TEST_CASE("max_proposals stops at exactly the requested count")
{
    const auto model = cells();
    const auto q = ImportanceDistribution::from_prior(kUnit);
    for (std::size_t n : {1u, 99u, 100u, 101u, 1234u}) {
        const auto r = abc_is(model, kUnit, q, {0.5, {0.0}}, StoppingCondition::max_proposals(n), options(1));
        CHECK(r.cache.entries.size() == n);
        CHECK(r.sample.particles.size() == n);
    }
}

TEST_CASE("ESS target is checked at batch boundaries only")
{
    const auto model = cells();
    const auto q = ImportanceDistribution::from_prior(kUnit);
    const auto r = mf_abc_is(model, kUnit, q, {0.5, {0.0}}, {0.5, 0.5}, StoppingCondition::ess_target(150.0, 37),
                             options(2));
    const auto n = r.cache.entries.size();
    CHECK(n % 37 == 0);
    CHECK(compute_ess(r.sample.weights()) >= 150.0);
    WeightedSample shorter;
    shorter.particles.assign(r.sample.particles.begin(), r.sample.particles.end() - 37);
    bool below = true;
    try {
        below = compute_ess(shorter.weights()) < 150.0;
    } catch (const DegenerateSampleError&) {
    }
    CHECK(below);
}

TEST_CASE("time budget stops once recorded time reaches it")
{
    const auto model = cells();
    const auto q = ImportanceDistribution::from_prior(kUnit);
    const auto r = abc_is(model, kUnit, q, {0.5, {0.0}}, StoppingCondition::time_budget(2.0), options(3));
    CHECK(r.cache.total_sim_time >= 2.0);
    CHECK(r.cache.total_sim_time - 2.0 < 100 * 0.1 + 1e-9);
}

TEST_CASE("results do not depend on the thread count")
{
    const auto model = cells();
    const auto q = ImportanceDistribution::from_prior(kUnit);
    auto o1 = options(9);
    auto o3 = options(9);
    o3.threads = 3;
    const auto a = mf_abc_is(model, kUnit, q, {0.5, {0.0}}, {0.3, 0.1}, StoppingCondition::max_proposals(1000), o1);
    const auto b = mf_abc_is(model, kUnit, q, {0.5, {0.0}}, {0.3, 0.1}, StoppingCondition::max_proposals(1000), o3);
    REQUIRE(a.cache.entries.size() == b.cache.entries.size());
    for (std::size_t i = 0; i < a.cache.entries.size(); ++i) {
        const auto& x = a.cache.entries[i];
        const auto& y = b.cache.entries[i];
        REQUIRE(x.theta == y.theta);
        REQUIRE(x.u == y.u);
        REQUIRE(x.weight == y.weight);
        REQUIRE(x.hi.has_value() == y.hi.has_value());
    }
}

TEST_CASE("a stopping condition that cannot be met aborts at the ceiling")
{
    // Neither fidelity ever lands inside, so the ESS is undefined forever.
    const toy::TwoCellModel never({toy::CellLaw{0.0, 0.0, 0.0, 1e-3, 1e-2}, toy::CellLaw{0.0, 0.0, 0.0, 1e-3, 1e-2}});
    const auto q = ImportanceDistribution::from_prior(kUnit);
    auto o = options(4);
    o.proposal_ceiling = 500;
    CHECK_THROWS_AS(mf_abc_is(never, kUnit, q, {0.5, {0.0}}, {1.0, 1.0}, StoppingCondition::ess_target(10.0), o),
                    GenerationAbort);
}

TEST_CASE("high-fidelity continuation frequency matches eta")
{
    const auto model = cells();
    const auto q = ImportanceDistribution::from_prior(kUnit);
    const std::size_t n = 4000;
    const auto r = mf_abc_is(model, kUnit, q, {0.5, {0.0}}, {0.5, 0.5}, StoppingCondition::max_proposals(n),
                             options(12));
    const double k = static_cast<double>(r.cache.high_fidelity_count());
    CHECK(std::abs(k - 0.5 * n) < 3.0 * std::sqrt(n * 0.25));
    for (const auto& e : r.cache.entries) REQUIRE(e.hi.has_value() == (e.u < 0.5));
}

TEST_CASE("eta = (1,1) simulates every proposal at high fidelity")
{
    const auto model = cells();
    const auto q = ImportanceDistribution::from_prior(kUnit);
    const auto r = mf_abc_is(model, kUnit, q, {0.5, {0.0}}, {1.0, 1.0}, StoppingCondition::max_proposals(500),
                             options(5));
    for (const auto& e : r.cache.entries) {
        REQUIRE(e.hi.has_value());
        REQUIRE(e.weight == importance_weight(kUnit.density(e.theta), e.q_value, e.hi->d < 0.5));
    }
}

TEST_CASE("plain ABC caches mirror the high-fidelity distance")
{
    const auto model = cells();
    const auto q = ImportanceDistribution::from_prior(kUnit);
    const auto r = abc_is(model, kUnit, q, {0.5, {0.0}}, StoppingCondition::max_proposals(300), options(6));
    CHECK_FALSE(r.cache.low_fidelity);
    for (const auto& e : r.cache.entries) {
        REQUIRE(e.hi.has_value());
        REQUIRE(e.tilde_d == e.hi->d);
        REQUIRE(e.tilde_t == 0.0);
        REQUIRE(e.weight >= 0.0);
    }
}

TEST_CASE("MF-ABC-IS is unbiased for the posterior mass of each cell")
{
    // P(hi inside | cell) = p_lo p_in + (1 - p_lo) p_out, so the normalised
    // posterior mass of cell 0 is known in closed form.
    const auto model = cells();
    const double m0 = 0.8 * 0.9 + 0.2 * 0.2;
    const double m1 = 0.3 * 0.6 + 0.7 * 0.05;
    const double expected = m0 / (m0 + m1);
    const auto q = ImportanceDistribution::from_prior(kUnit);
    const auto r = mf_abc_is(model, kUnit, q, {0.5, {0.0}}, {0.4, 0.2}, StoppingCondition::max_proposals(40000),
                             options(21));
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : r.sample.particles) {
        den += p.weight;
        if (p.theta[0] < 0.5) num += p.weight;
    }
    CHECK(num / den == doctest::Approx(expected).epsilon(0.03));
}
