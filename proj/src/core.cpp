#include "mfabc/core.hpp"

#include <cmath>

namespace mfabc {

std::vector<double> WeightedSample::weights() const
{
    std::vector<double> w;
    w.reserve(particles.size());
    for (const auto& p : particles) w.push_back(p.weight);
    return w;
}

double WeightedSample::weight_sum() const
{
    double s = 0.0;
    for (const auto& p : particles) s += p.weight;
    return s;
}

double compute_ess(std::span<const double> weights)
{
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double w : weights) {
        sum += w;
        sum_sq += w * w;
    }
    if (sum_sq == 0.0) {
        throw DegenerateSampleError("effective sample size undefined: all weights are zero");
    }
    return sum * sum / sum_sq;
}

double posterior_estimate(const WeightedSample& sample,
                          const std::function<double(const ParameterVector&)>& f)
{
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : sample.particles) {
        if (p.weight == 0.0) continue;
        num += p.weight * f(p.theta);
        den += p.weight;
    }
    if (den == 0.0) {
        throw DegenerateSampleError("posterior estimate undefined: weight sum is zero");
    }
    return num / den;
}

ParameterVector posterior_mean(const WeightedSample& sample)
{
    if (sample.particles.empty()) {
        throw DegenerateSampleError("posterior mean of an empty sample");
    }
    const std::size_t dim = sample.particles.front().theta.size();
    ParameterVector num(dim, 0.0);
    double den = 0.0;
    for (const auto& p : sample.particles) {
        if (p.weight == 0.0) continue;
        for (std::size_t i = 0; i < dim; ++i) num[i] += p.weight * p.theta[i];
        den += p.weight;
    }
    if (den == 0.0) {
        throw DegenerateSampleError("posterior mean undefined: weight sum is zero");
    }
    for (double& v : num) v /= den;
    return num;
}

EfficiencyReport efficiency_report(const WeightedSample& sample)
{
    const auto w = sample.weights();
    EfficiencyReport report;
    report.ess = compute_ess(w);
    report.sim_time = sample.total_sim_time;
    if (!(sample.total_sim_time > 0.0)) {
        throw std::invalid_argument("efficiency requires a positive simulation time");
    }
    report.observed_efficiency = report.ess / report.sim_time;
    return report;
}

}  // namespace mfabc
