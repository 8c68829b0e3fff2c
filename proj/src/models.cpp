#include "mfabc/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mfabc {

namespace {

void check_dimension(std::size_t expected, std::size_t got)
{
    if (expected != got) {
        throw std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) +
                                    ", got " + std::to_string(got));
    }
}

}  // namespace

UniformPrior::UniformPrior(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper))
{
    if (lower_.empty() || lower_.size() != upper_.size()) {
        throw std::invalid_argument("prior bounds must be non-empty and of equal length");
    }
    double volume = 1.0;
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!(upper_[i] > lower_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
            throw std::invalid_argument("prior bounds must be finite with lower < upper");
        }
        volume *= upper_[i] - lower_[i];
    }
    density_ = 1.0 / volume;
}

bool UniformPrior::contains(const ParameterVector& theta) const
{
    check_dimension(dimension(), theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] >= lower_[i] && theta[i] <= upper_[i])) return false;
    }
    return true;
}

double UniformPrior::density(const ParameterVector& theta) const
{
    return contains(theta) ? density_ : 0.0;
}

ParameterVector UniformPrior::sample(Rng& rng) const
{
    ParameterVector theta(dimension());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        std::uniform_real_distribution<double> u(lower_[i], upper_[i]);
        theta[i] = u(rng);
    }
    return theta;
}

PerturbationKernel::PerturbationKernel(std::vector<double> variances)
    : variances_(std::move(variances))
{
    if (variances_.empty()) throw std::invalid_argument("kernel needs at least one dimension");
    double log_norm = 0.0;
    for (double v : variances_) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("kernel variances must be positive and finite");
        }
        inv_var_.push_back(1.0 / v);
        sd_.push_back(std::sqrt(v));
        log_norm -= 0.5 * std::log(2.0 * std::numbers::pi * v);
    }
    norm_ = std::exp(log_norm);
}

double PerturbationKernel::density(const double* theta, const double* center) const
{
    double q = 0.0;
    for (std::size_t i = 0; i < variances_.size(); ++i) {
        const double d = theta[i] - center[i];
        q += d * d * inv_var_[i];
    }
    return norm_ * std::exp(-0.5 * q);
}

double PerturbationKernel::density(const ParameterVector& theta, const ParameterVector& center) const
{
    check_dimension(dimension(), theta.size());
    check_dimension(dimension(), center.size());
    return density(theta.data(), center.data());
}

ParameterVector PerturbationKernel::perturb(const ParameterVector& center, Rng& rng) const
{
    check_dimension(dimension(), center.size());
    ParameterVector out(center.size());
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t i = 0; i < center.size(); ++i) out[i] = center[i] + sd_[i] * z(rng);
    return out;
}

PerturbationKernel fit_kernel(const WeightedSample& sample, const UniformPrior& prior)
{
    const std::size_t dim = prior.dimension();
    double total = 0.0;
    std::vector<double> mean(dim, 0.0);
    for (const auto& p : sample.particles) {
        check_dimension(dim, p.theta.size());
        const double a = std::abs(p.weight);
        total += a;
        for (std::size_t i = 0; i < dim; ++i) mean[i] += a * p.theta[i];
    }
    if (total == 0.0) {
        throw DegenerateSampleError("cannot fit a perturbation kernel: all weights are zero");
    }
    for (double& m : mean) m /= total;

    std::vector<double> var(dim, 0.0);
    for (const auto& p : sample.particles) {
        const double a = std::abs(p.weight);
        if (a == 0.0) continue;
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = p.theta[i] - mean[i];
            var[i] += a * d * d;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        const double floor = kKernelVarianceFloor * prior.width(i) * prior.width(i);
        var[i] = std::max(2.0 * var[i] / total, floor);
    }
    return PerturbationKernel(std::move(var));
}

ImportanceDistribution::ImportanceDistribution(Kind kind, UniformPrior prior,
                                               PerturbationKernel kernel)
    : kind_(kind), prior_(std::move(prior)), kernel_(std::move(kernel)), dim_(prior_.dimension())
{
}

ImportanceDistribution ImportanceDistribution::from_prior(const UniformPrior& prior)
{
    // The kernel is unused for the prior kind.
    return ImportanceDistribution(Kind::prior, prior,
                                  PerturbationKernel(std::vector<double>(prior.dimension(), 1.0)));
}

ImportanceDistribution ImportanceDistribution::mixture(const WeightedSample& sample,
                                                       const PerturbationKernel& kernel,
                                                       const UniformPrior& prior)
{
    check_dimension(prior.dimension(), kernel.dimension());
    ImportanceDistribution dist(Kind::mixture, prior, kernel);
    double total = 0.0;
    for (const auto& p : sample.particles) {
        const double a = std::abs(p.weight);
        if (a == 0.0) continue;
        check_dimension(prior.dimension(), p.theta.size());
        dist.centers_.insert(dist.centers_.end(), p.theta.begin(), p.theta.end());
        dist.mixture_weights_.push_back(a);
        total += a;
    }
    if (total == 0.0) {
        throw DegenerateSampleError("cannot build an importance mixture: all weights are zero");
    }
    double acc = 0.0;
    for (double& w : dist.mixture_weights_) {
        w /= total;
        acc += w;
        dist.cumulative_.push_back(acc);
    }
    dist.cumulative_.back() = 1.0;
    return dist;
}

double ImportanceDistribution::density(const ParameterVector& theta) const
{
    const double pi = prior_.density(theta);
    if (kind_ == Kind::prior || pi == 0.0) return pi;
    double r = 0.0;
    const double* c = centers_.data();
    for (std::size_t n = 0; n < mixture_weights_.size(); ++n, c += dim_) {
        r += mixture_weights_[n] * kernel_.density(theta.data(), c);
    }
    return r;
}

std::size_t ImportanceDistribution::select_component(double u) const
{
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
}

ParameterVector ImportanceDistribution::sample(Rng& rng, std::size_t max_rejections) const
{
    if (kind_ == Kind::prior) return prior_.sample(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ParameterVector center(dim_);
    for (std::size_t attempt = 0; attempt < max_rejections; ++attempt) {
        const std::size_t k = select_component(unit(rng));
        std::copy_n(centers_.begin() + static_cast<std::ptrdiff_t>(k * dim_), dim_, center.begin());
        ParameterVector theta = kernel_.perturb(center, rng);
        if (prior_.contains(theta)) return theta;
    }
    throw ImportanceSamplingError("importance sampling rejected " + std::to_string(max_rejections) +
                                  " consecutive draws; kernel and prior support look incompatible");
}

}  // namespace mfabc
