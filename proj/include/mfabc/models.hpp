#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mfabc/core.hpp"
#include "mfabc/rng.hpp"

namespace mfabc {

using SummaryVector = std::vector<double>;

/// Independent uniform distributions on a box.
class UniformPrior {
public:
    UniformPrior(std::vector<double> lower, std::vector<double> upper);

    std::size_t dimension() const { return lower_.size(); }
    double density(const ParameterVector& theta) const;
    bool contains(const ParameterVector& theta) const;
    ParameterVector sample(Rng& rng) const;

    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& upper() const { return upper_; }
    double width(std::size_t i) const { return upper_[i] - lower_[i]; }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    double density_ = 0.0;
};

/// Gaussian perturbation kernel with diagonal covariance.
class PerturbationKernel {
public:
    explicit PerturbationKernel(std::vector<double> variances);

    std::size_t dimension() const { return variances_.size(); }
    const std::vector<double>& variances() const { return variances_; }

    /// K(theta | center).
    double density(const ParameterVector& theta, const ParameterVector& center) const;
    double density(const double* theta, const double* center) const;
    ParameterVector perturb(const ParameterVector& center, Rng& rng) const;

private:
    std::vector<double> variances_;
    std::vector<double> inv_var_;
    std::vector<double> sd_;
    double norm_ = 0.0;
};

/// Lower bound on each kernel variance, relative to the squared prior width.
inline constexpr double kKernelVarianceFloor = 1e-12;

/// Twice the |w|-weighted empirical variance in every dimension.
PerturbationKernel fit_kernel(const WeightedSample& sample, const UniformPrior& prior);

class ImportanceSamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Either the prior itself, or a |w|-weighted kernel mixture over a previous
/// generation's particles truncated to the prior support. Densities are the
/// unnormalised truncated function; sampling is from its normalisation.
class ImportanceDistribution {
public:
    enum class Kind { prior, mixture };

    static ImportanceDistribution from_prior(const UniformPrior& prior);
    /// Particles with zero weight are dropped from the mixture.
    static ImportanceDistribution mixture(const WeightedSample& sample,
                                          const PerturbationKernel& kernel,
                                          const UniformPrior& prior);

    Kind kind() const { return kind_; }
    const UniformPrior& prior() const { return prior_; }
    std::size_t support_size() const { return mixture_weights_.size(); }
    const std::vector<double>& mixture_weights() const { return mixture_weights_; }
    const PerturbationKernel* kernel() const { return kind_ == Kind::mixture ? &kernel_ : nullptr; }

    double density(const ParameterVector& theta) const;

    /// Draws from the normalised distribution; mixture draws are rejected and
    /// redrawn (component included) until they fall in the prior support.
    ParameterVector sample(Rng& rng, std::size_t max_rejections = 1'000'000) const;

    /// Index of the mixture component chosen by a uniform variate in [0,1).
    std::size_t select_component(double u) const;

private:
    ImportanceDistribution(Kind kind, UniformPrior prior, PerturbationKernel kernel);

    Kind kind_;
    UniformPrior prior_;
    PerturbationKernel kernel_;
    std::size_t dim_ = 0;
    std::vector<double> centers_;          // support_size x dim, row major
    std::vector<double> mixture_weights_;  // normalised |w|
    std::vector<double> cumulative_;
};

/// Outcome of one model simulation. `work` is a deterministic cost proxy in
/// seconds, used when simulation time must be reproducible.
struct SimulationOutput {
    SummaryVector summary;
    double work = 0.0;
    bool failed = false;
};

/// A pair of model fidelities sharing one parameter space and data space.
class CoupledModel {
public:
    virtual ~CoupledModel() = default;

    virtual SimulationOutput simulate_lo(const ParameterVector& theta, Rng& rng) const = 0;
    /// `lo` is the low-fidelity output when one was simulated, else null.
    virtual SimulationOutput simulate_hi(const ParameterVector& theta, const SummaryVector* lo,
                                         Rng& rng) const = 0;
    virtual double distance(const SummaryVector& a, const SummaryVector& b) const = 0;
};

}  // namespace mfabc
