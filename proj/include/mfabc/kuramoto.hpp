#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "mfabc/models.hpp"

namespace mfabc::kuramoto {

struct Params {
    double K = 2.0;
    double omega0 = std::numbers::pi / 3.0;
    double gamma = 0.1;

    /// Reads (K, omega0, gamma) from a parameter vector of length 3.
    static Params from_vector(const ParameterVector& theta);
    ParameterVector to_vector() const { return {K, omega0, gamma}; }
    void validate() const;
};

struct Config {
    std::size_t oscillators = 256;
    double t_end = 30.0;
    std::size_t grid_points = 3001;
    double rtol = 1e-6;
    double atol = 1e-8;
    /// Right-hand-side evaluations after which a simulation counts as failed.
    std::size_t max_rhs_evaluations = 2'000'000;

    void validate() const;
    std::vector<double> grid() const;
};

/// Order-parameter magnitude R and phase Phi sampled on the config grid.
/// Phi is as computed (possibly wrapped to (-pi, pi]).
struct Trajectory {
    std::vector<double> t;
    std::vector<double> R;
    std::vector<double> Phi;
    std::size_t rhs_evaluations = 0;
    bool failed = false;
};

/// Nominal cost of one oscillator update, used for the deterministic work
/// estimate of both fidelities.
inline constexpr double kCostPerComponentEvaluation = 5e-9;

/// M Cauchy(omega0, gamma) intrinsic velocities drawn by inverse CDF.
std::vector<double> draw_velocities(const Params& p, std::size_t m, Rng& rng);

/// d phi_i/dt for all i through the mean field, O(M).
void network_rhs(const std::vector<double>& omega, double K, const std::vector<double>& phi,
                 std::vector<double>& dphi);

Trajectory simulate_network(const Params& p, const Config& c, Rng& rng);
Trajectory simulate_reduced(const Params& p, const Config& c);

/// Unwraps in place by removing jumps larger than pi between neighbours.
void unwrap(std::vector<double>& phase);

/// (S1, S2, S3): squared time-average of R, mean phase velocity of the
/// unwrapped phase, and R at t_half by linear interpolation.
SummaryVector summarize(const std::vector<double>& t, const std::vector<double>& R,
                        std::vector<double> Phi, double t_half);

/// Weighted Euclidean norm with weights (4, 1, 1) on the squared differences.
double distance(const SummaryVector& a, const SummaryVector& b);

/// First grid time at which R is at or below the midpoint of 1 and sqrt(S1).
/// Throws std::runtime_error when R never gets there.
double half_time(const Trajectory& traj);

struct ObservedData {
    SummaryVector summary;
    double t_half = 0.0;
    std::uint64_t seed = 0;
    Params true_params;

    std::string to_json() const;
    static ObservedData from_json(const std::string& text);
};

/// One network simulation at `truth` with the data stream of `seed`.
ObservedData generate_observed(const Config& c, const Params& truth, std::uint64_t seed);

class Model : public CoupledModel {
public:
    Model(Config config, double t_half);

    const Config& config() const { return config_; }
    double t_half() const { return t_half_; }

    SimulationOutput simulate_lo(const ParameterVector& theta, Rng& rng) const override;
    SimulationOutput simulate_hi(const ParameterVector& theta, const SummaryVector* lo,
                                 Rng& rng) const override;
    double distance(const SummaryVector& a, const SummaryVector& b) const override;

private:
    Config config_;
    double t_half_;
};

}  // namespace mfabc::kuramoto
