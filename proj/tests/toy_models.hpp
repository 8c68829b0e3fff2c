#pragma once

#include <array>
#include <cmath>
#include <random>

#include "mfabc/models.hpp"

namespace toy {

// Parameter space [0,1] split into two cells at 0.5. Each fidelity reports a
// single summary that is 0 (inside the neighbourhood of y_obs = 0 for any
// epsilon in (0, 1]) or 1 (outside). The joint law of the two indicators
// depends on the cell only, so every quantity can be enumerated.
struct CellLaw {
    double p_lo;       // P(lo inside)
    double p_hi_if_in;  // P(hi inside | lo inside)
    double p_hi_if_out; // P(hi inside | lo outside)
    double t_lo;       // cost of the low-fidelity model (seconds)
    double t_hi;       // cost of the high-fidelity model (seconds)
};

class TwoCellModel : public mfabc::CoupledModel {
public:
    explicit TwoCellModel(std::array<CellLaw, 2> cells) : cells_(cells) {}

    static std::size_t cell(const mfabc::ParameterVector& theta) { return theta[0] < 0.5 ? 0 : 1; }
    const CellLaw& law(std::size_t k) const { return cells_[k]; }

    mfabc::SimulationOutput simulate_lo(const mfabc::ParameterVector& theta, mfabc::Rng& rng) const override
    {
        const auto& c = cells_[cell(theta)];
        const bool in = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < c.p_lo;
        return {{in ? 0.0 : 1.0}, c.t_lo, false};
    }

    mfabc::SimulationOutput simulate_hi(const mfabc::ParameterVector& theta, const mfabc::SummaryVector* lo,
                                        mfabc::Rng& rng) const override
    {
        const auto& c = cells_[cell(theta)];
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        bool lo_in = false;
        if (lo) {
            lo_in = (*lo)[0] == 0.0;
        } else {
            // Without a low-fidelity draw, sample the hi marginal directly.
            lo_in = unif(rng) < c.p_lo;
        }
        const double p = lo_in ? c.p_hi_if_in : c.p_hi_if_out;
        const bool in = unif(rng) < p;
        return {{in ? 0.0 : 1.0}, c.t_hi, false};
    }

    double distance(const mfabc::SummaryVector& a, const mfabc::SummaryVector& b) const override
    {
        return std::abs(a[0] - b[0]);
    }

private:
    std::array<CellLaw, 2> cells_;
};

// Gaussian location model on theta in [-5, 5]: y = theta + N(0, 1). The low
// fidelity sees theta + N(0, 1) too, and the high fidelity perturbs the
// low-fidelity output by N(0, 0.3^2) when one exists.
class GaussianPair : public mfabc::CoupledModel {
public:
    mfabc::SimulationOutput simulate_lo(const mfabc::ParameterVector& theta, mfabc::Rng& rng) const override
    {
        std::normal_distribution<double> n(0.0, 1.0);
        return {{theta[0] + n(rng)}, 1e-4, false};
    }

    mfabc::SimulationOutput simulate_hi(const mfabc::ParameterVector& theta, const mfabc::SummaryVector* lo,
                                        mfabc::Rng& rng) const override
    {
        std::normal_distribution<double> n(0.0, 1.0);
        const double base = lo ? (*lo)[0] : theta[0] + n(rng);
        return {{base + 0.3 * n(rng)}, 1e-2, false};
    }

    double distance(const mfabc::SummaryVector& a, const mfabc::SummaryVector& b) const override
    {
        return std::abs(a[0] - b[0]);
    }
};

}  // namespace toy
