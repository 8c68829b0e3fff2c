#pragma once

#include <cstddef>

namespace mfabc::kuramoto::detail {

/// c[i] = cos(phi[i]), s[i] = sin(phi[i]); returns the sums through zr, zi.
/// Built with vectorised libm calls, so results may differ from std::sin in
/// the last bits.
void mean_field_sums(const double* phi, double* c, double* s, std::size_t n, double& zr, double& zi);

}  // namespace mfabc::kuramoto::detail
