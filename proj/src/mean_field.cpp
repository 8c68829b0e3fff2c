#include "mean_field.hpp"

#include <cmath>

#if defined(__x86_64__) && defined(__GNUC__)
#define MFABC_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define MFABC_CLONES
#endif

namespace mfabc::kuramoto::detail {

MFABC_CLONES void mean_field_sums(const double* __restrict phi, double* __restrict c, double* __restrict s,
                     std::size_t n, double& zr, double& zi)
{
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) c[i] = std::cos(phi[i]);
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(phi[i]);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a += c[i];
        b += s[i];
    }
    zr = a;
    zi = b;
}

}  // namespace mfabc::kuramoto::detail
