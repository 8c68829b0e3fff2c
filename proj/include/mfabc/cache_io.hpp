#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfabc/samplers.hpp"

namespace mfabc {

/// One generation's cache as stored on disk. The threshold is not part of the
/// file and is left at zero by the reader.
struct StoredGeneration {
    std::size_t generation = 0;
    ParticleCache cache;
};

/// Header: generation,index,theta_1..theta_D,q_value,alpha,u,tilde_d,
/// tilde_t_ns,hi_present,d,t_ns,weight. Reals are written with 17 significant
/// digits; times as integer nanoseconds; absent high-fidelity fields as empty.
void write_cache_csv(std::ostream& out, std::size_t generation, const ParticleCache& cache);
void write_cache_csv(const std::filesystem::path& path, std::size_t generation, const ParticleCache& cache);

/// Rows grouped by generation, in file order. Throws std::runtime_error on a
/// malformed file.
std::vector<StoredGeneration> read_cache_csv(std::istream& in);
std::vector<StoredGeneration> read_cache_csv(const std::filesystem::path& path);

/// Integer nanoseconds for a time in seconds.
long long to_ns(double seconds);

}  // namespace mfabc
