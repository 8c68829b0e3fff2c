#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfabc/cache_io.hpp"
#include "mfabc/core.hpp"

namespace mfabc {

struct GenerationSummary {
    std::size_t generation = 0;
    std::optional<double> epsilon;
    std::optional<double> eta1;
    std::optional<double> eta2;
    std::size_t proposals = 0;
    std::size_t high_fidelity = 0;
    double ess = 0.0;
    double sim_time = 0.0;
    double time_per_proposal = 0.0;
    double efficiency = 0.0;
    ParameterVector posterior_mean;
};

struct RunSummary {
    std::string label;
    std::vector<GenerationSummary> generations;
    std::size_t proposals = 0;
    double ess = 0.0;       // final generation
    double sim_time = 0.0;  // all generations
    double efficiency = 0.0;
    /// Simulation time per proposal over generations 2 onwards (all
    /// generations for a single-generation run).
    double later_time_per_proposal = 0.0;
    ParameterVector posterior_mean;
};

/// Summary of stored generations; thresholds and continuation probabilities
/// are taken from `generations_csv` when given.
RunSummary summarize_caches(const std::vector<StoredGeneration>& stored, const std::string& label,
                            const std::filesystem::path& generations_csv = {});

/// A run directory (cache_gen_*.csv, optional generations.csv) or one cache file.
RunSummary load_run(const std::filesystem::path& path);

/// All runs under `path`: its rep_* subdirectories when present, else `path`.
std::vector<RunSummary> load_runs(const std::filesystem::path& path);

std::string analyze_report(const std::vector<RunSummary>& runs);

/// Mean and spread of each group, with ratios against the first group.
std::string compare_report(const std::vector<std::vector<RunSummary>>& groups,
                           const std::vector<std::string>& labels);

}  // namespace mfabc
