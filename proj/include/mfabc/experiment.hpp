#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfabc/kuramoto.hpp"
#include "mfabc/smc.hpp"

namespace mfabc {

/// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Algorithm { abc_rs, abc_is, abc_smc, mf_abc_rs, mf_abc_is, mf_abc_smc_alpha, mf_abc_smc };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm a);
bool is_multifidelity(Algorithm a);
/// Rejection and importance samplers run a single generation.
bool is_single_generation(Algorithm a);

struct ExperimentConfig {
    // model
    kuramoto::Config model;
    std::vector<double> prior_lower{1.0, -2.0 * std::numbers::pi, 0.0};
    std::vector<double> prior_upper{3.0, 2.0 * std::numbers::pi, 1.0};
    std::filesystem::path observed_path = "observed.json";
    // data
    std::uint64_t data_seed = 1;
    kuramoto::Params truth;
    // algorithm
    Algorithm algorithm = Algorithm::abc_smc;
    std::optional<ContinuationPolicy> policy;
    std::vector<ContinuationPolicy> policies;
    std::filesystem::path importance_cache;
    // schedule (initial_importance is filled in at run time)
    SmcSchedule schedule;
    // run
    std::uint64_t seed = 1;
    std::size_t batch_size = 100;
    unsigned threads = 1;
    TimingMode timing = TimingMode::wall_clock;
    std::size_t proposal_ceiling = 1'000'000;
    std::size_t max_rejections = 1'000'000;
    std::filesystem::path output_dir = "runs";
    std::size_t replicates = 1;

    /// Parses a JSON document; relative paths resolve against `base_dir`.
    /// Unknown keys and missing algorithm-specific fields raise ConfigError.
    static ExperimentConfig parse(const std::string& text, const std::filesystem::path& base_dir = ".");
    static ExperimentConfig load(const std::filesystem::path& path);
    std::string to_json() const;
    void validate() const;

    UniformPrior prior() const { return UniformPrior(prior_lower, prior_upper); }
    SamplerOptions sampler_options(std::uint64_t run_seed) const;
};

/// Seed of replicate r: the master seed for a single replicate, otherwise a
/// derived seed per replicate.
std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate, std::size_t replicates);

struct RunResult {
    Algorithm algorithm = Algorithm::abc_smc;
    std::uint64_t seed = 0;
    std::vector<GenerationResult> generations;
};

using ProgressCallback = std::function<void(const std::string&)>;

/// Runs the configured algorithm once against `observed`.
RunResult run_experiment(const ExperimentConfig& config, const kuramoto::ObservedData& observed,
                         std::uint64_t seed, const ProgressCallback& progress = {});

/// Writes cache_gen_<t>.csv, generations.csv and run.json into `dir`.
void write_run(const RunResult& run, const ExperimentConfig& config, const std::filesystem::path& dir);

/// Runs every replicate and writes its artifacts; returns the run directories
/// (the output directory itself for one replicate, rep_<r> below it otherwise).
std::vector<std::filesystem::path> run_replicates(const ExperimentConfig& config,
                                                  const ProgressCallback& progress = {});

}  // namespace mfabc
