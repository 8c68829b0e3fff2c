#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfabc/mfabc.h"

namespace {

int exit_code(mfabc_status s)
{
    switch (s) {
    case MFABC_OK:
        return 0;
    case MFABC_CONFIG_ERROR:
        return 2;
    case MFABC_DEGENERATE:
        return 3;
    default:
        return 1;
    }
}

int report_failure(mfabc_status s)
{
    std::fprintf(stderr, "error: %s\n", mfabc_last_error());
    return exit_code(s);
}

void log_to_stderr(const char* line, void*)
{
    std::fprintf(stderr, "%s\n", line);
}

// Prints the report to stdout, or writes it to `out` when given.
int emit(const std::string& report, const std::string& out)
{
    if (out.empty()) {
        std::fputs(report.c_str(), stdout);
        return 0;
    }
    std::ofstream f(out);
    f << report;
    if (!f) {
        std::fprintf(stderr, "error: cannot write %s\n", out.c_str());
        return 1;
    }
    return 0;
}

std::string take(char* s)
{
    std::string r(s);
    mfabc_string_free(s);
    return r;
}

struct ConfigHandle {
    mfabc_config* ptr = nullptr;
    ~ConfigHandle() { mfabc_config_free(ptr); }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multifidelity ABC-SMC on the Kuramoto oscillator benchmark"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress progress output");

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::vector<std::string> paths;

    auto* gen = app.add_subcommand("generate-data", "Simulate the observed data set");
    gen->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("--seed", seed, "Data seed (overrides data.seed)");
    gen->add_option("--out", out, "Output JSON path (default: model.observed)");

    auto* run = app.add_subcommand("run", "Run the configured algorithm");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Master seed (overrides run.seed)");
    run->add_option("--out", out, "Output directory (overrides run.output_dir)");
    run->add_option("--replicates", replicates, "Replicate count (overrides run.replicates)")
        ->check(CLI::PositiveNumber);

    auto* analyze = app.add_subcommand("analyze", "Report ESS, time and efficiency of stored runs");
    analyze->add_option("paths", paths, "Run directories, replicate roots or cache files")->required();
    analyze->add_option("--out", out, "Write the report here instead of stdout");

    auto* compare = app.add_subcommand("compare", "Compare run groups against the first one");
    compare->add_option("paths", paths, "Run directories or replicate roots")->required()->expected(2, -1);
    compare->add_option("--out", out, "Write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (!quiet) mfabc_set_log_callback(log_to_stderr, nullptr);

    if (gen->parsed() || run->parsed()) {
        ConfigHandle cfg;
        if (auto s = mfabc_config_load(config_path.c_str(), &cfg.ptr); s != MFABC_OK) return report_failure(s);

        if (gen->parsed()) {
            if (seed) mfabc_config_set_data_seed(cfg.ptr, *seed);
            if (out.empty()) {
                char* path = nullptr;
                if (auto s = mfabc_config_observed_path(cfg.ptr, &path); s != MFABC_OK) return report_failure(s);
                out = path;
                mfabc_string_free(path);
            }
            mfabc_observed* data = nullptr;
            if (auto s = mfabc_observed_generate(cfg.ptr, &data); s != MFABC_OK) return report_failure(s);
            const auto s = mfabc_observed_save(data, out.c_str());
            double summary[3];
            double t_half = 0.0;
            mfabc_observed_summary(data, summary, &t_half);
            mfabc_observed_free(data);
            if (s != MFABC_OK) return report_failure(s);
            if (!quiet) {
                std::fprintf(stderr, "wrote %s: s1 %.6f, s2 %.6f, s3 %.6f, t_half %.4g\n", out.c_str(), summary[0],
                             summary[1], summary[2], t_half);
            }
            return 0;
        }

        if (seed) mfabc_config_set_seed(cfg.ptr, *seed);
        if (!out.empty()) mfabc_config_set_output_dir(cfg.ptr, out.c_str());
        if (replicates) mfabc_config_set_replicates(cfg.ptr, *replicates);
        char* report = nullptr;
        if (auto s = mfabc_experiment_run(cfg.ptr, &report); s != MFABC_OK) return report_failure(s);
        std::fputs(report, stdout);
        mfabc_string_free(report);
        return 0;
    }

    char* report = nullptr;
    if (analyze->parsed()) {
        std::string all;
        for (const auto& p : paths) {
            if (auto s = mfabc_analyze(p.c_str(), &report); s != MFABC_OK) return report_failure(s);
            all += take(report);
        }
        return emit(all, out);
    }
    std::vector<const char*> cpaths;
    for (const auto& p : paths) cpaths.push_back(p.c_str());
    if (auto s = mfabc_compare(cpaths.data(), cpaths.size(), &report); s != MFABC_OK) return report_failure(s);
    return emit(take(report), out);
}
