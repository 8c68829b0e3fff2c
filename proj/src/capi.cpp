#include "mfabc/mfabc.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>

#include "mfabc/analysis.hpp"
#include "mfabc/experiment.hpp"

struct mfabc_config {
    mfabc::ExperimentConfig config;
};

struct mfabc_observed {
    mfabc::kuramoto::ObservedData data;
};

struct mfabc_run {
    mfabc::RunResult result;
};

namespace {

thread_local std::string last_error;

std::mutex log_mutex;
mfabc_log_fn log_fn = nullptr;
void* log_user = nullptr;

void log_line(const std::string& line)
{
    std::lock_guard lock(log_mutex);
    if (log_fn) log_fn(line.c_str(), log_user);
}

mfabc_status fail(mfabc_status s, const std::string& what)
{
    last_error = what;
    return s;
}

// Maps exceptions thrown by f onto status codes.
template <class F>
mfabc_status guard(F&& f)
{
    try {
        f();
        last_error.clear();
        return MFABC_OK;
    } catch (const mfabc::ConfigError& e) {
        return fail(MFABC_CONFIG_ERROR, e.what());
    } catch (const mfabc::DegenerateRunError& e) {
        return fail(MFABC_DEGENERATE, e.what());
    } catch (const mfabc::DegenerateSampleError& e) {
        return fail(MFABC_DEGENERATE, e.what());
    } catch (const mfabc::GenerationAbort& e) {
        return fail(MFABC_DEGENERATE, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(MFABC_IO_ERROR, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(MFABC_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(MFABC_ERROR, e.what());
    } catch (...) {
        return fail(MFABC_ERROR, "unknown error");
    }
}

char* dup(const std::string& s)
{
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

std::string read_file(const char* path)
{
    std::ifstream in(path);
    if (!in) throw std::filesystem::filesystem_error("cannot read file", path, std::make_error_code(std::errc::io_error));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

#define MFABC_REQUIRE(cond)                                                  \
    do {                                                                     \
        if (!(cond)) return fail(MFABC_INVALID_ARGUMENT, "null argument: " #cond); \
    } while (0)

}  // namespace

extern "C" {

const char* mfabc_last_error(void)
{
    return last_error.c_str();
}

void mfabc_set_log_callback(mfabc_log_fn fn, void* user)
{
    std::lock_guard lock(log_mutex);
    log_fn = fn;
    log_user = user;
}

void mfabc_string_free(char* s)
{
    std::free(s);
}

mfabc_status mfabc_config_load(const char* path, mfabc_config** out)
{
    MFABC_REQUIRE(path && out);
    return guard([&] { *out = new mfabc_config{mfabc::ExperimentConfig::load(path)}; });
}

mfabc_status mfabc_config_parse(const char* json, const char* base_dir, mfabc_config** out)
{
    MFABC_REQUIRE(json && out);
    return guard([&] { *out = new mfabc_config{mfabc::ExperimentConfig::parse(json, base_dir ? base_dir : ".")}; });
}

mfabc_status mfabc_config_set_seed(mfabc_config* c, uint64_t seed)
{
    MFABC_REQUIRE(c);
    c->config.seed = seed;
    return MFABC_OK;
}

mfabc_status mfabc_config_set_data_seed(mfabc_config* c, uint64_t seed)
{
    MFABC_REQUIRE(c);
    c->config.data_seed = seed;
    return MFABC_OK;
}

mfabc_status mfabc_config_set_output_dir(mfabc_config* c, const char* dir)
{
    MFABC_REQUIRE(c && dir);
    c->config.output_dir = dir;
    return MFABC_OK;
}

mfabc_status mfabc_config_set_observed_path(mfabc_config* c, const char* path)
{
    MFABC_REQUIRE(c && path);
    c->config.observed_path = path;
    return MFABC_OK;
}

mfabc_status mfabc_config_observed_path(const mfabc_config* c, char** out)
{
    MFABC_REQUIRE(c && out);
    return guard([&] { *out = dup(c->config.observed_path.string()); });
}

mfabc_status mfabc_config_set_replicates(mfabc_config* c, size_t replicates)
{
    MFABC_REQUIRE(c);
    if (replicates == 0) return fail(MFABC_CONFIG_ERROR, "replicates must be positive");
    c->config.replicates = replicates;
    return MFABC_OK;
}

mfabc_status mfabc_config_to_json(const mfabc_config* c, char** out)
{
    MFABC_REQUIRE(c && out);
    return guard([&] { *out = dup(c->config.to_json()); });
}

void mfabc_config_free(mfabc_config* c)
{
    delete c;
}

mfabc_status mfabc_observed_generate(const mfabc_config* c, mfabc_observed** out)
{
    MFABC_REQUIRE(c && out);
    return guard([&] {
        *out = new mfabc_observed{mfabc::kuramoto::generate_observed(c->config.model, c->config.truth, c->config.data_seed)};
    });
}

mfabc_status mfabc_observed_load(const char* path, mfabc_observed** out)
{
    MFABC_REQUIRE(path && out);
    return guard([&] { *out = new mfabc_observed{mfabc::kuramoto::ObservedData::from_json(read_file(path))}; });
}

mfabc_status mfabc_observed_save(const mfabc_observed* d, const char* path)
{
    MFABC_REQUIRE(d && path);
    return guard([&] {
        const std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p);
        out << d->data.to_json();
        if (!out) throw std::filesystem::filesystem_error("cannot write file", p, std::make_error_code(std::errc::io_error));
    });
}

mfabc_status mfabc_observed_summary(const mfabc_observed* d, double summary[3], double* t_half)
{
    MFABC_REQUIRE(d && summary);
    for (int i = 0; i < 3; ++i) summary[i] = d->data.summary.at(static_cast<std::size_t>(i));
    if (t_half) *t_half = d->data.t_half;
    return MFABC_OK;
}

void mfabc_observed_free(mfabc_observed* d)
{
    delete d;
}

mfabc_status mfabc_run_execute(const mfabc_config* c, const mfabc_observed* observed, uint64_t seed,
                               mfabc_run** out)
{
    MFABC_REQUIRE(c && out);
    return guard([&] {
        mfabc::kuramoto::ObservedData data;
        if (observed) {
            data = observed->data;
        } else {
            data = mfabc::kuramoto::ObservedData::from_json(read_file(c->config.observed_path.c_str()));
        }
        *out = new mfabc_run{mfabc::run_experiment(c->config, data, seed, log_line)};
    });
}

size_t mfabc_run_generation_count(const mfabc_run* r)
{
    return r ? r->result.generations.size() : 0;
}

mfabc_status mfabc_run_generation_info(const mfabc_run* r, size_t t, mfabc_generation_info* out)
{
    MFABC_REQUIRE(r && out);
    if (t >= r->result.generations.size()) return fail(MFABC_INVALID_ARGUMENT, "generation index out of range");
    return guard([&] {
        const auto& g = r->result.generations[t];
        out->index = g.index;
        out->epsilon = g.epsilon_used;
        out->eta1 = g.policy_used.eta1;
        out->eta2 = g.policy_used.eta2;
        out->proposals = g.cache.entries.size();
        out->high_fidelity = g.cache.high_fidelity_count();
        out->ess = mfabc::compute_ess(g.sample.weights());
        out->sim_time = g.sample.total_sim_time;
        out->weight_sum = g.sample.weight_sum();
        out->predicted_efficiency = g.predicted_efficiency;
        out->target_unreachable = g.target_unreachable ? 1 : 0;
    });
}

mfabc_status mfabc_run_overall(const mfabc_run* r, double* ess, double* sim_time, double* efficiency)
{
    MFABC_REQUIRE(r);
    return guard([&] {
        const auto rep = mfabc::overall_efficiency(r->result.generations);
        if (ess) *ess = rep.ess;
        if (sim_time) *sim_time = rep.sim_time;
        if (efficiency) *efficiency = rep.observed_efficiency;
    });
}

mfabc_status mfabc_run_posterior_mean(const mfabc_run* r, double* out, size_t dim)
{
    MFABC_REQUIRE(r && out);
    return guard([&] {
        const auto m = mfabc::posterior_mean(r->result.generations.back().sample);
        if (dim != m.size()) throw std::invalid_argument("dimension mismatch");
        std::copy(m.begin(), m.end(), out);
    });
}

mfabc_status mfabc_run_write(const mfabc_run* r, const mfabc_config* c, const char* dir)
{
    MFABC_REQUIRE(r && c && dir);
    return guard([&] { mfabc::write_run(r->result, c->config, dir); });
}

void mfabc_run_free(mfabc_run* r)
{
    delete r;
}

mfabc_status mfabc_experiment_run(const mfabc_config* c, char** report)
{
    MFABC_REQUIRE(c);
    return guard([&] {
        const auto dirs = mfabc::run_replicates(c->config, log_line);
        if (report) {
            std::vector<mfabc::RunSummary> runs;
            for (const auto& d : dirs) runs.push_back(mfabc::load_run(d));
            *report = dup(mfabc::analyze_report(runs));
        }
    });
}

mfabc_status mfabc_analyze(const char* path, char** report)
{
    MFABC_REQUIRE(path && report);
    return guard([&] { *report = dup(mfabc::analyze_report(mfabc::load_runs(path))); });
}

mfabc_status mfabc_compare(const char* const* paths, size_t n, char** report)
{
    MFABC_REQUIRE(paths && report);
    if (n == 0) return fail(MFABC_INVALID_ARGUMENT, "nothing to compare");
    return guard([&] {
        std::vector<std::vector<mfabc::RunSummary>> groups;
        std::vector<std::string> labels;
        for (size_t i = 0; i < n; ++i) {
            if (!paths[i]) throw std::invalid_argument("null path");
            groups.push_back(mfabc::load_runs(paths[i]));
            labels.emplace_back(paths[i]);
        }
        *report = dup(mfabc::compare_report(groups, labels));
    });
}

mfabc_status mfabc_ess(const double* weights, size_t n, double* out)
{
    MFABC_REQUIRE(weights && out);
    return guard([&] { *out = mfabc::compute_ess(std::span<const double>(weights, n)); });
}

mfabc_status mfabc_optimal_continuation(const double coefficients[7], double rho1, double rho2, double* eta1,
                                        double* eta2, double* phi)
{
    MFABC_REQUIRE(coefficients && eta1 && eta2);
    return guard([&] {
        mfabc::EfficiencyCoefficients c{coefficients[0], coefficients[1], coefficients[2], coefficients[3],
                                        coefficients[4], coefficients[5], coefficients[6]};
        c.validate();
        const auto opt = mfabc::optimal_continuation(c, {rho1, rho2});
        *eta1 = opt.policy.eta1;
        *eta2 = opt.policy.eta2;
        if (phi) *phi = opt.phi;
    });
}

uint64_t mfabc_derive_seed(uint64_t master, uint64_t index)
{
    return mfabc::derive_seed({master, index});
}

}  // extern "C"
