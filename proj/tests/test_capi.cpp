#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mfabc/mfabc.h"

namespace fs = std::filesystem;

namespace {

const char* kConfig = R"({
    "model": {"oscillators": 8, "observed": "observed.json"},
    "algorithm": {"name": "abc-smc"},
    "schedule": {"thresholds": [2.0, 1.0], "stop": {"proposals": 200}},
    "run": {"seed": 9, "timing": "cost_model", "output_dir": "out"}
})";

fs::path scratch()
{
    const auto p = fs::temp_directory_path() / "mfabc_test_capi";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("numerics through the C API")
{
    const double w[] = {1.0, 2.0, 2.0};
    double ess = 0.0;
    CHECK(mfabc_ess(w, 3, &ess) == MFABC_OK);
    CHECK(ess == doctest::Approx(25.0 / 9.0));
    const double zero[] = {0.0, 0.0};
    CHECK(mfabc_ess(zero, 2, &ess) == MFABC_DEGENERATE);
    CHECK(std::strlen(mfabc_last_error()) > 0);
    CHECK(mfabc_ess(nullptr, 2, &ess) == MFABC_INVALID_ARGUMENT);

    const double coeffs[7] = {1.0, 2.0, 0.5, 0.5, 1.0, 1.0, 1.0};
    double e1 = 0.0;
    double e2 = 0.0;
    double phi = 0.0;
    CHECK(mfabc_optimal_continuation(coeffs, 0.01, 0.01, &e1, &e2, &phi) == MFABC_OK);
    CHECK(e1 == doctest::Approx(std::sqrt(0.5)));
    CHECK(e2 == doctest::Approx(std::sqrt(0.5)));
    CHECK(phi == doctest::Approx(5.82843).epsilon(1e-6));
    const double bad[7] = {1.0, 2.0, -0.5, 0.5, 1.0, 1.0, 1.0};
    CHECK(mfabc_optimal_continuation(bad, 0.01, 0.01, &e1, &e2, &phi) == MFABC_INVALID_ARGUMENT);
    CHECK(mfabc_optimal_continuation(coeffs, 0.0, 0.01, &e1, &e2, &phi) == MFABC_INVALID_ARGUMENT);

    CHECK(mfabc_derive_seed(1, 2) == mfabc_derive_seed(1, 2));
    CHECK(mfabc_derive_seed(1, 2) != mfabc_derive_seed(1, 3));
}

TEST_CASE("config errors map to status codes")
{
    mfabc_config* c = nullptr;
    CHECK(mfabc_config_parse("{\"bogus\": 1}", nullptr, &c) == MFABC_CONFIG_ERROR);
    CHECK(c == nullptr);
    CHECK(std::string(mfabc_last_error()).find("bogus") != std::string::npos);
    CHECK(mfabc_config_load("/nonexistent.json", &c) == MFABC_CONFIG_ERROR);
    CHECK(mfabc_config_parse(nullptr, nullptr, &c) == MFABC_INVALID_ARGUMENT);
}

TEST_CASE("generate, run, write and analyze through the C API")
{
    const auto dir = scratch();
    mfabc_config* c = nullptr;
    REQUIRE(mfabc_config_parse(kConfig, dir.c_str(), &c) == MFABC_OK);
    CHECK(mfabc_config_set_replicates(c, 0) == MFABC_CONFIG_ERROR);

    char* path = nullptr;
    REQUIRE(mfabc_config_observed_path(c, &path) == MFABC_OK);
    CHECK(fs::path(path) == dir / "observed.json");

    mfabc_observed* obs = nullptr;
    REQUIRE(mfabc_observed_generate(c, &obs) == MFABC_OK);
    REQUIRE(mfabc_observed_save(obs, path) == MFABC_OK);
    double s[3];
    double t_half = 0.0;
    CHECK(mfabc_observed_summary(obs, s, &t_half) == MFABC_OK);
    CHECK(t_half > 0.0);
    mfabc_observed* loaded = nullptr;
    REQUIRE(mfabc_observed_load(path, &loaded) == MFABC_OK);
    double s2[3];
    mfabc_observed_summary(loaded, s2, nullptr);
    CHECK(std::memcmp(s, s2, sizeof s) == 0);
    mfabc_string_free(path);

    std::vector<std::string> log;
    mfabc_set_log_callback([](const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); },
                           &log);
    mfabc_run* run = nullptr;
    REQUIRE(mfabc_run_execute(c, loaded, 9, &run) == MFABC_OK);
    mfabc_set_log_callback(nullptr, nullptr);
    CHECK(log.size() >= 2);
    REQUIRE(mfabc_run_generation_count(run) == 2);
    mfabc_generation_info info;
    REQUIRE(mfabc_run_generation_info(run, 1, &info) == MFABC_OK);
    CHECK(info.index == 2);
    CHECK(info.epsilon == 1.0);
    CHECK(info.proposals == 200);
    CHECK(info.high_fidelity == 200);
    CHECK(mfabc_run_generation_info(run, 2, &info) == MFABC_INVALID_ARGUMENT);
    double ess = 0.0;
    double time = 0.0;
    double eff = 0.0;
    REQUIRE(mfabc_run_overall(run, &ess, &time, &eff) == MFABC_OK);
    CHECK(eff == doctest::Approx(ess / time));
    double mean[3];
    CHECK(mfabc_run_posterior_mean(run, mean, 3) == MFABC_OK);
    CHECK(mfabc_run_posterior_mean(run, mean, 2) == MFABC_INVALID_ARGUMENT);
    REQUIRE(mfabc_run_write(run, c, (dir / "single").c_str()) == MFABC_OK);
    CHECK(fs::exists(dir / "single" / "cache_gen_2.csv"));

    char* report = nullptr;
    REQUIRE(mfabc_analyze((dir / "single").c_str(), &report) == MFABC_OK);
    CHECK(std::string(report).find("total: ESS") != std::string::npos);
    mfabc_string_free(report);

    REQUIRE(mfabc_config_set_output_dir(c, (dir / "reps").c_str()) == MFABC_OK);
    REQUIRE(mfabc_config_set_replicates(c, 2) == MFABC_OK);
    REQUIRE(mfabc_experiment_run(c, &report) == MFABC_OK);
    CHECK(std::string(report).find("over 2 runs") != std::string::npos);
    mfabc_string_free(report);

    const std::string a = (dir / "single").string();
    const std::string b = (dir / "reps").string();
    const char* paths[] = {a.c_str(), b.c_str()};
    REQUIRE(mfabc_compare(paths, 2, &report) == MFABC_OK);
    CHECK(std::string(report).find("eff_ratio") != std::string::npos);
    mfabc_string_free(report);
    CHECK(mfabc_analyze((dir / "nothing").c_str(), &report) != MFABC_OK);

    mfabc_run_free(run);
    mfabc_observed_free(obs);
    mfabc_observed_free(loaded);
    mfabc_config_free(c);
    fs::remove_all(dir);
}
