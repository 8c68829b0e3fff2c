#ifndef MFABC_MFABC_H
#define MFABC_MFABC_H

#include <stddef.h>
#include <stdint.h>

#if defined(MFABC_BUILDING)
#define MFABC_API __attribute__((visibility("default")))
#else
#define MFABC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfabc_status {
    MFABC_OK = 0,
    MFABC_ERROR = 1,
    MFABC_CONFIG_ERROR = 2,
    MFABC_DEGENERATE = 3,
    MFABC_IO_ERROR = 4,
    MFABC_INVALID_ARGUMENT = 5
} mfabc_status;

typedef struct mfabc_config mfabc_config;
typedef struct mfabc_observed mfabc_observed;
typedef struct mfabc_run mfabc_run;

/* Message of the last failed call on this thread; never NULL. */
MFABC_API const char* mfabc_last_error(void);

/* Receives progress lines from long-running calls; NULL disables. */
typedef void (*mfabc_log_fn)(const char* line, void* user);
MFABC_API void mfabc_set_log_callback(mfabc_log_fn fn, void* user);

/* Strings returned by the library are released with this. */
MFABC_API void mfabc_string_free(char* s);

/* ---- configuration ---- */

MFABC_API mfabc_status mfabc_config_load(const char* path, mfabc_config** out);
/* Relative paths in the document resolve against base_dir (NULL: "."). */
MFABC_API mfabc_status mfabc_config_parse(const char* json, const char* base_dir, mfabc_config** out);
MFABC_API mfabc_status mfabc_config_set_seed(mfabc_config* c, uint64_t seed);
MFABC_API mfabc_status mfabc_config_set_data_seed(mfabc_config* c, uint64_t seed);
MFABC_API mfabc_status mfabc_config_set_output_dir(mfabc_config* c, const char* dir);
MFABC_API mfabc_status mfabc_config_set_observed_path(mfabc_config* c, const char* path);
/* Resolved path of the observed-data file. */
MFABC_API mfabc_status mfabc_config_observed_path(const mfabc_config* c, char** out);
MFABC_API mfabc_status mfabc_config_set_replicates(mfabc_config* c, size_t replicates);
/* The effective configuration as JSON, all defaults filled in. */
MFABC_API mfabc_status mfabc_config_to_json(const mfabc_config* c, char** out);
MFABC_API void mfabc_config_free(mfabc_config* c);

/* ---- observed data ---- */

/* Simulates the network at the configured true parameters and data seed. */
MFABC_API mfabc_status mfabc_observed_generate(const mfabc_config* c, mfabc_observed** out);
MFABC_API mfabc_status mfabc_observed_load(const char* path, mfabc_observed** out);
MFABC_API mfabc_status mfabc_observed_save(const mfabc_observed* d, const char* path);
/* summary receives (s1, s2, s3). */
MFABC_API mfabc_status mfabc_observed_summary(const mfabc_observed* d, double summary[3], double* t_half);
MFABC_API void mfabc_observed_free(mfabc_observed* d);

/* ---- runs ---- */

typedef struct mfabc_generation_info {
    size_t index;
    double epsilon;
    double eta1;
    double eta2;
    size_t proposals;
    size_t high_fidelity;
    double ess;
    double sim_time;
    double weight_sum;
    double predicted_efficiency;
    int target_unreachable;
} mfabc_generation_info;

/* One run of the configured algorithm. observed may be NULL, in which case
   the config's observed-data file is read. */
MFABC_API mfabc_status mfabc_run_execute(const mfabc_config* c, const mfabc_observed* observed,
                                         uint64_t seed, mfabc_run** out);
MFABC_API size_t mfabc_run_generation_count(const mfabc_run* r);
/* t is 0-based. */
MFABC_API mfabc_status mfabc_run_generation_info(const mfabc_run* r, size_t t, mfabc_generation_info* out);
/* Final-generation ESS over the simulation time of all generations. */
MFABC_API mfabc_status mfabc_run_overall(const mfabc_run* r, double* ess, double* sim_time, double* efficiency);
MFABC_API mfabc_status mfabc_run_posterior_mean(const mfabc_run* r, double* out, size_t dim);
MFABC_API mfabc_status mfabc_run_write(const mfabc_run* r, const mfabc_config* c, const char* dir);
MFABC_API void mfabc_run_free(mfabc_run* r);

/* Runs every replicate of the config and writes artifacts under its output
   directory. *report (optional) receives the analysis of the written runs. */
MFABC_API mfabc_status mfabc_experiment_run(const mfabc_config* c, char** report);

/* ---- analysis ---- */

/* path: a run directory, a replicate root, or one cache CSV. */
MFABC_API mfabc_status mfabc_analyze(const char* path, char** report);
/* Compares n run groups; the first is the baseline for ratio columns. */
MFABC_API mfabc_status mfabc_compare(const char* const* paths, size_t n, char** report);

/* ---- numerics ---- */

MFABC_API mfabc_status mfabc_ess(const double* weights, size_t n, double* out);
/* coefficients: z, w, w_fp, w_fn, t_lo, t_hi_p, t_hi_n. */
MFABC_API mfabc_status mfabc_optimal_continuation(const double coefficients[7], double rho1, double rho2,
                                                  double* eta1, double* eta2, double* phi);
MFABC_API uint64_t mfabc_derive_seed(uint64_t master, uint64_t index);

#ifdef __cplusplus
}
#endif

#endif
