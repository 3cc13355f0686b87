/* C interface to the lodae amplitude-estimation library. */
#ifndef LODAE_H
#define LODAE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LODAE_API __declspec(dllexport)
#else
#define LODAE_API __attribute__((visibility("default")))
#endif

typedef enum lodae_status {
  LODAE_OK = 0,
  LODAE_INVALID_ARGUMENT = 1,
  LODAE_OUT_OF_RANGE = 2,
  LODAE_NUMERICAL = 3,
  LODAE_INFEASIBLE = 4,
  LODAE_IO = 5,
  LODAE_CONFIG = 6,
  LODAE_INTERNAL = 99
} lodae_status;

typedef struct lodae_noise_model lodae_noise_model;
typedef struct lodae_circuit lodae_circuit;
typedef struct lodae_experiment lodae_experiment;

typedef struct lodae_counts {
  int depth;
  int64_t n_good;
  int64_t n_bad;
  int64_t n_discarded;
} lodae_counts;

typedef struct lodae_estimate {
  double theta_hat;
  double p_hat;
  int64_t oracle_calls;
  int depth;
} lodae_estimate;

typedef struct lodae_schedule_entry {
  int depth;
  int64_t shots;
} lodae_schedule_entry;

/* Message of the last failure on this thread; empty if none. */
LODAE_API const char* lodae_last_error_message(void);
LODAE_API const char* lodae_status_name(lodae_status status);
LODAE_API const char* lodae_version(void);

/* Noise models. gammas has n_gamma entries, one per depth from 0. */
LODAE_API lodae_status lodae_noise_create(double beta_readout, const double* gammas, size_t n_gamma,
                                          double leak_prob, lodae_noise_model** out);
LODAE_API lodae_status lodae_noise_create_reference_default(int max_depth, lodae_noise_model** out);
LODAE_API lodae_status lodae_noise_set_correlation(lodae_noise_model* model, double p_switch,
                                                   double burst_scale, double burst_fraction);
LODAE_API lodae_status lodae_noise_eta(const lodae_noise_model* model, int depth, double* eta);
LODAE_API void lodae_noise_destroy(lodae_noise_model* model);

/* Circuits. x and y are unit 4-vectors. */
LODAE_API lodae_status lodae_circuit_build_iterated(const double x[4], const double y[4], int t,
                                                    lodae_circuit** out);
/* Replaces every RBS gate by its Hadamard/CZ/Ry decomposition. */
LODAE_API lodae_status lodae_circuit_compile(const lodae_circuit* circuit, lodae_circuit** out);
LODAE_API lodae_status lodae_circuit_two_qubit_stats(const lodae_circuit* circuit, size_t* count,
                                                     size_t* depth);
LODAE_API lodae_status lodae_circuit_gate_count(const lodae_circuit* circuit, size_t* count);
/* Outcome distribution over the 16 basis states, qubit 0 most significant. */
LODAE_API lodae_status lodae_circuit_probabilities(const lodae_circuit* circuit, double out[16]);
LODAE_API void lodae_circuit_destroy(lodae_circuit* circuit);

/* Estimators. noise may be NULL for the noiseless likelihood. */
LODAE_API lodae_status lodae_mle_estimate(const lodae_counts* counts, size_t n, double epsilon,
                                          const lodae_noise_model* noise, lodae_estimate* out);
LODAE_API lodae_status lodae_crt_solve(int64_t r1, int64_t n1, int64_t r2, int64_t n2, int64_t* out);
/* Exact-probability reconstruction: p_d and p_{d-1} at depth max_depth. */
LODAE_API lodae_status lodae_crt_reconstruct(double p_d, double p_d_minus_1, double theta_prime,
                                             int max_depth, double* theta_hat);

/* Scheduling. */
LODAE_API lodae_status lodae_fisher_noisy(double nu, double n_shots, int max_depth,
                                          const double* gammas, size_t n_gamma, double* out);
LODAE_API lodae_status lodae_optimize_exponent(double target_eps, double n_shots, int max_depth,
                                               const double* gammas, size_t n_gamma, double* nu);
/* Writes at most cap entries; *needed receives max_depth + 1. */
LODAE_API lodae_status lodae_power_law_schedule(double nu, int64_t n_shots, int max_depth,
                                                lodae_schedule_entry* out, size_t cap, size_t* needed);

/* Experiments. */
LODAE_API lodae_status lodae_experiment_create_default(lodae_experiment** out);
LODAE_API lodae_status lodae_experiment_create_from_json(const char* json, lodae_experiment** out);
LODAE_API lodae_status lodae_experiment_create_from_file(const char* path, lodae_experiment** out);
LODAE_API lodae_status lodae_experiment_set_seed(lodae_experiment* exp, uint64_t seed);
LODAE_API lodae_status lodae_experiment_set_output_dir(lodae_experiment* exp, const char* dir);
/* Comma-separated subset of direct,mle,crt,hybrid,powerlaw. */
LODAE_API lodae_status lodae_experiment_set_algorithms(lodae_experiment* exp, const char* list);
/* Runs the experiment and writes its files to the output directory. */
LODAE_API lodae_status lodae_experiment_run(lodae_experiment* exp);
/* Writes calibration.json to the output directory. */
LODAE_API lodae_status lodae_experiment_calibrate(lodae_experiment* exp);
/* Fits damping rates from counts_csv, or from freshly simulated shots if NULL.
   Writes noise_fit.json to the output directory. */
LODAE_API lodae_status lodae_experiment_fit_noise(lodae_experiment* exp, const char* counts_csv);
/* param is max_depth, epsilon or shots. */
LODAE_API lodae_status lodae_experiment_sweep(lodae_experiment* exp, const char* param,
                                              const double* values, size_t n);
/* Copies the effective configuration as JSON; *needed includes the terminator. */
LODAE_API lodae_status lodae_experiment_config_json(const lodae_experiment* exp, char* buf,
                                                    size_t cap, size_t* needed);
LODAE_API void lodae_experiment_destroy(lodae_experiment* exp);

/* Resource table CSV for t = 0..max_depth; *needed includes the terminator. */
LODAE_API lodae_status lodae_resource_table_csv(int max_depth, char* buf, size_t cap, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
