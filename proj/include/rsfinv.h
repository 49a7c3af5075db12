/* rsfinv.h - C interface to the rate-and-state friction simulator and
 * critical-slip-distance inversion library.
 *
 * All entry points return rsfinv_status; 0 is success. On failure a
 * human-readable message is available from rsfinv_last_error() until the
 * next failing call on the same thread. Objects are opaque handles that
 * must be released with their matching _free function.
 */
#ifndef RSFINV_H
#define RSFINV_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define RSFINV_API __declspec(dllexport)
#else
#  define RSFINV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsfinv_status {
  RSFINV_OK = 0,
  RSFINV_ERR_VALIDATION = 1, /* invalid parameters or configuration */
  RSFINV_ERR_SOLVER = 2,     /* forward integration failed */
  RSFINV_ERR_INVERSION = 3,  /* fit, posterior, or sampling failed */
  RSFINV_ERR_IO = 4          /* file parsing or persistence failed */
} rsfinv_status;

RSFINV_API const char* rsfinv_version(void);

/* Message for the calling thread's most recent failure ("" if none). */
RSFINV_API const char* rsfinv_last_error(void);

/* ---- configuration ----------------------------------------------------- */

typedef struct rsfinv_config rsfinv_config;

RSFINV_API rsfinv_config* rsfinv_config_new(void);
RSFINV_API void rsfinv_config_free(rsfinv_config* cfg);

/* Merge a sectioned key=value file. */
RSFINV_API rsfinv_status rsfinv_config_load(rsfinv_config* cfg, const char* path);

/* Set one "section.key" (e.g. "model.d_c", "solver.rel_tol"). */
RSFINV_API rsfinv_status rsfinv_config_set(rsfinv_config* cfg, const char* key,
                                           const char* value);

/* Copy the current value of a key into buf (truncating if needed). */
RSFINV_API rsfinv_status rsfinv_config_get(const rsfinv_config* cfg, const char* key,
                                           char* buf, size_t buf_size);

/* Validate the full configuration without running anything. */
RSFINV_API rsfinv_status rsfinv_config_validate(const rsfinv_config* cfg);

/* ---- simulation -------------------------------------------------------- */

typedef struct rsfinv_trajectory rsfinv_trajectory;

/* Integrate the slider system for the given d_c under cfg's model,
 * forcing and solver settings. */
RSFINV_API rsfinv_status rsfinv_simulate(const rsfinv_config* cfg, double d_c,
                                         rsfinv_trajectory** out);
RSFINV_API void rsfinv_trajectory_free(rsfinv_trajectory* traj);
RSFINV_API size_t rsfinv_trajectory_size(const rsfinv_trajectory* traj);

enum {
  RSFINV_COL_T = 0,
  RSFINV_COL_MU = 1,
  RSFINV_COL_THETA = 2,
  RSFINV_COL_V = 3,
  RSFINV_COL_A = 4
};

/* Copy one column into out (length rsfinv_trajectory_size). */
RSFINV_API rsfinv_status rsfinv_trajectory_column(const rsfinv_trajectory* traj, int column,
                                                  double* out, size_t out_len);
RSFINV_API rsfinv_status rsfinv_trajectory_write_csv(const rsfinv_trajectory* traj,
                                                     const char* path);

/* ---- observations ------------------------------------------------------ */

typedef struct rsfinv_timeseries rsfinv_timeseries;

/* Load a seismogram (CSV "t,a" or fixed-rate single column). unit_hint
 * may be "g", "m_s2", "um_s2", or NULL when the file tags its unit. The
 * series is converted to um/s^2. */
RSFINV_API rsfinv_status rsfinv_timeseries_read(const char* path, const char* unit_hint,
                                                rsfinv_timeseries** out);

/* Synthesize observations per cfg's [synth] section. */
RSFINV_API rsfinv_status rsfinv_synthesize(const rsfinv_config* cfg, rsfinv_timeseries** out);

RSFINV_API void rsfinv_timeseries_free(rsfinv_timeseries* ts);
RSFINV_API size_t rsfinv_timeseries_size(const rsfinv_timeseries* ts);
RSFINV_API rsfinv_status rsfinv_timeseries_data(const rsfinv_timeseries* ts, double* times,
                                                double* values, size_t len);
RSFINV_API rsfinv_status rsfinv_timeseries_write_csv(const rsfinv_timeseries* ts,
                                                     const char* path);

/* ---- inversion --------------------------------------------------------- */

typedef struct rsfinv_fit_result {
  double d_c_hat;
  double sse;
  double bracket_lo;
  double bracket_hi;
  int boundary;
  int multimodal;
  int degenerate;
} rsfinv_fit_result;

RSFINV_API rsfinv_status rsfinv_fit(const rsfinv_config* cfg, const rsfinv_timeseries* obs,
                                    rsfinv_fit_result* out);

typedef struct rsfinv_posterior rsfinv_posterior;

RSFINV_API rsfinv_status rsfinv_grid_posterior(const rsfinv_config* cfg,
                                               const rsfinv_timeseries* obs,
                                               rsfinv_posterior** out);
RSFINV_API void rsfinv_posterior_free(rsfinv_posterior* post);
RSFINV_API size_t rsfinv_posterior_size(const rsfinv_posterior* post);

enum { RSFINV_POST_DC = 0, RSFINV_POST_LOGLIKE = 1, RSFINV_POST_DENSITY = 2 };

RSFINV_API rsfinv_status rsfinv_posterior_column(const rsfinv_posterior* post, int column,
                                                 double* out, size_t out_len);
RSFINV_API rsfinv_status rsfinv_posterior_write_csv(const rsfinv_posterior* post,
                                                    const char* path);

typedef struct rsfinv_chain rsfinv_chain;

RSFINV_API rsfinv_status rsfinv_mcmc(const rsfinv_config* cfg, const rsfinv_timeseries* obs,
                                     rsfinv_chain** out);
RSFINV_API void rsfinv_chain_free(rsfinv_chain* chain);
RSFINV_API size_t rsfinv_chain_size(const rsfinv_chain* chain);
RSFINV_API rsfinv_status rsfinv_chain_samples(const rsfinv_chain* chain, double* out,
                                              size_t out_len);
RSFINV_API double rsfinv_chain_acceptance_rate(const rsfinv_chain* chain);
RSFINV_API rsfinv_status rsfinv_chain_write_csv(const rsfinv_chain* chain, const char* path);

typedef struct rsfinv_summary {
  double mean;
  double mode;
  double std_dev;
  double ci_level;
  double ci_lo;
  double ci_hi;
} rsfinv_summary;

RSFINV_API rsfinv_status rsfinv_posterior_summary(const rsfinv_posterior* post, double level,
                                                  rsfinv_summary* out);
RSFINV_API rsfinv_status rsfinv_chain_summary(const rsfinv_chain* chain, double level,
                                              rsfinv_summary* out);

/* ---- command level ------------------------------------------------------ */
/* These drive whole runs: validate, compute, write artifact files and a
 * "<command>.manifest.json" under the configured output directory. The
 * CLI is a thin wrapper over them; the status value doubles as its exit
 * code. */

RSFINV_API rsfinv_status rsfinv_cmd_simulate(const rsfinv_config* cfg);
RSFINV_API rsfinv_status rsfinv_cmd_synth(const rsfinv_config* cfg);
RSFINV_API rsfinv_status rsfinv_cmd_fit(const rsfinv_config* cfg);
RSFINV_API rsfinv_status rsfinv_cmd_posterior(const rsfinv_config* cfg);
RSFINV_API rsfinv_status rsfinv_cmd_mcmc(const rsfinv_config* cfg);
RSFINV_API rsfinv_status rsfinv_cmd_summarize(const rsfinv_config* cfg,
                                              const char* const* inputs, size_t n_inputs);

#ifdef __cplusplus
}
#endif

#endif /* RSFINV_H */
