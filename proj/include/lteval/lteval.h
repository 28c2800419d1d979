/* C interface to the lteval evaluation harness. */
#ifndef LTEVAL_H
#define LTEVAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LTEVAL_API __declspec(dllexport)
#else
#define LTEVAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lteval_status {
    LTEVAL_OK = 0,
    LTEVAL_ERR_CONFIG = 1,
    LTEVAL_ERR_RUNTIME = 2,
    LTEVAL_ERR_PARTIAL = 3,
    LTEVAL_ERR_INVALID_ARG = 4
} lteval_status;

typedef struct lteval_experiment lteval_experiment;

/* One checkpoint row. has_* flags are 0 when the value is undefined. */
typedef struct lteval_checkpoint {
    uint64_t k;
    uint64_t t_k;
    uint64_t train_events;
    double cumulative_joules;
    double train_joules;
    double predict_joules;
    double gco2e;
    int has_accuracy;
    double accuracy;
    int has_kappa;
    double kappa;
    int has_macro_f1;
    double macro_f1;
    uint64_t support;
} lteval_checkpoint;

LTEVAL_API const char* lteval_version(void);

/* Message of the last failing call on this thread ("" if none). */
LTEVAL_API const char* lteval_last_error(void);

LTEVAL_API lteval_status lteval_experiment_open(const char* config_path, lteval_experiment** out);
LTEVAL_API lteval_status lteval_experiment_open_text(const char* config_text, const char* origin,
                                                     lteval_experiment** out);
LTEVAL_API void lteval_experiment_close(lteval_experiment* exp);

LTEVAL_API lteval_status lteval_experiment_set_seed(lteval_experiment* exp, uint64_t seed);
LTEVAL_API lteval_status lteval_experiment_set_output_dir(lteval_experiment* exp, const char* dir);
LTEVAL_API int lteval_experiment_is_sweep(const lteval_experiment* exp);

/* Runs a single experiment. LTEVAL_ERR_RUNTIME when the run aborted; partial
   checkpoints stay readable. */
LTEVAL_API lteval_status lteval_experiment_run(lteval_experiment* exp);

/* Runs every grid cell. LTEVAL_ERR_PARTIAL when some cells failed. */
LTEVAL_API lteval_status lteval_experiment_sweep(lteval_experiment* exp, size_t* cells, size_t* failures);

/* Path of the last output directory (run) or sweep root. */
LTEVAL_API const char* lteval_experiment_output_dir(const lteval_experiment* exp);

LTEVAL_API size_t lteval_experiment_checkpoint_count(const lteval_experiment* exp);
LTEVAL_API lteval_status lteval_experiment_checkpoint(const lteval_experiment* exp, size_t index,
                                                      lteval_checkpoint* out);

/* Writes the trade-off SVG and tidy CSV for the given result directories. */
LTEVAL_API lteval_status lteval_plot(const char* const* dirs, size_t count, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif
