/* C interface of the rflow reactive-flow library.
 *
 * Every function returns an rflow_status. On failure the message of the
 * last error on the calling thread is available from rflow_last_error()
 * until the next failing call on that thread. Handles are opaque and owned
 * by the caller; each create or load function has a matching free function
 * that accepts NULL.
 *
 * Text outputs use the caller-buffer convention: the function writes at most
 * len bytes including the terminating NUL and stores the full length it needs
 * (without the NUL) in *needed when needed is not NULL. A buffer that is too
 * small yields RFLOW_ERR_BUFFER with *needed set.
 */
#ifndef RFLOW_H
#define RFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RFLOW_BUILDING)
#    define RFLOW_API __declspec(dllexport)
#  else
#    define RFLOW_API __declspec(dllimport)
#  endif
#else
#  define RFLOW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rflow_status {
    RFLOW_OK = 0,
    RFLOW_ERR_INVALID_ARGUMENT = 1,
    RFLOW_ERR_PARSE = 2,
    RFLOW_ERR_IO = 3,
    RFLOW_ERR_FORMAT = 4,
    RFLOW_ERR_CONVERGENCE = 5,
    RFLOW_ERR_BUFFER = 6,
    RFLOW_ERR_INTERNAL = 7
} rflow_status;

typedef struct rflow_case rflow_case;
typedef struct rflow_sim rflow_sim;

RFLOW_API const char* rflow_version(void);
RFLOW_API const char* rflow_status_string(rflow_status s);
RFLOW_API const char* rflow_last_error(void);

/* ---- case files ---- */

RFLOW_API rflow_status rflow_case_load(const char* path, rflow_case** out);
RFLOW_API void rflow_case_free(rflow_case* c);
/* Canonical re-emitted text of the case. */
RFLOW_API rflow_status rflow_case_emit(const rflow_case* c, char* buf, size_t len, size_t* needed);

/* ---- simulations ---- */

typedef struct rflow_step_info {
    double time;
    double dt;
    double max_co;
    double continuity_residual;
    double pressure_tolerance;
    uint64_t pressure_iterations;
    double seconds_total;
    double seconds_chemistry;
} rflow_step_info;

RFLOW_API rflow_status rflow_sim_create(const rflow_case* c, rflow_sim** out);
RFLOW_API void rflow_sim_free(rflow_sim* s);
RFLOW_API rflow_status rflow_sim_step(rflow_sim* s, rflow_step_info* info);
RFLOW_API rflow_status rflow_sim_cells(const rflow_sim* s, uint64_t* cells);
RFLOW_API rflow_status rflow_sim_reynolds(const rflow_sim* s, double* re);
/* Copies a cell field in component-major order. Names: U (3 components),
 * p, T, rho, h and Y_<species>. len is in doubles; *needed gets the count. */
RFLOW_API rflow_status rflow_sim_field(const rflow_sim* s, const char* name, double* buf, size_t len, size_t* needed);
RFLOW_API rflow_status rflow_sim_kinetic_energy(const rflow_sim* s, double* ke);
RFLOW_API rflow_status rflow_sim_max_temperature(const rflow_sim* s, double* t);
RFLOW_API rflow_status rflow_sim_write_vtk(const rflow_sim* s, const char* path);

/* ---- whole-case drivers ---- */

/* Called after every step; return nonzero to keep going, zero to stop. */
typedef int (*rflow_step_callback)(const rflow_step_info* info, void* user);

typedef struct rflow_run_options {
    const char* output_dir; /* default "." */
    int write_vtk;          /* default 1 */
    rflow_step_callback on_step;
    void* user;
} rflow_run_options;

RFLOW_API void rflow_run_options_init(rflow_run_options* o);
/* Runs to endTime writing VTK and diagnostics.csv into output_dir. A
 * callback returning zero stops the loop with RFLOW_OK. */
RFLOW_API rflow_status rflow_run(const rflow_case* c, const rflow_run_options* o, uint64_t* steps);

typedef struct rflow_bench_result {
    uint64_t steps;
    uint64_t cells;
    char chemistry_mode[16]; /* NUL-terminated: none, ode or surrogate */
    /* seconds per step */
    double discretisation;
    double linear_solve;
    double chemistry;
    double thermo;
    double sum;
    double total;
    double fluid;
} rflow_bench_result;

RFLOW_API rflow_status rflow_bench(const rflow_case* c, uint64_t steps, rflow_bench_result* out);
/* The bench table as text. */
RFLOW_API rflow_status rflow_bench_format(const rflow_bench_result* r, char* buf, size_t len, size_t* needed);

/* ---- chemistry data and surrogates ---- */

typedef struct rflow_sample_options {
    uint64_t n;   /* default 10000 */
    double dt;    /* s, default 1e-5 */
    double t_min; /* K, default 900 */
    double t_max; /* K, default 1500 */
    double p;     /* Pa, default 101325 */
    uint64_t seed; /* default 1 */
} rflow_sample_options;

RFLOW_API void rflow_sample_options_init(rflow_sample_options* o);
RFLOW_API rflow_status rflow_sample_chemistry(const char* mechanism_path, const rflow_sample_options* o,
                                              const char* out_path);

typedef struct rflow_train_options {
    const uint64_t* hidden; /* hidden layer widths; default {64, 32, 16} when NULL */
    size_t n_hidden;
    uint64_t epochs;        /* default 200 */
    uint64_t batch_size;    /* default 64 */
    double learning_rate;   /* default 1e-3 */
    double final_learning_rate_fraction; /* default 0.05 */
    uint64_t seed;          /* default 1 */
    /* Space-separated species to train; NULL trains every species whose
     * peak |rate| exceeds 1e-6 of the largest peak over all species. */
    const char* species;
} rflow_train_options;

RFLOW_API void rflow_train_options_init(rflow_train_options* o);
/* final_loss receives the last epoch's loss of each network when not NULL;
 * n_networks receives the network count. */
RFLOW_API rflow_status rflow_train_surrogate(const char* samples_path, const rflow_train_options* o,
                                             const char* out_path, double* final_loss, size_t final_loss_len,
                                             size_t* n_networks);

/* ---- inspection ---- */

/* Validated summary of a case (.cfg), mechanism or weights file. The kind
 * is detected from the content. */
RFLOW_API rflow_status rflow_info(const char* path, char* buf, size_t len, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
