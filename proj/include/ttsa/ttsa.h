#ifndef TTSA_H
#define TTSA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TTSA_API __declspec(dllexport)
#else
#define TTSA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values double as CLI exit classes: 2 config/usage, 3 numerical,
 * 4 failed statistical check under --strict. Internal errors (5) are
 * reported by the CLI as 3. */
typedef enum ttsa_status {
    TTSA_OK = 0,
    TTSA_CONFIG_ERROR = 2,
    TTSA_NUMERICAL_ERROR = 3,
    TTSA_CHECK_FAILED = 4,
    TTSA_INTERNAL_ERROR = 5
} ttsa_status;

TTSA_API const char* ttsa_version(void);

/* Frees a string returned through any out-parameter. NULL is a no-op. */
TTSA_API void ttsa_string_free(char* s);

typedef struct ttsa_run_options {
    uint64_t seed;
    int threads; /* <= 0 selects the hardware thread count */
    int strict;  /* escalate failed statistical checks to TTSA_CHECK_FAILED */
    int dry_run; /* validate and resolve the config, write nothing */
} ttsa_run_options;

/* Runs one experiment command ("simulate", "rates", "covariance", "rl")
 * against the JSON config at config_path, writing artifacts under out_dir.
 * Output bytes depend only on (config, command, seed), never on threads.
 * On success *summary_json receives the summary text; on failure
 * *error_message receives a description (caller frees both via
 * ttsa_string_free). Either out-pointer may be NULL. */
TTSA_API ttsa_status ttsa_run_command(const char* command, const char* config_path,
                                      const char* out_dir, const ttsa_run_options* options,
                                      char** summary_json, char** error_message);

/* ---- direct access to the linear two-timescale problem ---- */

typedef struct ttsa_problem ttsa_problem;

/* Builds a problem from row-major blocks: a11 (d_theta x d_theta),
 * a12 (d_theta x d_w), a21 (d_w x d_theta), a22 (d_w x d_w), b1 (d_theta),
 * b2 (d_w). Requires a22 and delta = a11 - a12 a22^{-1} a21 numerically
 * nonsingular. */
TTSA_API ttsa_status ttsa_problem_create(size_t d_theta, size_t d_w, const double* a11,
                                         const double* a12, const double* a21, const double* a22,
                                         const double* b1, const double* b2,
                                         ttsa_problem** out_problem, char** error_message);

TTSA_API void ttsa_problem_free(ttsa_problem* p);

/* Exact solution of the coupled system; theta_star holds d_theta doubles,
 * w_star holds d_w. */
TTSA_API ttsa_status ttsa_problem_solution(const ttsa_problem* p, double* theta_star,
                                           double* w_star, char** error_message);

/* delta = a11 - a12 a22^{-1} a21, row-major d_theta x d_theta. */
TTSA_API ttsa_status ttsa_problem_delta(const ttsa_problem* p, double* delta,
                                        char** error_message);

/* Stability certificate for a square matrix a (row-major n x n) with -a
 * Hurwitz: q solves a^T q + q a = I (written row-major when non-NULL),
 * contraction_rate = 1/(2 ||q||), and steps in (0, max_step] contract the
 * q-norm. Fails with TTSA_NUMERICAL_ERROR when -a is not Hurwitz. */
TTSA_API ttsa_status ttsa_lyapunov_certificate(size_t n, const double* a, double* q,
                                               double* contraction_rate, double* max_step,
                                               char** error_message);

/* Smallest t with max pairwise total variation between rows of kernel^t
 * <= 1/4; kernel is row-stochastic, row-major n x n. */
TTSA_API ttsa_status ttsa_mixing_time(size_t n, const double* kernel, int* t_mix,
                                      char** error_message);

#ifdef __cplusplus
}
#endif

#endif /* TTSA_H */
