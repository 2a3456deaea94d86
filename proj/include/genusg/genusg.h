#ifndef GENUSG_H
#define GENUSG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GENUSG_API __declspec(dllexport)
#else
#define GENUSG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  GENUSG_OK = 0,
  GENUSG_ERR_INVALID_INPUT = 1,
  GENUSG_ERR_DOMAIN = 2,
  GENUSG_ERR_NUMERICAL_GUARD = 3,
  GENUSG_ERR_NOT_CONVERGED = 4,
  GENUSG_ERR_INTERNAL = 5
} genusg_status;

typedef struct {
  double re;
  double im;
} genusg_complex;

/* A validated Schottky surface with its period matrix cached on first use. */
typedef struct genusg_surface genusg_surface;

GENUSG_API const char* genusg_version(void);

/* Message for the last failing call on this thread; empty after success. */
GENUSG_API const char* genusg_last_error(void);

/* 0 selects the hardware concurrency. */
GENUSG_API void genusg_set_threads(unsigned n);

/* config_json: { "genus", "handles": [{ "w", "w_neg", "rho" }], "policy"? } */
GENUSG_API genusg_status genusg_surface_create(const char* config_json, genusg_surface** out);
GENUSG_API void genusg_surface_free(genusg_surface* s);
GENUSG_API int genusg_surface_genus(const genusg_surface* s);

GENUSG_API genusg_status genusg_omega(const genusg_surface* s, genusg_complex x, genusg_complex y,
                                      genusg_complex* out);
/* a in 1..g */
GENUSG_API genusg_status genusg_nu(const genusg_surface* s, int a, genusg_complex x, genusg_complex* out);
GENUSG_API genusg_status genusg_projective_connection(const genusg_surface* s, genusg_complex x,
                                                      genusg_complex* out);
/* out holds g*g entries, row-major. */
GENUSG_API genusg_status genusg_period_matrix(const genusg_surface* s, genusg_complex* out, size_t capacity);

/* sum_i i! C(n, i)^2 */
GENUSG_API uint64_t genusg_graph_count(int n);

/* Runs a report command. request_json: { "config"?, "seed"?, "threads"?, "options"? }.
   *report receives a NUL-terminated JSON string to release with genusg_string_free;
   *exit_code receives 0 (pass), 1 (residual failure), 2 (malformed input) or 3 (numerical guard). */
GENUSG_API genusg_status genusg_run(const char* command, const char* request_json, char** report, int* exit_code);
GENUSG_API void genusg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
