#ifndef Z2LGT_H
#define Z2LGT_H

#pragma once

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Z2Theory {
  Z2_THEORY_PURE = 0,
  Z2_THEORY_FULL = 1,
  Z2_THEORY_VC = 2,
} Z2Theory;

typedef enum Z2Status {
  Z2_STATUS_OK = 0,
  Z2_STATUS_NULL_POINTER = 1,
  Z2_STATUS_INVALID_ARGUMENT = 2,
  Z2_STATUS_TOO_MANY_QUBITS = 3,
  Z2_STATUS_BAD_PARAMETER_COUNT = 4,
  Z2_STATUS_CONVERGENCE_FAILURE = 5,
  Z2_STATUS_PARSE = 6,
  Z2_STATUS_PANIC = 7,
} Z2Status;

typedef enum Z2Mode {
  Z2_MODE_NAIVE = 0,
  Z2_MODE_OPTIMIZED = 1,
} Z2Mode;

typedef struct Z2Circuit Z2Circuit;

typedef struct Z2Lattice Z2Lattice;

typedef struct Z2PauliSum Z2PauliSum;

typedef struct Z2State Z2State;

typedef struct Z2Trace Z2Trace;

typedef struct Z2Couplings {
  double lambda_e;
  double lambda_b;
  double eps;
  double mass;
} Z2Couplings;

typedef struct Z2PvqdConfig {
  uintptr_t k;
  /**
   * Absolute time step.
   */
  double delta;
  uintptr_t n_steps;
  enum Z2Theory theory;
  double grad_eps;
  double tol;
  uintptr_t max_iters;
  uint64_t seed;
  /**
   * Non-zero applies the parts of a layer in listed order, H_B first.
   */
  int32_t listed_order;
} Z2PvqdConfig;

/**
 * One row of a pVQD trace. `occupation` is NaN for the pure theory.
 */
typedef struct Z2PvqdStep {
  uintptr_t step;
  double time;
  double cost;
  uintptr_t iters;
  int32_t converged;
  double plaquette;
  double occupation;
  double fid_trotter;
  double fid_exact;
} Z2PvqdStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *z2lgt_last_error(void);

void z2lgt_string_free(char *s);

/**
 * Couplings for gauge coupling `g` without matter.
 */
struct Z2Couplings z2lgt_couplings_from_g(double g);

struct Z2PvqdConfig z2lgt_pvqd_config_default(void);

enum Z2Status z2lgt_lattice_new(uintptr_t m, uintptr_t n, struct Z2Lattice **out);

void z2lgt_lattice_free(struct Z2Lattice *lat);

uintptr_t z2lgt_lattice_num_links(const struct Z2Lattice *lat);

/**
 * Qubit count of `theory` on `lat`, or 0 if `lat` is NULL.
 */
uintptr_t z2lgt_num_qubits(const struct Z2Lattice *lat, enum Z2Theory t);

enum Z2Status z2lgt_hamiltonian_new(const struct Z2Lattice *lat,
                                    enum Z2Theory t,
                                    struct Z2Couplings c,
                                    struct Z2PauliSum **out);

/**
 * Parses the text written by [`z2lgt_pauli_sum_to_text`].
 */
enum Z2Status z2lgt_pauli_sum_from_text(const char *text, struct Z2PauliSum **out);

void z2lgt_pauli_sum_free(struct Z2PauliSum *h);

uintptr_t z2lgt_pauli_sum_num_terms(const struct Z2PauliSum *h);

uintptr_t z2lgt_pauli_sum_num_qubits(const struct Z2PauliSum *h);

enum Z2Status z2lgt_pauli_sum_to_text(const struct Z2PauliSum *h, char **out);

/**
 * One first-order Trotter step of `theory` with time step `delta`.
 */
enum Z2Status z2lgt_trotter_step(const struct Z2Lattice *lat,
                                 enum Z2Theory t,
                                 struct Z2Couplings c,
                                 double delta,
                                 enum Z2Mode mode,
                                 struct Z2Circuit **out);

void z2lgt_circuit_free(struct Z2Circuit *circ);

enum Z2Status z2lgt_circuit_counts(const struct Z2Circuit *circ, uintptr_t *cx, uintptr_t *single);

enum Z2Status z2lgt_circuit_to_text(const struct Z2Circuit *circ, char **out);

/**
 * |0…0⟩ on `n` qubits.
 */
enum Z2Status z2lgt_state_new(uintptr_t n, struct Z2State **out);

void z2lgt_state_free(struct Z2State *s);

uintptr_t z2lgt_state_num_qubits(const struct Z2State *s);

/**
 * Copies the amplitudes into `re` and `im`, each of length `len = 2^n`.
 */
enum Z2Status z2lgt_state_amplitudes(const struct Z2State *s,
                                     double *re,
                                     double *im,
                                     uintptr_t len);

enum Z2Status z2lgt_state_apply_circuit(struct Z2State *s, const struct Z2Circuit *circ);

/**
 * Replaces the state by exp(−i·t·H)·state.
 */
enum Z2Status z2lgt_state_evolve_exact(struct Z2State *s, const struct Z2PauliSum *h, double t);

enum Z2Status z2lgt_state_expectation(const struct Z2State *s,
                                      const struct Z2PauliSum *h,
                                      double *out);

/**
 * |⟨a|b⟩|².
 */
enum Z2Status z2lgt_state_fidelity(const struct Z2State *a, const struct Z2State *b, double *out);

enum Z2Status z2lgt_pvqd_run(const struct Z2Lattice *lat,
                             struct Z2Couplings c,
                             const struct Z2PvqdConfig *cfg,
                             struct Z2Trace **out);

void z2lgt_trace_free(struct Z2Trace *t);

/**
 * Number of rows, including the initial one.
 */
uintptr_t z2lgt_trace_len(const struct Z2Trace *t);

enum Z2Status z2lgt_trace_step(const struct Z2Trace *t, uintptr_t i, struct Z2PvqdStep *out);

/**
 * Copies the parameters of row `i` into `buf` (capacity `len`) and stores
 * their number in `count`. With `buf` NULL only `count` is written.
 */
enum Z2Status z2lgt_trace_params(const struct Z2Trace *t,
                                 uintptr_t i,
                                 double *buf,
                                 uintptr_t len,
                                 uintptr_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* Z2LGT_H */
