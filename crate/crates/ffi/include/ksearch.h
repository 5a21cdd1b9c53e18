#ifndef KSEARCH_H
#define KSEARCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Outcome of a call.
typedef enum KsStatus {
  KS_STATUS_OK = 0,
  // A parameter is out of range or inconsistent.
  KS_STATUS_INVALID_ARGUMENT = 1,
  // A required pointer was null.
  KS_STATUS_NULL_POINTER = 2,
  // The problem size exceeds a documented limit.
  KS_STATUS_TOO_LARGE = 3,
  // Malformed DIMACS text, or a string that is not UTF-8.
  KS_STATUS_PARSE = 4,
  // The instance has no satisfying assignment.
  KS_STATUS_UNSATISFIABLE = 5,
  // An iterative search did not converge within its cap.
  KS_STATUS_NO_CONVERGENCE = 6,
  // A bounded search used up its budget.
  KS_STATUS_BUDGET_EXHAUSTED = 7,
  // File-system failure.
  KS_STATUS_IO = 8,
  // Numerical failure (norm drift or integer overflow).
  KS_STATUS_NUMERIC = 9,
  // Internal panic; the library state is still usable.
  KS_STATUS_PANIC = 10,
} KsStatus;

// Angle convention of the adiabatic schedule.
typedef enum KsConvention {
  // Matches the published minimal step counts.
  KS_CONVENTION_TABULATED = 0,
  KS_CONVENTION_TRANSCRIBED = 1,
} KsConvention;

// Which routine produced a solver answer.
typedef enum KsMethod {
  KS_METHOD_CLASSICAL = 0,
  KS_METHOD_AQS = 1,
  KS_METHOD_GROVER = 2,
} KsMethod;

// Opaque k-SAT instance.
typedef struct KsInstance KsInstance;

// Result of [`ks_solve`].
typedef struct KsSolveResult {
  uint64_t assignment;
  // Re-verified against every clause.
  bool satisfied;
  enum KsMethod method;
  uint64_t steps_used;
  uint32_t aqs_rounds;
} KsSolveResult;

// Result of [`ks_classical`].
typedef struct KsClassicalResult {
  uint64_t assignment;
  uint64_t queries;
  uint64_t restarts;
} KsClassicalResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library on the same thread.
const char *ks_last_error(void);

// Library version as a static nul-terminated string.
const char *ks_version(void);

// Uniform random instance: m clauses of k distinct variables with uniform
// signs.
//
// # Safety
// `out_instance` must be valid for writes.
enum KsStatus ks_generate_f(uint32_t n,
                            uint32_t m,
                            uint32_t k,
                            uint64_t seed,
                            struct KsInstance **out_instance);

// Planted instance: every clause is satisfied by the target. `planted` may be
// null, in which case the target is drawn from the seed.
//
// # Safety
// `planted` is null or readable; `out_instance` must be valid for writes.
enum KsStatus ks_generate_ff(uint32_t n,
                             uint32_t m,
                             uint32_t k,
                             uint64_t seed,
                             const uint64_t *planted,
                             struct KsInstance **out_instance);

// Satisfiable instance: uniform clauses, each rejected if it would leave no
// satisfying assignment.
//
// # Safety
// `out_instance` must be valid for writes.
enum KsStatus ks_generate_fs(uint32_t n,
                             uint32_t m,
                             uint32_t k,
                             uint64_t seed,
                             struct KsInstance **out_instance);

// Parses DIMACS CNF text.
//
// # Safety
// `dimacs` is a nul-terminated string; `out_instance` must be valid for writes.
enum KsStatus ks_instance_from_dimacs(const char *dimacs, struct KsInstance **out_instance);

// Reads a DIMACS CNF file.
//
// # Safety
// `path` is a nul-terminated string; `out_instance` must be valid for writes.
enum KsStatus ks_instance_read_dimacs(const char *path, struct KsInstance **out_instance);

// Writes the instance as a DIMACS CNF file.
//
// # Safety
// `instance` is a live handle; `path` is a nul-terminated string.
enum KsStatus ks_instance_write_dimacs(const struct KsInstance *instance, const char *path);

// DIMACS text of the instance, to be released with [`ks_string_free`].
//
// # Safety
// `instance` is a live handle; `out_text` must be valid for writes.
enum KsStatus ks_instance_to_dimacs(const struct KsInstance *instance, char **out_text);

// Variable count, clause count and clause width.
//
// # Safety
// `instance` is a live handle; each out pointer is null or writable.
enum KsStatus ks_instance_shape(const struct KsInstance *instance,
                                uint32_t *out_n,
                                uint32_t *out_m,
                                uint32_t *out_k);

// The planted target; `KS_STATUS_INVALID_ARGUMENT` if the instance has none.
//
// # Safety
// `instance` is a live handle; `out_bits` must be valid for writes.
enum KsStatus ks_instance_planted(const struct KsInstance *instance, uint64_t *out_bits);

// Number of clauses satisfied by assignment `x`.
//
// # Safety
// `instance` is a live handle; `out_count` must be valid for writes.
enum KsStatus ks_count_satisfied(const struct KsInstance *instance,
                                 uint64_t x,
                                 uint32_t *out_count);

// Exact number of satisfying assignments (n ≤ 26).
//
// # Safety
// `instance` is a live handle; `out_count` must be valid for writes.
enum KsStatus ks_count_interpretations(const struct KsInstance *instance, uint64_t *out_count);

// Fixed-angle k-local search for a hidden `target`: writes the success
// probability after 0..=p iterations into `out_probs[0..=p]`.
//
// # Safety
// `out_probs` must be valid for `len` writes, with `len ≥ p + 1`.
enum KsStatus ks_run_qs(uint32_t n,
                        uint32_t k,
                        double theta,
                        uint32_t p,
                        uint64_t target,
                        double *out_probs,
                        size_t len);

// First local maximum of fixed-angle k-local search (target 0).
//
// # Safety
// `out_p` and `out_prob` must be valid for writes.
enum KsStatus ks_first_local_max(uint32_t n,
                                 uint32_t k,
                                 double theta,
                                 uint32_t *out_p,
                                 double *out_prob);

// Success probability of the p-step adiabatic schedule for a hidden `target`.
//
// # Safety
// `out_prob` must be valid for writes.
enum KsStatus ks_run_aqs(uint32_t n,
                         uint32_t k,
                         uint32_t p,
                         uint64_t target,
                         enum KsConvention convention,
                         double *out_prob);

// Fewest adiabatic steps whose success probability reaches `threshold`
// (pure k-local search, target 0).
//
// # Safety
// `out_p` and `out_prob` must be valid for writes.
enum KsStatus ks_min_threshold_steps(uint32_t n,
                                     uint32_t k,
                                     double threshold,
                                     enum KsConvention convention,
                                     uint32_t *out_p,
                                     double *out_prob);

// Fixed-angle search on the instance's normalized clause Hamiltonian;
// success is the probability on all satisfying assignments after p steps.
//
// # Safety
// `instance` is a live handle; `out_prob` must be valid for writes.
enum KsStatus ks_run_qs_instance(const struct KsInstance *instance,
                                 double theta,
                                 uint32_t p,
                                 double *out_prob);

// Adiabatic schedule on the instance's normalized clause Hamiltonian.
//
// # Safety
// `instance` is a live handle; `out_prob` must be valid for writes.
enum KsStatus ks_run_aqs_instance(const struct KsInstance *instance,
                                  uint32_t p,
                                  enum KsConvention convention,
                                  double *out_prob);

// Adiabatic rounds with doubling step counts, then full-width search; the
// answer is verified against every clause. `shots` = 0 uses the default.
//
// # Safety
// `instance` is a live handle; `out_result` must be valid for writes.
enum KsStatus ks_solve(const struct KsInstance *instance,
                       uint64_t seed,
                       uint32_t shots,
                       struct KsSolveResult *out_result);

// Classical bit-flip local search against the k-local objective of a hidden
// `target` (n ≤ 64).
//
// # Safety
// `out_result` must be valid for writes.
enum KsStatus ks_classical(uint32_t n,
                           uint32_t k,
                           uint64_t target,
                           uint64_t seed,
                           struct KsClassicalResult *out_result);

// Releases an instance. Null is ignored.
//
// # Safety
// `instance` is null or a handle from this library not yet freed.
void ks_instance_free(struct KsInstance *instance);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` is null or a string from this library not yet freed.
void ks_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KSEARCH_H */
