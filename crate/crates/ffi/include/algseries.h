#ifndef ALGSERIES_H
#define ALGSERIES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AlgEngine {
  ALG_HENSEL = 0,
  ALG_KLEENE = 1,
} AlgEngine;

/**
 * Result codes. `ALG_OK` is zero; everything else is a failure.
 */
typedef enum AlgStatus {
  ALG_OK = 0,
  ALG_NULL_POINTER = 1,
  ALG_INVALID_UTF8 = 2,
  ALG_PARSE_ERROR = 3,
  ALG_NOT_PROPER = 4,
  ALG_BAD_MODULUS = 5,
  ALG_BAD_BOUND = 6,
  ALG_INFEASIBLE = 7,
  ALG_UNKNOWN_SYMBOL = 8,
  ALG_INVALID = 9,
  ALG_PANIC = 10,
} AlgStatus;

/**
 * Opaque proper grammar.
 */
typedef struct AlgGrammar AlgGrammar;

/**
 * Opaque proper polynomial system.
 */
typedef struct AlgSystem AlgSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *alg_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void alg_string_free(char *s);

/**
 * Parses a system in the text format (`vars:`, `indets:`, equations).
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` a valid pointer.
 */
enum AlgStatus alg_system_parse(const char *text, struct AlgSystem **out);

/**
 * # Safety
 * `s` must come from [`alg_system_parse`] and not have been freed. Null is ignored.
 */
void alg_system_free(struct AlgSystem *s);

/**
 * Writes whether the system is proper.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlgStatus alg_system_is_proper(const struct AlgSystem *s, bool *proper);

/**
 * Coefficient of `X^v` modulo `p` in the first solution component.
 *
 * # Safety
 * `v` must point to `len` exponents, one per indeterminate.
 */
enum AlgStatus alg_coeff(const struct AlgSystem *s,
                         const uint32_t *v,
                         size_t len,
                         uint64_t p,
                         enum AlgEngine engine,
                         uint64_t *residue);

/**
 * Whether the first solution component vanishes through degree `bound`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlgStatus alg_eq(const struct AlgSystem *s, uint64_t bound, enum AlgEngine engine, bool *zero);

/**
 * Whether the first solution component has finite support, given `bound`.
 * `degree` receives the polynomial degree, or -1 when infinite.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlgStatus alg_fin(const struct AlgSystem *s,
                       uint64_t bound,
                       enum AlgEngine engine,
                       bool *finite,
                       int64_t *degree);

/**
 * Parses a grammar in the text format (`terminals:`, `nonterminals:`, rules).
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` a valid pointer.
 */
enum AlgStatus alg_grammar_parse(const char *text, struct AlgGrammar **out);

/**
 * # Safety
 * `g` must come from [`alg_grammar_parse`] and not have been freed. Null is ignored.
 */
void alg_grammar_free(struct AlgGrammar *g);

/**
 * Number of derivations of `word` from `nonterminal`, as a decimal string.
 *
 * # Safety
 * Strings must be nul-terminated; free `count` with [`alg_string_free`].
 */
enum AlgStatus alg_count_derivations(const struct AlgGrammar *g,
                                     const char *nonterminal,
                                     const char *word,
                                     char **count);

/**
 * Compares the census series of two nonterminals through degree `bound`.
 * `record` receives the verdict as a JSON object (scope, witness, trace).
 *
 * # Safety
 * Strings must be nul-terminated; `record` may be null; free it with
 * [`alg_string_free`].
 */
enum AlgStatus alg_equiv(const struct AlgGrammar *g,
                         const char *n1,
                         const char *n2,
                         uint64_t bound,
                         bool *equivalent,
                         char **record);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALGSERIES_H */
