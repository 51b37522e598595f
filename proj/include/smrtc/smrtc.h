/* smrtc - guarantee-type checker for lock-free data structures using
 * safe memory reclamation.
 *
 * The shared library exposes the analyzer behind an opaque-handle C API.
 * All returned strings are heap-allocated; release them with
 * smrtc_string_free. Functions return SMRTC_OK on success; on failure
 * *error (when present) receives a JSON object {"error": "..."}.
 */
#ifndef SMRTC_H
#define SMRTC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct smrtc_program smrtc_program;
typedef struct smrtc_automaton smrtc_automaton;

typedef enum {
	SMRTC_OK = 0,
	SMRTC_ERR_PARSE = 1,    /* malformed program or automaton text */
	SMRTC_ERR_INVALID = 2,  /* inputs do not fit together (arity, alphabet, budget) */
	SMRTC_ERR_INTERNAL = 3
} smrtc_status;

const char* smrtc_version(void);

void smrtc_string_free(char* s);

/* ------------------------------------------------------------------ inputs */

smrtc_status smrtc_program_parse(const char* text, smrtc_program** out, char** error);
void smrtc_program_free(smrtc_program* p);
smrtc_status smrtc_program_print(const smrtc_program* p, char** text);

/* name_or_text: a built-in name ("base", "ebr", "hp2") or automaton DSL text.
 * with_base != 0 pre-multiplies with the base automaton (skipped for base
 * itself). */
smrtc_status smrtc_automaton_load(const char* name_or_text, int with_base, smrtc_automaton** out,
                                  char** error);
void smrtc_automaton_free(smrtc_automaton* a);

/* JSON: locations, initial, accepting, SafeLoc, active component, events,
 * safe-call audit is included when audit != 0. */
smrtc_status smrtc_automaton_info(const smrtc_automaton* a, int audit, char** json);

/* ---------------------------------------------------------------- analyses */

/* Type inference. JSON report: {"verdict":"ok"|"fail", "failure":{...},
 * "points":[{"point":"proc:id","env":{var:{"flags":[...],"custom":[...]}}}]} */
smrtc_status smrtc_typecheck(const smrtc_program* p, const smrtc_automaton* a, char** report_json,
                             char** error);

/* Assertion-based instrumentation for GC verifiers; output is program text. */
smrtc_status smrtc_instrument(const smrtc_program* p, char** program_text);

/* budget_json: {"threads":2,"addresses":3,"dom":2,"steps":20,
 *               "frees":false,"realloc":false,"jobs":1}; any field optional.
 * mode: "prf" | "invariants" | "asserts". */
smrtc_status smrtc_explore(const smrtc_program* p, const smrtc_automaton* a,
                           const char* budget_json, const char* mode, char** report_json,
                           char** error);

/* Annotation repair; returns the repaired program text (on success) and a
 * JSON-lines log either way. */
smrtc_status smrtc_repair(const smrtc_program* p, const smrtc_automaton* a,
                          const char* budget_json, int max_rounds, char** program_text,
                          char** log_jsonl, char** error);

#ifdef __cplusplus
}
#endif

#endif /* SMRTC_H */
