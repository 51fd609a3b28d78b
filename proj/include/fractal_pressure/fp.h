#ifndef FRACTAL_PRESSURE_FP_H
#define FRACTAL_PRESSURE_FP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FP_API __declspec(dllexport)
#else
#define FP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fp_status {
  FP_OK = 0,
  FP_INVALID_ARGUMENT = 1,
  FP_CONFIG = 2,
  FP_CAP_EXCEEDED = 3,
  FP_NON_CONFORMAL = 4,
  FP_NUMERIC = 5,
  FP_INVALID_WORD = 6,
  FP_IO = 7,
  FP_POTENTIAL_REJECTED = 8,
  FP_INTERNAL = 9,
  FP_OUT_OF_RANGE = 10
} fp_status;

typedef struct fp_ifs fp_ifs;
typedef struct fp_potential fp_potential;

typedef struct fp_options {
  uint64_t word_cap; /* largest l^n allowed */
  unsigned threads;  /* 0: hardware concurrency */
  unsigned refine;   /* extra depth for inner witnesses */
} fp_options;

typedef struct fp_dimension_summary {
  int conformal;
  double r;
  double estimate;
  double estimate_lo;
  double estimate_hi;
  double root_lo;
  double root_hi;
  int drift;
  int converged;
} fp_dimension_summary;

typedef struct fp_varcheck_result {
  double upper;
  double bernoulli_value; /* entropy estimate + integral lower bound */
  double certified_lower;
  double gap;
} fp_varcheck_result;

FP_API const char* fp_version(void);
/* Message of the last failure on the calling thread; empty after success. */
FP_API const char* fp_last_error(void);
/* For a cap failure: largest depth that fits, else 0. */
FP_API unsigned fp_last_max_depth(void);
FP_API void fp_string_free(char* s);

FP_API void fp_options_default(fp_options* options);

FP_API fp_status fp_ifs_from_json(const char* json, fp_ifs** out);
FP_API fp_status fp_ifs_preset(const char* name, const char* const* params, size_t count, fp_ifs** out);
FP_API fp_status fp_ifs_to_json(const fp_ifs* ifs, char** out);
FP_API void fp_ifs_free(fp_ifs* ifs);
FP_API size_t fp_ifs_dimension(const fp_ifs* ifs);
FP_API size_t fp_ifs_symbols(const fp_ifs* ifs);
FP_API int fp_ifs_exact(const fp_ifs* ifs);
FP_API int fp_ifs_conformal(const fp_ifs* ifs);
FP_API double fp_ifs_ratio(const fp_ifs* ifs);

FP_API fp_status fp_potential_parse(const char* spec, fp_potential** out);
FP_API const char* fp_potential_description(const fp_potential* f);
FP_API void fp_potential_free(fp_potential* f);

FP_API fp_status fp_cover_counts(const fp_ifs* ifs, unsigned depth, const fp_options* options, size_t* n_minus,
                                 size_t* n_plus);
FP_API fp_status fp_cover_csv(const fp_ifs* ifs, unsigned depth, const fp_options* options, char** out);

FP_API fp_status fp_pressure(const fp_ifs* ifs, const fp_potential* f, unsigned depth, const fp_options* options,
                             double* low, double* high, char** json);

/* Bowen root for conformal systems; refuses others with FP_NON_CONFORMAL. */
FP_API fp_status fp_dimension(const fp_ifs* ifs, unsigned first_depth, unsigned last_depth,
                              const fp_options* options, fp_dimension_summary* summary, char** json);
/* Box-counting exponent; accepts non-conformal systems. */
FP_API fp_status fp_box_exponent(const fp_ifs* ifs, unsigned first_depth, unsigned last_depth,
                                 const fp_options* options, fp_dimension_summary* summary, char** json);

FP_API fp_status fp_entropy(const fp_ifs* ifs, const double* weights, size_t count, unsigned depth,
                            const fp_options* options, double* value, char** json);
FP_API fp_status fp_varcheck(const fp_ifs* ifs, const double* weights, size_t count, const fp_potential* f,
                             unsigned depth, const fp_options* options, fp_varcheck_result* result, char** json);
FP_API fp_status fp_separated_family(const fp_ifs* ifs, const fp_potential* f, unsigned depth,
                                     const fp_options* options, double* certified_lower, char** json);

FP_API fp_status fp_log_sum_check(const double* p, const double* a, size_t count, double* lhs, double* rhs);

#ifdef __cplusplus
}
#endif

#endif
