/* C interface to the nldep dependence-measure library.
 *
 * Every function returning int returns an nldep_status. On failure the
 * message is available from nldep_last_error() on the calling thread until the
 * next failing call there. Handles are opaque; free each with its _free
 * function (NULL is accepted). Strings returned from a handle stay valid until
 * that handle is freed.
 */
#ifndef NLDEP_H
#define NLDEP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(NLDEP_BUILDING)
#define NLDEP_API __attribute__((visibility("default")))
#else
#define NLDEP_API
#endif

typedef enum nldep_status {
    NLDEP_OK = 0,
    NLDEP_E_INVALID_ARGUMENT = 1,
    NLDEP_E_DEGENERATE_SAMPLE = 2,
    NLDEP_E_TIE = 3,
    NLDEP_E_LAG = 4,
    NLDEP_E_REGION_TOO_SMALL = 5,
    NLDEP_E_SHAPE = 6,
    NLDEP_E_ALPHA = 7,
    NLDEP_E_KERNEL = 8,
    NLDEP_E_BANDWIDTH = 9,
    NLDEP_E_GAMMA_RANGE = 10,
    NLDEP_E_SAMPLE_TOO_SMALL = 11,
    NLDEP_E_PARAM = 12,
    NLDEP_E_SUBSET = 13,
    NLDEP_E_PARAM_DOMAIN = 14,
    NLDEP_E_CONVERGENCE = 15,
    NLDEP_E_SUPPORT = 16,
    NLDEP_E_MISSING_COLUMN = 17,
    NLDEP_E_PARSE = 18,
    NLDEP_E_IO = 19,
    NLDEP_E_DOMAIN = 20,
    NLDEP_E_INTERNAL = 99
} nldep_status;

typedef struct nldep_paired nldep_paired;
typedef struct nldep_series nldep_series;
typedef struct nldep_options nldep_options;
typedef struct nldep_report nldep_report;
typedef struct nldep_lgc_map nldep_lgc_map;

NLDEP_API const char* nldep_version(void);
NLDEP_API const char* nldep_rng_name(void);
NLDEP_API const char* nldep_last_error(void);
/* Error class name, e.g. "ParseError"; "ok" for NLDEP_OK. */
NLDEP_API const char* nldep_status_name(int status);
/* 0 restores the default worker count. */
NLDEP_API void nldep_set_max_threads(size_t n);

/* Key/value parameters. */
NLDEP_API int nldep_options_new(nldep_options** out);
NLDEP_API int nldep_options_set(nldep_options* o, const char* key, const char* value);
NLDEP_API void nldep_options_free(nldep_options* o);

/* Paired samples. */
NLDEP_API int nldep_paired_new(const double* x, const double* y, size_t n, nldep_paired** out);
NLDEP_API int nldep_paired_from_csv(const char* path, const char* x_column, const char* y_column,
                                    nldep_paired** out);
NLDEP_API size_t nldep_paired_size(const nldep_paired* p);
/* Copies size() values into each of x and y. */
NLDEP_API int nldep_paired_get(const nldep_paired* p, double* x, double* y);
NLDEP_API int nldep_paired_to_z(const nldep_paired* p, nldep_paired** out);
NLDEP_API void nldep_paired_free(nldep_paired* p);

/* Series. */
NLDEP_API int nldep_series_new(const double* v, size_t n, nldep_series** out);
NLDEP_API int nldep_series_from_csv(const char* path, const char* column, nldep_series** out);
NLDEP_API size_t nldep_series_size(const nldep_series* s);
NLDEP_API int nldep_series_get(const nldep_series* s, double* v);
/* 100 (ln p_t - ln p_{t-1}); needs n >= 3 so the result is itself a series. */
NLDEP_API int nldep_series_log_returns(const nldep_series* prices, nldep_series** out);
/* Pairs (v[t], v[t-k]). */
NLDEP_API int nldep_series_lag_pairs(const nldep_series* s, size_t k, nldep_paired** out);
/* Pairs two series of equal length. */
NLDEP_API int nldep_series_pair(const nldep_series* x, const nldep_series* y, nldep_paired** out);
NLDEP_API void nldep_series_free(nldep_series* s);

/* Measures and tests by name; o may be NULL. Reports carry one JSON record. */
NLDEP_API int nldep_measure(const char* name, const nldep_paired* p, const nldep_options* o, nldep_report** out);
NLDEP_API int nldep_series_measure(const char* name, const nldep_series* s, const nldep_options* o,
                                   nldep_report** out);
NLDEP_API int nldep_test(const char* name, const nldep_paired* p, const nldep_options* o, size_t replicates,
                         uint64_t seed, nldep_report** out);
NLDEP_API int nldep_series_test(const char* name, const nldep_series* s, const nldep_options* o, size_t replicates,
                                uint64_t seed, nldep_report** out);
/* Measure value or test statistic. */
NLDEP_API double nldep_report_value(const nldep_report* r);
/* NaN for measures. */
NLDEP_API double nldep_report_p_value(const nldep_report* r);
NLDEP_API const char* nldep_report_json(const nldep_report* r);
NLDEP_API void nldep_report_free(nldep_report* r);

/* Local Gaussian correlation maps. */
NLDEP_API int nldep_lgc_map_run(const nldep_paired* p, const nldep_options* o, nldep_lgc_map** out);
NLDEP_API size_t nldep_lgc_map_size(const nldep_lgc_map* m);
NLDEP_API size_t nldep_lgc_map_failed(const nldep_lgc_map* m);
NLDEP_API int nldep_lgc_map_point(const nldep_lgc_map* m, size_t i, double* x1, double* x2, double* rho,
                                  int* converged);
/* Flat table x1,x2,rho,mu1,mu2,sigma1,sigma2,converged. */
NLDEP_API const char* nldep_lgc_map_csv(const nldep_lgc_map* m);
/* Parameters actually used, as a JSON object. */
NLDEP_API const char* nldep_lgc_map_params_json(const nldep_lgc_map* m);
NLDEP_API void nldep_lgc_map_free(nldep_lgc_map* m);

/* Generators; o holds the family parameters. */
NLDEP_API int nldep_simulate_paired(const char* family, const nldep_options* o, size_t n, uint64_t seed,
                                    nldep_paired** out);
NLDEP_API int nldep_simulate_series(const char* family, const nldep_options* o, size_t n, uint64_t seed,
                                    nldep_series** out);
/* 1 when the family produces a series. */
NLDEP_API int nldep_family_is_series(const char* family);

#ifdef __cplusplus
}
#endif

#endif
