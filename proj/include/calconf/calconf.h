/* SPDX-License-Identifier: Apache-2.0 */
#ifndef CALCONF_CALCONF_H_
#define CALCONF_CALCONF_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CALCONF_API __declspec(dllexport)
#else
#define CALCONF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Non-zero values double as the CLI exit codes. */
typedef enum cc_status {
  CC_OK = 0,
  CC_ERR_USAGE = 1,
  CC_ERR_PARSE = 2,
  CC_ERR_VALIDATION = 3,
  CC_ERR_STATISTICS = 4,
  CC_ERR_IO = 5,
  CC_ERR_MISSING_DATA = 6,
  CC_ERR_INSUFFICIENT_BEAMS = 7,
  CC_ERR_DEGENERATE = 8,
  CC_ERR_INTERNAL = 9
} cc_status;

/* Message for the last failing call on this thread; never NULL. */
CALCONF_API const char* cc_last_error(void);

/* Strings returned through char** out-parameters are owned by the caller. */
CALCONF_API void cc_string_free(char* text);

/* ---- records ---------------------------------------------------------- */

typedef struct cc_dataset cc_dataset;

CALCONF_API cc_status cc_dataset_load(const char* path, cc_dataset** out);
CALCONF_API cc_status cc_dataset_parse(const char* text, cc_dataset** out);
CALCONF_API cc_status cc_dataset_write(const cc_dataset* dataset, const char* path);
CALCONF_API void cc_dataset_free(cc_dataset* dataset);
CALCONF_API size_t cc_dataset_size(const cc_dataset* dataset);
/* Number of records whose beams were re-sorted while parsing. */
CALCONF_API size_t cc_dataset_reordered(const cc_dataset* dataset);
/* Borrowed pointer, valid while the dataset lives; NULL when out of range. */
CALCONF_API const char* cc_dataset_record_id(const cc_dataset* dataset, size_t index);
CALCONF_API cc_status cc_dataset_split(const cc_dataset* dataset, size_t val_size, uint64_t seed,
                                       cc_dataset** validation, cc_dataset** test);

/* ---- confidence ------------------------------------------------------- */

typedef struct cc_method_config {
  int32_t k;
  double temperature;
  int32_t n_beams;
} cc_method_config;

typedef struct cc_score_options {
  cc_method_config ratio;
  cc_method_config tail; /* also used by beam_entropy */
  cc_method_config sum_top_k;
  /* Comma-separated method ids; NULL or "" selects all eleven. */
  const char* methods;
  uint32_t workers;
} cc_score_options;

CALCONF_API void cc_score_options_init(cc_score_options* options);

/* Scores one record with one method. *higher_is_confident may be NULL. */
CALCONF_API cc_status cc_score_record(const cc_dataset* dataset, size_t index, const char* method,
                                      const cc_score_options* options, double* value,
                                      int* higher_is_confident);

typedef struct cc_scores cc_scores;

CALCONF_API cc_status cc_score_dataset(const cc_dataset* dataset, const cc_score_options* options,
                                       cc_scores** out);
CALCONF_API cc_status cc_scores_load(const char* path, cc_scores** out);
CALCONF_API cc_status cc_scores_write(const cc_scores* scores, const char* path);
CALCONF_API size_t cc_scores_size(const cc_scores* scores);
/* Records on which `method` was skipped. */
CALCONF_API size_t cc_scores_skipped(const cc_scores* scores, const char* method);
CALCONF_API void cc_scores_free(cc_scores* scores);

/* ---- quality ---------------------------------------------------------- */

typedef struct cc_qualities cc_qualities;

/* metric: "bleu", "rouge_l", "f1", "meteor", or NULL to route by task tag. */
CALCONF_API cc_status cc_quality_dataset(const cc_dataset* dataset, const char* metric, cc_qualities** out);
CALCONF_API cc_status cc_quality_text(const char* metric, const char* candidate, const char* reference,
                                      double* value);
CALCONF_API cc_status cc_qualities_load(const char* path, cc_qualities** out);
CALCONF_API cc_status cc_qualities_write(const cc_qualities* qualities, const char* path);
CALCONF_API size_t cc_qualities_size(const cc_qualities* qualities);
CALCONF_API void cc_qualities_free(cc_qualities* qualities);

/* ---- calibration ------------------------------------------------------ */

typedef struct cc_bootstrap_options {
  uint64_t resamples; /* >= 1000 */
  uint64_t seed;
  uint32_t workers;
} cc_bootstrap_options;

CALCONF_API void cc_bootstrap_options_init(cc_bootstrap_options* options);

CALCONF_API cc_status cc_spearman(const double* x, const double* y, size_t n, double* rho);
CALCONF_API cc_status cc_paired_bootstrap(const double* confidences_a, const double* confidences_b,
                                          const double* qualities, size_t n,
                                          const cc_bootstrap_options* options, double* p_value);

/* A list of calibration reports, one per dataset/model pair. */
typedef struct cc_reports cc_reports;

CALCONF_API cc_status cc_correlate(const cc_scores* scores, const cc_qualities* qualities,
                                   const char* dataset, const char* model,
                                   const cc_bootstrap_options* options, cc_reports** out);
CALCONF_API cc_status cc_reports_load(const char* path, cc_reports** out);
/* Moves every report of `source` to the end of `target`; `source` stays valid and empty. */
CALCONF_API cc_status cc_reports_append(cc_reports* target, cc_reports* source);
CALCONF_API cc_status cc_reports_write(const cc_reports* reports, const char* path);
CALCONF_API size_t cc_reports_size(const cc_reports* reports);
/* |Spearman| of `method` in report `index`; CC_ERR_STATISTICS when it was skipped. */
CALCONF_API cc_status cc_reports_abs_spearman(const cc_reports* reports, size_t index, const char* method,
                                              double* value);
/* Rank summary as JSON and the rendered plain-text table; either out may be NULL. */
CALCONF_API cc_status cc_rank(const cc_reports* reports, char** summary_json, char** table);
CALCONF_API void cc_reports_free(cc_reports* reports);

/* ---- tuning ----------------------------------------------------------- */

typedef struct cc_tune_result cc_tune_result;

/* k_max <= 0 selects min(100, fewest beams - 1). */
CALCONF_API cc_status cc_tune_ratio(const cc_dataset* validation, const cc_qualities* qualities, int32_t k_max,
                                    const cc_method_config* base, uint32_t workers, cc_tune_result** out);
/* grid == NULL selects the default {0.001, 0.005, 0.01, 0.05, 0.1, 1.0}. */
CALCONF_API cc_status cc_tune_temperature(const cc_dataset* validation, const cc_qualities* qualities,
                                          const double* grid, size_t grid_size, const cc_method_config* base,
                                          uint32_t workers, cc_tune_result** out);
/* Best k (ratio) or temperature (tail), and the |Spearman| attained there. */
CALCONF_API void cc_tune_result_best(const cc_tune_result* result, double* parameter, double* abs_spearman);
CALCONF_API cc_status cc_tune_result_json(const cc_tune_result* result, char** json);
CALCONF_API cc_status cc_tune_result_sweep_text(const cc_tune_result* result, char** text);
CALCONF_API void cc_tune_result_free(cc_tune_result* result);

/* ---- synthetic -------------------------------------------------------- */

/* Generates records and their synthesized qualities from a JSON config. */
CALCONF_API cc_status cc_synth_generate(const char* config_json, cc_dataset** records, cc_qualities** qualities);

/* ---- presets ---------------------------------------------------------- */

/* Preset k and temperature for a dataset/model pair, e.g. ("squad", "flan-t5"). */
CALCONF_API cc_status cc_preset_lookup(const char* dataset, const char* model, int32_t* k, double* temperature);

#ifdef __cplusplus
}
#endif

#endif /* CALCONF_CALCONF_H_ */
