/*
 *  Copyright 2026 The ctxzsl Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

/*
 * C interface of the ctxzsl shared library.
 *
 * Every function returns CTXZSL_OK (0) on success or a nonzero status code;
 * ctxzsl_last_error() then carries the failure message for the calling
 * thread.  Objects created by *_load / *_create / *_train calls are owned by
 * the caller and released with the matching *_free; strings returned through
 * const char** stay valid until their owning handle is freed.
 */

#ifndef CTXZSL_CTXZSL_H_
#define CTXZSL_CTXZSL_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctxzsl_status {
  CTXZSL_OK = 0,
  CTXZSL_ERR_IO = 1,          /* file missing / unreadable / unwritable */
  CTXZSL_ERR_PARSE = 2,       /* malformed input file */
  CTXZSL_ERR_CONFIG = 3,      /* invalid configuration or parameter value */
  CTXZSL_ERR_DIMENSION = 4,   /* shape mismatch between objects */
  CTXZSL_ERR_VOCABULARY = 5,  /* unknown or mismatched names / instance ids */
  CTXZSL_ERR_DEGENERATE = 6,  /* degenerate data (single-class, empty split) */
  CTXZSL_ERR_NUMERIC = 7,     /* non-finite values, divergence, singularity */
  CTXZSL_ERR_UNSUPPORTED = 8, /* request outside supported limits */
  CTXZSL_ERR_INTERNAL = 9     /* invariant violation inside the library */
} ctxzsl_status;

/* Library version string, e.g. "0.1.0". */
const char* ctxzsl_version(void);

/* Stable name of a status code, e.g. "CTXZSL_ERR_PARSE". */
const char* ctxzsl_status_name(ctxzsl_status status);

/* Message of the most recent failure on the calling thread ("" when the last
 * call succeeded). */
const char* ctxzsl_last_error(void);

/* ---- command surface (one call per CLI command) ------------------------- */

/* Writes num_splits seeded known/novel split files into out_dir. */
ctxzsl_status ctxzsl_cmd_split(const char* annotations_path, int num_novel,
                               int num_splits, int64_t seed, const char* out_dir);

typedef struct ctxzsl_run_options {
  const char* features_path;
  const char* annotations_path;
  const char* vectors_path;
  const char* split_path;
  const char* out_dir;
  const char* model; /* texcazsl | cocazsl | wve | eszsl | exdap | dmp */
  double gamma;      /* text-conditional softmax temperature */
  double lambda;     /* bilinear / embedding-regressor ridge strength */
  double alpha;      /* co-occurrence weight exponent */
  double c_max;      /* co-occurrence weight cap; 0 = data-driven default */
  double cost;       /* known-classifier inverse regularisation */
  double pos_weight; /* known-classifier positive-class weight */
  double lambda1;    /* eszsl feature-side regulariser */
  double lambda2;    /* eszsl embedding-side regulariser */
  int l2_normalize;  /* nonzero: L2-normalise feature columns at load */
} ctxzsl_run_options;

/* Fills every field with its default (paths null, model "texcazsl"). */
void ctxzsl_run_options_init(ctxzsl_run_options* options);

/* Trains the selected model on the split's train side and writes scores.csv
 * (plus binary.csv for dmp), the serialised model files, and manifest.json
 * into out_dir. */
ctxzsl_status ctxzsl_cmd_run(const ctxzsl_run_options* options);

/* Evaluates a score CSV against annotations over the split's novel set and
 * writes the metrics JSON to out_path.  binarize_policy is "uniform",
 * "fixed:<t>", or "top-k:<k>"; NULL means "uniform". */
ctxzsl_status ctxzsl_cmd_eval(const char* scores_path, const char* annotations_path,
                              const char* split_path, const char* binarize_policy,
                              const char* out_path);

/* Writes the conditional probability of novel_name given each known
 * attribute (descending) as a two-column CSV.  model_path is a serialised
 * bilinear context model; known_vocab_path lists one attribute per line. */
ctxzsl_status ctxzsl_cmd_explain(const char* model_path, const char* vectors_path,
                                 const char* novel_name, const char* known_vocab_path,
                                 const char* out_path);

/* Generates a synthetic dataset described by a config JSON into out_dir. */
ctxzsl_status ctxzsl_cmd_synth(const char* config_path, const char* out_dir);

/* Runs the full split -> run -> eval grid described by a config JSON. */
ctxzsl_status ctxzsl_cmd_experiment(const char* config_path);

/* ---- handle surface ------------------------------------------------------ */

typedef struct ctxzsl_features ctxzsl_features;
typedef struct ctxzsl_annotations ctxzsl_annotations;
typedef struct ctxzsl_split ctxzsl_split;
typedef struct ctxzsl_word_table ctxzsl_word_table;
typedef struct ctxzsl_known_model ctxzsl_known_model;
typedef struct ctxzsl_conditional ctxzsl_conditional;
typedef struct ctxzsl_scores ctxzsl_scores;

ctxzsl_status ctxzsl_features_load(const char* path, ctxzsl_features** out);
void ctxzsl_features_free(ctxzsl_features* features);
ctxzsl_status ctxzsl_features_dims(const ctxzsl_features* features, size_t* dim,
                                   size_t* count);

ctxzsl_status ctxzsl_annotations_load(const char* path, ctxzsl_annotations** out);
void ctxzsl_annotations_free(ctxzsl_annotations* annotations);
ctxzsl_status ctxzsl_annotations_dims(const ctxzsl_annotations* annotations,
                                      size_t* num_attributes, size_t* count);

/* Reorders both inputs onto their common instance ids in canonical order;
 * errors when an id is present on one side only. */
ctxzsl_status ctxzsl_align(const ctxzsl_features* features,
                           const ctxzsl_annotations* annotations,
                           ctxzsl_features** features_out,
                           ctxzsl_annotations** annotations_out);

ctxzsl_status ctxzsl_split_load(const char* path, ctxzsl_split** out);
void ctxzsl_split_free(ctxzsl_split* split);
ctxzsl_status ctxzsl_split_dims(const ctxzsl_split* split, size_t* num_known,
                                size_t* num_novel, size_t* num_train,
                                size_t* num_test);

ctxzsl_status ctxzsl_word_table_load(const char* path, ctxzsl_word_table** out);
void ctxzsl_word_table_free(ctxzsl_word_table* table);
ctxzsl_status ctxzsl_word_table_dim(const ctxzsl_word_table* table, size_t* dim);

/* Embeds an attribute name (whole-name lookup, then mean of in-vocabulary
 * tokens) into a caller buffer of length ctxzsl_word_table_dim(). */
ctxzsl_status ctxzsl_embed(const ctxzsl_word_table* table, const char* name,
                           double* buffer, size_t buffer_len);

/* One-vs-rest known-attribute training on aligned inputs. */
ctxzsl_status ctxzsl_known_train(const ctxzsl_features* features,
                                 const ctxzsl_annotations* annotations, double cost,
                                 double pos_weight, ctxzsl_known_model** out);
ctxzsl_status ctxzsl_known_model_load(const char* path, ctxzsl_known_model** out);
ctxzsl_status ctxzsl_known_model_save(const ctxzsl_known_model* model,
                                      const char* path);
void ctxzsl_known_model_free(ctxzsl_known_model* model);

/* Calibrated per-attribute probabilities normalised per instance. */
ctxzsl_status ctxzsl_known_predict(const ctxzsl_known_model* model,
                                   const ctxzsl_features* features,
                                   ctxzsl_scores** out);

/* Softmax((v_q . v_p) / gamma) rows over the known names. */
ctxzsl_status ctxzsl_text_conditional_create(
    const ctxzsl_word_table* table, const char* const* novel_names,
    size_t num_novel, const char* const* known_names, size_t num_known,
    double gamma, ctxzsl_conditional** out);

/* Softmax(v_q^T M v_p) rows using a serialised bilinear context model. */
ctxzsl_status ctxzsl_cooc_conditional_create(
    const ctxzsl_word_table* table, const char* model_path,
    const char* const* novel_names, size_t num_novel,
    const char* const* known_names, size_t num_known, ctxzsl_conditional** out);

void ctxzsl_conditional_free(ctxzsl_conditional* conditional);
ctxzsl_status ctxzsl_conditional_value(const ctxzsl_conditional* conditional,
                                       size_t novel_index, size_t known_index,
                                       double* out);

/* Marginalises known-attribute scores through the conditional:
 * score(q, x) = sum_p cond(q, p) p(y_p | x). */
ctxzsl_status ctxzsl_marginal_predict(const ctxzsl_scores* known_scores,
                                      const ctxzsl_conditional* conditional,
                                      ctxzsl_scores** out);

ctxzsl_status ctxzsl_scores_load(const char* path, ctxzsl_scores** out);
ctxzsl_status ctxzsl_scores_save(const ctxzsl_scores* scores, const char* path);
void ctxzsl_scores_free(ctxzsl_scores* scores);
ctxzsl_status ctxzsl_scores_dims(const ctxzsl_scores* scores, size_t* num_attributes,
                                 size_t* count);
ctxzsl_status ctxzsl_scores_value(const ctxzsl_scores* scores, size_t attribute,
                                  size_t instance, double* out);
ctxzsl_status ctxzsl_scores_attribute(const ctxzsl_scores* scores, size_t index,
                                      const char** name);
ctxzsl_status ctxzsl_scores_instance(const ctxzsl_scores* scores, size_t index,
                                     const char** id);

/* Five-metric evaluation of scores against annotations over the split's
 * novel vocabulary; any output pointer may be NULL. */
ctxzsl_status ctxzsl_evaluate(const ctxzsl_scores* scores,
                              const ctxzsl_annotations* annotations,
                              const ctxzsl_split* split, const char* binarize_policy,
                              double* auc, double* label_ap, double* example_ap,
                              double* hamming, double* ranking);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CTXZSL_CTXZSL_H_ */
