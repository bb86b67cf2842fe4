// Copyright 2026 The curdisc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the curdisc library.
 *
 * Every fallible call returns a cd_status; on failure cd_last_error() holds
 * a message for the calling thread. Objects are opaque handles released with
 * their matching *_free function. Strings returned through char** are owned
 * by the caller and released with cd_free_string().
 */
#ifndef CURDISC_CURDISC_H_
#define CURDISC_CURDISC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CURDISC_BUILDING)
#define CD_API __attribute__((visibility("default")))
#else
#define CD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cd_status {
  CD_OK = 0,
  CD_ERR_INVALID_ARGUMENT = 1,
  CD_ERR_IO = 2,
  CD_ERR_PARSE = 3,
  CD_ERR_OUT_OF_RANGE = 4,
  CD_ERR_DIVERGED = 5,
  CD_ERR_INSUFFICIENT_DATA = 6,
  CD_ERR_INTERNAL = 7
} cd_status;

typedef struct cd_dataset cd_dataset;
typedef struct cd_partition cd_partition;
typedef struct cd_curriculum cd_curriculum;
typedef struct cd_report cd_report;

CD_API const char* cd_version(void);
CD_API const char* cd_status_string(cd_status status);
/* Message for the last failed call on this thread; "" if none. */
CD_API const char* cd_last_error(void);
CD_API void cd_free_string(char* s);

/* NULL restores the default handler, which prints to stderr. */
typedef void (*cd_warning_fn)(const char* message, void* user);
CD_API void cd_set_warning_callback(cd_warning_fn fn, void* user);

/* ---- datasets ---- */

/* format: "jsonl" or "csv". num_classes 0 infers C from the data. */
CD_API cd_status cd_dataset_load(const char* path, const char* format, int num_classes,
                                 cd_dataset** out);
/* Loads train.jsonl, dev.jsonl and test.jsonl from a directory. */
CD_API cd_status cd_dataset_load_dir(const char* dir, cd_dataset** train, cd_dataset** dev,
                                     cd_dataset** test);
CD_API cd_status cd_dataset_save(const cd_dataset* ds, const char* path);
CD_API cd_status cd_dataset_describe(const cd_dataset* ds, char** out);
CD_API size_t cd_dataset_size(const cd_dataset* ds);
CD_API int cd_dataset_num_classes(const cd_dataset* ds);
CD_API void cd_dataset_free(cd_dataset* ds);

typedef struct cd_synthesis_params {
  int n;
  int num_classes;
  int annotators;
  double noise_hard;
  uint64_t seed;
  int dim;
  double separation;
  double hard_spread;
} cd_synthesis_params;

CD_API void cd_synthesis_params_init(cd_synthesis_params* p);
/* Any output pointer may be NULL. latent_csv receives "id,delta,true_label"
 * rows for every sample. */
CD_API cd_status cd_synthesize(const cd_synthesis_params* p, cd_dataset** train, cd_dataset** dev,
                               cd_dataset** test, char** latent_csv);

/* ---- trainer settings ---- */

typedef struct cd_trainer_config {
  const char* model;      /* "linear", "mlp", "mlp<hidden>" */
  const char* optimizer;  /* "sgd" or "adam" */
  double learning_rate;
  int batch_size;
  int epochs;
  uint64_t seed;
  double eval_every;
  const char* strategy; /* none, curriculum, spl, superloss, dp, hardmining */
  double lambda;
  double spl_growth;
  double alpha;
  double tau; /* NaN selects the median difficulty for dp */
  double ema_decay;
} cd_trainer_config;

CD_API void cd_trainer_config_init(cd_trainer_config* cfg);

/* ---- difficulty ---- */

/* method: "entropy" or "loss"; partition: "quantile" or "kmeans". cfg is
 * read only by the loss method and may be NULL for defaults. */
CD_API cd_status cd_partition_compute(const cd_dataset* train, const char* method,
                                      const char* partition, int k, const cd_trainer_config* cfg,
                                      cd_partition** out);
CD_API cd_status cd_partition_load_sidecar(const char* path, int k, const char* method,
                                           cd_partition** out);
CD_API cd_status cd_partition_sidecar(const cd_partition* p, char** out);
CD_API cd_status cd_partition_histogram(const cd_partition* p, int bins, char** out);
CD_API int cd_partition_k(const cd_partition* p);
CD_API size_t cd_partition_group_size(const cd_partition* p, int group);
CD_API void cd_partition_free(cd_partition* p);

CD_API cd_status cd_dataset_subsample(const cd_dataset* ds, const cd_partition* p, int per_group,
                                      uint64_t seed, cd_dataset** out);

/* ---- curricula ---- */

/* name: "inc", "anti" or "constant". */
CD_API cd_status cd_curriculum_preset(const char* name, int k, cd_curriculum** out);
CD_API cd_status cd_curriculum_load(const char* path, cd_curriculum** out);
CD_API cd_status cd_curriculum_from_json(const char* text, cd_curriculum** out);
CD_API cd_status cd_curriculum_to_json(const cd_curriculum* c, char** out);
CD_API cd_status cd_curriculum_save(const cd_curriculum* c, const char* path);
CD_API cd_status cd_curriculum_trajectory(const cd_curriculum* c, int steps, char** csv);
CD_API cd_status cd_curriculum_weight(const cd_curriculum* c, double t, int group, double* out);
CD_API int cd_curriculum_k(const cd_curriculum* c);
CD_API void cd_curriculum_set_non_monotonic(cd_curriculum* c, int enabled);
CD_API void cd_curriculum_free(cd_curriculum* c);

/* ---- training ---- */

/* dev, test, partition and curriculum may be NULL where the strategy allows. */
CD_API cd_status cd_train(const cd_dataset* train, const cd_dataset* dev, const cd_dataset* test,
                          const cd_partition* partition, const cd_trainer_config* cfg,
                          const cd_curriculum* curriculum, cd_report** out);
CD_API cd_status cd_report_from_json(const char* text, cd_report** out);
CD_API cd_status cd_report_to_json(const cd_report* r, char** out);
CD_API cd_status cd_report_curve_csv(const cd_report* r, char** out);
CD_API cd_status cd_report_weights_csv(const cd_report* r, char** out);
CD_API cd_status cd_report_groups_csv(const cd_report* r, char** out);
CD_API cd_status cd_report_digest(const cd_report* r, char** out);
CD_API double cd_report_best_dev_accuracy(const cd_report* r);
CD_API double cd_report_test_accuracy(const cd_report* r);
CD_API uint64_t cd_report_seed(const cd_report* r);
CD_API void cd_report_free(cd_report* r);

/* ---- curriculum discovery ---- */

typedef struct cd_discover_options {
  int budget;
  const uint64_t* seeds; /* seeds per trial */
  size_t num_seeds;
  uint64_t master_seed;
  const char* sampler; /* "tpe" or "random" */
  int non_monotonic;
  const char* name;
  int threads;
} cd_discover_options;

CD_API void cd_discover_options_init(cd_discover_options* o);
/* store_path may be NULL or "" for an in-memory store. A non-empty store
 * resumes: trials already recorded are not re-run. */
CD_API cd_status cd_discover(const cd_dataset* train, const cd_dataset* dev,
                             const cd_partition* partition, const cd_trainer_config* cfg,
                             const cd_discover_options* opts, const char* store_path,
                             cd_curriculum** best, double* best_objective);
/* Ranking CSV and top-n weight curve band CSV from a trial store. */
CD_API cd_status cd_trials_report(const char* store_path, int top_n, int steps, char** ranking_csv,
                                  char** band_csv);

/* ---- experiments ---- */

CD_API cd_status cd_experiment_run(const char* config_path, const char* out_dir,
                                   char** summary_csv);
/* Recomputes the summary of a run directory from its stored reports. */
CD_API cd_status cd_run_summarize(const char* run_dir, char** summary_csv);
CD_API cd_status cd_sweep_k(const char* data_dir, const char* method, const char* partition,
                            const int* ks, size_t num_ks, const cd_trainer_config* cfg,
                            const uint64_t* seeds, size_t num_seeds, const char* out_dir,
                            int threads, char** sweep_csv);
CD_API cd_status cd_sweep_summarize(const char* out_dir, char** sweep_csv);
CD_API cd_status cd_transfer_run(const char* config_path, const char* out_dir, char** raw_csv,
                                 char** normalized_csv);

#ifdef __cplusplus
}
#endif

#endif  // CURDISC_CURDISC_H_
