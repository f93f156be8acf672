#include <stdio.h>
#include <string.h>

#include "gnss_qsvm.h"

#define CHECK(expr)                                                            \
  do {                                                                         \
    GqStatus s_ = (expr);                                                      \
    if (s_ != GQ_STATUS_OK) {                                                  \
      const char *m_ = gq_last_error();                                        \
      fprintf(stderr, "%s failed: %d %s\n", #expr, (int)s_, m_ ? m_ : "");     \
      return 1;                                                                \
    }                                                                          \
  } while (0)

int main(void) {
  double x[2] = {0.5, 0.5};
  double k = -1.0;
  CHECK(gq_fidelity_exact(x, x, 2, 2, &k));
  if (k < 1.0 - 1e-10 || k > 1.0 + 1e-10) {
    fprintf(stderr, "self fidelity %f\n", k);
    return 1;
  }

  /* two LOS, two NLOS, two LOS_NLOS samples */
  double features[12] = {9.0, 70.0, 8.0, 60.0, -3.0, 20.0,
                         -4.0, 15.0, 2.0, 35.0, 1.5, 40.0};
  uint32_t labels[6] = {0, 0, 1, 1, 2, 2};
  GqTrainConfig cfg = gq_train_config_default();
  cfg.c = 100.0;
  GqModel *model = NULL;
  CHECK(gq_model_train(features, labels, 6, &cfg, &model));

  uint32_t predicted[6];
  CHECK(gq_model_predict(model, features, 6, predicted));
  for (int i = 0; i < 6; ++i) {
    if (predicted[i] != labels[i]) {
      fprintf(stderr, "sample %d predicted %u\n", i, predicted[i]);
      return 1;
    }
  }

  char *json = NULL;
  CHECK(gq_model_to_json(model, &json));
  GqModel *copy = NULL;
  CHECK(gq_model_from_json(json, &copy));
  gq_string_free(json);

  GqStatus bad = gq_model_predict(NULL, features, 6, predicted);
  if (bad != GQ_STATUS_NULL_POINTER || gq_last_error() == NULL) {
    return 1;
  }

  gq_model_free(copy);
  gq_model_free(model);
  printf("ok %s\n", gq_version());
  return 0;
}
