#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "stoat/stoat.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__,     \
              __LINE__, #cond);                                        \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void test_config(void) {
  stoat_config* cfg = NULL;
  char buf[64];
  size_t needed = 0;
  EXPECT(stoat_config_new(&cfg) == STOAT_OK);
  EXPECT(stoat_config_get(cfg, "horizon", buf, sizeof buf, &needed) == STOAT_OK);
  EXPECT(strcmp(buf, "10") == 0 && needed == 3);
  EXPECT(stoat_config_set(cfg, "horizon", "7") == STOAT_OK);
  EXPECT(stoat_config_get(cfg, "horizon", buf, 2, &needed) == STOAT_OK);
  EXPECT(strcmp(buf, "7") == 0);
  EXPECT(stoat_config_set(cfg, "no_such_key", "1") == STOAT_ERR_INVALID_INPUT);
  EXPECT(strstr(stoat_last_error(), "no_such_key") != NULL);
  EXPECT(stoat_run_stage(cfg, "bogus") == STOAT_ERR_INVALID_INPUT);
  EXPECT(stoat_config_set(NULL, "horizon", "1") == STOAT_ERR_INVALID_INPUT);
  EXPECT(stoat_config_key_count() > 10);
  const char* name = NULL;
  EXPECT(stoat_config_key_info(0, &name, NULL, NULL) == STOAT_OK && name != NULL);
  EXPECT(stoat_config_load("/nonexistent/stoat.cfg", &cfg) == STOAT_ERR_IO);
  stoat_config_free(cfg);
  EXPECT(strcmp(stoat_status_name(STOAT_ERR_ALIGNMENT), "alignment") == 0);
}

static void test_spatial(void) {
  const double lat[] = {0.0, 0.0, 0.0};
  const double lon[] = {0.0, 1.0, 3.0};
  stoat_spatial* s = NULL;
  double w[9];
  double km = 0.0;
  EXPECT(stoat_spatial_build(3, lat, lon, 1.0, &s) == STOAT_OK);
  EXPECT(stoat_spatial_size(s) == 3);
  EXPECT(stoat_spatial_weights(s, w) == STOAT_OK);
  EXPECT(fabs(w[1] - 0.75) < 1e-12 && fabs(w[3] - 2.0 / 3.0) < 1e-12 && w[8] == 0.0);
  stoat_spatial_free(s);
  EXPECT(stoat_spatial_build(1, lat, lon, 1.0, &s) == STOAT_ERR_DEGENERATE_INPUT);
  EXPECT(stoat_geodesic_distance(0, 0, 0, 180, &km) == STOAT_OK);
  EXPECT(fabs(km - 20015.114442035924) < 1e-8);
  EXPECT(stoat_geodesic_distance(100, 0, 0, 0, &km) == STOAT_ERR_INVALID_INPUT);
}

static void test_metrics(void) {
  const double two[] = {0.0, 1.0};
  const double paths[] = {0, 0, 2, 0};
  const double obs[] = {0, 0};
  const double five[] = {5, 1, 4, 2, 3};
  double v = -1;
  EXPECT(stoat_crps(two, 2, 0.0, &v) == STOAT_OK && fabs(v - 0.25) < 1e-15);
  EXPECT(stoat_crps(two, 1, 0.0, &v) == STOAT_ERR_INVALID_INPUT);
  EXPECT(stoat_energy_score(paths, 2, 2, obs, &v) == STOAT_OK && fabs(v - 0.5) < 1e-15);
  EXPECT(stoat_quantile(five, 5, 0.5, &v) == STOAT_OK && v == 3.0);
}

static void test_model(const char* dir) {
  char path[1024];
  snprintf(path, sizeof path, "%s/absent.ckpt", dir);
  stoat_model* m = NULL;
  EXPECT(stoat_model_load(path, &m) == STOAT_ERR_IO);
  snprintf(path, sizeof path, "%s/model.ckpt", dir);

  stoat_config* cfg = NULL;
  stoat_config_new(&cfg);
  stoat_config_set(cfg, "out", dir);
  stoat_config_set(cfg, "sim.n_regions", "3");
  stoat_config_set(cfg, "sim.t_steps", "60");
  stoat_config_set(cfg, "sim.post_onset_index", "30");
  stoat_config_set(cfg, "horizon", "3");
  stoat_config_set(cfg, "context_len", "15");
  stoat_config_set(cfg, "hidden_size", "4");
  stoat_config_set(cfg, "epochs", "1");
  stoat_config_set(cfg, "num_samples", "8");
  EXPECT(stoat_run_stage(cfg, "simulate") == STOAT_OK);
  stoat_config_free(cfg);
  char sim[1024];
  snprintf(sim, sizeof sim, "%s/simulate.cfg", dir);
  EXPECT(stoat_config_load(sim, &cfg) == STOAT_OK);
  EXPECT(stoat_run_stage(cfg, "pipeline") == STOAT_OK);
  stoat_config_free(cfg);

  EXPECT(stoat_model_load(path, &m) == STOAT_OK);
  size_t regions = 0, ctx = 0, horizon = 0;
  EXPECT(stoat_model_info(m, &regions, &ctx, &horizon) == STOAT_OK);
  EXPECT(regions == 3 && ctx == 15 && horizon == 3);
  double z[3 * 20], y[3 * 20];
  for (int k = 0; k < 60; ++k) {
    z[k] = sin(0.3 * k);
    y[k] = cos(0.2 * k);
  }
  double a[3 * 3 * 4], b[3 * 3 * 4];
  EXPECT(stoat_model_forecast(m, z, y, 3, 20, 3, 4, 9, a) == STOAT_OK);
  char copy[1024];
  snprintf(copy, sizeof copy, "%s/copy.ckpt", dir);
  EXPECT(stoat_model_save(m, copy) == STOAT_OK);
  stoat_model* m2 = NULL;
  EXPECT(stoat_model_load(copy, &m2) == STOAT_OK);
  EXPECT(stoat_model_forecast(m2, z, y, 3, 20, 3, 4, 9, b) == STOAT_OK);
  EXPECT(memcmp(a, b, sizeof a) == 0);
  EXPECT(stoat_model_forecast(m, z, y, 3, 10, 3, 4, 9, b) == STOAT_ERR_INSUFFICIENT_DATA);
  stoat_model_free(m);
  stoat_model_free(m2);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s <scratch-dir>\n", argv[0]);
    return 2;
  }
  test_config();
  test_spatial();
  test_metrics();
  test_model(argv[1]);
  if (failures) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("all C API checks passed\n");
  return 0;
}
