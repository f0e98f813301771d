#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "dissflow/dissflow.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static void measures(void) {
  const double xs[] = {0.0, 1.0, 2.0};
  const double w[] = {0.25, 0.5, 0.25};
  dsf_measure* m = NULL;
  EXPECT(dsf_measure_create(1, 3, xs, w, &m) == DSF_OK);
  size_t n = 0, d = 0;
  EXPECT(dsf_measure_size(m, &n) == DSF_OK && n == 3);
  EXPECT(dsf_measure_dim(m, &d) == DSF_OK && d == 1);
  double m2 = 0.0;
  EXPECT(dsf_second_moment(m, &m2) == DSF_OK && fabs(m2 - 1.5) < 1e-15);

  double cx[3], cw[3];
  EXPECT(dsf_measure_atoms(m, cx, cw, 2) == DSF_ERR_BUFFER_TOO_SMALL);
  EXPECT(dsf_measure_atoms(m, cx, cw, 3) == DSF_OK && cx[2] == 2.0 && cw[1] == 0.5);

  const double ys[] = {1.0};
  const double one[] = {1.0};
  dsf_measure* dirac = NULL;
  EXPECT(dsf_measure_create(1, 1, ys, one, &dirac) == DSF_OK);
  double w2 = 0.0;
  EXPECT(dsf_w2sq(m, dirac, &w2) == DSF_OK && fabs(w2 - 0.5) < 1e-15);

  char* csv = NULL;
  EXPECT(dsf_measure_to_csv(m, &csv) == DSF_OK);
  dsf_measure* back = NULL;
  EXPECT(dsf_measure_from_csv(csv, &back) == DSF_OK);
  EXPECT(dsf_w2sq(m, back, &w2) == DSF_OK && w2 == 0.0);
  dsf_string_free(csv);

  const double bad[] = {0.5, 0.6, 0.1};
  dsf_measure* invalid = NULL;
  EXPECT(dsf_measure_create(1, 3, xs, bad, &invalid) == DSF_ERR_INVALID_MEASURE);
  EXPECT(invalid == NULL);
  EXPECT(strlen(dsf_last_error()) > 0);

  const double p2[] = {0.0, 0.0};
  dsf_measure* plane = NULL;
  EXPECT(dsf_measure_create(2, 1, p2, one, &plane) == DSF_OK);
  EXPECT(dsf_w2sq(m, plane, &w2) == DSF_ERR_DIMENSION);
  EXPECT(dsf_w2sq(NULL, plane, &w2) == DSF_ERR_NULL);

  dsf_measure_free(plane);
  dsf_measure_free(back);
  dsf_measure_free(dirac);
  dsf_measure_free(m);
}

static void pairings(void) {
  const double xs[] = {1.0, 0.0, -1.0, 0.0};
  const double vs[] = {0.0, 1.0, 0.0, -1.0};
  const double w[] = {0.5, 0.5};
  dsf_velocity* phi = NULL;
  EXPECT(dsf_velocity_create(2, 2, xs, vs, w, &phi) == DSF_OK);
  const double ys[] = {0.0, 1.0, 0.0, -1.0};
  dsf_measure* nu = NULL;
  EXPECT(dsf_measure_create(2, 2, ys, w, &nu) == DSF_OK);
  double r = 0.0, l = 0.0;
  EXPECT(dsf_pairing_measure(phi, nu, DSF_RIGHT, &r) == DSF_OK);
  EXPECT(dsf_pairing_measure(phi, nu, DSF_LEFT, &l) == DSF_OK);
  EXPECT(fabs(r + 1.0) < 1e-12);
  EXPECT(fabs(l - 1.0) < 1e-12);
  EXPECT(dsf_pairing_measure(phi, nu, 7, &r) == DSF_ERR_INVALID_ARGUMENT);
  double self = 1.0;
  EXPECT(dsf_pairing(phi, phi, DSF_RIGHT, &self) == DSF_OK && fabs(self) < 1e-12);
  double norm = 0.0;
  EXPECT(dsf_velocity_norm(phi, &norm) == DSF_OK && fabs(norm - 1.0) < 1e-15);
  dsf_measure_free(nu);
  dsf_velocity_free(phi);
}

static void euler(void) {
  dsf_field* f = NULL;
  EXPECT(dsf_field_from_json("{\"kind\": \"splitting_particle\"}", &f) == DSF_OK);
  EXPECT(dsf_field_from_json("{\"kind\": \"nonsense\"}", &f) != DSF_OK);
  const double x0[] = {0.0};
  const double one[] = {1.0};
  dsf_measure* mu0 = NULL;
  EXPECT(dsf_measure_create(1, 1, x0, one, &mu0) == DSF_OK);

  dsf_trajectory* traj = NULL;
  EXPECT(dsf_euler_run(f, mu0, 0.125, 1.0, 2.0, &traj) == DSF_OK);
  size_t nodes = 0;
  EXPECT(dsf_trajectory_nodes(traj, &nodes) == DSF_OK && nodes == 9);
  dsf_measure* last = NULL;
  EXPECT(dsf_trajectory_node(traj, 8, &last) == DSF_OK);
  double m2 = 0.0;
  EXPECT(dsf_second_moment(last, &m2) == DSF_OK && fabs(m2 - 1.0) < 1e-12);
  dsf_measure* mid = NULL;
  EXPECT(dsf_trajectory_interpolate(traj, 0.5, DSF_AFFINE, &mid) == DSF_OK);
  EXPECT(dsf_second_moment(mid, &m2) == DSF_OK && fabs(m2 - 0.25) < 1e-12);
  EXPECT(dsf_trajectory_node(traj, 9, &last) == DSF_ERR_INVALID_ARGUMENT);

  dsf_trajectory* unstable = NULL;
  EXPECT(dsf_euler_run(f, mu0, 0.125, 1.0, 0.5, &unstable) == DSF_ERR_STABILITY);
  EXPECT(unstable == NULL);

  double residual = 0.0;
  int passed = 0;
  EXPECT(dsf_certify(f, 1, 3, 0.5, 20, 0, &residual, &passed) == DSF_OK);
  EXPECT(passed == 1);

  dsf_measure_free(mid);
  dsf_measure_free(last);
  dsf_trajectory_free(traj);
  dsf_measure_free(mu0);
  dsf_field_free(f);
}

static void experiments(const char* out_root) {
  EXPECT(dsf_preset_count() >= 8);
  EXPECT(dsf_preset_name(dsf_preset_count()) == NULL);
  char* cfg = NULL;
  EXPECT(dsf_preset_config("rhombus_pairing", &cfg) == DSF_OK);
  EXPECT(dsf_validate_config(cfg) == DSF_OK);
  EXPECT(dsf_preset_config("missing", &cfg) == DSF_ERR_CONFIG);

  char dir[1024];
  snprintf(dir, sizeof dir, "%s/capi_rhombus", out_root);
  dsf_run_options opts = {1, 5, dir};
  dsf_run* run = NULL;
  EXPECT(dsf_run_config(cfg, &opts, &run) == DSF_OK);
  EXPECT(dsf_run_exit_code(run) == 0);
  EXPECT(strstr(dsf_run_summary(run), "\"passed\":true") != NULL);
  EXPECT(strcmp(dsf_run_output_dir(run), dir) == 0);
  EXPECT(dsf_run_file_count(run) >= 2);
  EXPECT(strcmp(dsf_run_file(run, dsf_run_file_count(run) - 1), "manifest.json") == 0);
  EXPECT(dsf_run_file(run, 1000) == NULL);
  dsf_run_free(run);
  dsf_string_free(cfg);

  EXPECT(dsf_validate_config("{\"command\": 3}") == DSF_ERR_CONFIG);
  EXPECT(dsf_run_config("{\"command\": \"pairing\", \"x\": 1}", NULL, &run) == DSF_OK);
  EXPECT(dsf_run_exit_code(run) == 1);
  EXPECT(strlen(dsf_run_message(run)) > 0);
  dsf_run_free(run);

  size_t nt = dsf_tolerance_count();
  EXPECT(nt > 0);
  const char* name = NULL;
  double value = 0.0;
  EXPECT(dsf_tolerance(0, &name, &value) == DSF_OK && strcmp(name, "merge") == 0 && value == 1e-12);
  EXPECT(dsf_tolerance(nt, &name, &value) == DSF_ERR_INVALID_ARGUMENT);
}

int main(int argc, char** argv) {
  EXPECT(strcmp(dsf_status_name(DSF_ERR_STABILITY), "stability_violation") == 0);
  EXPECT(strlen(dsf_version()) > 0);
  measures();
  pairings();
  euler();
  experiments(argc > 1 ? argv[1] : ".");
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("test_capi: all checks passed\n");
  return 0;
}
