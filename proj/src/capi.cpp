#include "dissflow/dissflow.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "dissflow/error.hpp"
#include "dissflow/euler.hpp"
#include "dissflow/experiment.hpp"
#include "dissflow/io.hpp"
#include "dissflow/mpvf.hpp"
#include "dissflow/pairing.hpp"
#include "dissflow/transport.hpp"

struct dsf_measure {
  dissflow::DiscreteMeasure value;
};
struct dsf_velocity {
  dissflow::VelocityMeasure value;
};
struct dsf_field {
  dissflow::MpvfSpec value;
};
struct dsf_trajectory {
  dissflow::EulerTrajectory value;
};
struct dsf_run {
  dissflow::RunOutcome value;
  std::string output_dir;
};

namespace {

thread_local std::string g_last_error;

int fail(int status, const char* what) {
  g_last_error = what;
  return status;
}

// Runs body, translating library exceptions into status codes.
template <class F>
int guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return DSF_OK;
  } catch (const dissflow::InvalidMeasure& e) {
    return fail(DSF_ERR_INVALID_MEASURE, e.what());
  } catch (const dissflow::DimensionMismatch& e) {
    return fail(DSF_ERR_DIMENSION, e.what());
  } catch (const dissflow::InvalidArgument& e) {
    return fail(DSF_ERR_INVALID_ARGUMENT, e.what());
  } catch (const dissflow::SolverError& e) {
    return fail(DSF_ERR_SOLVER, e.what());
  } catch (const dissflow::StabilityViolation& e) {
    return fail(DSF_ERR_STABILITY, e.what());
  } catch (const dissflow::ConfigError& e) {
    return fail(DSF_ERR_CONFIG, e.what());
  } catch (const dissflow::IoError& e) {
    return fail(DSF_ERR_IO, e.what());
  } catch (const dissflow::AtomBudgetExceeded& e) {
    return fail(DSF_ERR_ATOM_BUDGET, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DSF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DSF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DSF_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::vector<double> copy(const double* p, std::size_t n) {
  if (n > 0 && !p) throw dissflow::InvalidArgument("null array");
  return std::vector<double>(p, p + n);
}

dissflow::Side side_of(int side) {
  if (side == DSF_RIGHT) return dissflow::Side::Right;
  if (side == DSF_LEFT) return dissflow::Side::Left;
  throw dissflow::InvalidArgument("side must be DSF_RIGHT or DSF_LEFT");
}

dissflow::RunOverrides overrides_of(const dsf_run_options* o) {
  dissflow::RunOverrides r;
  if (o && o->has_seed) r.seed = o->seed;
  if (o && o->output_dir) r.output_dir = o->output_dir;
  return r;
}

}  // namespace

#define DSF_REQUIRE(cond)                               \
  do {                                                  \
    if (!(cond)) return fail(DSF_ERR_NULL, #cond " is null"); \
  } while (0)

extern "C" {

const char* dsf_version(void) { return "0.1.0"; }

const char* dsf_status_name(int status) {
  switch (status) {
    case DSF_OK: return "ok";
    case DSF_ERR_INVALID_MEASURE: return "invalid_measure";
    case DSF_ERR_DIMENSION: return "dimension_mismatch";
    case DSF_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DSF_ERR_SOLVER: return "solver_error";
    case DSF_ERR_STABILITY: return "stability_violation";
    case DSF_ERR_CONFIG: return "config_error";
    case DSF_ERR_IO: return "io_error";
    case DSF_ERR_NULL: return "null_argument";
    case DSF_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case DSF_ERR_ATOM_BUDGET: return "atom_budget_exceeded";
    case DSF_ERR_INTERNAL: return "internal_error";
    default: return "unknown_status";
  }
}

const char* dsf_last_error(void) { return g_last_error.c_str(); }

void dsf_string_free(char* s) { std::free(s); }

int dsf_measure_create(size_t dim, size_t n, const double* coords, const double* weights,
                       dsf_measure** out) {
  DSF_REQUIRE(out);
  return guard([&] {
    *out = new dsf_measure{dissflow::DiscreteMeasure(dim, copy(coords, n * dim), copy(weights, n))};
  });
}

int dsf_measure_from_csv(const char* text, dsf_measure** out) {
  DSF_REQUIRE(text);
  DSF_REQUIRE(out);
  return guard([&] { *out = new dsf_measure{dissflow::measure_from_csv(text)}; });
}

int dsf_measure_to_csv(const dsf_measure* m, char** out) {
  DSF_REQUIRE(m);
  DSF_REQUIRE(out);
  return guard([&] { *out = dup(dissflow::measure_to_csv(m->value)); });
}

void dsf_measure_free(dsf_measure* m) { delete m; }

int dsf_measure_dim(const dsf_measure* m, size_t* out) {
  DSF_REQUIRE(m);
  DSF_REQUIRE(out);
  *out = m->value.dim();
  return DSF_OK;
}

int dsf_measure_size(const dsf_measure* m, size_t* out) {
  DSF_REQUIRE(m);
  DSF_REQUIRE(out);
  *out = m->value.size();
  return DSF_OK;
}

int dsf_measure_atoms(const dsf_measure* m, double* coords, double* weights, size_t capacity) {
  DSF_REQUIRE(m);
  DSF_REQUIRE(coords);
  DSF_REQUIRE(weights);
  if (capacity < m->value.size()) return fail(DSF_ERR_BUFFER_TOO_SMALL, "capacity below atom count");
  std::copy(m->value.coords().begin(), m->value.coords().end(), coords);
  std::copy(m->value.weights().begin(), m->value.weights().end(), weights);
  return DSF_OK;
}

int dsf_second_moment(const dsf_measure* m, double* out) {
  DSF_REQUIRE(m);
  DSF_REQUIRE(out);
  return guard([&] { *out = dissflow::second_moment(m->value); });
}

int dsf_w2sq(const dsf_measure* a, const dsf_measure* b, double* out) {
  DSF_REQUIRE(a);
  DSF_REQUIRE(b);
  DSF_REQUIRE(out);
  return guard([&] { *out = dissflow::w2(a->value, b->value).cost; });
}

int dsf_velocity_create(size_t dim, size_t n, const double* xs, const double* vs,
                        const double* weights, dsf_velocity** out) {
  DSF_REQUIRE(out);
  return guard([&] {
    *out = new dsf_velocity{dissflow::VelocityMeasure(dim, copy(xs, n * dim), copy(vs, n * dim),
                                                      copy(weights, n))};
  });
}

void dsf_velocity_free(dsf_velocity* phi) { delete phi; }

int dsf_velocity_norm(const dsf_velocity* phi, double* out) {
  DSF_REQUIRE(phi);
  DSF_REQUIRE(out);
  *out = dissflow::velocity_norm(phi->value);
  return DSF_OK;
}

int dsf_pairing(const dsf_velocity* phi0, const dsf_velocity* phi1, int side, double* out) {
  DSF_REQUIRE(phi0);
  DSF_REQUIRE(phi1);
  DSF_REQUIRE(out);
  return guard([&] {
    *out = side_of(side) == dissflow::Side::Right ? dissflow::pairing_r(phi0->value, phi1->value).value
                                                  : dissflow::pairing_l(phi0->value, phi1->value).value;
  });
}

int dsf_pairing_measure(const dsf_velocity* phi, const dsf_measure* nu, int side, double* out) {
  DSF_REQUIRE(phi);
  DSF_REQUIRE(nu);
  DSF_REQUIRE(out);
  return guard([&] {
    *out = side_of(side) == dissflow::Side::Right ? dissflow::pairing_r_nu(phi->value, nu->value).value
                                                  : dissflow::pairing_l_nu(phi->value, nu->value).value;
  });
}

int dsf_field_from_json(const char* json, dsf_field** out) {
  DSF_REQUIRE(json);
  DSF_REQUIRE(out);
  return guard([&] { *out = new dsf_field{dissflow::spec_from_json(json)}; });
}

void dsf_field_free(dsf_field* f) { delete f; }

int dsf_field_evaluate(const dsf_field* f, const dsf_measure* mu, dsf_velocity** out) {
  DSF_REQUIRE(f);
  DSF_REQUIRE(mu);
  DSF_REQUIRE(out);
  return guard([&] { *out = new dsf_velocity{dissflow::evaluate(f->value, mu->value)}; });
}

int dsf_certify(const dsf_field* f, size_t dim, uint64_t seed, double lambda, size_t n_pairs,
                int weak, double* max_residual, int* passed) {
  DSF_REQUIRE(f);
  DSF_REQUIRE(max_residual);
  DSF_REQUIRE(passed);
  return guard([&] {
    dissflow::MeasureSampler s;
    s.dim = dim;
    s.seed = seed;
    auto rep = weak ? dissflow::weak_dissipativity_certificate(f->value, s, lambda, n_pairs)
                    : dissflow::dissipativity_certificate(f->value, s, lambda, n_pairs);
    *max_residual = rep.max_residual;
    *passed = rep.passed ? 1 : 0;
  });
}

int dsf_euler_run(const dsf_field* f, const dsf_measure* mu0, double tau, double T, double L,
                  dsf_trajectory** out) {
  DSF_REQUIRE(f);
  DSF_REQUIRE(mu0);
  DSF_REQUIRE(out);
  return guard([&] {
    *out = new dsf_trajectory{dissflow::euler_run(f->value, mu0->value, tau, T, L)};
  });
}

void dsf_trajectory_free(dsf_trajectory* t) { delete t; }

int dsf_trajectory_nodes(const dsf_trajectory* t, size_t* out) {
  DSF_REQUIRE(t);
  DSF_REQUIRE(out);
  *out = t->value.M.size();
  return DSF_OK;
}

int dsf_trajectory_node(const dsf_trajectory* t, size_t n, dsf_measure** out) {
  DSF_REQUIRE(t);
  DSF_REQUIRE(out);
  if (n >= t->value.M.size()) return fail(DSF_ERR_INVALID_ARGUMENT, "node index out of range");
  return guard([&] { *out = new dsf_measure{t->value.M[n]}; });
}

int dsf_trajectory_interpolate(const dsf_trajectory* t, double time, int mode, dsf_measure** out) {
  DSF_REQUIRE(t);
  DSF_REQUIRE(out);
  return guard([&] {
    if (mode != DSF_AFFINE && mode != DSF_PIECEWISE)
      throw dissflow::InvalidArgument("mode must be DSF_AFFINE or DSF_PIECEWISE");
    const auto m = mode == DSF_AFFINE ? dissflow::InterpolationMode::Affine
                                      : dissflow::InterpolationMode::Piecewise;
    *out = new dsf_measure{dissflow::interpolate(t->value, time, m)};
  });
}

int dsf_validate_config(const char* json) {
  DSF_REQUIRE(json);
  return guard([&] { dissflow::validate_config(json); });
}

int dsf_run_config(const char* json, const dsf_run_options* options, dsf_run** out) {
  DSF_REQUIRE(json);
  DSF_REQUIRE(out);
  return guard([&] {
    auto outcome = dissflow::run_experiment(json, overrides_of(options));
    const std::string dir = outcome.output_dir.string();
    *out = new dsf_run{std::move(outcome), dir};
  });
}

int dsf_run_config_file(const char* path, const dsf_run_options* options, dsf_run** out) {
  DSF_REQUIRE(path);
  DSF_REQUIRE(out);
  return guard([&] {
    auto outcome = dissflow::run_experiment_file(path, overrides_of(options));
    const std::string dir = outcome.output_dir.string();
    *out = new dsf_run{std::move(outcome), dir};
  });
}

void dsf_run_free(dsf_run* r) { delete r; }

int dsf_run_exit_code(const dsf_run* r) { return r ? r->value.exit_code : dissflow::kExitInternal; }
const char* dsf_run_message(const dsf_run* r) { return r ? r->value.message.c_str() : ""; }
const char* dsf_run_summary(const dsf_run* r) { return r ? r->value.summary_json.c_str() : ""; }
const char* dsf_run_output_dir(const dsf_run* r) { return r ? r->output_dir.c_str() : ""; }
size_t dsf_run_file_count(const dsf_run* r) { return r ? r->value.files.size() : 0; }

const char* dsf_run_file(const dsf_run* r, size_t i) {
  if (!r || i >= r->value.files.size()) return nullptr;
  return r->value.files[i].c_str();
}

size_t dsf_preset_count(void) { return dissflow::preset_names().size(); }

const char* dsf_preset_name(size_t i) {
  static const std::vector<std::string> names = dissflow::preset_names();
  return i < names.size() ? names[i].c_str() : nullptr;
}

const char* dsf_preset_description(size_t i) {
  static const std::vector<std::string> descriptions = [] {
    std::vector<std::string> d;
    for (const auto& n : dissflow::preset_names()) d.push_back(dissflow::preset_description(n));
    return d;
  }();
  return i < descriptions.size() ? descriptions[i].c_str() : nullptr;
}

int dsf_preset_config(const char* name, char** out) {
  DSF_REQUIRE(name);
  DSF_REQUIRE(out);
  return guard([&] { *out = dup(dissflow::preset_config(name)); });
}

size_t dsf_tolerance_count(void) { return dissflow::tolerance_table().size(); }

int dsf_tolerance(size_t i, const char** name, double* value) {
  static const auto table = dissflow::tolerance_table();
  DSF_REQUIRE(name);
  DSF_REQUIRE(value);
  if (i >= table.size()) return fail(DSF_ERR_INVALID_ARGUMENT, "tolerance index out of range");
  *name = table[i].first.c_str();
  *value = table[i].second;
  return DSF_OK;
}

}  // extern "C"
