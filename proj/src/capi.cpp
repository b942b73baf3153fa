#include "cmlab/cmlab.h"

#include <cstring>
#include <filesystem>
#include <sstream>

#include "cmlab/foliation.hpp"
#include "cmlab/io.hpp"
#include "json.hpp"

struct cmlab_field {
  cmlab::FieldPtr f;
};

namespace {

using cmlab::Error;
using cmlab::Status;
using json = nlohmann::json;

thread_local std::string g_error;

int code(Status s) {
  switch (s) {
    case Status::ok: return CMLAB_OK;
    case Status::invalid_argument: return CMLAB_INVALID_ARGUMENT;
    case Status::dimension_mismatch: return CMLAB_DIMENSION_MISMATCH;
    case Status::not_positive_definite: return CMLAB_NOT_POSITIVE_DEFINITE;
    case Status::nonconvex: return CMLAB_NONCONVEX;
    case Status::singular: return CMLAB_SINGULAR;
    case Status::solver_failure: return CMLAB_SOLVER_FAILURE;
    case Status::out_of_support: return CMLAB_OUT_OF_SUPPORT;
    case Status::io_error: return CMLAB_IO_ERROR;
    case Status::format_error: return CMLAB_FORMAT_ERROR;
  }
  return CMLAB_INTERNAL_ERROR;
}

template <class F>
int guard(F&& body) {
  g_error.clear();
  try {
    return body();
  } catch (const Error& e) {
    g_error = e.what();
    return code(e.status());
  } catch (const std::exception& e) {
    g_error = e.what();
    return CMLAB_INTERNAL_ERROR;
  } catch (...) {
    g_error = "unknown exception";
    return CMLAB_INTERNAL_ERROR;
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) throw Error(Status::invalid_argument, std::string(what) + " is null");
}

cmlab::Point point_of(const cmlab_field* field, const double* z_real) {
  need(z_real, "point");
  const int n = field->f->n();
  cmlab::RVec x(2 * n);
  for (int k = 0; k < 2 * n; ++k) x(k) = z_real[k];
  return cmlab::from_real(x);
}

std::vector<std::string> split(const char* list) {
  std::vector<std::string> out;
  if (!list || !*list || std::string(list) == "all") return cmlab::check_names();
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

extern "C" {

const char* cmlab_last_error(void) { return g_error.c_str(); }

const char* cmlab_status_name(int status) {
  switch (status) {
    case CMLAB_OK: return "ok";
    case CMLAB_INVALID_ARGUMENT: return "invalid_argument";
    case CMLAB_DIMENSION_MISMATCH: return "dimension_mismatch";
    case CMLAB_NOT_POSITIVE_DEFINITE: return "not_positive_definite";
    case CMLAB_NONCONVEX: return "nonconvex";
    case CMLAB_SINGULAR: return "singular";
    case CMLAB_SOLVER_FAILURE: return "solver_failure";
    case CMLAB_OUT_OF_SUPPORT: return "out_of_support";
    case CMLAB_IO_ERROR: return "io_error";
    case CMLAB_FORMAT_ERROR: return "format_error";
    default: return "internal_error";
  }
}

const char* cmlab_version(void) { return "0.1.0"; }

void cmlab_string_free(char* s) { std::free(s); }

int cmlab_lemma_suite_count(void) { return static_cast<int>(cmlab::lemma_suite_names().size()); }

const char* cmlab_lemma_suite_name(int index) {
  static const std::vector<std::string> names = cmlab::lemma_suite_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  return names[index].c_str();
}

int cmlab_lemma_suite_run(const char* name, int trials, uint64_t seed, char** result_json) {
  return guard([&] {
    need(name, "suite name");
    need(result_json, "result");
    cmlab::SuiteResult r = cmlab::run_lemma_suite(name, trials, seed);
    json j = {{"name", r.name},         {"trials", r.trials},   {"failures", r.failures},
              {"worst_margin", r.worst_margin}, {"witness", r.witness}};
    *result_json = dup(j.dump());
    return CMLAB_OK;
  });
}

void cmlab_set_takagi_fault(int on) { cmlab::set_takagi_fault(on != 0); }

int cmlab_experiment_info(const char* experiment_json, const char* base_dir, char** info_json) {
  return guard([&] {
    need(experiment_json, "experiment");
    need(info_json, "info");
    cmlab::ExperimentSpec s = cmlab::experiment_from_json(experiment_json, base_dir ? base_dir : ".");
    json j = {{"output", s.output}, {"checks", s.checks}, {"seed", s.seed}};
    *info_json = dup(j.dump());
    return CMLAB_OK;
  });
}

int cmlab_solve(const char* experiment_json, const char* base_dir, cmlab_field** field, char** report_json) {
  return guard([&] {
    need(experiment_json, "experiment");
    need(field, "field");
    need(report_json, "report");
    *field = nullptr;
    *report_json = nullptr;
    cmlab::ExperimentSpec s = cmlab::experiment_from_json(experiment_json, base_dir ? base_dir : ".");
    cmlab::ContinuationResult cr = cmlab::continuation(*s.ring, s.G, s.solve, s.tier, s.full);
    if (cr.stages.empty()) throw Error(Status::solver_failure, cr.failure);
    cmlab::SolveReport& last = cr.stages.back();
    // Aggregate the stage traces into the final report.
    std::vector<cmlab::StageTrace> trace;
    for (const auto& st : cr.stages) trace.insert(trace.end(), st.eps_trace.begin(), st.eps_trace.end());
    last.eps_trace = trace;
    if (!cr.ok && last.message.empty()) last.message = cr.failure;
    *field = new cmlab_field{last.field};
    *report_json = dup(cmlab::report_to_json(last));
    if (!cr.ok) {
      g_error = cr.failure;
      return CMLAB_SOLVER_FAILURE;
    }
    return CMLAB_OK;
  });
}

int cmlab_field_read(const char* path, cmlab_field** out) {
  return guard([&] {
    need(path, "path");
    need(out, "field");
    *out = new cmlab_field{cmlab::read_field(path)};
    return CMLAB_OK;
  });
}

int cmlab_field_from_json(const char* text, cmlab_field** out) {
  return guard([&] {
    need(text, "text");
    need(out, "field");
    *out = new cmlab_field{cmlab::field_from_json(text)};
    return CMLAB_OK;
  });
}

int cmlab_field_write(const cmlab_field* field, const char* path) {
  return guard([&] {
    need(field, "field");
    need(path, "path");
    cmlab::write_field(*field->f, path);
    return CMLAB_OK;
  });
}

int cmlab_field_to_json(const cmlab_field* field, char** text) {
  return guard([&] {
    need(field, "field");
    need(text, "text");
    *text = dup(cmlab::field_to_json(*field->f));
    return CMLAB_OK;
  });
}

void cmlab_field_free(cmlab_field* field) { delete field; }

int cmlab_field_dim(const cmlab_field* field, int* n) {
  return guard([&] {
    need(field, "field");
    need(n, "n");
    *n = field->f->n();
    return CMLAB_OK;
  });
}

int cmlab_field_eps(const cmlab_field* field, double* eps) {
  return guard([&] {
    need(field, "field");
    need(eps, "eps");
    *eps = field->f->eps();
    return CMLAB_OK;
  });
}

int cmlab_field_rep(const cmlab_field* field, const char** rep) {
  return guard([&] {
    need(field, "field");
    need(rep, "rep");
    switch (field->f->rep()) {
      case cmlab::ScalarField::Rep::analytic: *rep = "analytic"; break;
      case cmlab::ScalarField::Rep::radial: *rep = "radial"; break;
      case cmlab::ScalarField::Rep::reinhardt: *rep = "reinhardt"; break;
      case cmlab::ScalarField::Rep::full: *rep = "full"; break;
    }
    return CMLAB_OK;
  });
}

int cmlab_field_value(const cmlab_field* field, const double* z_real, double* value) {
  return guard([&] {
    need(field, "field");
    need(value, "value");
    *value = field->f->value(point_of(field, z_real));
    return CMLAB_OK;
  });
}

int cmlab_gauge(const cmlab_field* field, const double* z_real, double eps, char** gauge_json) {
  return guard([&] {
    need(field, "field");
    need(gauge_json, "gauge");
    cmlab::Jet j = field->f->jet(point_of(field, z_real));
    cmlab::TangentGauge g = cmlab::tangent_gauge(j, field->f->metric(), eps < 0 ? field->f->eps() : eps);
    *gauge_json = dup(cmlab::tangent_gauge_to_json(g, j));
    return CMLAB_OK;
  });
}

const char* cmlab_check_names(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : cmlab::check_names()) s += (s.empty() ? "" : ",") + n;
    return s;
  }();
  return names.c_str();
}

int cmlab_verify(const cmlab_field* field, const char* checks, uint64_t seed, char** report_json, int* failures) {
  return guard([&] {
    need(field, "field");
    need(report_json, "report");
    need(failures, "failures");
    cmlab::VerifyOptions opt;
    opt.sampling.seed = seed;
    const auto& f = *field->f;
    if (f.metric().dim() != f.n()) throw Error(Status::format_error, "field metric does not match its dimension");
    auto reps = cmlab::run_checks(f, f.metric(), f.eps(), split(checks), opt);
    int bad = 0;
    for (const auto& r : reps) bad += r.pass ? 0 : 1;
    *failures = bad;
    *report_json = dup(cmlab::checks_to_json(reps));
    return CMLAB_OK;
  });
}

int cmlab_leaf(const cmlab_field* field, const double* z_real, double radius, int steps, char** csv,
               double* harmonicity, double* cauchy_riemann) {
  return guard([&] {
    need(field, "field");
    need(csv, "csv");
    if (field->f->n() != 2) throw Error(Status::invalid_argument, "leaves are traced for n = 2 fields");
    cmlab::Point p = point_of(field, z_real);
    cmlab::Leaf leaf = cmlab::leaf_trace(*field->f, p, radius, steps);
    std::ostringstream os;
    os.precision(17);
    cmlab::write_leaf_csv(os, *field->f, leaf, field->f->metric());
    if (harmonicity) *harmonicity = cmlab::leaf_harmonicity_residual(*field->f, leaf);
    if (cauchy_riemann) *cauchy_riemann = cmlab::leaf_cauchy_riemann_residual(*field->f, leaf);
    *csv = dup(os.str());
    return CMLAB_OK;
  });
}

int cmlab_subsolution(const char* ring_json, const char* metric_json, double c, uint64_t seed, char** result_json) {
  return guard([&] {
    need(ring_json, "ring");
    need(result_json, "result");
    cmlab::RingDomain ring = cmlab::ring_from_json(ring_json);
    cmlab::MetricForm G = metric_json ? cmlab::metric_from_json(metric_json) : cmlab::MetricForm::identity(ring.n());
    cmlab::SubsolutionOptions opt;
    opt.c = c;
    opt.seed = seed;
    cmlab::Subsolution sub(ring, G, opt);
    const auto& o = sub.ordering();
    json j = {{"c", sub.c()},
              {"psh_margin", sub.sigma()},
              {"delta_h", sub.delta_h()},
              {"collar0", sub.collar0()},
              {"collar1", sub.collar1()},
              {"boundary_error0", sub.boundary_error0()},
              {"boundary_error1", sub.boundary_error1()},
              {"min_normal_derivative0", sub.min_normal_derivative0()},
              {"ordering",
               {{"ok", o.ok()},
                {"outer_boundary", o.outer_boundary},
                {"outer_collar", o.outer_collar},
                {"inner_collar", o.inner_collar},
                {"inner_boundary", o.inner_boundary},
                {"min_gap", o.min_gap},
                {"failures", o.failures()}}}};
    *result_json = dup(j.dump(2));
    return CMLAB_OK;
  });
}

int cmlab_deform(const char* ring_json, double t, double r, double R, char** ring_out_json) {
  return guard([&] {
    need(ring_json, "ring");
    need(ring_out_json, "result");
    cmlab::RingDomain ring = cmlab::ring_from_json(ring_json);
    cmlab::DeformationOptions opt;
    if (r > 0) opt.r = r;
    if (R > 0) opt.R = R;
    opt.samples = ring.sample_count();
    *ring_out_json = dup(cmlab::ring_to_json(cmlab::deformation_family(ring, t, opt)));
    return CMLAB_OK;
  });
}

}  // extern "C"
