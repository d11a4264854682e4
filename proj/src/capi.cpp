// Copyright 2026 The lorpman Authors.
// SPDX-License-Identifier: Apache-2.0

#include "lorpman/lorpman.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <optional>
#include <string>

#include "lorpman/errors.hpp"
#include "lorpman/experiments.hpp"
#include "lorpman/io.hpp"
#include "lorpman/metrics.hpp"
#include "lorpman/source_hash.hpp"
#include "lorpman/theory.hpp"

struct lpm_front {
  lorpman::FrontSample sample;
  std::size_t dim = 0;
};

struct lpm_experiment {
  lpm_experiment_kind kind = LPM_EXPERIMENT_TOY;
  lorpman::ToyExperimentConfig toy;
  lorpman::SynthExperimentConfig synth;
  lorpman::AblationConfig ablation;
  std::optional<lorpman::ExperimentOutput> output;
};

namespace {

thread_local std::string g_last_error;

lpm_status fail(lpm_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

lpm_status status_of(lorpman::ErrorKind kind) {
  using lorpman::ErrorKind;
  switch (kind) {
    case ErrorKind::kContract: return LPM_ERR_CONTRACT;
    case ErrorKind::kParameter: return LPM_ERR_INVALID_ARGUMENT;
    case ErrorKind::kDegenerate: return LPM_ERR_DEGENERATE;
    case ErrorKind::kNumeric: return LPM_ERR_NUMERIC;
    case ErrorKind::kUnsupported: return LPM_ERR_UNSUPPORTED;
    case ErrorKind::kIo: return LPM_ERR_IO;
    case ErrorKind::kParse: return LPM_ERR_PARSE;
  }
  return LPM_ERR_INTERNAL;
}

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
lpm_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return LPM_OK;
  } catch (const lorpman::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(LPM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LPM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LPM_ERR_INTERNAL, "unknown exception");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

lorpman::Orientation orientation_of(lpm_orientation o) {
  if (o != LPM_MINIMIZE && o != LPM_MAXIMIZE) throw lorpman::ParameterError("unknown orientation");
  return o == LPM_MAXIMIZE ? lorpman::Orientation::kMaximize : lorpman::Orientation::kMinimize;
}

#define LPM_REQUIRE(ptr)                                                                \
  do {                                                                                  \
    if (!(ptr)) return fail(LPM_ERR_INVALID_ARGUMENT, std::string(#ptr) + " is null"); \
  } while (0)

}  // namespace

extern "C" {

const char* lpm_version(void) { return lorpman::kVersion; }
const char* lpm_source_hash(void) { return lorpman::kSourceHash; }

const char* lpm_status_name(lpm_status status) {
  switch (status) {
    case LPM_OK: return "ok";
    case LPM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LPM_ERR_CONTRACT: return "contract violation";
    case LPM_ERR_DEGENERATE: return "degenerate input";
    case LPM_ERR_NUMERIC: return "numeric error";
    case LPM_ERR_UNSUPPORTED: return "unsupported";
    case LPM_ERR_IO: return "i/o error";
    case LPM_ERR_PARSE: return "parse error";
    case LPM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lpm_last_error(void) { return g_last_error.c_str(); }

void lpm_string_free(char* s) { std::free(s); }

lpm_status lpm_front_create(size_t dim, lpm_orientation orientation, lpm_front** out) {
  LPM_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto* f = new lpm_front;
    f->sample.orientation = orientation_of(orientation);
    f->dim = dim;
    *out = f;
  });
}

lpm_status lpm_front_from_csv(const char* text, size_t length, lpm_orientation orientation,
                              lpm_front** out) {
  LPM_REQUIRE(out);
  *out = nullptr;
  if (!text && length) return fail(LPM_ERR_INVALID_ARGUMENT, "text is null");
  return guarded([&] {
    lorpman::FrontSample s =
        lorpman::front_from_csv(std::string_view(text ? text : "", length), orientation_of(orientation));
    s.validate();
    auto* f = new lpm_front;
    f->dim = s.dim();
    f->sample = std::move(s);
    *out = f;
  });
}

lpm_status lpm_front_add(lpm_front* front, const double* point, size_t dim) {
  LPM_REQUIRE(front);
  LPM_REQUIRE(point);
  if (dim == 0) return fail(LPM_ERR_INVALID_ARGUMENT, "point dimension must be positive");
  if (front->dim != 0 && dim != front->dim) {
    return fail(LPM_ERR_CONTRACT, "point has " + std::to_string(dim) + " entries, front has " +
                                      std::to_string(front->dim));
  }
  for (size_t k = 0; k < dim; ++k) {
    if (!std::isfinite(point[k])) return fail(LPM_ERR_CONTRACT, "point has a non-finite entry");
  }
  return guarded([&] {
    front->sample.points.emplace_back(point, point + dim);
    front->dim = dim;
  });
}

size_t lpm_front_size(const lpm_front* front) { return front ? front->sample.points.size() : 0; }
size_t lpm_front_dim(const lpm_front* front) { return front ? front->dim : 0; }

lpm_status lpm_front_point(const lpm_front* front, size_t index, double* out, size_t dim) {
  LPM_REQUIRE(front);
  LPM_REQUIRE(out);
  if (index >= front->sample.points.size()) {
    return fail(LPM_ERR_INVALID_ARGUMENT, "index " + std::to_string(index) + " out of range");
  }
  if (dim != front->dim) return fail(LPM_ERR_CONTRACT, "output buffer has the wrong length");
  std::memcpy(out, front->sample.points[index].data(), dim * sizeof(double));
  return LPM_OK;
}

lpm_status lpm_front_nondominated(const lpm_front* front, lpm_front** out) {
  LPM_REQUIRE(front);
  LPM_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto* f = new lpm_front;
    f->sample = lorpman::nondominated_filter(front->sample);
    f->dim = front->dim;
    *out = f;
  });
}

void lpm_front_destroy(lpm_front* front) { delete front; }

lpm_status lpm_front_hypervolume(const lpm_front* front, const double* ref, size_t dim,
                                 const lpm_hv_method* method, double* value, double* stderr_out) {
  LPM_REQUIRE(front);
  LPM_REQUIRE(ref);
  LPM_REQUIRE(value);
  return guarded([&] {
    const lorpman::HypervolumeMethod m =
        method && method->monte_carlo
            ? lorpman::HypervolumeMethod::monte_carlo(method->samples, method->seed)
            : lorpman::HypervolumeMethod::exact();
    const lorpman::HypervolumeResult r =
        lorpman::hypervolume(front->sample, std::span<const double>(ref, dim), m);
    *value = r.value;
    if (stderr_out) {
      *stderr_out = r.stderr_estimate ? *r.stderr_estimate : std::numeric_limits<double>::quiet_NaN();
    }
  });
}

lpm_status lpm_experiment_create(lpm_experiment_kind kind, const char* config_json,
                                 lpm_experiment** out) {
  LPM_REQUIRE(out);
  *out = nullptr;
  const std::string_view text = config_json && *config_json ? config_json : "{}";
  return guarded([&] {
    auto* e = new lpm_experiment;
    try {
      e->kind = kind;
      switch (kind) {
        case LPM_EXPERIMENT_TOY: e->toy = lorpman::toy_config_from_json(text); break;
        case LPM_EXPERIMENT_SYNTH: e->synth = lorpman::synth_config_from_json(text); break;
        case LPM_EXPERIMENT_ABLATE: e->ablation = lorpman::ablation_config_from_json(text); break;
        default: throw lorpman::ParameterError("unknown experiment kind");
      }
    } catch (...) {
      delete e;
      throw;
    }
    *out = e;
  });
}

lpm_status lpm_experiment_config(const lpm_experiment* experiment, char** json_out) {
  LPM_REQUIRE(experiment);
  LPM_REQUIRE(json_out);
  return guarded([&] {
    switch (experiment->kind) {
      case LPM_EXPERIMENT_TOY: *json_out = duplicate(lorpman::to_json(experiment->toy)); break;
      case LPM_EXPERIMENT_SYNTH: *json_out = duplicate(lorpman::to_json(experiment->synth)); break;
      case LPM_EXPERIMENT_ABLATE: *json_out = duplicate(lorpman::to_json(experiment->ablation)); break;
    }
  });
}

lpm_status lpm_experiment_run(lpm_experiment* experiment) {
  LPM_REQUIRE(experiment);
  return guarded([&] {
    experiment->output.reset();
    switch (experiment->kind) {
      case LPM_EXPERIMENT_TOY: experiment->output = lorpman::run_toy_experiment(experiment->toy); break;
      case LPM_EXPERIMENT_SYNTH:
        experiment->output = lorpman::run_synth_experiment(experiment->synth);
        break;
      case LPM_EXPERIMENT_ABLATE: experiment->output = lorpman::run_ablation(experiment->ablation); break;
    }
  });
}

namespace {

lpm_status need_output(const lpm_experiment* experiment) {
  if (!experiment) return fail(LPM_ERR_INVALID_ARGUMENT, "experiment is null");
  if (!experiment->output) return fail(LPM_ERR_CONTRACT, "experiment has not run successfully");
  return LPM_OK;
}

}  // namespace

lpm_status lpm_experiment_write(const lpm_experiment* experiment, const char* out_dir) {
  if (lpm_status s = need_output(experiment); s != LPM_OK) return s;
  LPM_REQUIRE(out_dir);
  return guarded([&] { lorpman::write_artifacts(*experiment->output, out_dir); });
}

lpm_status lpm_experiment_summary(const lpm_experiment* experiment, char** out) {
  if (lpm_status s = need_output(experiment); s != LPM_OK) return s;
  LPM_REQUIRE(out);
  return guarded([&] { *out = duplicate(experiment->output->summary); });
}

lpm_status lpm_experiment_manifest(const lpm_experiment* experiment, char** out) {
  if (lpm_status s = need_output(experiment); s != LPM_OK) return s;
  LPM_REQUIRE(out);
  return guarded([&] { *out = duplicate(experiment->output->manifest); });
}

size_t lpm_experiment_artifact_count(const lpm_experiment* experiment) {
  return experiment && experiment->output ? experiment->output->artifacts.size() : 0;
}

lpm_status lpm_experiment_artifact(const lpm_experiment* experiment, size_t index, char** name,
                                   char** contents) {
  if (lpm_status s = need_output(experiment); s != LPM_OK) return s;
  LPM_REQUIRE(name);
  LPM_REQUIRE(contents);
  if (index >= experiment->output->artifacts.size()) {
    return fail(LPM_ERR_INVALID_ARGUMENT, "artifact index out of range");
  }
  return guarded([&] {
    const auto& a = experiment->output->artifacts[index];
    char* n = duplicate(a.name);
    try {
      *contents = duplicate(a.contents);
    } catch (...) {
      std::free(n);
      throw;
    }
    *name = n;
  });
}

void lpm_experiment_destroy(lpm_experiment* experiment) { delete experiment; }

lpm_status lpm_parameter_count(size_t d, size_t k, size_t m, size_t r, size_t* lorpman_count,
                               size_t* pamal_count) {
  LPM_REQUIRE(lorpman_count);
  LPM_REQUIRE(pamal_count);
  return guarded([&] {
    const lorpman::ParameterCount c = lorpman::parameter_count(d, k, m, r);
    *lorpman_count = c.lorpman;
    *pamal_count = c.pamal;
  });
}

lpm_status lpm_run_checks(uint64_t seed, char** report, int* all_passed) {
  LPM_REQUIRE(report);
  LPM_REQUIRE(all_passed);
  return guarded([&] {
    std::string text;
    bool ok = true;
    for (const auto& c : lorpman::run_theory_checks(seed)) {
      text += (c.passed ? "PASS " : "FAIL ") + c.name + ": " + c.detail + "\n";
      ok = ok && c.passed;
    }
    *report = duplicate(text);
    *all_passed = ok ? 1 : 0;
  });
}

}  // extern "C"
