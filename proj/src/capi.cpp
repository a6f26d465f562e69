#include "cptc/cptc.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cptc/engine.hpp"
#include "cptc/errors.hpp"
#include "cptc/harness.hpp"

namespace {

thread_local std::string g_last_error;

cptc_status fail(cptc_status status, const char* message) {
  g_last_error = message;
  return status;
}

cptc_status from_exception() {
  try {
    throw;
  } catch (const cptc::IoError& e) {
    g_last_error = e.what();
    return CPTC_E_IO;
  } catch (const cptc::ValidationError& e) {
    g_last_error = e.what();
    return CPTC_E_INVALID;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CPTC_E_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CPTC_E_INVALID;
  } catch (...) {
    g_last_error = "unknown error";
    return CPTC_E_INVALID;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct cptc_engine {
  std::variant<cptc::CptcEngine, cptc::AciEngine, cptc::OnlineCpEngine> impl;
  int num_states = 1;
  cptc::CptcEngine::Prediction pending;
  bool has_pending = false;

  template <typename T>
  explicit cptc_engine(T&& engine) : impl(std::forward<T>(engine)) {}
};

extern "C" {

const char* cptc_last_error(void) { return g_last_error.c_str(); }

void cptc_engine_params_init(cptc_engine_params* params) {
  if (!params) return;
  params->method = CPTC_METHOD_CPTC;
  params->num_states = 1;
  params->alpha = 0.1;
  params->gamma = 0.005;
  params->aggregation = CPTC_AGG_UNION;
  params->levelset_resolution = 0.02;
  params->pool_capacity = 0;
  params->argmax_states = 0;
  params->seed = 0;
}

cptc_status cptc_engine_create(const cptc_engine_params* params,
                               cptc_engine** out) {
  if (!params || !out) return fail(CPTC_E_INVALID, "null argument");
  *out = nullptr;
  try {
    std::optional<std::size_t> capacity;
    if (params->pool_capacity > 0) {
      capacity = static_cast<std::size_t>(params->pool_capacity);
    }
    std::unique_ptr<cptc_engine> handle;
    switch (params->method) {
      case CPTC_METHOD_CPTC: {
        cptc::CptcConfig cfg;
        cfg.num_states = params->num_states;
        cfg.alpha = params->alpha;
        cfg.gamma = params->gamma;
        cfg.aggregation = params->aggregation == CPTC_AGG_LEVELSET
                              ? cptc::AggregationMode::kLevelSet
                              : cptc::AggregationMode::kUnion;
        cfg.levelset_resolution = params->levelset_resolution;
        cfg.pool_capacity = capacity;
        cfg.sample_mode = params->argmax_states != 0
                              ? cptc::SampleMode::kArgmax
                              : cptc::SampleMode::kSampled;
        cfg.seed = params->seed;
        handle = std::make_unique<cptc_engine>(cptc::CptcEngine(cfg));
        break;
      }
      case CPTC_METHOD_ACI:
        if (params->num_states != 1) {
          return fail(CPTC_E_INVALID, "aci: num_states must be 1");
        }
        handle = std::make_unique<cptc_engine>(
            cptc::AciEngine(params->alpha, params->gamma, capacity));
        break;
      case CPTC_METHOD_ONLINE_CP:
        if (params->num_states != 1) {
          return fail(CPTC_E_INVALID, "online_cp: num_states must be 1");
        }
        handle = std::make_unique<cptc_engine>(
            cptc::OnlineCpEngine(params->alpha, capacity));
        break;
      default:
        return fail(CPTC_E_INVALID, "unknown method");
    }
    handle->num_states = params->num_states;
    *out = handle.release();
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

void cptc_engine_destroy(cptc_engine* engine) { delete engine; }

namespace {

cptc::StateDistribution dist_from_probs(const cptc_engine& engine,
                                        const double* probs) {
  if (!probs) {
    if (engine.num_states != 1) {
      throw cptc::ValidationError("probs required when num_states > 1");
    }
    return cptc::StateDistribution::point_mass(1, 1);
  }
  cptc::StateDistribution dist;
  dist.probs.assign(probs, probs + engine.num_states);
  return dist;
}

}  // namespace

cptc_status cptc_engine_warm_add(cptc_engine* engine, const double* probs,
                                 const double* y_hat, double y) {
  if (!engine || !y_hat) return fail(CPTC_E_INVALID, "null argument");
  try {
    std::span<const double> forecasts(
        y_hat, static_cast<std::size_t>(engine->num_states));
    if (auto* core = std::get_if<cptc::CptcEngine>(&engine->impl)) {
      core->warm_add(dist_from_probs(*engine, probs), forecasts, y);
    } else if (auto* aci = std::get_if<cptc::AciEngine>(&engine->impl)) {
      aci->warm_insert(cptc::nonconformity(y, y_hat[0]));
    } else {
      std::get<cptc::OnlineCpEngine>(engine->impl)
          .warm_insert(cptc::nonconformity(y, y_hat[0]));
    }
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_engine_predict(cptc_engine* engine, const double* probs,
                                const double* y_hat, double* lo, double* hi,
                                size_t capacity, size_t* n_out) {
  if (!engine || !y_hat || !n_out || (capacity > 0 && (!lo || !hi))) {
    return fail(CPTC_E_INVALID, "null argument");
  }
  try {
    std::span<const double> forecasts(
        y_hat, static_cast<std::size_t>(engine->num_states));
    if (auto* core = std::get_if<cptc::CptcEngine>(&engine->impl)) {
      engine->pending = core->predict(dist_from_probs(*engine, probs),
                                      forecasts);
    } else if (auto* aci = std::get_if<cptc::AciEngine>(&engine->impl)) {
      engine->pending.set = aci->predict(y_hat[0]);
      engine->pending.per_state = {engine->pending.set};
    } else {
      engine->pending.set =
          std::get<cptc::OnlineCpEngine>(engine->impl).predict(y_hat[0]);
      engine->pending.per_state = {engine->pending.set};
    }
    engine->has_pending = true;
    const auto& intervals = engine->pending.set.intervals;
    *n_out = intervals.size();
    if (intervals.size() > capacity) {
      return fail(CPTC_E_SPACE, "interval buffer too small");
    }
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      lo[i] = intervals[i].lower;
      hi[i] = intervals[i].upper;
    }
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_engine_update(cptc_engine* engine, const double* probs,
                               const double* y_hat, double y,
                               cptc_step_info* info) {
  if (!engine || !y_hat) return fail(CPTC_E_INVALID, "null argument");
  if (!engine->has_pending) {
    return fail(CPTC_E_INVALID, "update without a preceding predict");
  }
  try {
    std::span<const double> forecasts(
        y_hat, static_cast<std::size_t>(engine->num_states));
    cptc_step_info out{};
    if (auto* core = std::get_if<cptc::CptcEngine>(&engine->impl)) {
      cptc::StepRecord rec = core->update(0, y, forecasts,
                                          dist_from_probs(*engine, probs),
                                          engine->pending);
      out.covered = rec.covered ? 1 : 0;
      out.sampled_state = rec.sampled_state;
      out.width = rec.width;
    } else if (auto* aci = std::get_if<cptc::AciEngine>(&engine->impl)) {
      cptc::StepOutcome res = aci->update(y, y_hat[0], engine->pending.set);
      out.covered = res.covered ? 1 : 0;
      out.sampled_state = 1;
      out.width = res.width;
    } else {
      cptc::StepOutcome res = std::get<cptc::OnlineCpEngine>(engine->impl)
                                  .update(y, y_hat[0], engine->pending.set);
      out.covered = res.covered ? 1 : 0;
      out.sampled_state = 1;
      out.width = res.width;
    }
    engine->has_pending = false;
    if (info) *info = out;
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_engine_alpha(const cptc_engine* engine, int state,
                              double* out) {
  if (!engine || !out) return fail(CPTC_E_INVALID, "null argument");
  try {
    if (const auto* core = std::get_if<cptc::CptcEngine>(&engine->impl)) {
      *out = core->alpha(state);
    } else if (const auto* aci = std::get_if<cptc::AciEngine>(&engine->impl)) {
      if (state != 1) return fail(CPTC_E_INVALID, "state out of range");
      *out = aci->alpha_raw();
    } else {
      if (state != 1) return fail(CPTC_E_INVALID, "state out of range");
      *out = std::get<cptc::OnlineCpEngine>(engine->impl).alpha();
    }
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_engine_pool_size(const cptc_engine* engine, int state,
                                  size_t* out) {
  if (!engine || !out) return fail(CPTC_E_INVALID, "null argument");
  try {
    if (const auto* core = std::get_if<cptc::CptcEngine>(&engine->impl)) {
      *out = core->pool_size(state);
    } else if (const auto* aci = std::get_if<cptc::AciEngine>(&engine->impl)) {
      if (state != 1) return fail(CPTC_E_INVALID, "state out of range");
      *out = aci->pool().size();
    } else {
      if (state != 1) return fail(CPTC_E_INVALID, "state out of range");
      *out = std::get<cptc::OnlineCpEngine>(engine->impl).pool().size();
    }
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_default_config(char** json_out) {
  if (!json_out) return fail(CPTC_E_INVALID, "null argument");
  try {
    *json_out = dup_string(cptc::default_config_json());
    if (!*json_out) return fail(CPTC_E_IO, "out of memory");
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_generate(const char* config_json, const char* out_csv) {
  if (!config_json || !out_csv) return fail(CPTC_E_INVALID, "null argument");
  try {
    cptc::ExperimentConfig cfg = cptc::config_from_json(config_json);
    cptc::SyntheticSeries series;
    switch (cfg.dataset.kind) {
      case cptc::DatasetKind::kBouncingBall:
        series = cptc::gen_bouncing_ball(cfg.dataset.ball);
        break;
      case cptc::DatasetKind::kThreeMode:
        series = cptc::gen_three_mode(cfg.dataset.three_mode);
        break;
      case cptc::DatasetKind::kCsv:
        return fail(CPTC_E_INVALID,
                    "generate: dataset.kind must be a synthetic generator");
    }
    cptc::write_csv(series, out_csv);
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_run(const char* config_json, const char* out_dir,
                     char** summary_json_out) {
  if (!config_json || !out_dir) return fail(CPTC_E_INVALID, "null argument");
  try {
    cptc::ExperimentConfig cfg = cptc::config_from_json(config_json);
    cptc::ExperimentResult result = cptc::run_experiment(cfg, out_dir);
    if (summary_json_out) {
      *summary_json_out = dup_string(cptc::result_to_json(result));
      if (!*summary_json_out) return fail(CPTC_E_IO, "out of memory");
    }
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_sweep(const char* config_json, const char* parameter,
                       const char* values_csv, const char* out_dir,
                       char** summary_json_out) {
  if (!config_json || !parameter || !values_csv || !out_dir) {
    return fail(CPTC_E_INVALID, "null argument");
  }
  try {
    cptc::ExperimentConfig cfg = cptc::config_from_json(config_json);
    std::vector<std::string> values;
    std::string current;
    for (const char* p = values_csv;; ++p) {
      if (*p == ',' || *p == '\0') {
        if (!current.empty()) values.push_back(current);
        current.clear();
        if (*p == '\0') break;
      } else {
        current += *p;
      }
    }
    cptc::SweepResult result =
        cptc::sweep_experiment(cfg, parameter, values, out_dir);
    if (summary_json_out) {
      *summary_json_out = dup_string(cptc::sweep_to_json(result));
      if (!*summary_json_out) return fail(CPTC_E_IO, "out of memory");
    }
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

cptc_status cptc_report(const char* steps_dir, char** summary_json_out) {
  if (!steps_dir) return fail(CPTC_E_INVALID, "null argument");
  try {
    cptc::ExperimentResult result = cptc::report_directory(steps_dir);
    if (summary_json_out) {
      *summary_json_out = dup_string(cptc::result_to_json(result));
      if (!*summary_json_out) return fail(CPTC_E_IO, "out of memory");
    }
    return CPTC_OK;
  } catch (...) {
    return from_exception();
  }
}

void cptc_string_free(char* s) { std::free(s); }

}  // extern "C"
