#include "wlc/wlc.h"

#include <algorithm>
#include <functional>
#include <cstring>
#include <string>
#include <vector>

#include "wlc/csv.hpp"
#include "wlc/error.hpp"
#include "wlc/experiment.hpp"

struct wlc_config {
  nlohmann::json doc;
};

struct wlc_result {
  wlc::RunReport report;
};

struct wlc_network {
  wlc::WlcNetwork net;
};

struct wlc_trajectory {
  wlc::NeuralTrajectory traj;
};

namespace {

thread_local std::string g_last_error;

template <class F>
int guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return WLC_OK;
  } catch (const wlc::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return WLC_ERR_INVALID_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WLC_ERR_UNEXPECTED;
  } catch (...) {
    g_last_error = "unknown failure";
    return WLC_ERR_UNEXPECTED;
  }
}

int null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return WLC_ERR_NULL_ARGUMENT;
}

int copy_string(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) return WLC_OK;  // size query
  if (cap < s.size() + 1) {
    g_last_error = "buffer too small";
    return WLC_ERR_BUFFER_TOO_SMALL;
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return WLC_OK;
}

nlohmann::json parse_json(const char* text) { return nlohmann::json::parse(text); }

int make_result(wlc::RunReport report, wlc_result** out) {
  *out = new wlc_result{std::move(report)};
  return WLC_OK;
}

}  // namespace

extern "C" {

const char* wlc_version(void) { return wlc::kVersion; }

const char* wlc_last_error(void) { return g_last_error.c_str(); }

const char* wlc_status_name(int status) {
  switch (status) {
    case WLC_OK:
      return "ok";
    case WLC_ERR_NULL_ARGUMENT:
      return "null argument";
    case WLC_ERR_BUFFER_TOO_SMALL:
      return "buffer too small";
    case WLC_ERR_UNEXPECTED:
      return "unexpected failure";
    default:
      if (status >= 1 && status <= 16) return wlc::to_string(static_cast<wlc::ErrorCode>(status));
      return "unknown status";
  }
}

int wlc_config_create(wlc_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new wlc_config{wlc::default_config_json()}; });
}

int wlc_config_preset(const char* name, wlc_config** out) {
  if (!name || !out) return null_arg("name/out");
  return guarded([&] { *out = new wlc_config{wlc::preset_config_json(name)}; });
}

int wlc_config_from_json(const char* json, wlc_config** out) {
  if (!json || !out) return null_arg("json/out");
  return guarded([&] {
    nlohmann::json doc = wlc::default_config_json();
    const nlohmann::json patch = parse_json(json);
    wlc::ExperimentConfig::from_json(patch);  // rejects unknown keys early
    doc.merge_patch(patch);
    *out = new wlc_config{std::move(doc)};
  });
}

int wlc_config_load(const char* path, wlc_config** out) {
  if (!path || !out) return null_arg("path/out");
  return guarded([&] {
    const std::string text = wlc::csv::read_file(path);
    nlohmann::json patch;
    try {
      patch = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw wlc::Error(wlc::ErrorCode::kInvalidConfig, std::string(path) + ": " + e.what());
    }
    wlc::ExperimentConfig::from_json(patch);
    nlohmann::json doc = wlc::default_config_json();
    doc.merge_patch(patch);
    *out = new wlc_config{std::move(doc)};
  });
}

int wlc_config_set(wlc_config* cfg, const char* key, const char* json_value) {
  if (!cfg || !key || !json_value) return null_arg("cfg/key/value");
  return guarded([&] {
    nlohmann::json value;
    try {
      value = parse_json(json_value);
    } catch (const nlohmann::json::exception&) {
      value = std::string(json_value);  // bare strings are accepted unquoted
    }
    wlc::set_config_value(cfg->doc, key, value);
  });
}

int wlc_config_merge(wlc_config* cfg, const char* json_patch) {
  if (!cfg || !json_patch) return null_arg("cfg/patch");
  return guarded([&] {
    const nlohmann::json patch = parse_json(json_patch);
    nlohmann::json doc = cfg->doc;
    doc.merge_patch(patch);
    wlc::ExperimentConfig::from_json(doc);
    cfg->doc = std::move(doc);
  });
}

int wlc_config_validate(const wlc_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { wlc::ExperimentConfig::from_json(cfg->doc); });
}

int wlc_config_to_json(const wlc_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("cfg");
  return copy_string(cfg->doc.dump(2), buf, cap, needed);
}

void wlc_config_free(wlc_config* cfg) { delete cfg; }

int wlc_preset_count(void) { return static_cast<int>(wlc::preset_names().size()); }

const char* wlc_preset_name(int index) {
  const auto& names = wlc::preset_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  return names[static_cast<std::size_t>(index)].c_str();
}

int wlc_run_preset(const char* name, const wlc_config* overrides, wlc_result** out) {
  if (!name || !out) return null_arg("name/out");
  return guarded([&] {
    // overrides is a full document; keys that differ from the preset are
    // applied on top of it
    nlohmann::json patch = nlohmann::json::object();
    if (overrides) {
      const nlohmann::json defaults = wlc::preset_config_json(name);
      for (auto& [section, value] : overrides->doc.items()) {
        if (value.is_object()) {
          for (auto& [key, v] : value.items()) {
            if (!defaults[section].contains(key) || defaults[section][key] != v) patch[section][key] = v;
          }
        } else if (!defaults.contains(section) || defaults[section] != value) {
          patch[section] = value;
        }
      }
    }
    make_result(wlc::run_preset(name, patch), out);
  });
}

int wlc_run_teacher(const wlc_config* cfg, wlc_result** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guarded([&] { make_result(wlc::teacher_command(cfg->doc), out); });
}

int wlc_run_learn(const wlc_config* cfg, wlc_result** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guarded([&] { make_result(wlc::learn_command(cfg->doc), out); });
}

int wlc_run_sweep(const wlc_config* cfg, wlc_progress_fn progress, void* user, wlc_result** out) {
  if (!cfg || !out) return null_arg("cfg/out");
  return guarded([&] {
    std::function<void(const wlc::SweepTrial&)> cb;
    if (progress) {
      cb = [&](const wlc::SweepTrial& t) { progress(t.n, t.trial, t.recovered ? 1 : 0, t.iterations, user); };
    }
    make_result(wlc::sweep_command(cfg->doc, cb), out);
  });
}

int wlc_run_metric(const char* teacher_csv, const char* learner_csv, double period, double t_first,
                   double tau_step, double smoothing, const char* out_dir, wlc_result** out) {
  if (!teacher_csv || !learner_csv || !out) return null_arg("paths/out");
  return guarded([&] {
    make_result(wlc::metric_command(teacher_csv, learner_csv, period, t_first, tau_step, smoothing,
                                    out_dir ? out_dir : ""),
                out);
  });
}

int wlc_result_passed(const wlc_result* r) { return r && r->report.passed() ? 1 : 0; }

const char* wlc_result_name(const wlc_result* r) { return r ? r->report.name.c_str() : nullptr; }

const char* wlc_result_summary(const wlc_result* r) { return r ? r->report.summary.c_str() : nullptr; }

int wlc_result_check_count(const wlc_result* r) { return r ? static_cast<int>(r->report.checks.size()) : 0; }

int wlc_result_check(const wlc_result* r, int index, const char** name, int* passed, const char** detail) {
  if (!r) return null_arg("result");
  if (index < 0 || index >= static_cast<int>(r->report.checks.size())) {
    g_last_error = "check index out of range";
    return WLC_ERR_SIZE;
  }
  const auto& c = r->report.checks[static_cast<std::size_t>(index)];
  if (name) *name = c.name.c_str();
  if (passed) *passed = c.passed ? 1 : 0;
  if (detail) *detail = c.detail.c_str();
  return WLC_OK;
}

int wlc_result_file_count(const wlc_result* r) { return r ? static_cast<int>(r->report.files.size()) : 0; }

const char* wlc_result_file(const wlc_result* r, int index) {
  if (!r || index < 0 || index >= static_cast<int>(r->report.files.size())) return nullptr;
  return r->report.files[static_cast<std::size_t>(index)].c_str();
}

void wlc_result_free(wlc_result* r) { delete r; }

int wlc_count_behaviors(int n, char* buf, size_t cap, size_t* needed) {
  std::string s;
  const int rc = guarded([&] { s = wlc::count_behaviors(n).str(); });
  if (rc != WLC_OK) return rc;
  return copy_string(s, buf, cap, needed);
}

int wlc_network_create(int n, const int* sequence, const double* alpha, double epsilon, wlc_network** out) {
  if (!sequence || !alpha || !out) return null_arg("sequence/alpha/out");
  return guarded([&] {
    if (n < 3) throw wlc::Error(wlc::ErrorCode::kSize, "n must be at least 3");
    const std::vector<int> seq(sequence, sequence + n);
    wlc::Vec a = wlc::Vec::Map(alpha, n);
    *out = new wlc_network{wlc::WlcNetwork(wlc::pathway_matrix(wlc::cycle_from_sequence(seq)),
                                           wlc::CouplingVector(a), epsilon)};
  });
}

int wlc_network_size(const wlc_network* net) { return net ? net->net.pathway.n() : 0; }

int wlc_network_simulate(const wlc_network* net, const double* x0, uint64_t seed, double duration, double dt,
                         wlc_trajectory** out) {
  if (!net || !out) return null_arg("net/out");
  return guarded([&] {
    const int n = net->net.pathway.n();
    const wlc::Vec start = x0 ? wlc::Vec(wlc::Vec::Map(x0, n)) : wlc::random_initial_state(n, seed);
    *out = new wlc_trajectory{wlc::integrate(net->net, start, duration, dt)};
  });
}

int wlc_network_period(const wlc_network* net, uint64_t seed, double dt, double* period) {
  if (!net || !period) return null_arg("net/period");
  return guarded([&] {
    const int n = net->net.pathway.n();
    *period = wlc::settle_on_limit_cycle(net->net, wlc::random_initial_state(n, seed), dt).period;
  });
}

void wlc_network_free(wlc_network* net) { delete net; }

int wlc_trajectory_shape(const wlc_trajectory* tr, int* n, size_t* samples, double* t0, double* dt) {
  if (!tr) return null_arg("trajectory");
  if (n) *n = tr->traj.n();
  if (samples) *samples = static_cast<size_t>(tr->traj.size());
  if (t0) *t0 = tr->traj.t0();
  if (dt) *dt = tr->traj.dt();
  return WLC_OK;
}

int wlc_trajectory_copy(const wlc_trajectory* tr, double* buf, size_t cap) {
  if (!tr || !buf) return null_arg("trajectory/buf");
  const auto& m = tr->traj.samples();
  const size_t count = static_cast<size_t>(m.size());
  if (cap < count) {
    g_last_error = "buffer too small";
    return WLC_ERR_BUFFER_TOO_SMALL;
  }
  std::memcpy(buf, m.data(), count * sizeof(double));
  return WLC_OK;
}

void wlc_trajectory_free(wlc_trajectory* tr) { delete tr; }

int wlc_learn_structure(const wlc_network* teacher, const int* learner_sequence, const double* gamma0,
                        uint64_t seed, double dt, int* learned_successors, int* iterations) {
  if (!teacher || !learner_sequence || !gamma0 || !learned_successors) return null_arg("arguments");
  return guarded([&] {
    const wlc::WlcNetwork& net = teacher->net;
    const int n = net.pathway.n();
    const std::vector<int> seq(learner_sequence, learner_sequence + n);
    const wlc::LimitCycleStart start = wlc::settle_on_limit_cycle(net, wlc::random_initial_state(n, seed), dt);
    wlc::LiveTeacher stream(net, start.state, dt, start.settle_time);
    const auto outcome = wlc::learn_structure(
        stream, wlc::LearnerState::initial(wlc::cycle_from_sequence(seq), wlc::Vec::Map(gamma0, n)), start.period,
        net.epsilon);
    const auto succ = wlc::permutation_of(outcome.pathway).successors();
    std::copy(succ.begin(), succ.end(), learned_successors);
    if (iterations) *iterations = outcome.iterations;
  });
}

}  // extern "C"
