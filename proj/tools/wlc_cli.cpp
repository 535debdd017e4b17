// Command-line front end. Talks to the library only through the C API.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wlc/wlc.h"

namespace {

// config-backed option: CLI flag -> dotted key
struct Binding {
  std::string flag;
  std::string key;
  std::string help;
  bool list = false;
  std::string value;
};

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  bool print_config = false;
  bool quiet = false;
  std::vector<Binding> bindings;
};

// all bindings must be added before attach(): CLI11 keeps references
void bind(Common& c, std::initializer_list<Binding> items) {
  for (const Binding& b : items) c.bindings.push_back(b);
}

void attach(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_file, "JSON config file (merged over the defaults)");
  app->add_option("--set", c.sets, "override any config key, KEY=VALUE (VALUE is JSON or a bare string)");
  app->add_flag("--print-config", c.print_config, "print the effective config and exit");
  app->add_flag("-q,--quiet", c.quiet, "only print the verdict line");
  for (Binding& b : c.bindings) app->add_option(b.flag, b.value, b.help);
}

int fail(int status) {
  std::fprintf(stderr, "error (%s): %s\n", wlc_status_name(status), wlc_last_error());
  return 2;
}

std::string as_json(const Binding& b) {
  if (b.list) return "[" + b.value + "]";
  return b.value;
}

// builds the config; *out owns it on success
int build_config(const Common& c, const char* preset, wlc_config** out) {
  int rc = WLC_OK;
  if (preset) {
    rc = wlc_config_preset(preset, out);
  } else {
    rc = wlc_config_create(out);
  }
  if (rc != WLC_OK) return rc;
  if (!c.config_file.empty()) {
    std::ifstream in(c.config_file, std::ios::binary);
    if (!in) {
      std::fprintf(stderr, "cannot read %s\n", c.config_file.c_str());
      return WLC_ERR_IO;
    }
    std::ostringstream text;
    text << in.rdbuf();
    rc = wlc_config_merge(*out, text.str().c_str());
    if (rc != WLC_OK) return rc;
  }
  // --sequence without -n implies n
  const Binding* seq = nullptr;
  bool n_given = false;
  for (const Binding& b : c.bindings) {
    if (b.key == "graph.teacher_sequence" && !b.value.empty()) seq = &b;
    if (b.key == "graph.n" && !b.value.empty()) n_given = true;
  }
  if (seq && !n_given) {
    const auto n = std::count(seq->value.begin(), seq->value.end(), ',') + 1;
    rc = wlc_config_set(*out, "graph.n", std::to_string(n).c_str());
    if (rc != WLC_OK) return rc;
  }
  for (const Binding& b : c.bindings) {
    if (b.value.empty()) continue;
    rc = wlc_config_set(*out, b.key.c_str(), as_json(b).c_str());
    if (rc != WLC_OK) return rc;
  }
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "--set expects KEY=VALUE, got '%s'\n", kv.c_str());
      return WLC_ERR_INVALID_CONFIG;
    }
    rc = wlc_config_set(*out, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (rc != WLC_OK) return rc;
  }
  return wlc_config_validate(*out);
}

void print_config(const wlc_config* cfg) {
  std::size_t need = 0;
  wlc_config_to_json(cfg, nullptr, 0, &need);
  std::string buf(need, '\0');
  wlc_config_to_json(cfg, buf.data(), buf.size(), &need);
  std::printf("%s\n", buf.c_str());
}

int report(wlc_result* r, bool quiet) {
  if (!quiet) std::fputs(wlc_result_summary(r), stdout);
  const int ok = wlc_result_passed(r);
  if (quiet) std::printf("%s: %s\n", wlc_result_name(r), ok ? "PASS" : "FAIL");
  wlc_result_free(r);
  return ok ? 0 : 1;
}

template <class Run>
int run_with_config(const Common& c, const char* preset, Run&& run) {
  wlc_config* cfg = nullptr;
  int rc = build_config(c, preset, &cfg);
  if (rc != WLC_OK) {
    wlc_config_free(cfg);
    return fail(rc);
  }
  if (c.print_config) {
    print_config(cfg);
    wlc_config_free(cfg);
    return 0;
  }
  wlc_result* r = nullptr;
  rc = run(cfg, &r);
  wlc_config_free(cfg);
  if (rc != WLC_OK) return fail(rc);
  return report(r, c.quiet);
}

void sweep_progress(int n, int trial, int recovered, int iterations, void* user) {
  int* count = static_cast<int*>(user);
  ++*count;
  if (!recovered) std::fprintf(stderr, "n=%d trial %d: not recovered (%d iterations)\n", n, trial, iterations);
  if (*count % 500 == 0) std::fprintf(stderr, "%d trials done\n", *count);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Winnerless-competition networks: simulate, learn, compare"};
  app.set_version_flag("--version", std::string(wlc_version()));
  app.require_subcommand(1);

  const std::initializer_list<Binding> shared = {
      {"--seed", "seed", "master seed"},
      {"-o,--out", "output.dir", "output directory (nothing written when empty)"},
      {"--stride", "output.stride", "keep every k-th sample in CSVs"},
      {"-n,--neurons", "graph.n", "number of neurons"},
      {"--sequence", "graph.teacher_sequence", "teacher activation order, e.g. 1,3,2", true},
      {"--alpha", "dynamics.alpha", "teacher couplings, comma separated", true},
      {"--targets", "dynamics.target_durations", "calibrate alpha to these durations", true},
      {"--epsilon", "dynamics.epsilon", "noise floor"},
      {"--dt", "dynamics.dt", "integration step"},
  };

  Common teacher, learn, preset, sweep;
  bind(teacher, shared);
  bind(teacher, {{"--periods", "dynamics.teacher_periods", "periods to record"}});
  bind(learn, shared);
  bind(learn,
       {{"--mode", "learning.mode", "structure, durations or both"},
        {"--learner-sequence", "graph.learner_sequence", "learner's initial order", true},
        {"--gamma0", "learning.gamma0", "initial learner couplings", true},
        {"--horizon", "learning.horizon", "duration-learning time"},
        {"--horizon-periods", "learning.horizon_periods", "duration-learning time in teacher periods"},
        {"--tol-abs", "learning.tol_abs", "absolute edge tolerance"},
        {"--tol-rel", "learning.tol_rel", "tolerance relative to Var[gamma]"},
        {"--rewire", "learning.rewire", "untested or literal"},
        {"--seconds-per-unit", "motifsim.seconds_per_unit", "robot seconds per model time unit"},
        {"--smoothing", "metrics.smoothing", "Gaussian sigma (samples) before curvature"}});
  bind(preset,
       {{"--seed", "seed", "master seed"},
        {"-o,--out", "output.dir", "output directory"},
        {"--stride", "output.stride", "keep every k-th sample in CSVs"}});
  bind(sweep,
       {{"--seed", "seed", "master seed"},
        {"-o,--out", "output.dir", "output directory"},
        {"--trials", "sweep.trials", "random trials per size"},
        {"--sizes", "sweep.random", "sizes for random trials", true},
        {"--exhaustive", "sweep.exhaustive", "sizes enumerated exhaustively", true},
        {"--sweep-dt", "sweep.dt", "integration step for sweep trials"},
        {"--threads", "sweep.threads", "worker threads (0: all cores)"}});

  auto* teacher_cmd = app.add_subcommand("teacher", "simulate a teacher network");
  attach(teacher_cmd, teacher);
  auto* learn_cmd = app.add_subcommand("learn", "learn a teacher's structure and/or durations");
  attach(learn_cmd, learn);
  auto* sweep_cmd = app.add_subcommand("sweep", "structure-learning sweep over many teacher/learner pairs");
  attach(sweep_cmd, sweep);

  auto* preset_cmd = app.add_subcommand("preset", "run a named experiment");
  std::string preset_name;
  bool list = false;
  preset_cmd->add_option("name", preset_name, "preset name");
  preset_cmd->add_flag("--list", list, "list presets");
  attach(preset_cmd, preset);

  auto* metric_cmd = app.add_subcommand("metric", "curvature distance between two pose paths");
  std::string teacher_csv, learner_csv, metric_out;
  double period = 0.0, t_first = std::numeric_limits<double>::quiet_NaN(), tau_step = 0.0, smoothing = 0.0;
  bool metric_quiet = false;
  metric_cmd->add_option("--teacher", teacher_csv, "teacher pose CSV (t,x,y,heading,motif)")->required();
  metric_cmd->add_option("--learner", learner_csv, "learner pose CSV")->required();
  metric_cmd->add_option("--period", period, "teacher period in path time units")->required();
  metric_cmd->add_option("--t-first", t_first, "first evaluation time (default: start + 2 periods)");
  metric_cmd->add_option("--tau-step", tau_step, "lag grid step (default: path dt)");
  metric_cmd->add_option("--smoothing", smoothing, "Gaussian sigma in samples");
  metric_cmd->add_option("-o,--out", metric_out, "output directory");
  metric_cmd->add_flag("-q,--quiet", metric_quiet, "only print the verdict line");

  CLI11_PARSE(app, argc, argv);

  if (*teacher_cmd) return run_with_config(teacher, nullptr, [](wlc_config* c, wlc_result** r) { return wlc_run_teacher(c, r); });
  if (*learn_cmd) return run_with_config(learn, nullptr, [](wlc_config* c, wlc_result** r) { return wlc_run_learn(c, r); });
  if (*sweep_cmd) {
    int done = 0;
    return run_with_config(sweep, nullptr, [&](wlc_config* c, wlc_result** r) {
      return wlc_run_sweep(c, sweep.quiet ? nullptr : sweep_progress, &done, r);
    });
  }
  if (*preset_cmd) {
    if (list || preset_name.empty()) {
      for (int i = 0; i < wlc_preset_count(); ++i) std::printf("%s\n", wlc_preset_name(i));
      return 0;
    }
    return run_with_config(preset, preset_name.c_str(), [&](wlc_config* c, wlc_result** r) {
      return wlc_run_preset(preset_name.c_str(), c, r);
    });
  }
  if (*metric_cmd) {
    wlc_result* r = nullptr;
    const int rc = wlc_run_metric(teacher_csv.c_str(), learner_csv.c_str(), period, t_first, tau_step, smoothing,
                                  metric_out.c_str(), &r);
    if (rc != WLC_OK) return fail(rc);
    return report(r, metric_quiet);
  }
  return 2;
}
