// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "wlc/wlc.h"

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(wlc_version(), "1.0.0");
  EXPECT_STREQ(wlc_status_name(WLC_OK), "ok");
  EXPECT_STRNE(wlc_status_name(WLC_ERR_INVALID_CONFIG), "unknown status");
}

TEST(CApi, CountBehaviors) {
  size_t need = 0;
  ASSERT_EQ(wlc_count_behaviors(13, nullptr, 0, &need), WLC_OK);
  std::string buf(need, '\0');
  ASSERT_EQ(wlc_count_behaviors(13, buf.data(), buf.size(), &need), WLC_OK);
  EXPECT_STREQ(buf.c_str(), "479001600");
  char tiny[3];
  EXPECT_EQ(wlc_count_behaviors(13, tiny, sizeof tiny, nullptr), WLC_ERR_BUFFER_TOO_SMALL);
}

TEST(CApi, ConfigLifecycle) {
  wlc_config* cfg = nullptr;
  ASSERT_EQ(wlc_config_create(&cfg), WLC_OK);
  EXPECT_EQ(wlc_config_set(cfg, "dynamics.dt", "0.005"), WLC_OK);
  EXPECT_EQ(wlc_config_set(cfg, "learning.mode", "structure"), WLC_OK);  // bare string
  EXPECT_EQ(wlc_config_set(cfg, "dynamics.nope", "1"), WLC_ERR_INVALID_CONFIG);
  EXPECT_NE(std::string(wlc_last_error()).find("dynamics.nope"), std::string::npos);
  EXPECT_EQ(wlc_config_merge(cfg, "{\"graph\": {\"n\": 2}}"), WLC_ERR_INVALID_CONFIG);
  EXPECT_EQ(wlc_config_merge(cfg, "{\"graph\": {\"n\": 5}}"), WLC_OK);
  EXPECT_EQ(wlc_config_validate(cfg), WLC_OK);
  size_t need = 0;
  ASSERT_EQ(wlc_config_to_json(cfg, nullptr, 0, &need), WLC_OK);
  std::string text(need, '\0');
  ASSERT_EQ(wlc_config_to_json(cfg, text.data(), text.size(), &need), WLC_OK);
  EXPECT_NE(text.find("\"structure\""), std::string::npos);
  wlc_config_free(cfg);
  wlc_config_free(nullptr);

  EXPECT_EQ(wlc_config_from_json("{not json", &cfg), WLC_ERR_INVALID_CONFIG);
  EXPECT_EQ(wlc_config_preset("nope", &cfg), WLC_ERR_UNKNOWN_PRESET);
  EXPECT_EQ(wlc_config_load("/nonexistent.json", &cfg), WLC_ERR_IO);
  EXPECT_EQ(wlc_config_create(nullptr), WLC_ERR_NULL_ARGUMENT);
}

TEST(CApi, PresetRunReportsChecks) {
  ASSERT_EQ(wlc_preset_count(), 4);
  wlc_config* cfg = nullptr;
  ASSERT_EQ(wlc_config_preset("fig3", &cfg), WLC_OK);
  wlc_result* r = nullptr;
  ASSERT_EQ(wlc_run_preset("fig3", cfg, &r), WLC_OK) << wlc_last_error();
  EXPECT_EQ(wlc_result_passed(r), 1);
  EXPECT_STREQ(wlc_result_name(r), "fig3");
  ASSERT_GE(wlc_result_check_count(r), 2);
  const char* name = nullptr;
  const char* detail = nullptr;
  int passed = 0;
  ASSERT_EQ(wlc_result_check(r, 0, &name, &passed, &detail), WLC_OK);
  EXPECT_EQ(passed, 1);
  EXPECT_NE(std::string(name).size(), 0u);
  EXPECT_EQ(wlc_result_check(r, 99, &name, &passed, &detail), WLC_ERR_SIZE);
  wlc_result_free(r);
  wlc_config_free(cfg);
}

TEST(CApi, PresetOverridesApply) {
  wlc_config* cfg = nullptr;
  ASSERT_EQ(wlc_config_preset("fig3", &cfg), WLC_OK);
  // far too short to converge: the embedded check must fail
  ASSERT_EQ(wlc_config_set(cfg, "learning.horizon", "200"), WLC_OK);
  wlc_result* r = nullptr;
  ASSERT_EQ(wlc_run_preset("fig3", cfg, &r), WLC_OK) << wlc_last_error();
  EXPECT_EQ(wlc_result_passed(r), 0);
  wlc_result_free(r);
  wlc_config_free(cfg);
}

TEST(CApi, NetworkSimulation) {
  const int seq[] = {1, 2, 3, 4, 5, 6};
  const double alpha[] = {0.6, 0.5, 0.7, 0.1, 0.8, 0.3};
  wlc_network* net = nullptr;
  ASSERT_EQ(wlc_network_create(6, seq, alpha, 1e-4, &net), WLC_OK);
  EXPECT_EQ(wlc_network_size(net), 6);
  wlc_trajectory* tr = nullptr;
  ASSERT_EQ(wlc_network_simulate(net, nullptr, 7, 10.0, 0.01, &tr), WLC_OK);
  int n = 0;
  size_t samples = 0;
  double t0 = -1, dt = 0;
  ASSERT_EQ(wlc_trajectory_shape(tr, &n, &samples, &t0, &dt), WLC_OK);
  EXPECT_EQ(n, 6);
  EXPECT_EQ(samples, 1001u);
  EXPECT_EQ(t0, 0.0);
  EXPECT_EQ(dt, 0.01);
  std::vector<double> buf(static_cast<size_t>(n) * samples);
  EXPECT_EQ(wlc_trajectory_copy(tr, buf.data(), buf.size() - 1), WLC_ERR_BUFFER_TOO_SMALL);
  ASSERT_EQ(wlc_trajectory_copy(tr, buf.data(), buf.size()), WLC_OK);
  for (double v : buf) EXPECT_GT(v, 0.0);
  double period = 0;
  ASSERT_EQ(wlc_network_period(net, 1, 0.01, &period), WLC_OK);
  EXPECT_GT(period, 50.0);
  wlc_trajectory_free(tr);
  wlc_network_free(net);

  const int bad[] = {1, 1, 2};
  EXPECT_NE(wlc_network_create(3, bad, alpha, 1e-4, &net), WLC_OK);
}

TEST(CApi, LearnStructure) {
  const int seq[] = {1, 4, 2, 5, 3};
  const double alpha[] = {0.3, 0.5, 0.7, 0.4, 0.6};
  wlc_network* net = nullptr;
  ASSERT_EQ(wlc_network_create(5, seq, alpha, 1e-4, &net), WLC_OK);
  const int learner[] = {1, 2, 3, 4, 5};
  const double gamma0[] = {1, 1, 1, 1, 1};
  int succ[5] = {0};
  int iters = 0;
  ASSERT_EQ(wlc_learn_structure(net, learner, gamma0, 3, 0.01, succ, &iters), WLC_OK) << wlc_last_error();
  // 1->4->2->5->3->1
  EXPECT_EQ(succ[0], 4);
  EXPECT_EQ(succ[3], 2);
  EXPECT_EQ(succ[1], 5);
  EXPECT_EQ(succ[4], 3);
  EXPECT_EQ(succ[2], 1);
  EXPECT_LE(iters, 4);
  wlc_network_free(net);
}

TEST(CApi, MetricReportsIoErrors) {
  wlc_result* r = nullptr;
  EXPECT_EQ(wlc_run_metric("/nonexistent_a.csv", "/nonexistent_b.csv", 1.0, NAN, 0.0, 0.0, nullptr, &r), WLC_ERR_IO);
  EXPECT_NE(std::string(wlc_last_error()).size(), 0u);
}
