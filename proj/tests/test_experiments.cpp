#include <gtest/gtest.h>

#include <sstream>

#include "hdgdd/experiments.hpp"
#include "hdgdd/svg_plot.hpp"

namespace hdgdd {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

/// CSV rows with the trailing wall_ms column removed.
std::string without_timing(const std::string& csv) {
  std::string out;
  for (const auto& l : lines_of(csv)) out += l.substr(0, l.rfind(',')) + "\n";
  return out;
}

TEST(Config, ParsesFlatKeyValueText) {
  std::istringstream in(
      "# two strips\n"
      "algo = nn\n"
      "h = 0.0625   # coarse\n"
      "\n"
      "alpha=0.3\n"
      "theta = 0.2\n"
      "max-iter = 50\n"
      "nn-sign = plus\n"
      "tf-signs = literal\n"
      "out = results/a\n");
  const ExperimentConfig cfg = parse_config(in);
  EXPECT_EQ(cfg.algo, Algorithm::kNN);
  EXPECT_EQ(cfg.h, 0.0625);
  ASSERT_TRUE(cfg.alpha.has_value());
  EXPECT_EQ(*cfg.alpha, 0.3);
  EXPECT_EQ(cfg.theta, 0.2);
  EXPECT_EQ(cfg.max_iter, 50);
  EXPECT_EQ(cfg.nn_sign, 1);
  EXPECT_EQ(cfg.tf_signs, SignConvention::kLiteral);
  EXPECT_EQ(cfg.out, "results/a");
  EXPECT_EQ(breakpoints_of(cfg), (std::vector<double>{0.0, 0.3, 1.0}));
}

TEST(Config, NumbersFormatShortestRoundTrip) {
  EXPECT_EQ(format_double(0.3), "0.3");
  EXPECT_EQ(format_double(1.0 / 32), "0.03125");
  EXPECT_EQ(format_double(16), "16");
  const double third = 1.0 / 3;
  EXPECT_EQ(std::stod(format_double(third)), third);
}

TEST(Config, Defaults) {
  const ExperimentConfig cfg;
  EXPECT_EQ(cfg.h, 1.0 / 32);
  EXPECT_EQ(cfg.theta, 0.25);
  EXPECT_EQ(cfg.tau, 1.0);
  EXPECT_EQ(cfg.tol, 1e-6);
  EXPECT_EQ(cfg.max_iter, 1000);
  EXPECT_EQ(cfg.nn_sign, -1);
  EXPECT_EQ(cfg.tf_signs, SignConvention::kOriented);
  EXPECT_EQ(breakpoints_of(cfg), (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Config, ErrorsCarryLineNumbers) {
  std::istringstream unknown("h = 0.1\nwidth = 3\n");
  try {
    parse_config(unknown);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("width"), std::string::npos) << e.what();
  }
  std::istringstream bad_number("tol = 1e-6x\n");
  EXPECT_THROW(parse_config(bad_number), ConfigError);
  std::istringstream no_equals("algo nn\n");
  EXPECT_THROW(parse_config(no_equals), ConfigError);
}

TEST(Config, LaterValuesOverrideEarlier) {
  std::istringstream in("theta = 0.1\n");
  ExperimentConfig cfg = parse_config(in);
  set_config_value(cfg, "theta", "0.3");
  EXPECT_EQ(cfg.theta, 0.3);
}

TEST(Config, ValidationRejectsOutOfRange) {
  ExperimentConfig cfg;
  cfg.alpha = 1.2;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.tau = -1;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = ExperimentConfig{};
  cfg.max_iter = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Run, MonolithicIsOneConvergedRow) {
  ExperimentConfig cfg;
  cfg.h = 1.0 / 8;
  const RunReport r = run(cfg);
  EXPECT_EQ(r.status, RunStatus::kConverged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(exit_code(r), 0);
  std::ostringstream os;
  write_history_csv(os, r.history);
  const auto rows = lines_of(os.str());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "iter,err_q,err_u,interface_diff,wall_ms");
  // Empty interface_diff cell.
  EXPECT_NE(rows[1].find(",,"), std::string::npos);
}

TEST(Run, HistoryCsvIsDeterministicApartFromTiming) {
  ExperimentConfig cfg;
  cfg.h = 1.0 / 8;
  cfg.algo = Algorithm::kTF;
  cfg.n = 3;
  std::ostringstream a, b;
  write_history_csv(a, run(cfg).history);
  write_history_csv(b, run(cfg).history);
  EXPECT_EQ(without_timing(a.str()), without_timing(b.str()));
  EXPECT_GT(lines_of(a.str()).size(), 2u);
}

TEST(Run, ExitCodesFollowStatus) {
  RunReport r;
  r.status = RunStatus::kConverged;
  EXPECT_EQ(exit_code(r), 0);
  r.status = RunStatus::kMaxIter;
  EXPECT_EQ(exit_code(r), 2);
  r.status = RunStatus::kDiverged;
  EXPECT_EQ(exit_code(r), 3);
  r.error = "boom";
  EXPECT_EQ(exit_code(r), 1);
}

TEST(Run, ReportJsonEchoesConfig) {
  ExperimentConfig cfg;
  cfg.h = 1.0 / 8;
  cfg.algo = Algorithm::kNN;
  const auto j = to_json(run(cfg));
  EXPECT_EQ(j["status"], "converged");
  EXPECT_EQ(j["config"]["algo"], "nn");
  EXPECT_EQ(j["config"]["nn_sign"], "minus");
  EXPECT_EQ(j["config"]["breakpoints"].size(), 3u);
}

TEST(Order, NeedsThreeSizes) {
  EXPECT_THROW(convergence_order({0.125}), ConfigError);
  EXPECT_THROW(convergence_order({0.125, 0.0625}), ConfigError);
}

TEST(Order, RatesNearTwo) {
  const auto rows = convergence_order({0.125, 0.0625, 0.03125});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].rate_u.has_value());
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_GE(*rows[k].rate_u, 1.8);
    EXPECT_GE(*rows[k].rate_q, 1.8);
  }
  std::ostringstream os;
  write_order_csv(os, rows);
  EXPECT_EQ(lines_of(os.str()).front(), "h,err_u,err_q,rate_u,rate_q");
}

TEST(Sweep, SlopeOfExactPowerLaw) {
  EXPECT_NEAR(loglog_slope({2, 4, 8, 16}, {3, 12, 48, 192}), 2.0, 1e-12);
}

TEST(Sweep, ThetaSweepRecordsEveryRun) {
  ExperimentConfig cfg;
  cfg.h = 1.0 / 8;
  cfg.algo = Algorithm::kNN;
  cfg.max_iter = 30;
  const SweepResult s = sweep(cfg, parse_sweep_parameter("theta"), {0.25, 0.6});
  ASSERT_EQ(s.runs.size(), 2u);
  EXPECT_EQ(s.runs[0].status, RunStatus::kConverged);
  EXPECT_NE(s.runs[1].status, RunStatus::kConverged);
  EXPECT_FALSE(s.loglog_slope.has_value());
  std::ostringstream os;
  write_summary_csv(os, s);
  const auto rows = lines_of(os.str());
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "value,status,iterations,err_q,err_u");
  EXPECT_EQ(rows[1].substr(0, 15), "0.25,converged,");
}

TEST(Sweep, SubdomainCountSweepFitsSlope) {
  ExperimentConfig cfg;
  cfg.h = 1.0 / 16;
  cfg.algo = Algorithm::kTF;
  const SweepResult s = sweep(cfg, SweepParameter::kN, {2, 4});
  ASSERT_TRUE(s.loglog_slope.has_value());
  EXPECT_GT(*s.loglog_slope, 0.0);
  EXPECT_THROW(parse_sweep_parameter("omega"), ConfigError);
}

TEST(Sweep, FailedRunIsRecordedNotThrown) {
  ExperimentConfig cfg;
  cfg.h = 1.0 / 8;
  cfg.algo = Algorithm::kNN;
  const SweepResult s = sweep(cfg, SweepParameter::kN, {3});
  ASSERT_TRUE(s.runs[0].error.has_value());
  EXPECT_EQ(s.runs[0].status_name(), "error");
}

HistorySeries series(const std::string& label, int scale) {
  std::ostringstream os;
  IterationHistory h;
  for (int i = 1; i <= 5; ++i) {
    h.push_back({i, scale * std::pow(0.5, i), scale * std::pow(0.4, i), std::pow(0.1, i), 1.0});
  }
  write_history_csv(os, h);
  std::istringstream in(os.str());
  return read_history_csv(in, label);
}

TEST(Plot, ReadsHistoryCsv) {
  const HistorySeries s = series("a", 1);
  EXPECT_EQ(s.iteration.size(), 5u);
  EXPECT_NEAR(s.metric[2][4], 1e-5, 1e-15);
  std::istringstream bad("iteration,x\n");
  EXPECT_THROW(read_history_csv(bad, "bad"), std::runtime_error);
}

TEST(Plot, SvgIsDeterministicWithLegend) {
  std::vector<HistorySeries> all;
  for (int k = 0; k < 11; ++k) all.push_back(series("theta_" + std::to_string(k), k + 1));
  std::ostringstream a, b;
  write_svg(a, all);
  write_svg(b, all);
  EXPECT_EQ(a.str(), b.str());
  const std::string svg = a.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t labels = 0;
  for (std::size_t p = svg.find(">theta_"); p != std::string::npos; p = svg.find(">theta_", p + 1)) {
    ++labels;
  }
  EXPECT_EQ(labels, 33u);  // 11 legend entries in each of 3 panels
  std::ostringstream empty;
  EXPECT_THROW(write_svg(empty, {}), std::invalid_argument);
}

}  // namespace
}  // namespace hdgdd
