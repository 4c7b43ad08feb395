#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <liekf_tools/commands.hpp>
#include <liekf_tools/config.hpp>
#include <liekf_tools/tables.hpp>

namespace liekf::tools {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("liekf_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name, std::ios::binary) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
};

const char* kSmallConfig = R"({
  // short study for tests
  "trajectory": {"duration_seconds": 3.0, "dt_seconds": 0.01},
  "monte_carlo": {"runs": 3, "window_lengths": [20, 60]},
  "output": {"directory": "out"}
})";

TEST(Config, DefaultsMatchScenarioDefaults) {
  const ExperimentConfig c = parse_config("{}");
  const Scenario d;
  EXPECT_EQ(c.scenario.trajectory.dt, d.trajectory.dt);
  EXPECT_EQ(c.scenario.noise.sigma_nu_diag, d.noise.sigma_nu_diag);
  EXPECT_EQ(c.scenario.mc.runs, 100);
  EXPECT_EQ(c.format, OutputFormat::csv);
}

TEST(Config, BundledDefaultParses) {
  const ExperimentConfig c = load_config(fs::path(LIEKF_SOURCE_DIR) / "configs" / "default.json");
  EXPECT_EQ(c.scenario.mc.window_lengths, (std::vector<std::size_t>{20, 40, 60, 80, 100}));
  EXPECT_EQ(c.scenario.mc.theta0[1].alpha_R, 0.2);
  EXPECT_EQ(c.scenario.noise.sigma_eta_diag, Vec3(0.075, 0.15, 0.1));
}

TEST(Config, ErrorsNameFieldAndLine) {
  const std::string text = "{\n  \"trajectory\": {\n    \"dt_seconds\": -1\n  }\n}\n";
  try {
    parse_config(text, "bad.json");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "trajectory.dt_seconds");
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("bad.json:3"), std::string::npos);
  }
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  try {
    parse_config("{\n\"noise\": {\n \"sede\": 3\n}}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "noise.sede");
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_config(R"({"monte_carlo": {"runs": "ten"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"monte_carlo": {"window_lengths": [1]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"output": {"format": "xml"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"reference_fields": {"gravity_world": [0,0,1], "magnetic_world": [0,0,2]}})"),
               ConfigError);
  EXPECT_THROW(parse_config("{ not json"), ConfigError);
}

TEST(Config, ResolvedJsonRoundTrips) {
  const ExperimentConfig a = load_config(fs::path(LIEKF_SOURCE_DIR) / "configs" / "default.json");
  const nlohmann::json ja = to_json(a);
  const nlohmann::json jb = to_json(parse_config(ja.dump()));
  EXPECT_EQ(ja, jb);
}

TEST(Tables, NumberFormatting) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1e-5), "1.0000000000000001e-05");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_THROW(format_double(std::numeric_limits<double>::quiet_NaN()), NonFiniteOutput);
  EXPECT_THROW(format_double(std::numeric_limits<double>::infinity()), NonFiniteOutput);
}

TEST(Tables, CsvAndJsonRendering) {
  const Table t{{"name", "n", "x"}, {{std::string("a"), 3LL, 0.5}, {std::string("b"), -1LL, 1e300}}};
  EXPECT_EQ(render_csv(t), "name,n,x\na,3,0.5\nb,-1,1.0000000000000001e+300\n");
  const nlohmann::json j = nlohmann::json::parse(render_json(t));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["name"], "a");
  EXPECT_EQ(j[1]["n"], -1);
  EXPECT_EQ(j[0]["x"], 0.5);
  const Table bad{{"x"}, {{std::numeric_limits<double>::infinity()}}};
  EXPECT_THROW(render_csv(bad), NonFiniteOutput);
  EXPECT_THROW(render_json(bad), NonFiniteOutput);
}

TEST(RunCommand, ValidateOnlyWritesNothing) {
  const TempDir dir;
  const fs::path cfg = dir.write("c.json", kSmallConfig);
  std::ostringstream out, err;
  RunOptions o;
  o.config_path = cfg;
  o.validate_only = true;
  o.output_dir = dir.path() / "out";
  EXPECT_EQ(run_command(o, out, err), kExitOk);
  EXPECT_FALSE(fs::exists(dir.path() / "out"));
}

TEST(RunCommand, ConfigErrorsExitOne) {
  const TempDir dir;
  std::ostringstream out, err;
  RunOptions o;
  o.config_path = dir.write("c.json", "{\n \"em\": {\"max_iterations\": 0}\n}");
  EXPECT_EQ(run_command(o, out, err), kExitConfigError);
  EXPECT_NE(err.str().find("em.max_iterations"), std::string::npos);
  o.config_path = dir.path() / "missing.json";
  EXPECT_EQ(run_command(o, out, err), kExitConfigError);
}

TEST(RunCommand, WritesTablesAndIsReproducible) {
  const TempDir dir;
  const fs::path cfg = dir.write("c.json", kSmallConfig);
  std::ostringstream out, err;
  RunOptions o;
  o.config_path = cfg;
  o.threads = 2;
  o.output_dir = dir.path() / "a";
  ASSERT_EQ(run_command(o, out, err), kExitOk) << err.str();
  o.threads = 1;
  o.output_dir = dir.path() / "b";
  ASSERT_EQ(run_command(o, out, err), kExitOk) << err.str();

  for (const char* name : {"loglik_trace.csv", "qr_estimates.csv", "rmse_table.csv"}) {
    const std::string a = slurp(dir.path() / "a" / name);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir.path() / "b" / name)) << name;
    EXPECT_EQ(a.find('\r'), std::string::npos);
  }

  const std::string rmse = slurp(dir.path() / "a" / "rmse_table.csv");
  std::stringstream lines(rmse);
  std::string header, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  EXPECT_EQ(header, "theta0,adaptive_WL20,adaptive_WL60,fixed_theta_true,fixed_theta0");
  EXPECT_EQ(split(row1, ',')[0], "400Q_200R");
  EXPECT_EQ(split(row2, ',')[0], "400Q_0.2R");

  const nlohmann::json m = nlohmann::json::parse(slurp(dir.path() / "a" / "manifest.json"));
  EXPECT_EQ(m["status"], "OK");
  EXPECT_EQ(m["seeds"]["per_run"], nlohmann::json({1, 2, 3}));
  EXPECT_TRUE(m.contains("software"));
  EXPECT_EQ(m["files"].size(), 3u);
}

TEST(RunCommand, ManifestConfigReproducesOutputs) {
  const TempDir dir;
  std::ostringstream out, err;
  RunOptions o;
  o.config_path = dir.write("c.json", kSmallConfig);
  o.output_dir = dir.path() / "first";
  ASSERT_EQ(run_command(o, out, err), kExitOk) << err.str();

  const nlohmann::json m = nlohmann::json::parse(slurp(dir.path() / "first" / "manifest.json"));
  RunOptions again;
  again.config_path = dir.write("resolved.json", m["config"].dump(2));
  again.output_dir = dir.path() / "second";
  ASSERT_EQ(run_command(again, out, err), kExitOk) << err.str();
  for (const char* name : {"loglik_trace.csv", "qr_estimates.csv", "rmse_table.csv"}) {
    EXPECT_EQ(slurp(dir.path() / "first" / name), slurp(dir.path() / "second" / name)) << name;
  }
}

TEST(RunCommand, JsonFormat) {
  const TempDir dir;
  std::ostringstream out, err;
  RunOptions o;
  o.config_path = dir.write("c.json", kSmallConfig);
  o.output_dir = dir.path() / "j";
  o.format = OutputFormat::json;
  ASSERT_EQ(run_command(o, out, err), kExitOk) << err.str();
  const nlohmann::json rows = nlohmann::json::parse(slurp(dir.path() / "j" / "qr_estimates.json"));
  ASSERT_EQ(rows.size(), 3u * 2u);
  EXPECT_EQ(rows[0]["run"], 0);
  EXPECT_TRUE(rows[0]["frob_Q_est"].is_number());
}

TEST(RunCommand, NumericalFailureExitsTwo) {
  const TempDir dir;
  // Near-zero measurement noise with a huge initial covariance makes the
  // innovation covariance too ill-conditioned to factor.
  const char* text = R"({
    "trajectory": {"duration_seconds": 1.0},
    "noise": {"measurement_variance_diag": [0, 0, 0, 0, 0, 0]},
    "monte_carlo": {"runs": 2, "window_lengths": [20], "initial_covariance_sigma_rad": 10.0}
  })";
  std::ostringstream out, err;
  RunOptions o;
  o.config_path = dir.write("c.json", text);
  o.output_dir = dir.path() / "f";
  EXPECT_EQ(run_command(o, out, err), kExitNumericalFailure);
  const nlohmann::json m = nlohmann::json::parse(slurp(dir.path() / "f" / "manifest.json"));
  EXPECT_EQ(m["status"], "FAILED");
  EXPECT_FALSE(m["failures"].empty());
}

TEST(SingleRun, NoiselessTraceIsAccurate) {
  const TempDir dir;
  const char* text = R"({
    "trajectory": {"duration_seconds": 3.0},
    "noise": {"gyro_variance_diag_rad2_per_s2": [0, 0, 0], "measurement_variance_diag": [0, 0, 0, 0, 0, 0]},
    "monte_carlo": {"runs": 1, "window_lengths": [50], "initial_attitude_sigma_rad": 0.0}
  })";
  std::ostringstream out, err;
  SingleRunOptions o;
  o.config_path = dir.write("c.json", text);
  o.output_dir = dir.path();
  ASSERT_EQ(single_run_command(o, out, err), kExitOk) << err.str();
  std::ifstream f(dir.path() / "single_run_0.csv");
  std::string line;
  std::getline(f, line);
  int rows = 0;
  while (std::getline(f, line)) {
    const std::vector<std::string> c = split(line, ',');
    ASSERT_EQ(c.size(), 14u);
    for (int i = 10; i < 13; ++i) EXPECT_LT(std::abs(std::stod(c[i])), 1e-4) << line;
    EXPECT_GT(std::stod(c[13]), 0.0);
    ++rows;
  }
  EXPECT_EQ(rows, 300);
}

TEST(SingleRun, ErrorColumnMatchesQuaternionColumns) {
  const TempDir dir;
  std::ostringstream out, err;
  SingleRunOptions o;
  o.config_path = dir.write("c.json", kSmallConfig);
  o.run_index = 2;
  o.filter = FilterChoice::theta0_fixed;
  o.theta0_index = 1;
  o.output_dir = dir.path();
  ASSERT_EQ(single_run_command(o, out, err), kExitOk) << err.str();
  std::ifstream f(dir.path() / "single_run_2.csv");
  std::string line;
  std::getline(f, line);
  while (std::getline(f, line)) {
    const std::vector<std::string> c = split(line, ',');
    const UnitQuaternion qt(std::stod(c[2]), std::stod(c[3]), std::stod(c[4]), std::stod(c[5]));
    const UnitQuaternion qe(std::stod(c[6]), std::stod(c[7]), std::stod(c[8]), std::stod(c[9]));
    // ε = q̂⁻¹ q with the sign fixed, then the rotation vector 2 log ε.
    const double w = qe.w() * qt.w() + qe.v().dot(qt.v());
    Vec3 v = qe.w() * qt.v() - qt.w() * qe.v() - qe.v().cross(qt.v());
    const double s = w < 0 ? -1.0 : 1.0;
    v *= s;
    const Vec3 e = v.norm() > 0 ? Vec3(2.0 * std::atan2(v.norm(), s * w) * v.normalized()) : Vec3::Zero();
    const Vec3 col(std::stod(c[10]), std::stod(c[11]), std::stod(c[12]));
    EXPECT_LE((e - col).norm(), 1e-12) << line;
  }
}

TEST(SingleRun, OutOfRangeIndexExitsOne) {
  const TempDir dir;
  std::ostringstream out, err;
  SingleRunOptions o;
  o.config_path = dir.write("c.json", kSmallConfig);
  o.output_dir = dir.path();
  o.run_index = 3;
  EXPECT_EQ(single_run_command(o, out, err), kExitConfigError);
  o.run_index = 0;
  o.theta0_index = 5;
  EXPECT_EQ(single_run_command(o, out, err), kExitConfigError);
}

}  // namespace
}  // namespace liekf::tools
