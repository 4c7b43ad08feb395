#include <liekf_tools/config.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace liekf::tools {

using nlohmann::json;

ConfigError::ConfigError(std::string source, int line, std::string field, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": field '" + field +
                         "': " + message),
      line_(line),
      field_(std::move(field)) {}

std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

namespace {

// Walks one JSON object, reporting errors against the dotted field path and the
// line where the key first appears in the source text.
class Reader {
 public:
  Reader(const json& obj, std::string path, const std::string& text, const std::string& source)
      : obj_(obj), path_(std::move(path)), text_(text), source_(source) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw ConfigError(source_, locate(field), field, message);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(obj_.at(key), field(key), text_, source_);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(field(key), "must be finite");
    return d;
  }

  double positive(const std::string& key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) fail(field(key), "must be > 0");
    return d;
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(field(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned()) fail(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = obj_.at(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    return v.get<std::string>();
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vector(const std::string& key, const Eigen::Matrix<double, N, 1>& fallback) {
    if (!has(key)) return fallback;
    return to_vector<N>(obj_.at(key), field(key));
  }

  template <int N>
  Eigen::Matrix<double, N, 1> to_vector(const json& v, const std::string& name) const {
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
      fail(name, "expected an array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) fail(name, "expected finite numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) fail(field(key), "unknown key");
    }
  }

  const std::string& text() const { return text_; }
  const std::string& source() const { return source_; }

 private:
  int locate(const std::string& field) const {
    const auto dot = field.find_last_of('.');
    const std::string key = "\"" + (dot == std::string::npos ? field : field.substr(dot + 1)) + "\"";
    const auto pos = text_.find(key);
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  const json& obj_;
  std::string path_;
  const std::string& text_;
  const std::string& source_;
  std::set<std::string> seen_;
};

RateProfile read_profile(Reader r) {
  RateProfile p = RateProfile::default_profile();
  const std::string type = r.string("type", "sinusoidal");
  if (type == "constant") {
    p = RateProfile{};
    p.kind = RateProfileKind::constant;
    p.rate = r.vector<3>("rate_rad_per_s", Vec3::Zero());
  } else if (type == "sinusoidal") {
    const bool custom = r.has("amplitude_rad_per_s") || r.has("angular_frequency_rad_per_s") || r.has("phase_rad") ||
                        r.has("offset_rad_per_s");
    if (custom) {
      p = RateProfile{};
      p.kind = RateProfileKind::sinusoidal;
    }
    p.amplitude = r.vector<3>("amplitude_rad_per_s", p.amplitude);
    p.angular_frequency = r.vector<3>("angular_frequency_rad_per_s", p.angular_frequency);
    p.phase = r.vector<3>("phase_rad", p.phase);
    p.offset = r.vector<3>("offset_rad_per_s", p.offset);
  } else if (type == "piecewise") {
    p = RateProfile{};
    p.kind = RateProfileKind::piecewise;
    if (!r.has("segments")) r.fail(r.field("segments"), "required for a piecewise profile");
    const json& segs = r.raw("segments");
    if (!segs.is_array() || segs.empty()) r.fail(r.field("segments"), "expected a non-empty array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      Reader s(segs[i], r.field("segments") + "[" + std::to_string(i) + "]", r.text(), r.source());
      RateSegment seg;
      seg.duration = s.positive("duration_seconds", 1.0);
      seg.rate = s.vector<3>("rate_rad_per_s", Vec3::Zero());
      s.finish();
      p.segments.push_back(seg);
    }
  } else {
    r.fail(r.field("type"), "expected constant, sinusoidal or piecewise");
  }
  r.finish();
  return p;
}

void read_trajectory(Reader r, TrajectoryConfig& t) {
  t.duration = r.positive("duration_seconds", t.duration);
  t.dt = r.positive("dt_seconds", t.dt);
  if (r.has("initial_attitude_wxyz")) {
    const Vec4 q = r.vector<4>("initial_attitude_wxyz", Vec4(1, 0, 0, 0));
    if (!(q.norm() > 1e-12)) r.fail(r.field("initial_attitude_wxyz"), "quaternion must be non-zero");
    t.initial_attitude = UnitQuaternion(Quaternion::from_coeffs(q));
  }
  if (r.has("rate_profile")) t.profile = read_profile(r.child("rate_profile"));
  r.finish();
}

void read_noise(Reader r, NoiseConfig& n) {
  n.sigma_eta_diag = r.vector<3>("gyro_variance_diag_rad2_per_s2", n.sigma_eta_diag);
  if (n.sigma_eta_diag.minCoeff() < 0.0) r.fail(r.field("gyro_variance_diag_rad2_per_s2"), "variances must be >= 0");
  n.sigma_nu_diag = r.vector<6>("measurement_variance_diag", n.sigma_nu_diag);
  if (n.sigma_nu_diag.minCoeff() < 0.0) r.fail(r.field("measurement_variance_diag"), "variances must be >= 0");
  n.seed = r.unsigned_integer("seed", n.seed);
  r.finish();
}

void read_refs(Reader r, ReferenceFields& refs) {
  const Vec3 g = r.vector<3>("gravity_world", refs.g);
  const Vec3 m = r.vector<3>("magnetic_world", refs.m0);
  try {
    refs = ReferenceFields::make(g, m);
  } catch (const std::invalid_argument& e) {
    r.fail(r.field("magnetic_world"), e.what());
  }
  r.finish();
}

void read_mc(Reader r, McConfig& mc, std::size_t steps) {
  const std::int64_t runs = r.integer("runs", mc.runs);
  if (runs < 1 || runs > 1'000'000) r.fail(r.field("runs"), "must be in [1, 1000000]");
  mc.runs = static_cast<int>(runs);

  if (r.has("window_lengths")) {
    const json& wls = r.raw("window_lengths");
    if (!wls.is_array() || wls.empty()) r.fail(r.field("window_lengths"), "expected a non-empty array");
    mc.window_lengths.clear();
    for (const json& w : wls) {
      if (!w.is_number_unsigned() || w.get<std::uint64_t>() < 2) {
        r.fail(r.field("window_lengths"), "window lengths must be integers >= 2");
      }
      if (w.get<std::uint64_t>() > steps) r.fail(r.field("window_lengths"), "window length exceeds the trajectory");
      mc.window_lengths.push_back(w.get<std::size_t>());
    }
  }
  if (r.has("theta0_multipliers")) {
    const json& ts = r.raw("theta0_multipliers");
    if (!ts.is_array() || ts.empty()) r.fail(r.field("theta0_multipliers"), "expected a non-empty array");
    mc.theta0.clear();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      Reader t(ts[i], r.field("theta0_multipliers") + "[" + std::to_string(i) + "]", r.text(), r.source());
      Theta0Multiplier m;
      m.alpha_Q = t.positive("q_scale", m.alpha_Q);
      m.alpha_R = t.positive("r_scale", m.alpha_R);
      t.finish();
      mc.theta0.push_back(m);
    }
  }
  mc.include_baselines = r.boolean("include_baselines", mc.include_baselines);

  const std::string mode = r.string("adaptation_mode", "single_window");
  if (mode == "single_window") {
    mc.adaptation = AdaptationMode::single_window;
  } else if (mode == "per_window") {
    mc.adaptation = AdaptationMode::per_window;
  } else {
    r.fail(r.field("adaptation_mode"), "expected single_window or per_window");
  }

  mc.initial_attitude_sigma = r.number("initial_attitude_sigma_rad", mc.initial_attitude_sigma);
  if (mc.initial_attitude_sigma < 0.0) r.fail(r.field("initial_attitude_sigma_rad"), "must be >= 0");
  mc.initial_covariance_sigma = r.positive("initial_covariance_sigma_rad", mc.initial_covariance_sigma);

  const std::string metric = r.string("rmse_metric", "rotation_vector");
  if (metric == "rotation_vector") {
    mc.metric = ErrorMetric::rotation_vector;
  } else if (metric == "quaternion_vector") {
    mc.metric = ErrorMetric::quaternion_vector;
  } else {
    r.fail(r.field("rmse_metric"), "expected rotation_vector or quaternion_vector");
  }
  r.finish();
}

void read_em(Reader r, EmConfig& em) {
  const std::int64_t it = r.integer("max_iterations", em.max_iterations);
  if (it < 1 || it > 100'000) r.fail(r.field("max_iterations"), "must be in [1, 100000]");
  em.max_iterations = static_cast<int>(it);
  em.rel_tolerance = r.positive("rel_tolerance", em.rel_tolerance);
  em.q_floor = r.positive("q_floor", em.q_floor);
  em.r_floor = r.positive("r_floor", em.r_floor);
  r.finish();
}

void read_output(Reader r, ExperimentConfig& cfg) {
  cfg.output_dir = r.string("directory", cfg.output_dir.string());
  const std::string fmt = r.string("format", "csv");
  if (fmt == "csv") {
    cfg.format = OutputFormat::csv;
  } else if (fmt == "json") {
    cfg.format = OutputFormat::json;
  } else {
    r.fail(r.field("format"), "expected csv or json");
  }
  r.finish();
}

json vec_json(const auto& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    // nlohmann reports "line L, column C" inside the message.
    throw ConfigError(source, 0, "<document>", e.what());
  }

  ExperimentConfig cfg;
  Reader r(root, "", text, source);
  if (r.has("trajectory")) read_trajectory(r.child("trajectory"), cfg.scenario.trajectory);
  if (r.has("noise")) read_noise(r.child("noise"), cfg.scenario.noise);
  if (r.has("reference_fields")) read_refs(r.child("reference_fields"), cfg.scenario.refs);
  if (r.has("monte_carlo")) read_mc(r.child("monte_carlo"), cfg.scenario.mc, cfg.scenario.trajectory.steps());
  if (r.has("em")) read_em(r.child("em"), cfg.scenario.em);
  if (r.has("output")) read_output(r.child("output"), cfg);
  r.finish();

  try {
    cfg.scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source, 0, "<scenario>", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, "<file>", "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

json to_json(const ExperimentConfig& cfg) {
  const Scenario& s = cfg.scenario;
  json profile;
  const RateProfile& p = s.trajectory.profile;
  switch (p.kind) {
    case RateProfileKind::constant:
      profile = {{"type", "constant"}, {"rate_rad_per_s", vec_json(p.rate)}};
      break;
    case RateProfileKind::sinusoidal:
      profile = {{"type", "sinusoidal"},
                 {"amplitude_rad_per_s", vec_json(p.amplitude)},
                 {"angular_frequency_rad_per_s", vec_json(p.angular_frequency)},
                 {"phase_rad", vec_json(p.phase)},
                 {"offset_rad_per_s", vec_json(p.offset)}};
      break;
    case RateProfileKind::piecewise: {
      json segs = json::array();
      for (const RateSegment& seg : p.segments) {
        segs.push_back({{"duration_seconds", seg.duration}, {"rate_rad_per_s", vec_json(seg.rate)}});
      }
      profile = {{"type", "piecewise"}, {"segments", segs}};
      break;
    }
  }

  json theta0 = json::array();
  for (const Theta0Multiplier& m : s.mc.theta0) theta0.push_back({{"q_scale", m.alpha_Q}, {"r_scale", m.alpha_R}});

  return {
      {"trajectory",
       {{"duration_seconds", s.trajectory.duration},
        {"dt_seconds", s.trajectory.dt},
        {"initial_attitude_wxyz", vec_json(s.trajectory.initial_attitude.coeffs())},
        {"rate_profile", profile}}},
      {"noise",
       {{"gyro_variance_diag_rad2_per_s2", vec_json(s.noise.sigma_eta_diag)},
        {"measurement_variance_diag", vec_json(s.noise.sigma_nu_diag)},
        {"seed", s.noise.seed}}},
      {"reference_fields", {{"gravity_world", vec_json(s.refs.g)}, {"magnetic_world", vec_json(s.refs.m0)}}},
      {"monte_carlo",
       {{"runs", s.mc.runs},
        {"window_lengths", s.mc.window_lengths},
        {"theta0_multipliers", theta0},
        {"include_baselines", s.mc.include_baselines},
        {"adaptation_mode", s.mc.adaptation == AdaptationMode::single_window ? "single_window" : "per_window"},
        {"initial_attitude_sigma_rad", s.mc.initial_attitude_sigma},
        {"initial_covariance_sigma_rad", s.mc.initial_covariance_sigma},
        {"rmse_metric", s.mc.metric == ErrorMetric::rotation_vector ? "rotation_vector" : "quaternion_vector"}}},
      {"em",
       {{"max_iterations", s.em.max_iterations},
        {"rel_tolerance", s.em.rel_tolerance},
        {"q_floor", s.em.q_floor},
        {"r_floor", s.em.r_floor}}},
      {"output", {{"directory", cfg.output_dir.string()}, {"format", to_string(cfg.format)}}},
  };
}

}  // namespace liekf::tools
