#include "panotrack/config.hpp"

#include "panotrack/errors.hpp"
#include "panotrack/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <map>

namespace panotrack::config {

using nlohmann::json;

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset)
{
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

std::size_t line_of_key(const std::string& text, const std::string& key)
{
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

class SectionReader
{
public:
  SectionReader(const std::string& text, std::string section) : text_(text), section_(std::move(section)) {}

  SectionReader& integer(const std::string& key, int& target)
  {
    fields_[key] = [this, key, &target](const json& v) {
      if (!v.is_number_integer()) {
        fail(key, "expected an integer");
      }
      target = v.get<int>();
    };
    return *this;
  }
  SectionReader& seed(const std::string& key, std::uint64_t& target)
  {
    fields_[key] = [this, key, &target](const json& v) {
      if (!v.is_number_unsigned()) {
        fail(key, "expected a non-negative integer");
      }
      target = v.get<std::uint64_t>();
    };
    return *this;
  }
  SectionReader& number(const std::string& key, double& target)
  {
    fields_[key] = [this, key, &target](const json& v) {
      if (!v.is_number()) {
        fail(key, "expected a number");
      }
      target = v.get<double>();
    };
    return *this;
  }
  SectionReader& boolean(const std::string& key, bool& target)
  {
    fields_[key] = [this, key, &target](const json& v) {
      if (!v.is_boolean()) {
        fail(key, "expected true or false");
      }
      target = v.get<bool>();
    };
    return *this;
  }
  SectionReader& string(const std::string& key, std::string& target)
  {
    fields_[key] = [this, key, &target](const json& v) {
      if (!v.is_string()) {
        fail(key, "expected a string");
      }
      target = v.get<std::string>();
    };
    return *this;
  }
  SectionReader& int_list(const std::string& key, std::vector<int>& target)
  {
    fields_[key] = [this, key, &target](const json& v) {
      if (!v.is_array()) {
        fail(key, "expected an array of integers");
      }
      target.clear();
      for (const auto& e : v) {
        if (!e.is_number_integer()) {
          fail(key, "expected an array of integers");
        }
        target.push_back(e.get<int>());
      }
    };
    return *this;
  }
  SectionReader& section(const std::string& key, std::function<void(const json&)> reader)
  {
    fields_[key] = [this, key, reader = std::move(reader)](const json& v) {
      if (!v.is_object()) {
        fail(key, "expected an object");
      }
      reader(v);
    };
    return *this;
  }

  void read(const json& obj) const
  {
    for (const auto& [key, value] : obj.items()) {
      const auto it = fields_.find(key);
      if (it == fields_.end()) {
        fail(key, "unknown key");
      }
      it->second(value);
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const
  {
    const std::string path = section_.empty() ? key : section_ + "." + key;
    throw ParseError(fmt::format("line {}: key '{}': {}", line_of_key(text_, key), path, why));
  }

private:
  const std::string& text_;
  std::string section_;
  std::map<std::string, std::function<void(const json&)>> fields_;
};

// Re-raise validation failures with the section name so the user can find them.
template <typename Fn>
void validated(const std::string& section, Fn&& fn)
{
  try {
    fn();
  } catch (const InvalidArgument& e) {
    throw ParseError(fmt::format("section '{}': {}", section, e.what()));
  }
}

}  // namespace

void SweepSpec::validate() const
{
  if (k_h.empty() || i_bls_max.empty()) {
    throw InvalidArgument("sweep lists must be non-empty");
  }
  if (seeds < 1) {
    throw InvalidArgument("sweep seeds must be >= 1");
  }
  for (const int k : k_h) {
    if (k < 1) {
      throw InvalidArgument("sweep k_h values must be >= 1");
    }
  }
  for (const int i : i_bls_max) {
    if (i < 0) {
      throw InvalidArgument("sweep i_bls_max values must be >= 0");
    }
  }
}

void SlamDemoConfig::validate() const
{
  if (runs < 1 || steps < 1 || landmarks < 0 || n_iter < 1) {
    throw InvalidArgument("slam counts out of range");
  }
  if (!(loop_radius > 0) || !(sensor_range > 0) || q_xy < 0 || q_phi < 0 || !(r_xy > 0)) {
    throw InvalidArgument("slam geometry/noise out of range (r_xy must be positive)");
  }
}

void RunConfig::finalize()
{
  scenario.seed = seed;
  tracker.seed = seed;
  validated("tracker", [&] { tracker.validate(); });
  validated("scenario", [&] { scenario.validate(); });
  validated("sweep", [&] { sweep.validate(); });
  validated("slam", [&] { slam.validate(); });
  if (!(threshold > 0)) {
    throw ParseError("key 'threshold': must be positive");
  }
}

RunConfig parse_run_config(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("line {}: malformed JSON ({})", line_of_offset(text, e.byte), e.what()));
  }
  if (!j.is_object()) {
    throw ParseError("line 1: config must be a JSON object");
  }

  RunConfig cfg;
  auto& t = cfg.tracker;
  auto& s = cfg.scenario;
  auto& w = cfg.sweep;
  auto& m = cfg.slam;

  SectionReader tracker(text, "tracker");
  tracker.integer("l_c", t.l_c)
      .number("delta_min", t.delta_min)
      .number("eps_phi", t.eps_phi)
      .number("eps_h", t.eps_h)
      .number("omega_s_coeff", t.omega_s_coeff)
      .number("theta_s", t.theta_s)
      .number("eps_3d", t.eps_3d)
      .number("v_max", t.v_max)
      .integer("delta_a", t.delta_a)
      .integer("k_h", t.k_h)
      .integer("i_bls_max", t.i_bls_max)
      .number("fps", t.fps)
      .number("c_miss", t.c_miss)
      .number("c_birth", t.c_birth)
      .number("c_coll", t.c_coll)
      .boolean("exclude_static", t.exclude_static);

  std::string density;
  SectionReader scenario(text, "scenario");
  scenario.string("density", density)
      .integer("n_targets", s.n_targets)
      .integer("n_frames", s.n_frames)
      .integer("n_cameras", s.n_cameras)
      .number("arena_width", s.arena_width)
      .number("arena_depth", s.arena_depth)
      .number("fps", s.fps)
      .number("v_max_sim", s.v_max_sim)
      .number("noise_px", s.noise_px)
      .number("p_miss", s.p_miss)
      .number("clutter_rate", s.clutter_rate);

  SectionReader sweep(text, "sweep");
  sweep.int_list("k_h", w.k_h).int_list("i_bls_max", w.i_bls_max).integer("seeds", w.seeds);

  SectionReader slam(text, "slam");
  slam.integer("runs", m.runs)
      .integer("steps", m.steps)
      .integer("landmarks", m.landmarks)
      .number("loop_radius", m.loop_radius)
      .number("landmark_radius", m.landmark_radius)
      .number("sensor_range", m.sensor_range)
      .number("q_xy", m.q_xy)
      .number("q_phi", m.q_phi)
      .number("r_xy", m.r_xy)
      .integer("n_iter", m.n_iter);

  SectionReader top(text, "");
  top.seed("seed", cfg.seed)
      .number("threshold", cfg.threshold)
      .string("output_dir", cfg.output_dir)
      .section("tracker", [&](const json& v) { tracker.read(v); })
      .section("scenario", [&](const json& v) { scenario.read(v); })
      .section("sweep", [&](const json& v) { sweep.read(v); })
      .section("slam", [&](const json& v) { slam.read(v); });
  top.read(j);

  if (!density.empty()) {
    if (j["scenario"].contains("n_targets")) {
      scenario.fail("density", "set either density or n_targets, not both");
    }
    try {
      s.n_targets = sim::density_targets(density);
    } catch (const InvalidArgument& e) {
      scenario.fail("density", e.what());
    }
  }

  // The tracker's fps defaults to the scenario's unless set explicitly.
  if (!(j.contains("tracker") && j["tracker"].contains("fps"))) {
    t.fps = s.fps;
  }
  cfg.finalize();
  return cfg;
}

RunConfig load_run_config(const std::string& path)
{
  try {
    return parse_run_config(io::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace panotrack::config
