#include "panotrack/io.hpp"

#include "panotrack/errors.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace panotrack::io {

using nlohmann::json;
using tracking::CameraModel;
using tracking::Detection;

namespace {

std::vector<std::string_view> split_csv(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* column)
{
  while (!text.empty() && text.front() == ' ') {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(fmt::format("line {}: invalid value '{}' for column '{}'", line, text, column));
  }
  return value;
}

// Reads the header, then hands each non-empty data line (split on commas) to `row`.
template <typename Row>
void read_csv(std::istream& in, std::string_view header, std::size_t columns, Row&& row)
{
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(fmt::format("line 1: missing header '{}'", header));
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != header) {
    throw ParseError(fmt::format("line 1: expected header '{}', got '{}'", header, line));
  }
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != columns) {
      throw ParseError(fmt::format("line {}: expected {} columns, got {}", number, columns, fields.size()));
    }
    row(fields, number);
  }
}

}  // namespace

void write_detections(std::ostream& out, const std::vector<Detection>& detections)
{
  out << kDetectionHeader << '\n';
  for (const auto& d : detections) {
    fmt::print(out, "{},{},{},{},{},{}\n", d.frame, d.camera, d.u, d.v, d.size, d.score);
  }
}

std::vector<Detection> read_detections(std::istream& in)
{
  std::vector<Detection> out;
  read_csv(in, kDetectionHeader, 6, [&](const auto& f, std::size_t line) {
    Detection d;
    d.frame = parse_field<long>(f[0], line, "frame");
    d.camera = parse_field<int>(f[1], line, "camera");
    d.u = parse_field<double>(f[2], line, "u");
    d.v = parse_field<double>(f[3], line, "v");
    d.size = parse_field<double>(f[4], line, "size");
    d.score = parse_field<double>(f[5], line, "score");
    if (!(d.size > 0.0)) {
      throw ParseError(fmt::format("line {}: size must be positive", line));
    }
    if (d.score < 0.0 || d.score > 1.0) {
      throw ParseError(fmt::format("line {}: score must lie in [0, 1]", line));
    }
    out.push_back(d);
  });
  return out;
}

void write_records(std::ostream& out, const RecordList& records)
{
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    fmt::print(out, "{},{},{},{},{}\n", r.frame, r.id, r.position.x(), r.position.y(),
               r.position.z());
  }
}

RecordList read_records(std::istream& in)
{
  RecordList out;
  read_csv(in, kRecordHeader, 5, [&](const auto& f, std::size_t line) {
    ObjectRecord r;
    r.frame = parse_field<long>(f[0], line, "frame");
    r.id = parse_field<int>(f[1], line, "id");
    r.position = {parse_field<double>(f[2], line, "x"), parse_field<double>(f[3], line, "y"),
                  parse_field<double>(f[4], line, "z")};
    out.push_back(r);
  });
  return out;
}

json cameras_to_json(const std::vector<CameraModel>& cameras)
{
  json arr = json::array();
  for (const auto& c : cameras) {
    json rot = json::array();
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) {
        rot.push_back(c.rotation(r, k));
      }
    }
    arr.push_back({{"id", c.id},
                   {"fx", c.fx},
                   {"fy", c.fy},
                   {"cx", c.cx},
                   {"cy", c.cy},
                   {"rotation", rot},
                   {"translation", {c.translation.x(), c.translation.y(), c.translation.z()}}});
  }
  return arr;
}

std::vector<CameraModel> cameras_from_json(const json& j)
{
  if (!j.is_array()) {
    throw ParseError("cameras: expected a JSON array");
  }
  static const std::vector<std::string> keys = {"id", "fx", "fy", "cx", "cy", "rotation", "translation"};
  std::vector<CameraModel> out;
  for (std::size_t n = 0; n < j.size(); ++n) {
    const auto& o = j[n];
    const std::string where = fmt::format("cameras[{}]", n);
    if (!o.is_object()) {
      throw ParseError(where + ": expected an object");
    }
    for (const auto& [key, value] : o.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ParseError(where + ": unknown key '" + key + "'");
      }
    }
    for (const auto& key : keys) {
      if (!o.contains(key)) {
        throw ParseError(where + ": missing key '" + key + "'");
      }
    }
    try {
      CameraModel c;
      c.id = o.at("id").get<int>();
      c.fx = o.at("fx").get<double>();
      c.fy = o.at("fy").get<double>();
      c.cx = o.at("cx").get<double>();
      c.cy = o.at("cy").get<double>();
      const auto& rot = o.at("rotation");
      const auto& tr = o.at("translation");
      if (!rot.is_array() || rot.size() != 9) {
        throw ParseError(where + ": 'rotation' must hold 9 numbers");
      }
      if (!tr.is_array() || tr.size() != 3) {
        throw ParseError(where + ": 'translation' must hold 3 numbers");
      }
      for (int r = 0; r < 3; ++r) {
        for (int k = 0; k < 3; ++k) {
          c.rotation(r, k) = rot[static_cast<std::size_t>(3 * r + k)].get<double>();
        }
        c.translation(r) = tr[static_cast<std::size_t>(r)].get<double>();
      }
      out.push_back(c);
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

json report_to_json(const metrics::MotReport& r)
{
  return {{"mota", r.mota},
          {"motp", r.motp},
          {"matches", r.matches},
          {"misses", r.misses},
          {"false_positives", r.false_positives},
          {"id_switches", r.id_switches},
          {"total_truth", r.total_truth},
          {"frames", r.frames},
          {"match_threshold", r.match_threshold}};
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << content;
  if (!out) {
    throw IoError("write failed for " + path);
  }
}

std::vector<Detection> load_detections(const std::string& path)
{
  std::istringstream in(read_file(path));
  try {
    return read_detections(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

RecordList load_records(const std::string& path)
{
  std::istringstream in(read_file(path));
  try {
    return read_records(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::vector<CameraModel> load_cameras(const std::string& path)
{
  const auto text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return cameras_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace panotrack::io
