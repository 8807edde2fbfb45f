#pragma once

// On-disk formats:
//   detections CSV   frame,camera,u,v,size,score
//   truth/track CSV  frame,id,x,y,z
//   cameras JSON     [{"id","fx","fy","cx","cy","rotation":[9, row-major],"translation":[3]}]

#include "panotrack/camera.hpp"
#include "panotrack/clear_mot.hpp"
#include "panotrack/records.hpp"

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace panotrack::io {

inline constexpr const char* kDetectionHeader = "frame,camera,u,v,size,score";
inline constexpr const char* kRecordHeader = "frame,id,x,y,z";

void write_detections(std::ostream& out, const std::vector<tracking::Detection>& detections);
std::vector<tracking::Detection> read_detections(std::istream& in);

void write_records(std::ostream& out, const RecordList& records);
RecordList read_records(std::istream& in);

nlohmann::json cameras_to_json(const std::vector<tracking::CameraModel>& cameras);
std::vector<tracking::CameraModel> cameras_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const metrics::MotReport& report);

/// Whole-file helpers; failures raise IoError naming the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::vector<tracking::Detection> load_detections(const std::string& path);
RecordList load_records(const std::string& path);
std::vector<tracking::CameraModel> load_cameras(const std::string& path);

}  // namespace panotrack::io
