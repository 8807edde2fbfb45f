#pragma once

#include <stdexcept>
#include <string>

namespace panotrack {

// Every error raised by the library derives from Error so callers (and the CLI)
// can report a stable `kind` token alongside the message.
class Error : public std::runtime_error
{
public:
  Error(std::string kind, const std::string& what)
    : std::runtime_error(what), kind_(std::move(kind))
  {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

struct IndexOutOfRange : Error
{
  explicit IndexOutOfRange(const std::string& what) : Error("index_out_of_range", what) {}
};

struct UnknownLandmark : Error
{
  explicit UnknownLandmark(const std::string& what) : Error("unknown_landmark", what) {}
};

struct SingularInnovation : Error
{
  explicit SingularInnovation(const std::string& what) : Error("singular_innovation", what) {}
};

struct InvalidArgument : Error
{
  explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

struct EmptyWindow : Error
{
  explicit EmptyWindow(const std::string& what) : Error("empty_window", what) {}
};

struct ZeroHistogram : Error
{
  explicit ZeroHistogram(const std::string& what) : Error("zero_histogram", what) {}
};

struct InsufficientHistory : Error
{
  explicit InsufficientHistory(const std::string& what) : Error("insufficient_history", what) {}
};

struct FrameRegression : Error
{
  explicit FrameRegression(const std::string& what) : Error("frame_regression", what) {}
};

struct EmptyGroundTruth : Error
{
  explicit EmptyGroundTruth(const std::string& what) : Error("empty_ground_truth", what) {}
};

struct MissingCamera : Error
{
  MissingCamera(int camera_id, const std::string& what)
    : Error("missing_camera", what), camera_id(camera_id)
  {}
  int camera_id;
};

struct ParseError : Error
{
  explicit ParseError(const std::string& what) : Error("parse_error", what) {}
};

struct IoError : Error
{
  explicit IoError(const std::string& what) : Error("io_error", what) {}
};

}  // namespace panotrack
