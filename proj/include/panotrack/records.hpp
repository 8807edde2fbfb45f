#pragma once

#include <Eigen/Dense>

#include <vector>

namespace panotrack {

/// One object's 3D position at one frame; shared by ground truth and track output.
struct ObjectRecord
{
  long frame = 0;
  int id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

using RecordList = std::vector<ObjectRecord>;

}  // namespace panotrack
