#include "panotrack/log.hpp"

#include <cstdlib>
#include <string_view>

namespace panotrack::log {

Level threshold()
{
  static const Level level = [] {
    const char* env = std::getenv("PANOTRACK_LOG");
    const std::string_view v = env ? env : "";
    if (v == "error") {
      return Level::Error;
    }
    if (v == "info") {
      return Level::Info;
    }
    if (v == "debug") {
      return Level::Debug;
    }
    return Level::Warn;
  }();
  return level;
}

}  // namespace panotrack::log
