#pragma once

// Minimal stderr logging; the threshold comes from PANOTRACK_LOG
// (error | warn | info | debug, default warn).

#include <fmt/format.h>

#include <cstdio>

namespace panotrack::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level threshold();

template <typename... Args>
void write(Level level, const char* tag, fmt::format_string<Args...> f, Args&&... args)
{
  if (level <= threshold()) {
    fmt::print(stderr, "[{}] {}\n", tag, fmt::format(f, std::forward<Args>(args)...));
  }
}

template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args)
{
  write(Level::Warn, "warn", f, std::forward<Args>(args)...);
}

template <typename... Args>
void info(fmt::format_string<Args...> f, Args&&... args)
{
  write(Level::Info, "info", f, std::forward<Args>(args)...);
}

template <typename... Args>
void debug(fmt::format_string<Args...> f, Args&&... args)
{
  write(Level::Debug, "debug", f, std::forward<Args>(args)...);
}

}  // namespace panotrack::log
