// Minimal stderr logger; level from the LANEPATH_LOG env var
// (error|warn|info|debug, default warn).
#pragma once

#include <cstdio>

namespace lanepath {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level();

bool log_enabled(LogLevel level);

template <typename... Args>
void log(LogLevel level, const char* fmt, Args... args) {
  if (!log_enabled(level)) return;
  const char* tag = level == LogLevel::error  ? "error"
                    : level == LogLevel::warn ? "warn"
                    : level == LogLevel::info ? "info"
                                              : "debug";
  std::fprintf(stderr, "[lanepath %s] ", tag);
  if constexpr (sizeof...(args) == 0) {
    std::fprintf(stderr, "%s", fmt);
  } else {
    std::fprintf(stderr, fmt, args...);
  }
  std::fprintf(stderr, "\n");
}

}  // namespace lanepath
