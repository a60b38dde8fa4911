#include "lanepath/log.hpp"

#include <cstdlib>
#include <cstring>

namespace lanepath {

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("LANEPATH_LOG");
    if (!env) return LogLevel::warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

bool log_enabled(LogLevel level) {
  return static_cast<int>(level) <= static_cast<int>(log_level());
}

}  // namespace lanepath
