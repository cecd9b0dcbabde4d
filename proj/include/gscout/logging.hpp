#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

namespace gscout::logging {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

namespace detail {
inline Level& threshold_ref() {
  static Level level = [] {
    const char* env = std::getenv("GREENHOUSE_SCOUT_LOG");
    if (env == nullptr) return Level::Warn;
    const std::string_view v(env);
    if (v == "error") return Level::Error;
    if (v == "warn") return Level::Warn;
    if (v == "info") return Level::Info;
    if (v == "debug") return Level::Debug;
    return Level::Warn;
  }();
  return level;
}
}  // namespace detail

inline Level threshold() { return detail::threshold_ref(); }
inline void set_threshold(Level level) { detail::threshold_ref() = level; }

inline void emit(Level level, const std::string& msg) {
  if (level > threshold()) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[gscout][%s] %s\n", names[int(level)], msg.c_str());
}

inline void error(const std::string& msg) { emit(Level::Error, msg); }
inline void warn(const std::string& msg) { emit(Level::Warn, msg); }
inline void info(const std::string& msg) { emit(Level::Info, msg); }
inline void debug(const std::string& msg) { emit(Level::Debug, msg); }

}  // namespace gscout::logging
