#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace genfl {

enum class LogLevel { error = 0, info = 1, debug = 2 };

namespace detail {

inline LogLevel log_level_from_env() {
    const char* v = std::getenv("GENFL_LOG");
    if (!v) return LogLevel::error;
    const std::string_view s(v);
    if (s == "debug") return LogLevel::debug;
    if (s == "info") return LogLevel::info;
    return LogLevel::error;
}

inline LogLevel& log_level() {
    static LogLevel level = log_level_from_env();
    return level;
}

}  // namespace detail

inline void set_log_level(LogLevel level) { detail::log_level() = level; }

// All logging goes to stderr; stdout stays clean for data.
inline void log(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) > static_cast<int>(detail::log_level())) return;
    const char* tag = level == LogLevel::error ? "error" : level == LogLevel::info ? "info" : "debug";
    std::cerr << "[" << tag << "] " << msg << "\n";
}

inline void log_error(const std::string& msg) { log(LogLevel::error, msg); }
inline void log_info(const std::string& msg) { log(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log(LogLevel::debug, msg); }

}  // namespace genfl
