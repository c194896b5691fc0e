#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace czsl {

// Verbosity from CZSL_LOG_LEVEL: 0 silent, 1 progress (default), 2 debug.
inline int log_level() {
  static const int level = [] {
    const char* v = std::getenv("CZSL_LOG_LEVEL");
    return v ? std::atoi(v) : 1;
  }();
  return level;
}

inline void log_info(std::string_view msg) {
  if (log_level() >= 1) std::cerr << "[czsl] " << msg << '\n';
}

inline void log_debug(std::string_view msg) {
  if (log_level() >= 2) std::cerr << "[czsl:debug] " << msg << '\n';
}

}  // namespace czsl
