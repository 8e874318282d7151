#pragma once

#include <string>

namespace invsynth {

enum class log_level
{
  debug,
  info,
  warning,
  error,
  off
};

/// Messages below the threshold are dropped. Default: warning.
void set_log_level(log_level level);
log_level current_log_level();
void log(log_level level, const std::string &message);

inline void log_debug(const std::string &m) { log(log_level::debug, m); }
inline void log_info(const std::string &m) { log(log_level::info, m); }
inline void log_warning(const std::string &m) { log(log_level::warning, m); }

} // namespace invsynth
