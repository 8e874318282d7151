#include <invsynth/log.hpp>

#include <atomic>
#include <iostream>
#include <mutex>

namespace invsynth {

namespace {

std::atomic<log_level> threshold{log_level::warning};
std::mutex output_mutex;

const char *label(log_level l)
{
  switch(l)
  {
  case log_level::debug: return "debug";
  case log_level::info: return "info";
  case log_level::warning: return "warning";
  case log_level::error: return "error";
  default: return "";
  }
}

} // namespace

void set_log_level(log_level level)
{
  threshold = level;
}

log_level current_log_level()
{
  return threshold.load();
}

void log(log_level level, const std::string &message)
{
  if(level < threshold.load() || level == log_level::off)
    return;
  std::lock_guard<std::mutex> lock(output_mutex);
  std::cerr << "invsynth: " << label(level) << ": " << message << '\n';
}

} // namespace invsynth
