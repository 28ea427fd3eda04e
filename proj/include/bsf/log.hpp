#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace bsf {

/// Level named by BSF_LOG: quiet (default), info or trace. Unknown values
/// count as quiet.
inline spdlog::level::level_enum log_level_from_env() {
  const char* v = std::getenv("BSF_LOG");
  if (!v) return spdlog::level::off;
  const std::string s(v);
  if (s == "info") return spdlog::level::info;
  if (s == "trace") return spdlog::level::trace;
  return spdlog::level::off;
}

/// Library logger on stderr.
inline spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> lg = [] {
    auto l = std::make_shared<spdlog::logger>("bsf", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    l->set_level(log_level_from_env());
    return l;
  }();
  return *lg;
}

}  // namespace bsf
