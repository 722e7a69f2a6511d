#include "voxmix/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>

namespace voxmix::log {

namespace {

std::atomic<Level> g_level{Level::Warn};

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = std::make_shared<spdlog::logger>("voxmix",
                                              std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::trace);
    return l;
  }();
  return *instance;
}

spdlog::level::level_enum to_spd(Level l) {
  switch (l) {
    case Level::Error:
      return spdlog::level::err;
    case Level::Warn:
      return spdlog::level::warn;
    case Level::Info:
      return spdlog::level::info;
    case Level::Debug:
      return spdlog::level::debug;
    case Level::Off:
      break;
  }
  return spdlog::level::off;
}

}  // namespace

void init_from_env() {
  const char* v = std::getenv("VOXMIX_LOG");
  if (v == nullptr) return;
  const std::string s(v);
  if (s == "off") set_level(Level::Off);
  else if (s == "error") set_level(Level::Error);
  else if (s == "warn") set_level(Level::Warn);
  else if (s == "info") set_level(Level::Info);
  else if (s == "debug") set_level(Level::Debug);
}

void set_level(Level l) { g_level.store(l); }
Level level() { return g_level.load(); }

void write(Level l, std::string_view message) {
  if (l == Level::Off || static_cast<int>(l) > static_cast<int>(g_level.load())) return;
  logger().log(to_spd(l), "{}", message);
}

void event(Level l, std::string_view name, std::initializer_list<Field> fields) {
  if (l == Level::Off || static_cast<int>(l) > static_cast<int>(g_level.load())) return;
  std::string line = "event=";
  line += name;
  for (const auto& [k, v] : fields) {
    line += ' ';
    line += k;
    line += '=';
    line += v;
  }
  write(l, line);
}

}  // namespace voxmix::log
