#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>

namespace voxmix::log {

enum class Level { Off, Error, Warn, Info, Debug };

/// Reads VOXMIX_LOG (off|error|warn|info|debug, default warn).
void init_from_env();
void set_level(Level level);
Level level();

void write(Level level, std::string_view message);

inline void error(std::string_view m) { write(Level::Error, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void debug(std::string_view m) { write(Level::Debug, m); }

using Field = std::pair<std::string_view, std::string>;

/// One structured line: "event=<name> key=value ...".
void event(Level level, std::string_view name, std::initializer_list<Field> fields);

}  // namespace voxmix::log
