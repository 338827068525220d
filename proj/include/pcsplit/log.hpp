#pragma once

#include <sstream>
#include <string>

namespace pcsplit::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

// Parsed once from the PCSPLIT_LOG environment variable
// (one of "error", "info", "debug"; default "info").
Level level();

void write(Level lv, const std::string& msg);

inline void error(const std::string& msg) { write(Level::Error, msg); }
inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void debug(const std::string& msg) { write(Level::Debug, msg); }

}  // namespace pcsplit::log
