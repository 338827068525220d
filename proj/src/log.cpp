#include "pcsplit/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace pcsplit::log {

static Level parse_env() {
  const char* raw = std::getenv("PCSPLIT_LOG");
  if (raw == nullptr) return Level::Info;
  if (std::strcmp(raw, "error") == 0) return Level::Error;
  if (std::strcmp(raw, "debug") == 0) return Level::Debug;
  return Level::Info;
}

Level level() {
  static const Level lv = parse_env();
  return lv;
}

void write(Level lv, const std::string& msg) {
  if (lv > level()) return;
  const char* tag = lv == Level::Error ? "error" : (lv == Level::Debug ? "debug" : "info");
  std::fprintf(stderr, "pcsplit [%s] %s\n", tag, msg.c_str());
}

}  // namespace pcsplit::log
