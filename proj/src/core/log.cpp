#include "invlab/core/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace invlab::log {

namespace {

Level initial_level() {
  const char* env = std::getenv("INVLAB_LOG");
  if (env == nullptr) return Level::info;
  const std::string v(env);
  if (v == "debug") return Level::debug;
  if (v == "warn") return Level::warn;
  if (v == "error") return Level::error;
  if (v == "off") return Level::off;
  return Level::info;
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

const char* tag(Level level) {
  switch (level) {
    case Level::debug: return "D";
    case Level::info: return "I";
    case Level::warn: return "W";
    case Level::error: return "E";
    case Level::off: break;
  }
  return "?";
}

}  // namespace

void set_level(Level level) { current().store(level); }
Level level() { return current().load(); }

void write(Level lvl, std::string_view message) {
  if (lvl < current().load()) return;
  std::lock_guard lock(sink_mutex());
  std::cerr << "[invlab " << tag(lvl) << "] " << message << '\n';
}

}  // namespace invlab::log
