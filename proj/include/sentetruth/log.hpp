#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace sentetruth::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

using Sink = std::function<void(Level, const std::string&)>;

namespace detail {
struct State {
  std::mutex mutex;
  Level threshold = Level::warn;
  Sink sink;
};
inline State& state() {
  static State s;
  return s;
}
inline const char* name(Level level) {
  switch (level) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    case Level::off: return "off";
  }
  return "?";
}
}  // namespace detail

inline void set_level(Level level) {
  std::lock_guard lock(detail::state().mutex);
  detail::state().threshold = level;
}

// Replaces the default stderr sink. Pass an empty function to restore it.
inline void set_sink(Sink sink) {
  std::lock_guard lock(detail::state().mutex);
  detail::state().sink = std::move(sink);
}

inline void write(Level level, const std::string& message) {
  auto& s = detail::state();
  std::lock_guard lock(s.mutex);
  if (level < s.threshold) return;
  if (s.sink) {
    s.sink(level, message);
  } else {
    std::clog << "[sentetruth " << detail::name(level) << "] " << message << '\n';
  }
}

inline void debug(const std::string& m) { write(Level::debug, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void warn(const std::string& m) { write(Level::warn, m); }

}  // namespace sentetruth::log
