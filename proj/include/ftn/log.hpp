#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>

namespace ftn {

using LogSink = std::function<void(const std::string&)>;

inline LogSink& log_sink() {
  static LogSink sink = [](const std::string& msg) { std::clog << "ftn: " << msg << '\n'; };
  return sink;
}

inline void log_warning(const std::string& msg) {
  static std::mutex m;
  std::lock_guard lock(m);
  if (log_sink()) log_sink()(msg);
}

}  // namespace ftn
