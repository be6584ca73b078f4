#include "dpsom/log.hpp"

#include <iostream>
#include <mutex>

namespace dpsom {
namespace {

std::mutex sink_mutex;

void to_stderr(const std::string& m) { std::cerr << "warning: " << m << '\n'; }

WarningSink& sink() {
  static WarningSink s = to_stderr;
  return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex);
  sink() = s ? std::move(s) : WarningSink(to_stderr);
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex);
  sink()(message);
}

}  // namespace dpsom
