#include "kpl/log.hpp"

#include <iostream>
#include <mutex>

namespace kpl {

namespace {
std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}
WarningHandler& handler() {
  static WarningHandler h;
  return h;
}
}  // namespace

void set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  handler() = std::move(h);
}

void warn(const std::string& msg) {
  std::lock_guard lock(handler_mutex());
  if (handler()) {
    handler()(msg);
  } else {
    std::cerr << "warning: " << msg << '\n';
  }
}

}  // namespace kpl
