#include "phasekit/diagnostics.hpp"

#include <cstdio>
#include <mutex>

namespace phasekit {
namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& current_handler() {
  static WarningHandler h = [](const Warning& w) {
    std::fprintf(stderr, "phasekit: warning [%s] %s (%.3g)\n", w.code.c_str(), w.message.c_str(),
                 w.magnitude);
  };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard<std::mutex> lock(handler_mutex());
  WarningHandler previous = std::move(current_handler());
  current_handler() = std::move(handler);
  return previous;
}

void warn(const std::string& code, const std::string& message, double magnitude) {
  std::lock_guard<std::mutex> lock(handler_mutex());
  if (current_handler()) current_handler()(Warning{code, message, magnitude});
}

WarningCapture::WarningCapture() {
  previous_ = set_warning_handler([this](const Warning& w) { warnings_.push_back(w); });
}

WarningCapture::~WarningCapture() { set_warning_handler(std::move(previous_)); }

bool WarningCapture::contains(const std::string& code) const {
  for (const auto& w : warnings_)
    if (w.code == code) return true;
  return false;
}

}  // namespace phasekit
