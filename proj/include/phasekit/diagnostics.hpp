#pragma once

#include <functional>
#include <string>
#include <vector>

namespace phasekit {

/// Non-fatal numerical condition: truncation leakage, regularization cutoffs,
/// clipped eigenvalues. Never hidden, never an exception.
struct Warning {
  std::string code;
  std::string message;
  double magnitude = 0.0;
};

using WarningHandler = std::function<void(const Warning&)>;

/// Installs a handler and returns the previous one. The default handler
/// prints to stderr.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& code, const std::string& message, double magnitude);

/// Collects warnings for the lifetime of the object, restoring the previous
/// handler on destruction.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<Warning>& warnings() const { return warnings_; }
  bool contains(const std::string& code) const;

 private:
  std::vector<Warning> warnings_;
  WarningHandler previous_;
};

}  // namespace phasekit
