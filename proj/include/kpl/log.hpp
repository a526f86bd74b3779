#pragma once

#include <functional>
#include <string>

namespace kpl {

/// Non-fatal diagnostics (clamped statistics, capped iterations, ...). The
/// default handler writes "warning: <msg>" to stderr.
using WarningHandler = std::function<void(const std::string&)>;

void set_warning_handler(WarningHandler handler);
void warn(const std::string& msg);

}  // namespace kpl
