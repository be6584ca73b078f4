#pragma once

#include <functional>
#include <string>

namespace dpsom {

using WarningSink = std::function<void(const std::string&)>;

/// Routes library warnings. The default sink (also restored by passing an
/// empty sink) writes to stderr.
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace dpsom
