#pragma once

namespace thermoformal {

// Diagnostic logging to stderr, gated by the THERMOFORMAL_LOG environment
// variable ("error" < "info" < "debug"; default "error").
enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level();
bool log_enabled(LogLevel level);
void log_msg(LogLevel level, const char* fmt, ...);

} // namespace thermoformal
