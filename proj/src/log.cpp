#include "thermoformal/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace thermoformal {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("THERMOFORMAL_LOG");
        if (env == nullptr) return LogLevel::error;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        if (std::strcmp(env, "info") == 0) return LogLevel::info;
        return LogLevel::error;
    }();
    return level;
}

bool log_enabled(LogLevel level) {
    return static_cast<int>(level) <= static_cast<int>(log_level());
}

void log_msg(LogLevel level, const char* fmt, ...) {
    if (!log_enabled(level)) return;
    const char* tag = level == LogLevel::debug ? "debug" : (level == LogLevel::info ? "info" : "error");
    std::fprintf(stderr, "[thermoformal:%s] ", tag);
    std::va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

} // namespace thermoformal
