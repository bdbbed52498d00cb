#include "gradebench/clock.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace gradebench {

std::string format_unix_utc(std::int64_t unix_seconds) {
    std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm_utc.tm_year + 1900,
                  tm_utc.tm_mon + 1, tm_utc.tm_mday, tm_utc.tm_hour, tm_utc.tm_min, tm_utc.tm_sec);
    return std::string(buf);
}

std::string SystemClock::now_utc() {
    auto now = std::chrono::system_clock::now();
    return format_unix_utc(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

FixedClock::FixedClock(std::int64_t start_unix_seconds) : next_(start_unix_seconds) {}

std::string FixedClock::now_utc() {
    return format_unix_utc(next_++);
}

}  // namespace gradebench
