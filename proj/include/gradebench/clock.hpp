#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

namespace gradebench {

/// Time source for record timestamps. The fixed variant makes full pipeline
/// runs byte-reproducible; wall-clock latency measurement is separate and
/// never goes through this interface.
class Clock {
public:
    virtual ~Clock() = default;
    /// Returns an ISO 8601 UTC instant, e.g. "2024-05-01T12:00:00Z".
    virtual std::string now_utc() = 0;
};

class SystemClock final : public Clock {
public:
    std::string now_utc() override;
};

/// Starts at a fixed instant and advances one second per query.
class FixedClock final : public Clock {
public:
    explicit FixedClock(std::int64_t start_unix_seconds = 1704067200);  // 2024-01-01T00:00:00Z
    std::string now_utc() override;

private:
    std::atomic<std::int64_t> next_;
};

std::string format_unix_utc(std::int64_t unix_seconds);

}  // namespace gradebench
