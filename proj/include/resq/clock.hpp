#pragma once

#include <chrono>
#include <mutex>
#include <string>
#include <string_view>

namespace resq {

using Timestamp = std::chrono::time_point<std::chrono::system_clock, std::chrono::microseconds>;

// RFC3339 in UTC with microsecond precision, e.g. "2025-06-01T12:00:00.000000Z".
std::string format_rfc3339(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SS[.fraction](Z|+HH:MM|-HH:MM)". Throws
// std::invalid_argument on anything else.
Timestamp parse_rfc3339(std::string_view text);

class Clock {
  public:
    virtual ~Clock() = default;
    virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
  public:
    Timestamp now() const override;
};

// Synthetic clock for tests and replays; only moves when told to.
class ManualClock final : public Clock {
  public:
    explicit ManualClock(Timestamp start);

    Timestamp now() const override;
    void advance(std::chrono::microseconds delta);
    void set(Timestamp t);

  private:
    mutable std::mutex mutex_;
    Timestamp now_;
};

}  // namespace resq
