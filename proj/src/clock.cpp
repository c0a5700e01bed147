#include "resq/clock.hpp"

#include <cctype>
#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace resq {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's algorithm).
long long days_from_civil(long long y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

[[noreturn]] void bad(std::string_view text, const char* why) {
    throw std::invalid_argument("invalid RFC3339 timestamp '" + std::string(text) + "': " + why);
}

int read_digits(std::string_view text, std::size_t& pos, std::size_t count) {
    int value = 0;
    for (std::size_t i = 0; i < count; ++i, ++pos) {
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) {
            bad(text, "expected digit");
        }
        value = value * 10 + (text[pos] - '0');
    }
    return value;
}

void expect(std::string_view text, std::size_t& pos, char c) {
    if (pos >= text.size() || text[pos] != c) {
        bad(text, "unexpected character");
    }
    ++pos;
}

}  // namespace

std::string format_rfc3339(Timestamp t) {
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const auto tod = t - day;
    const auto h = duration_cast<hours>(tod);
    const auto m = duration_cast<minutes>(tod - h);
    const auto s = duration_cast<seconds>(tod - h - m);
    const auto us = duration_cast<microseconds>(tod - h - m - s);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                  static_cast<int>(m.count()), static_cast<int>(s.count()),
                  static_cast<long long>(us.count()));
    return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
    std::size_t pos = 0;
    const int year = read_digits(text, pos, 4);
    expect(text, pos, '-');
    const int month = read_digits(text, pos, 2);
    expect(text, pos, '-');
    const int day = read_digits(text, pos, 2);
    if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) {
        bad(text, "expected 'T'");
    }
    ++pos;
    const int hour = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int minute = read_digits(text, pos, 2);
    expect(text, pos, ':');
    const int second = read_digits(text, pos, 2);
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) || hour > 23 ||
        minute > 59 || second > 60) {
        bad(text, "field out of range");
    }

    long long micros = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        long long scale = 100000;
        std::size_t digits = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            micros += (text[pos] - '0') * scale;
            scale /= 10;
            ++pos;
            ++digits;
        }
        if (digits == 0) {
            bad(text, "empty fraction");
        }
    }

    long long offset_minutes = 0;
    if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
        ++pos;
    } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        const int sign = text[pos] == '+' ? 1 : -1;
        ++pos;
        const int oh = read_digits(text, pos, 2);
        expect(text, pos, ':');
        const int om = read_digits(text, pos, 2);
        if (oh > 23 || om > 59) {
            bad(text, "offset out of range");
        }
        offset_minutes = sign * (oh * 60 + om);
    } else {
        bad(text, "missing timezone designator");
    }
    if (pos != text.size()) {
        bad(text, "trailing characters");
    }

    const long long secs = days_from_civil(year, static_cast<unsigned>(month),
                                           static_cast<unsigned>(day)) *
                               86400LL +
                           hour * 3600LL + minute * 60LL + second - offset_minutes * 60LL;
    return Timestamp{std::chrono::microseconds{secs * 1000000LL + micros}};
}

Timestamp SystemClock::now() const {
    return std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
}

ManualClock::ManualClock(Timestamp start) : now_(start) {}

Timestamp ManualClock::now() const {
    std::lock_guard lock(mutex_);
    return now_;
}

void ManualClock::advance(std::chrono::microseconds delta) {
    std::lock_guard lock(mutex_);
    now_ += delta;
}

void ManualClock::set(Timestamp t) {
    std::lock_guard lock(mutex_);
    now_ = t;
}

}  // namespace resq
