#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>

namespace ee {

// Calendar date at day granularity. Internally a count of days since the
// Unix epoch, so ordering and day arithmetic are plain integer operations.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::sys_days d) : days_(d.time_since_epoch().count()) {}

    static Date from_ymd(int year, unsigned month, unsigned day);

    // Parses "YYYY-MM-DD". Throws std::invalid_argument on malformed or
    // non-existent dates (month-granularity inputs are rejected).
    static Date parse(const std::string& iso);
    static std::optional<Date> try_parse(const std::string& iso);

    std::string to_string() const;

    int days_since_epoch() const { return days_; }
    Date plus_days(int n) const;
    int operator-(const Date& other) const { return days_ - other.days_; }

    auto operator<=>(const Date&) const = default;

private:
    int days_ = 0;
};

inline Date Date::from_ymd(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    return Date(sys_days{ymd});
}

inline Date Date::plus_days(int n) const {
    Date d;
    d.days_ = days_ + n;
    return d;
}

}  // namespace ee
