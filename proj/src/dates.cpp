#include "ee/dates.hpp"

#include <cctype>
#include <charconv>

namespace ee {

namespace {

bool parse_fixed_uint(const std::string& s, size_t pos, size_t len, unsigned& out) {
    if (pos + len > s.size()) return false;
    unsigned v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + static_cast<unsigned>(s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

Date Date::parse(const std::string& iso) {
    auto d = try_parse(iso);
    if (!d) throw std::invalid_argument("invalid ISO-8601 date: '" + iso + "'");
    return *d;
}

std::optional<Date> Date::try_parse(const std::string& iso) {
    // Strict YYYY-MM-DD; anything shorter (e.g. month granularity) is rejected.
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    unsigned y = 0, m = 0, d = 0;
    if (!parse_fixed_uint(iso, 0, 4, y) || !parse_fixed_uint(iso, 5, 2, m) ||
        !parse_fixed_uint(iso, 8, 2, d)) {
        return std::nullopt;
    }
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{m},
                       std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date(sys_days{ymd});
}

std::string Date::to_string() const {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{days_}}};
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return std::string(buf);
}

}  // namespace ee
