#include "dockerdoctor/dates.hpp"

#include "dockerdoctor/error.hpp"

#include <charconv>
#include <cstdio>

namespace dockerdoctor {

namespace {

int digits(std::string_view text, std::size_t pos, std::size_t len)
{
    if (pos + len > text.size())
        throw DomainError("truncated date '" + std::string(text) + "'");
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc{} || ptr != text.data() + pos + len)
        throw DomainError("malformed date '" + std::string(text) + "'");
    return value;
}

void expect(std::string_view text, std::size_t pos, char c)
{
    if (pos >= text.size() || text[pos] != c)
        throw DomainError("malformed date '" + std::string(text) + "'");
}

} // namespace

Date parse_date(std::string_view text)
{
    if (text.size() != 10)
        throw DomainError("malformed date '" + std::string(text) + "'");
    int y = digits(text, 0, 4);
    expect(text, 4, '-');
    int m = digits(text, 5, 2);
    expect(text, 7, '-');
    int d = digits(text, 8, 2);
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok())
        throw DomainError("invalid calendar date '" + std::string(text) + "'");
    return Date{ymd};
}

Timestamp parse_timestamp(std::string_view text)
{
    auto day = parse_date(text.substr(0, std::min<std::size_t>(10, text.size())));
    Timestamp ts{day};
    if (text.size() == 10)
        return ts;
    if (text[10] != 'T' && text[10] != ' ')
        throw DomainError("malformed timestamp '" + std::string(text) + "'");
    int hh = digits(text, 11, 2);
    expect(text, 13, ':');
    int mm = digits(text, 14, 2);
    expect(text, 16, ':');
    int ss = digits(text, 17, 2);
    if (hh > 23 || mm > 59 || ss > 60)
        throw DomainError("invalid time in '" + std::string(text) + "'");
    ts += std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss};
    std::size_t p = 19;
    if (p < text.size() && text[p] == '.') {
        ++p;
        while (p < text.size() && text[p] >= '0' && text[p] <= '9')
            ++p;
    }
    if (p == text.size())
        return ts;
    if (text[p] == 'Z' && p + 1 == text.size())
        return ts;
    if ((text[p] == '+' || text[p] == '-') && p + 6 == text.size()) {
        int oh = digits(text, p + 1, 2);
        expect(text, p + 3, ':');
        int om = digits(text, p + 4, 2);
        auto offset = std::chrono::hours{oh} + std::chrono::minutes{om};
        return text[p] == '+' ? ts - offset : ts + offset;
    }
    throw DomainError("malformed timezone in '" + std::string(text) + "'");
}

std::string format_date(Date date)
{
    std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(Timestamp ts)
{
    auto day = day_of(ts);
    std::chrono::hh_mm_ss hms{ts - day};
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                  static_cast<int>(hms.minutes().count()), static_cast<int>(hms.seconds().count()));
    return format_date(day) + buf;
}

std::string quarter_of(Timestamp ts)
{
    std::chrono::year_month_day ymd{day_of(ts)};
    unsigned q = (static_cast<unsigned>(ymd.month()) - 1) / 3 + 1;
    return std::to_string(static_cast<int>(ymd.year())) + "-Q" + std::to_string(q);
}

} // namespace dockerdoctor
