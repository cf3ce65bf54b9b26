#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace dockerdoctor {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DD". Throws DomainError on malformed or impossible dates.
Date parse_date(std::string_view text);

/// Parses an ISO-8601 timestamp: "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with an
/// optional fractional part and a "Z" or "+hh:mm"/"-hh:mm" suffix. The result is UTC.
Timestamp parse_timestamp(std::string_view text);

std::string format_date(Date date);
std::string format_timestamp(Timestamp ts);

inline Date day_of(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

/// Calendar quarter label, e.g. "2020-Q3".
std::string quarter_of(Timestamp ts);

} // namespace dockerdoctor
