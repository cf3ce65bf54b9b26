#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dockerdoctor {

/// Splits text into lines, each keeping its terminator. A final line without
/// a newline is kept as is.
std::vector<std::string> split_keep_newlines(std::string_view text);

enum class EditKind { Equal, Delete, Insert };

struct Edit {
    EditKind kind;
    std::size_t old_index; // valid for Equal and Delete
    std::size_t new_index; // valid for Equal and Insert
};

/// Line-level longest-common-subsequence edit script. Deletions are emitted
/// before insertions inside each changed region.
std::vector<Edit> diff_lines(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// GNU-style unified diff with `context` lines around each change; empty when
/// the texts are identical.
std::string unified_diff(std::string_view before, std::string_view after, std::string_view old_label,
                         std::string_view new_label, int context = 3);

} // namespace dockerdoctor
