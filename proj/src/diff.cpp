#include "dockerdoctor/diff.hpp"

#include <algorithm>
#include <cstdint>

namespace dockerdoctor {

std::vector<std::string> split_keep_newlines(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto end = nl == std::string_view::npos ? text.size() : nl + 1;
        out.emplace_back(text.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

std::vector<Edit> diff_lines(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    std::vector<Edit> out;
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix])
        ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix
           && a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
        ++suffix;

    for (std::size_t i = 0; i < prefix; ++i)
        out.push_back({EditKind::Equal, i, i});

    const std::size_t n = a.size() - prefix - suffix;
    const std::size_t m = b.size() - prefix - suffix;
    // lcs[i][j] = LCS length of a[prefix+i..] and b[prefix+j..] within the middle
    std::vector<std::uint32_t> lcs((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return lcs[i * (m + 1) + j]; };
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = m; j-- > 0;)
            at(i, j) = a[prefix + i] == b[prefix + j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));

    std::size_t i = 0, j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && a[prefix + i] == b[prefix + j] && at(i, j) == at(i + 1, j + 1) + 1) {
            out.push_back({EditKind::Equal, prefix + i, prefix + j});
            ++i;
            ++j;
        } else if (i < n && (j >= m || at(i + 1, j) >= at(i, j + 1))) {
            out.push_back({EditKind::Delete, prefix + i, 0});
            ++i;
        } else {
            out.push_back({EditKind::Insert, 0, prefix + j});
            ++j;
        }
    }

    for (std::size_t k = 0; k < suffix; ++k)
        out.push_back({EditKind::Equal, a.size() - suffix + k, b.size() - suffix + k});
    return out;
}

namespace {

std::string range(std::size_t start, std::size_t len)
{
    // GNU diff: a single line prints only its number; an empty range names
    // the line before it.
    if (len == 1)
        return std::to_string(start + 1);
    if (len == 0)
        return std::to_string(start) + ",0";
    return std::to_string(start + 1) + "," + std::to_string(len);
}

void emit_line(std::string& out, char mark, const std::string& line)
{
    out += mark;
    out += line;
    if (line.empty() || line.back() != '\n')
        out += "\n\\ No newline at end of file\n";
}

} // namespace

std::string unified_diff(std::string_view before, std::string_view after, std::string_view old_label,
                         std::string_view new_label, int context)
{
    if (before == after)
        return {};
    auto a = split_keep_newlines(before);
    auto b = split_keep_newlines(after);
    auto edits = diff_lines(a, b);
    const auto ctx = static_cast<std::size_t>(std::max(context, 0));

    std::string out;
    out += "--- ";
    out += old_label;
    out += "\n+++ ";
    out += new_label;
    out += "\n";

    std::size_t k = 0;
    while (k < edits.size()) {
        if (edits[k].kind == EditKind::Equal) {
            ++k;
            continue;
        }
        // hunk covers [start, stop) of the edit script
        std::size_t start = k >= ctx ? k - ctx : 0;
        while (start < k && edits[start].kind != EditKind::Equal)
            ++start;
        std::size_t stop = k;
        for (;;) {
            while (stop < edits.size() && edits[stop].kind != EditKind::Equal)
                ++stop;
            std::size_t eq = stop;
            while (eq < edits.size() && edits[eq].kind == EditKind::Equal)
                ++eq;
            if (eq < edits.size() && eq - stop <= 2 * ctx) {
                stop = eq;
                continue;
            }
            stop = std::min(edits.size(), stop + ctx);
            break;
        }

        std::size_t old_start = 0, new_start = 0, old_len = 0, new_len = 0;
        bool have_old = false, have_new = false;
        // positions for empty ranges: count lines consumed before the hunk
        std::size_t old_before = 0, new_before = 0;
        for (std::size_t e = 0; e < start; ++e) {
            if (edits[e].kind != EditKind::Insert)
                ++old_before;
            if (edits[e].kind != EditKind::Delete)
                ++new_before;
        }
        std::string body;
        for (std::size_t e = start; e < stop; ++e) {
            const auto& ed = edits[e];
            switch (ed.kind) {
            case EditKind::Equal:
                if (!have_old) {
                    old_start = ed.old_index;
                    have_old = true;
                }
                if (!have_new) {
                    new_start = ed.new_index;
                    have_new = true;
                }
                ++old_len;
                ++new_len;
                emit_line(body, ' ', a[ed.old_index]);
                break;
            case EditKind::Delete:
                if (!have_old) {
                    old_start = ed.old_index;
                    have_old = true;
                }
                ++old_len;
                emit_line(body, '-', a[ed.old_index]);
                break;
            case EditKind::Insert:
                if (!have_new) {
                    new_start = ed.new_index;
                    have_new = true;
                }
                ++new_len;
                emit_line(body, '+', b[ed.new_index]);
                break;
            }
        }
        if (!have_old)
            old_start = old_before;
        if (!have_new)
            new_start = new_before;
        out += "@@ -" + range(old_start, old_len) + " +" + range(new_start, new_len) + " @@\n";
        out += body;
        k = stop;
    }
    return out;
}

} // namespace dockerdoctor
