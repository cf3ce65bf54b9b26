#include "dockerdoctor/dockerfile.hpp"

#include "dockerdoctor/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <utility>

namespace dockerdoctor {

namespace {

constexpr std::array<std::pair<Keyword, std::string_view>, 18> kKeywords{{
    {Keyword::From, "FROM"},
    {Keyword::Run, "RUN"},
    {Keyword::Copy, "COPY"},
    {Keyword::Add, "ADD"},
    {Keyword::Workdir, "WORKDIR"},
    {Keyword::Maintainer, "MAINTAINER"},
    {Keyword::Label, "LABEL"},
    {Keyword::Shell, "SHELL"},
    {Keyword::Env, "ENV"},
    {Keyword::Arg, "ARG"},
    {Keyword::Cmd, "CMD"},
    {Keyword::Entrypoint, "ENTRYPOINT"},
    {Keyword::Expose, "EXPOSE"},
    {Keyword::User, "USER"},
    {Keyword::Volume, "VOLUME"},
    {Keyword::Onbuild, "ONBUILD"},
    {Keyword::Healthcheck, "HEALTHCHECK"},
    {Keyword::Stopsignal, "STOPSIGNAL"},
}};

bool is_blank(char c) { return c == ' ' || c == '\t'; }

bool is_space(char c) { return is_blank(c) || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

struct PhysicalLine {
    std::string_view content; // without terminator
    std::string_view ending;  // "\n", "\r\n" or ""
    std::size_t offset = 0;
};

std::vector<PhysicalLine> split_lines(std::string_view text)
{
    std::vector<PhysicalLine> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        PhysicalLine line;
        line.offset = pos;
        if (nl == std::string_view::npos) {
            line.content = text.substr(pos);
            pos = text.size();
        } else {
            std::size_t end = nl;
            std::size_t term = 1;
            if (end > pos && text[end - 1] == '\r') {
                --end;
                term = 2;
            }
            line.content = text.substr(pos, end - pos);
            line.ending = text.substr(end, term);
            pos = nl + 1;
        }
        lines.push_back(line);
    }
    return lines;
}

bool is_trivia_line(std::string_view content)
{
    auto t = trim(content);
    return t.empty() || t.front() == '#';
}

bool ends_with_escape(std::string_view content, char escape)
{
    while (!content.empty() && is_blank(content.back()))
        content.remove_suffix(1);
    return !content.empty() && content.back() == escape;
}

// Heredoc terminators opened on a line, in order.
std::vector<std::pair<std::string, bool>> heredoc_markers(std::string_view line)
{
    static const std::regex re(R"(<<(-?)\s*["']?([A-Za-z_][A-Za-z0-9_]*)["']?)");
    std::vector<std::pair<std::string, bool>> out;
    std::string s(line);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it)
        out.emplace_back((*it)[2].str(), (*it)[1].length() > 0);
    return out;
}

std::string keyword_case_like(std::string_view name, std::string_view original)
{
    bool lower = !original.empty() && std::none_of(original.begin(), original.end(), [](unsigned char c) {
        return std::isupper(c);
    });
    std::string out(name);
    if (lower)
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

} // namespace

std::string_view keyword_name(Keyword kw)
{
    for (const auto& [k, name] : kKeywords)
        if (k == kw)
            return name;
    return "OTHER";
}

Keyword keyword_from(std::string_view word)
{
    auto up = upper(word);
    for (const auto& [k, name] : kKeywords)
        if (name == up)
            return k;
    return Keyword::Other;
}

std::string Instruction::text() const
{
    if (!edited)
        return original_text;
    return indent + keyword_text + (separator.empty() ? std::string(" ") : separator) + raw_args + line_ending;
}

std::string Instruction::folded_args(char escape) const
{
    std::string out;
    std::string_view rest = raw_args;
    bool first = true;
    bool continued = true;
    while (continued) {
        auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        bool last = nl == std::string_view::npos;
        if (!first && is_trivia_line(line) && !last) {
            rest.remove_prefix(nl + 1);
            continue;
        }
        if (!last && ends_with_escape(line, escape)) {
            while (!line.empty() && is_blank(line.back()))
                line.remove_suffix(1);
            line.remove_suffix(1);
            out += line;
            rest.remove_prefix(nl + 1);
        } else {
            out += line;
            if (!last)
                out += rest.substr(line.size());
            continued = false;
        }
        first = false;
    }
    return std::string(trim(out));
}

std::string Instruction::normalized(char escape) const
{
    std::string out = keyword == Keyword::Other ? upper(keyword_text) : std::string(keyword_name(keyword));
    auto args = folded_args(escape);
    if (!args.empty())
        out += ' ';
    bool in_space = false;
    for (char c : args) {
        if (is_space(c)) {
            in_space = true;
            continue;
        }
        if (in_space)
            out += ' ';
        in_space = false;
        out += c;
    }
    return out;
}

void Instruction::set_args(std::string args)
{
    raw_args = std::move(args);
    edited = true;
}

void Instruction::set_keyword(Keyword kw)
{
    keyword = kw;
    keyword_text = keyword_case_like(keyword_name(kw), keyword_text);
    edited = true;
}

std::vector<std::pair<std::size_t, std::string>> DockerfileAst::comments_and_blanks() const
{
    std::vector<std::pair<std::size_t, std::string>> out;
    for (std::size_t i = 0; i < segments_.size(); ++i)
        if (!segments_[i].is_instruction)
            out.emplace_back(i, segments_[i].trivia);
    return out;
}

int DockerfileAst::stage_count() const
{
    return static_cast<int>(std::count_if(instructions_.begin(), instructions_.end(),
                                          [](const Instruction& i) { return i.keyword == Keyword::From; }));
}

void DockerfileAst::insert_before(std::size_t before, Keyword kw, std::string args)
{
    Instruction ins;
    ins.keyword = kw;
    ins.keyword_text = std::string(keyword_name(kw));
    ins.separator = " ";
    ins.raw_args = std::move(args);
    ins.line_ending = "\n";
    ins.edited = true;
    if (before < instructions_.size()) {
        const auto& next = instructions_[before];
        ins.indent = next.indent;
        ins.keyword_text = keyword_case_like(keyword_name(kw), next.keyword_text);
        ins.stage_index = next.stage_index;
        ins.span.start_line = next.span.start_line;
        ins.span.end_line = next.span.start_line;
        if (next.line_ending == "\r\n")
            ins.line_ending = "\r\n";
    } else if (!instructions_.empty()) {
        auto& last = instructions_.back();
        ins.stage_index = last.stage_index;
        if (last.line_ending.empty()) {
            last.line_ending = "\n";
            last.edited = true;
            ins.line_ending.clear();
        }
    }

    std::size_t seg_pos = segments_.size();
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        auto& seg = segments_[i];
        if (!seg.is_instruction)
            continue;
        if (seg.instruction == before && seg_pos == segments_.size())
            seg_pos = i;
        if (seg.instruction >= before)
            ++seg.instruction;
    }
    instructions_.insert(instructions_.begin() + static_cast<std::ptrdiff_t>(before), std::move(ins));
    Segment seg;
    seg.is_instruction = true;
    seg.instruction = before;
    seg.start_line = instructions_[before].span.start_line;
    segments_.insert(segments_.begin() + static_cast<std::ptrdiff_t>(seg_pos), seg);
}

DockerfileAst parse_dockerfile(std::string_view text)
{
    static const std::regex directive_re(R"(^#\s*([A-Za-z]+)\s*=\s*(.*?)\s*$)");
    static const std::regex word_re(R"(^[A-Za-z][A-Za-z0-9_-]*$)");

    DockerfileAst ast;
    ast.original_ = std::string(text);
    auto lines = split_lines(text);

    bool directive_phase = true;
    int stage = -1;
    std::size_t i = 0;

    auto push_trivia = [&](std::size_t line_index) {
        const auto& line = lines[line_index];
        std::string chunk = std::string(line.content) + std::string(line.ending);
        if (!ast.segments_.empty() && !ast.segments_.back().is_instruction) {
            ast.segments_.back().trivia += chunk;
        } else {
            DockerfileAst::Segment seg;
            seg.trivia = std::move(chunk);
            seg.start_line = static_cast<int>(line_index) + 1;
            ast.segments_.push_back(std::move(seg));
        }
    };

    while (i < lines.size()) {
        const auto& line = lines[i];
        if (directive_phase) {
            std::smatch m;
            std::string content(line.content);
            if (std::regex_match(content, m, directive_re)) {
                auto name = upper(m[1].str());
                if (name == "ESCAPE") {
                    auto value = m[2].str();
                    if (value == "`" || value == "\\")
                        ast.escape_ = value[0];
                    push_trivia(i++);
                    continue;
                }
                if (name == "SYNTAX" || name == "CHECK") {
                    push_trivia(i++);
                    continue;
                }
            }
            directive_phase = false;
        }

        if (is_trivia_line(line.content)) {
            push_trivia(i++);
            continue;
        }

        Instruction ins;
        std::string_view first = line.content;
        std::size_t p = 0;
        while (p < first.size() && is_blank(first[p]))
            ++p;
        ins.indent = std::string(first.substr(0, p));
        std::size_t kw_end = p;
        while (kw_end < first.size() && !is_blank(first[kw_end]))
            ++kw_end;
        std::string_view kw_word = first.substr(p, kw_end - p);
        // A keyword glued to a continuation ("RUN\") keeps the escape in the args.
        if (kw_word.size() > 1 && kw_word.back() == ast.escape_ && kw_end == first.size()) {
            kw_word.remove_suffix(1);
            kw_end -= 1;
        }
        std::size_t args_begin = kw_end;
        while (args_begin < first.size() && is_blank(first[args_begin]))
            ++args_begin;
        ins.keyword_text = std::string(kw_word);
        ins.separator = std::string(first.substr(kw_end, args_begin - kw_end));
        ins.keyword = keyword_from(kw_word);
        if (ins.keyword == Keyword::Other) {
            std::string w(kw_word);
            if (!std::regex_match(w, word_re)) {
                ins.malformed = true;
                ast.errors_.push_back({static_cast<int>(i) + 1, "MalformedInstruction: no recognizable keyword"});
            }
        }

        std::size_t last = i;
        bool open = ends_with_escape(line.content, ast.escape_);
        auto markers = (ins.keyword == Keyword::Run || ins.keyword == Keyword::Copy || ins.keyword == Keyword::Add)
                           ? heredoc_markers(first.substr(args_begin))
                           : std::vector<std::pair<std::string, bool>>{};
        while (open && last + 1 < lines.size()) {
            ++last;
            const auto& next = lines[last];
            if (is_trivia_line(next.content))
                continue;
            open = ends_with_escape(next.content, ast.escape_);
        }
        if (!markers.empty()) {
            ins.heredoc = true;
            ins.keyword = Keyword::Other;
            for (const auto& [word, strip_tabs] : markers) {
                while (last + 1 < lines.size()) {
                    ++last;
                    std::string_view body = lines[last].content;
                    if (strip_tabs)
                        while (!body.empty() && body.front() == '\t')
                            body.remove_prefix(1);
                    if (body == word)
                        break;
                }
            }
        }

        std::size_t begin = line.offset;
        std::size_t end = lines[last].offset + lines[last].content.size();
        std::size_t args_off = line.offset + args_begin;
        ins.raw_args = std::string(text.substr(args_off, end - args_off));
        ins.line_ending = std::string(lines[last].ending);
        ins.span.start_line = static_cast<int>(i) + 1;
        ins.span.end_line = static_cast<int>(last) + 1;
        ins.span.byte_offset = begin;
        ins.span.byte_len = end + ins.line_ending.size() - begin;
        ins.original_text = std::string(text.substr(begin, ins.span.byte_len));
        if (ins.keyword == Keyword::From)
            ++stage;
        ins.stage_index = stage;

        DockerfileAst::Segment seg;
        seg.is_instruction = true;
        seg.instruction = ast.instructions_.size();
        seg.start_line = ins.span.start_line;
        ast.segments_.push_back(seg);
        ast.instructions_.push_back(std::move(ins));
        i = last + 1;
    }
    return ast;
}

std::string print_dockerfile(const DockerfileAst& ast)
{
    std::string out;
    out.reserve(ast.original_text().size() + 64);
    for (const auto& seg : ast.segments()) {
        if (seg.is_instruction)
            out += ast.instructions()[seg.instruction].text();
        else
            out += seg.trivia;
    }
    return out;
}

ImageRef parse_image_ref(std::string_view raw)
{
    ImageRef ref;
    std::vector<std::pair<std::size_t, std::string_view>> tokens;
    std::size_t p = 0;
    while (p < raw.size()) {
        while (p < raw.size() && is_space(raw[p]))
            ++p;
        std::size_t b = p;
        while (p < raw.size() && !is_space(raw[p]))
            ++p;
        if (p > b) {
            auto tok = raw.substr(b, p - b);
            if (tok.size() == 1 && tok[0] == '\\')
                continue; // stray continuation escape
            tokens.emplace_back(b, tok);
        }
    }

    std::size_t t = 0;
    while (t < tokens.size() && tokens[t].second.starts_with("--")) {
        ref.flags.emplace_back(tokens[t].second);
        ++t;
    }
    if (t >= tokens.size())
        throw EmptyImageName();

    auto [image_offset, image] = tokens[t];
    ref.image_offset = image_offset;
    ref.image_len = image.size();
    if (t + 2 < tokens.size() && upper(tokens[t + 1].second) == "AS")
        ref.alias = std::string(tokens[t + 2].second);

    std::string_view rest = image;
    if (auto at = rest.find('@'); at != std::string_view::npos) {
        ref.digest = std::string(rest.substr(at + 1));
        rest = rest.substr(0, at);
    }
    auto slash = rest.rfind('/');
    auto colon = rest.rfind(':');
    if (colon != std::string_view::npos && (slash == std::string_view::npos || colon > slash)) {
        ref.tag = std::string(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
    }
    ref.name = std::string(rest);
    if (ref.name.empty())
        throw EmptyImageName();
    return ref;
}

bool is_valid_utf8(std::string_view text)
{
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > n)
            return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(text[i + k]);
            if ((cc & 0xC0) != 0x80)
                return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF
            || (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += len;
    }
    return true;
}

std::pair<std::vector<std::string>, std::size_t> split_leading_flags(std::string_view args)
{
    std::vector<std::string> flags;
    std::size_t p = 0;
    for (;;) {
        std::size_t q = p;
        while (q < args.size() && is_space(args[q]))
            ++q;
        if (args.substr(q).starts_with("--")) {
            std::size_t e = q;
            while (e < args.size() && !is_space(args[e]))
                ++e;
            flags.emplace_back(args.substr(q, e - q));
            p = e;
            continue;
        }
        return {flags, q};
    }
}

} // namespace dockerdoctor
