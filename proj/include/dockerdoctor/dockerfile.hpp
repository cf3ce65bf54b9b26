#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dockerdoctor {

enum class Keyword {
    From,
    Run,
    Copy,
    Add,
    Workdir,
    Maintainer,
    Label,
    Shell,
    Env,
    Arg,
    Cmd,
    Entrypoint,
    Expose,
    User,
    Volume,
    Onbuild,
    Healthcheck,
    Stopsignal,
    Other,
};

std::string_view keyword_name(Keyword kw);
Keyword keyword_from(std::string_view word);

struct SourceSpan {
    int start_line = 0;        // 1-based
    int end_line = 0;          // 1-based, inclusive
    std::size_t byte_offset = 0;
    std::size_t byte_len = 0;
};

/// One Dockerfile instruction. The physical text is
///   indent + keyword_text + separator + raw_args + line_ending
/// where raw_args keeps continuation lines verbatim.
struct Instruction {
    Keyword keyword = Keyword::Other;
    std::string indent;
    std::string keyword_text;
    std::string separator;
    std::string raw_args;
    std::string line_ending;
    SourceSpan span;
    int stage_index = -1;
    bool edited = false;
    bool malformed = false;
    bool heredoc = false;

    /// Original bytes; empty for instructions created by an edit.
    std::string original_text;

    std::string text() const;

    /// Arguments with continuations folded and in-continuation comment lines
    /// dropped, trimmed on both ends.
    std::string folded_args(char escape = '\\') const;

    /// Whitespace-collapsed "KEYWORD args" form used for identities.
    std::string normalized(char escape = '\\') const;

    void set_args(std::string args);
    void set_keyword(Keyword kw);
};

struct ParseError {
    int line = 0;
    std::string message;
};

/// Lossless instruction-level view of a Dockerfile. Segments alternate between
/// trivia (comments, blank lines, parser directives) and instructions; printing
/// concatenates them.
class DockerfileAst {
public:
    struct Segment {
        bool is_instruction = false;
        std::size_t instruction = 0; // index into instructions() when is_instruction
        std::string trivia;          // verbatim text otherwise
        int start_line = 0;
    };

    const std::vector<Instruction>& instructions() const { return instructions_; }
    std::vector<Instruction>& instructions() { return instructions_; }
    const std::vector<Segment>& segments() const { return segments_; }
    const std::vector<ParseError>& errors() const { return errors_; }
    const std::string& original_text() const { return original_; }
    char escape_char() const { return escape_; }

    /// Trivia text keyed by segment position.
    std::vector<std::pair<std::size_t, std::string>> comments_and_blanks() const;

    int stage_count() const;

    /// Inserts a new instruction before instruction `before` (or at the end when
    /// before == instructions().size()). The new instruction takes the indent
    /// and stage of its successor. Spans of later instructions are not updated;
    /// re-parse the printed text to get fresh spans.
    void insert_before(std::size_t before, Keyword kw, std::string args);

private:
    friend DockerfileAst parse_dockerfile(std::string_view text);

    std::vector<Instruction> instructions_;
    std::vector<Segment> segments_;
    std::vector<ParseError> errors_;
    std::string original_;
    char escape_ = '\\';
};

/// Never throws; malformed lines are collected in errors().
DockerfileAst parse_dockerfile(std::string_view text);

std::string print_dockerfile(const DockerfileAst& ast);

struct ImageRef {
    std::string name;
    std::optional<std::string> tag;
    std::optional<std::string> digest;
    std::optional<std::string> alias;
    std::vector<std::string> flags; // e.g. "--platform=linux/amd64"

    /// Offsets of the image token inside the FROM arguments it was parsed from.
    std::size_t image_offset = 0;
    std::size_t image_len = 0;

    bool pinned() const { return tag.has_value() || digest.has_value(); }
};

/// Parses FROM arguments: [--flag=value...] name[:tag][@digest] [AS alias].
/// Throws EmptyImageName.
ImageRef parse_image_ref(std::string_view raw);

/// Byte-level UTF-8 validation.
bool is_valid_utf8(std::string_view text);

/// Splits leading "--flag=value" options off RUN/ADD/COPY arguments. Returns the
/// flags and the offset where the payload starts.
std::pair<std::vector<std::string>, std::size_t> split_leading_flags(std::string_view args);

} // namespace dockerdoctor
