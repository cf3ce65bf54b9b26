#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dockerdoctor {

enum class Connector { AndIf, OrIf, Semicolon, Pipe, Newline };

std::string_view connector_name(Connector c);

struct NestedBody {
    std::string text;
    std::size_t offset = 0; // position of text inside the RUN arguments
};

/// One shell word. `text` has quotes removed and backslash escapes resolved;
/// `raw` is the exact source slice [begin, end) of the RUN arguments.
struct Word {
    std::string text;
    std::string raw;
    std::size_t begin = 0;
    std::size_t end = 0;
    bool has_expansion = false;
    bool quoted = false;
    /// Bodies of $(...), `...` and (...) found inside the word, kept unparsed.
    std::vector<NestedBody> nested;
};

struct SimpleCommand {
    std::vector<Word> argv;
    std::string raw;
    std::size_t begin = 0;
    std::size_t end = 0;
    /// False for commands rebuilt from an exec-form array; their offsets do
    /// not point into the source.
    bool exact_offsets = true;

    /// Index of the command name: skips NAME=value prefixes and shell
    /// reserved words (if, then, do, !, ...). argv.size() when there is none.
    std::size_t head_index() const;
    const Word* head() const;
};

struct ConnectorToken {
    Connector kind = Connector::Semicolon;
    std::string raw; // everything between the two commands, whitespace included
};

struct CommandChain {
    std::vector<SimpleCommand> commands;
    std::vector<ConnectorToken> connectors;
    std::string leading;
    std::string trailing;
    bool exec_form = false;
    bool unbalanced_quote = false;

    std::string reassemble() const;

    /// True if a pipe connects two top-level commands.
    bool has_pipe() const;
};

/// Splits a RUN payload (shell or JSON exec form) into simple commands.
/// `continuation` is the Dockerfile escape character; escaped newlines and
/// comment lines inside a continuation act as whitespace.
CommandChain parse_run_payload(std::string_view raw_args, char continuation = '\\');

/// Pipe anywhere, including inside command substitutions and subshells, and
/// inside exec-form arguments read as a shell line.
bool has_pipe_anywhere(const CommandChain& chain, char continuation = '\\');

/// Every simple command of the chain plus those found in nested bodies.
std::vector<SimpleCommand> all_commands_deep(const CommandChain& chain, char continuation = '\\');

struct AptGetCall {
    std::size_t head = 0;
    std::optional<std::size_t> subcommand;
    std::string subcommand_name;
    std::vector<std::size_t> packages; // argv indices
    bool no_install_recommends = false;
};

/// Recognizes `apt-get <subcommand> ...` (env-assignment prefixes allowed).
std::optional<AptGetCall> analyze_apt_get(const SimpleCommand& cmd);

/// A package operand counts as pinned when it names a version ("pkg=1.0"),
/// a release ("pkg/focal") or a local .deb file.
bool apt_package_pinned(std::string_view word);

/// Package name part of an operand ("curl=7.68" -> "curl").
std::string apt_package_name(std::string_view word);

} // namespace dockerdoctor
