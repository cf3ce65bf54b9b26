#include "dockerdoctor/shell.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>

namespace dockerdoctor {

namespace {

bool is_blank(char c) { return c == ' ' || c == '\t'; }

bool is_assignment(std::string_view w)
{
    auto eq = w.find('=');
    if (eq == std::string_view::npos || eq == 0)
        return false;
    if (!(std::isalpha(static_cast<unsigned char>(w[0])) || w[0] == '_'))
        return false;
    return std::all_of(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(eq),
                       [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

bool is_reserved(std::string_view w)
{
    static constexpr std::array<std::string_view, 14> kReserved{
        "if", "then", "else", "elif", "fi", "do", "done", "while", "until", "for", "case", "esac", "!", "{"};
    return std::find(kReserved.begin(), kReserved.end(), w) != kReserved.end();
}

struct Token {
    bool is_word = true;
    Word word;
    Connector op = Connector::Semicolon;
    std::size_t begin = 0;
    std::size_t end = 0;
};

class Lexer {
public:
    Lexer(std::string_view src, char cont) : s_(src), cont_(cont) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        while (i_ < s_.size()) {
            char c = s_[i_];
            if (is_blank(c) || c == '\r') {
                ++i_;
                continue;
            }
            if (skip_continuation())
                continue;
            if (c == '\n') {
                out.push_back(op(Connector::Newline, 1));
                continue;
            }
            if (c == '#') {
                // comment: the rest of the logical line is inert
                i_ = s_.size();
                break;
            }
            if (c == '&' && peek(1) == '&') {
                out.push_back(op(Connector::AndIf, 2));
                continue;
            }
            if (c == '|' && peek(1) == '|') {
                out.push_back(op(Connector::OrIf, 2));
                continue;
            }
            if (c == '|') {
                out.push_back(op(Connector::Pipe, peek(1) == '&' ? 2 : 1));
                continue;
            }
            if (c == ';') {
                out.push_back(op(Connector::Semicolon, peek(1) == ';' ? 2 : 1));
                continue;
            }
            if (c == '&' && peek(1) != '>') {
                out.push_back(op(Connector::Semicolon, 1));
                continue;
            }
            out.push_back(word());
        }
        return out;
    }

    bool unbalanced() const { return unbalanced_; }

private:
    char peek(std::size_t k) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }

    // cont + blanks + newline at position p; returns the index past the newline.
    std::size_t continuation_at(std::size_t p) const
    {
        if (p >= s_.size() || s_[p] != cont_)
            return 0;
        std::size_t q = p + 1;
        while (q < s_.size() && (is_blank(s_[q]) || s_[q] == '\r'))
            ++q;
        if (q < s_.size() && s_[q] == '\n')
            return q + 1;
        return 0;
    }

    bool skip_continuation()
    {
        auto next = continuation_at(i_);
        if (!next)
            return false;
        i_ = next;
        // comment and blank lines inside a continuation are dropped
        for (;;) {
            std::size_t q = i_;
            while (q < s_.size() && (is_blank(s_[q]) || s_[q] == '\r'))
                ++q;
            if (q < s_.size() && (s_[q] == '#' || s_[q] == '\n')) {
                auto nl = s_.find('\n', q);
                if (nl == std::string_view::npos)
                    break;
                i_ = nl + 1;
                continue;
            }
            break;
        }
        return true;
    }

    Token op(Connector kind, std::size_t len)
    {
        Token t;
        t.is_word = false;
        t.op = kind;
        t.begin = i_;
        t.end = i_ + len;
        i_ += len;
        return t;
    }

    // Scans a balanced region starting after `open` until the matching close.
    // Returns the index of the closing char or npos.
    std::size_t scan_balanced(std::size_t p, char open, char close)
    {
        int depth = 1;
        while (p < s_.size()) {
            char c = s_[p];
            if (c == '\\') {
                p += 2;
                continue;
            }
            if (c == '\'') {
                auto q = s_.find('\'', p + 1);
                if (q == std::string_view::npos)
                    return q;
                p = q + 1;
                continue;
            }
            if (c == '"') {
                auto q = scan_double(p + 1, nullptr);
                if (q == std::string_view::npos)
                    return q;
                p = q + 1;
                continue;
            }
            if (c == open && open != close)
                ++depth;
            else if (c == close && --depth == 0)
                return p;
            ++p;
        }
        return std::string_view::npos;
    }

    // Scans a double-quoted body from p; returns index of the closing quote.
    std::size_t scan_double(std::size_t p, Word* w)
    {
        while (p < s_.size()) {
            char c = s_[p];
            if (c == '"')
                return p;
            if (c == '\\' && p + 1 < s_.size()) {
                if (w)
                    w->text += s_[p + 1];
                p += 2;
                continue;
            }
            if (c == '$' && p + 1 < s_.size() && s_[p + 1] == '(') {
                auto q = scan_balanced(p + 2, '(', ')');
                if (q == std::string_view::npos)
                    return q;
                if (w) {
                    w->has_expansion = true;
                    w->nested.push_back({std::string(s_.substr(p + 2, q - p - 2)), p + 2});
                    w->text += s_.substr(p, q + 1 - p);
                }
                p = q + 1;
                continue;
            }
            if (c == '`') {
                auto q = s_.find('`', p + 1);
                if (q == std::string_view::npos)
                    return q;
                if (w) {
                    w->has_expansion = true;
                    w->nested.push_back({std::string(s_.substr(p + 1, q - p - 1)), p + 1});
                    w->text += s_.substr(p, q + 1 - p);
                }
                p = q + 1;
                continue;
            }
            if (w) {
                if (c == '$')
                    w->has_expansion = true;
                w->text += c;
            }
            ++p;
        }
        return std::string_view::npos;
    }

    Token word()
    {
        Token t;
        Word& w = t.word;
        w.begin = i_;
        bool at_start = true;
        while (i_ < s_.size()) {
            char c = s_[i_];
            if (continuation_at(i_))
                break;
            if (is_blank(c) || c == '\n' || c == '\r' || c == ';')
                break;
            if (c == '|')
                break;
            if (c == '&' && peek(1) != '>')
                break;
            if (c == '(' && at_start) {
                auto q = scan_balanced(i_ + 1, '(', ')');
                if (q == std::string_view::npos)
                    return fail(t);
                w.nested.push_back({std::string(s_.substr(i_ + 1, q - i_ - 1)), i_ + 1});
                w.text += s_.substr(i_, q + 1 - i_);
                i_ = q + 1;
                at_start = false;
                continue;
            }
            at_start = false;
            if (c == '\'') {
                auto q = s_.find('\'', i_ + 1);
                if (q == std::string_view::npos)
                    return fail(t);
                w.quoted = true;
                w.text += s_.substr(i_ + 1, q - i_ - 1);
                i_ = q + 1;
                continue;
            }
            if (c == '"') {
                w.quoted = true;
                auto q = scan_double(i_ + 1, &w);
                if (q == std::string_view::npos)
                    return fail(t);
                i_ = q + 1;
                continue;
            }
            if (c == '\\' && i_ + 1 < s_.size()) {
                w.text += s_[i_ + 1];
                i_ += 2;
                continue;
            }
            if (c == '$' && peek(1) == '(') {
                auto q = scan_balanced(i_ + 2, '(', ')');
                if (q == std::string_view::npos)
                    return fail(t);
                w.has_expansion = true;
                w.nested.push_back({std::string(s_.substr(i_ + 2, q - i_ - 2)), i_ + 2});
                w.text += s_.substr(i_, q + 1 - i_);
                i_ = q + 1;
                continue;
            }
            if (c == '$' && peek(1) == '{') {
                auto q = s_.find('}', i_ + 2);
                if (q == std::string_view::npos)
                    return fail(t);
                w.has_expansion = true;
                w.text += s_.substr(i_, q + 1 - i_);
                i_ = q + 1;
                continue;
            }
            if (c == '`') {
                auto q = s_.find('`', i_ + 1);
                if (q == std::string_view::npos)
                    return fail(t);
                w.has_expansion = true;
                w.nested.push_back({std::string(s_.substr(i_ + 1, q - i_ - 1)), i_ + 1});
                w.text += s_.substr(i_, q + 1 - i_);
                i_ = q + 1;
                continue;
            }
            if ((c == '>' || c == '<') && peek(1) == '&') {
                w.text += s_.substr(i_, 2);
                i_ += 2;
                continue;
            }
            if (c == '$')
                w.has_expansion = true;
            w.text += c;
            ++i_;
        }
        w.end = i_;
        w.raw = std::string(s_.substr(w.begin, w.end - w.begin));
        t.begin = w.begin;
        t.end = w.end;
        return t;
    }

    Token fail(Token& t)
    {
        unbalanced_ = true;
        t.word.text += s_.substr(i_);
        t.word.has_expansion = t.word.has_expansion || s_.substr(i_).find('$') != std::string_view::npos;
        i_ = s_.size();
        t.word.end = i_;
        t.word.raw = std::string(s_.substr(t.word.begin));
        t.begin = t.word.begin;
        t.end = i_;
        return t;
    }

    std::string_view s_;
    char cont_;
    std::size_t i_ = 0;
    bool unbalanced_ = false;
};

std::string_view trim_view(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Folds escaped newlines so a multi-line exec-form array parses as JSON.
std::string fold_continuations(std::string_view s, char cont)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == cont) {
            std::size_t q = i + 1;
            while (q < s.size() && (is_blank(s[q]) || s[q] == '\r'))
                ++q;
            if (q < s.size() && s[q] == '\n') {
                i = q;
                continue;
            }
        }
        out += s[i];
    }
    return out;
}

std::optional<std::vector<std::string>> parse_exec_array(std::string_view raw, char cont)
{
    auto t = trim_view(raw);
    if (t.empty() || t.front() != '[')
        return std::nullopt;
    auto j = nlohmann::json::parse(fold_continuations(t, cont), nullptr, false);
    if (j.is_discarded() || !j.is_array())
        return std::nullopt;
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string())
            return std::nullopt;
        out.push_back(e.get<std::string>());
    }
    return out;
}

void shift(SimpleCommand& cmd, std::size_t base)
{
    cmd.begin += base;
    cmd.end += base;
    for (auto& w : cmd.argv) {
        w.begin += base;
        w.end += base;
        for (auto& n : w.nested)
            n.offset += base;
    }
}

void collect_deep(const CommandChain& chain, char cont, std::vector<SimpleCommand>& out, int depth)
{
    for (const auto& cmd : chain.commands) {
        out.push_back(cmd);
        if (depth > 16)
            continue;
        for (const auto& w : cmd.argv) {
            for (const auto& body : w.nested) {
                auto inner = parse_run_payload(body.text, cont);
                for (auto& c : inner.commands) {
                    if (cmd.exact_offsets)
                        shift(c, body.offset);
                    else
                        c.exact_offsets = false;
                }
                collect_deep(inner, cont, out, depth + 1);
            }
        }
    }
}

} // namespace

std::string_view connector_name(Connector c)
{
    switch (c) {
    case Connector::AndIf:
        return "and_if";
    case Connector::OrIf:
        return "or_if";
    case Connector::Semicolon:
        return "semicolon";
    case Connector::Pipe:
        return "pipe";
    case Connector::Newline:
        return "newline";
    }
    return "?";
}

std::size_t SimpleCommand::head_index() const
{
    std::size_t i = 0;
    while (i < argv.size() && (is_assignment(argv[i].raw) || is_reserved(argv[i].raw)))
        ++i;
    return i;
}

const Word* SimpleCommand::head() const
{
    auto i = head_index();
    return i < argv.size() ? &argv[i] : nullptr;
}

std::string CommandChain::reassemble() const
{
    std::string out = leading;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        out += commands[i].raw;
        if (i < connectors.size())
            out += connectors[i].raw;
    }
    return out + trailing;
}

bool CommandChain::has_pipe() const
{
    return std::any_of(connectors.begin(), connectors.end(),
                       [](const ConnectorToken& c) { return c.kind == Connector::Pipe; });
}

CommandChain parse_run_payload(std::string_view raw_args, char continuation)
{
    CommandChain chain;
    if (auto exec = parse_exec_array(raw_args, continuation)) {
        chain.exec_form = true;
        auto lead = raw_args.find('[');
        auto close = raw_args.rfind(']');
        SimpleCommand cmd;
        cmd.begin = lead;
        cmd.end = close + 1;
        cmd.raw = std::string(raw_args.substr(lead, cmd.end - lead));
        cmd.exact_offsets = false;
        for (auto& arg : *exec) {
            Word w;
            w.text = arg;
            w.raw = arg;
            w.begin = cmd.begin;
            w.end = cmd.end;
            w.has_expansion = arg.find('$') != std::string::npos;
            cmd.argv.push_back(std::move(w));
        }
        chain.leading = std::string(raw_args.substr(0, lead));
        chain.trailing = std::string(raw_args.substr(cmd.end));
        if (!cmd.argv.empty()) {
            chain.commands.push_back(std::move(cmd));
        } else {
            chain.leading = std::string(raw_args);
            chain.trailing.clear();
        }
        return chain;
    }

    Lexer lexer(raw_args, continuation);
    auto tokens = lexer.run();
    chain.unbalanced_quote = lexer.unbalanced();

    std::optional<Connector> pending;
    for (auto& tok : tokens) {
        if (!tok.is_word) {
            if (!chain.commands.empty() && !pending)
                pending = tok.op;
            continue;
        }
        bool start_new = chain.commands.empty() || pending.has_value();
        if (start_new) {
            if (!chain.commands.empty()) {
                ConnectorToken ct;
                ct.kind = *pending;
                auto prev_end = chain.commands.back().end;
                ct.raw = std::string(raw_args.substr(prev_end, tok.begin - prev_end));
                chain.connectors.push_back(std::move(ct));
            }
            SimpleCommand cmd;
            cmd.begin = tok.begin;
            chain.commands.push_back(std::move(cmd));
            pending.reset();
        }
        auto& cmd = chain.commands.back();
        cmd.end = tok.end;
        cmd.argv.push_back(std::move(tok.word));
    }
    for (auto& cmd : chain.commands)
        cmd.raw = std::string(raw_args.substr(cmd.begin, cmd.end - cmd.begin));
    if (chain.commands.empty()) {
        chain.leading = std::string(raw_args);
    } else {
        chain.leading = std::string(raw_args.substr(0, chain.commands.front().begin));
        chain.trailing = std::string(raw_args.substr(chain.commands.back().end));
    }
    return chain;
}

bool has_pipe_anywhere(const CommandChain& chain, char continuation)
{
    if (chain.exec_form) {
        if (chain.commands.empty())
            return false;
        std::string joined;
        for (const auto& w : chain.commands.front().argv) {
            if (!joined.empty())
                joined += ' ';
            joined += w.text;
        }
        return has_pipe_anywhere(parse_run_payload(joined, continuation), continuation);
    }
    if (chain.has_pipe())
        return true;
    for (const auto& cmd : chain.commands)
        for (const auto& w : cmd.argv)
            for (const auto& body : w.nested)
                if (has_pipe_anywhere(parse_run_payload(body.text, continuation), continuation))
                    return true;
    return false;
}

std::vector<SimpleCommand> all_commands_deep(const CommandChain& chain, char continuation)
{
    std::vector<SimpleCommand> out;
    if (chain.exec_form) {
        if (chain.commands.empty())
            return out;
        std::string joined;
        for (const auto& w : chain.commands.front().argv) {
            if (!joined.empty())
                joined += ' ';
            joined += w.text;
        }
        auto inner = parse_run_payload(joined, continuation);
        for (auto& c : inner.commands)
            c.exact_offsets = false;
        collect_deep(inner, continuation, out, 0);
        for (auto& c : out)
            c.exact_offsets = false;
        return out;
    }
    collect_deep(chain, continuation, out, 0);
    return out;
}

std::optional<AptGetCall> analyze_apt_get(const SimpleCommand& cmd)
{
    auto h = cmd.head_index();
    if (h >= cmd.argv.size() || cmd.argv[h].text != "apt-get")
        return std::nullopt;

    static constexpr std::array<std::string_view, 9> kValueOptions{
        "-o", "-t", "-c", "-a", "--option", "--target-release", "--default-release", "--config-file",
        "--host-architecture"};
    auto takes_value = [](std::string_view w) {
        return std::find(kValueOptions.begin(), kValueOptions.end(), w) != kValueOptions.end();
    };
    auto recommends_off = [](std::string_view value) {
        auto eq = value.find('=');
        if (eq == std::string_view::npos)
            return false;
        std::string key(value.substr(0, eq));
        std::string val(value.substr(eq + 1));
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
        std::transform(val.begin(), val.end(), val.begin(), [](unsigned char c) { return std::tolower(c); });
        return key == "apt::install-recommends" && (val == "false" || val == "0" || val == "no");
    };

    AptGetCall call;
    call.head = h;
    bool operands_only = false;
    for (std::size_t i = h + 1; i < cmd.argv.size(); ++i) {
        const auto& w = cmd.argv[i].text;
        if (!operands_only && w == "--") {
            operands_only = true;
            continue;
        }
        if (!operands_only && w.size() > 1 && w[0] == '-') {
            if (w == "--no-install-recommends" || w.starts_with("--no-install-recommends="))
                call.no_install_recommends = true;
            if (w.starts_with("--option=") && recommends_off(std::string_view(w).substr(9)))
                call.no_install_recommends = true;
            if (w.starts_with("-o") && w.size() > 2 && w[2] != '-' && recommends_off(std::string_view(w).substr(2)))
                call.no_install_recommends = true;
            if (takes_value(w) && i + 1 < cmd.argv.size()) {
                if ((w == "-o" || w == "--option") && recommends_off(cmd.argv[i + 1].text))
                    call.no_install_recommends = true;
                ++i;
            }
            continue;
        }
        if (!call.subcommand) {
            call.subcommand = i;
            call.subcommand_name = w;
            continue;
        }
        call.packages.push_back(i);
    }
    return call;
}

bool apt_package_pinned(std::string_view word)
{
    return word.find('=') != std::string_view::npos || word.find('/') != std::string_view::npos
           || word.ends_with(".deb");
}

std::string apt_package_name(std::string_view word)
{
    auto cut = word.find_first_of("=/");
    return std::string(word.substr(0, cut));
}

} // namespace dockerdoctor
