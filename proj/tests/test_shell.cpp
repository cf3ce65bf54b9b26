#include "dockerdoctor/shell.hpp"

#include <doctest.h>

#include <random>

using namespace dockerdoctor;

namespace {

std::vector<std::string> heads(const CommandChain& c)
{
    std::vector<std::string> out;
    for (const auto& cmd : c.commands)
        out.push_back(cmd.head() ? cmd.head()->text : "");
    return out;
}

} // namespace

TEST_CASE("and-if chain")
{
    auto c = parse_run_payload("apt-get update && apt-get install -y curl");
    REQUIRE(c.commands.size() == 2);
    REQUIRE(c.connectors.size() == 1);
    CHECK(c.connectors[0].kind == Connector::AndIf);
    CHECK(c.connectors[0].raw == " && ");
    CHECK(c.commands[1].argv.size() == 4);
    CHECK(c.commands[1].argv[3].text == "curl");
}

TEST_CASE("quoted operators are literal")
{
    auto c = parse_run_payload("echo 'a && b'");
    REQUIRE(c.commands.size() == 1);
    CHECK(c.commands[0].argv[1].text == "a && b");
    CHECK(c.commands[0].argv[1].quoted);
}

TEST_CASE("pipe")
{
    auto c = parse_run_payload("wget -O- x | tar xz");
    REQUIRE(c.commands.size() == 2);
    CHECK(c.connectors[0].kind == Connector::Pipe);
    CHECK(c.has_pipe());
}

TEST_CASE("other connectors")
{
    auto c = parse_run_payload("a || b; c | d && e");
    REQUIRE(c.connectors.size() == 4);
    CHECK(c.connectors[0].kind == Connector::OrIf);
    CHECK(c.connectors[1].kind == Connector::Semicolon);
    CHECK(c.connectors[2].kind == Connector::Pipe);
    CHECK(c.connectors[3].kind == Connector::AndIf);
    CHECK(heads(c) == std::vector<std::string>{"a", "b", "c", "d", "e"});
}

TEST_CASE("continuations and comment lines inside a RUN")
{
    std::string raw = "apt-get update \\\n# comment && not a command\n  && apt-get install -y curl";
    auto c = parse_run_payload(raw);
    REQUIRE(c.commands.size() == 2);
    CHECK(c.reassemble() == raw);
    CHECK(heads(c) == std::vector<std::string>{"apt-get", "apt-get"});
}

TEST_CASE("nested bodies are kept and searched deeply")
{
    auto c = parse_run_payload("echo $(curl -s x | sh) && (cd /a && make)");
    REQUIRE(c.commands.size() == 2);
    CHECK_FALSE(c.has_pipe());
    CHECK(has_pipe_anywhere(c));
    REQUIRE_FALSE(c.commands[0].argv[1].nested.empty());
    CHECK(c.commands[0].argv[1].nested[0].text == "curl -s x | sh");
    CHECK(c.commands[0].argv[1].has_expansion);
    auto deep = all_commands_deep(c);
    std::vector<std::string> names;
    for (const auto& cmd : deep)
        if (cmd.head())
            names.push_back(cmd.head()->text);
    CHECK(std::count(names.begin(), names.end(), "cd") == 1);
    CHECK(std::count(names.begin(), names.end(), "curl") == 1);
}

TEST_CASE("exec form")
{
    auto c = parse_run_payload("[\"/bin/sh\", \"-c\", \"ls | wc -l\"]");
    CHECK(c.exec_form);
    REQUIRE(c.commands.size() == 1);
    CHECK_FALSE(c.commands[0].exact_offsets);
    CHECK(has_pipe_anywhere(c));
}

TEST_CASE("head skips assignments and reserved words")
{
    auto c = parse_run_payload("DEBIAN_FRONTEND=noninteractive apt-get install -y x");
    REQUIRE(c.commands.size() == 1);
    CHECK(c.commands[0].head()->text == "apt-get");
    auto d = parse_run_payload("if true; then cd /x; fi");
    CHECK(heads(d) == std::vector<std::string>{"true", "cd", ""});
}

TEST_CASE("apt-get analysis")
{
    auto c = parse_run_payload("apt-get -q install --no-install-recommends -y curl=1.0 wget libfoo/focal ./x.deb");
    auto apt = analyze_apt_get(c.commands[0]);
    REQUIRE(apt);
    CHECK(apt->subcommand_name == "install");
    CHECK(apt->no_install_recommends);
    std::vector<std::string> pkgs;
    for (auto i : apt->packages)
        pkgs.push_back(c.commands[0].argv[i].text);
    CHECK(pkgs == std::vector<std::string>{"curl=1.0", "wget", "libfoo/focal", "./x.deb"});
    CHECK(apt_package_pinned("curl=1.0"));
    CHECK(apt_package_pinned("libfoo/focal"));
    CHECK(apt_package_pinned("./x.deb"));
    CHECK_FALSE(apt_package_pinned("wget"));
    CHECK(apt_package_name("curl=7.68") == "curl");
    CHECK_FALSE(analyze_apt_get(parse_run_payload("apt update").commands[0]));
}

TEST_CASE("unbalanced quote is reported")
{
    auto c = parse_run_payload("echo 'oops && x");
    CHECK(c.unbalanced_quote);
    CHECK(c.reassemble() == "echo 'oops && x");
}

namespace {

// Generates a chain with a known connector sequence. Words mix bare letters
// with quoted parts that contain operator characters.
struct Generated {
    std::string text;
    std::vector<Connector> connectors;
    std::vector<std::vector<std::string>> argv;
};

Generated generate(std::mt19937_64& rng)
{
    const std::string inside_single = "ab &|;\"";
    const std::string inside_double = "ab &|;'";
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    Generated g;
    int commands = 1 + pick(4);
    for (int c = 0; c < commands; ++c) {
        if (c > 0) {
            static const std::pair<const char*, Connector> ops[] = {
                {"&&", Connector::AndIf}, {"||", Connector::OrIf}, {"|", Connector::Pipe}, {";", Connector::Semicolon}};
            const auto& op = ops[pick(4)];
            g.text += std::string(pick(3), ' ') + op.first + std::string(pick(3), ' ');
            if (g.text.back() != ' ' && op.second == Connector::Semicolon)
                g.text += ' ';
            g.connectors.push_back(op.second);
        }
        std::vector<std::string> words;
        int nwords = 1 + pick(3);
        for (int w = 0; w < nwords; ++w) {
            if (w > 0)
                g.text += std::string(1 + pick(2), ' ');
            std::string raw, text;
            int parts = 1 + pick(3);
            for (int p = 0; p < parts; ++p) {
                int kind = pick(3);
                std::string body;
                int n = pick(5);
                for (int k = 0; k < n; ++k)
                    body += (kind == 1 ? inside_single : inside_double)[pick(7)];
                if (kind == 0) {
                    body = std::string(1 + pick(3), "xyz"[pick(3)]);
                    raw += body;
                } else if (kind == 1) {
                    raw += "'" + body + "'";
                } else {
                    raw += "\"" + body + "\"";
                }
                text += body;
            }
            g.text += raw;
            words.push_back(text);
        }
        g.argv.push_back(words);
    }
    return g;
}

// Character-scanning oracle: operator positions outside quotes.
std::vector<Connector> scan_connectors(const std::string& s)
{
    std::vector<Connector> out;
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (quote) {
            if (c == quote)
                quote = 0;
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '&' && i + 1 < s.size() && s[i + 1] == '&') {
            out.push_back(Connector::AndIf);
            ++i;
        } else if (c == '|' && i + 1 < s.size() && s[i + 1] == '|') {
            out.push_back(Connector::OrIf);
            ++i;
        } else if (c == '|') {
            out.push_back(Connector::Pipe);
        } else if (c == ';') {
            out.push_back(Connector::Semicolon);
        }
    }
    return out;
}

} // namespace

TEST_CASE("property: connectors match the unquoted-operator scan, reassembly is exact")
{
    std::mt19937_64 rng(4242);
    for (int round = 0; round < 3000; ++round) {
        auto g = generate(rng);
        CAPTURE(g.text);
        auto chain = parse_run_payload(g.text);
        auto oracle = scan_connectors(g.text);
        CHECK(oracle == g.connectors);
        std::vector<Connector> found;
        for (const auto& c : chain.connectors)
            found.push_back(c.kind);
        CHECK(found == oracle);
        CHECK(chain.reassemble() == g.text);
        REQUIRE(chain.commands.size() == g.argv.size());
        for (std::size_t i = 0; i < g.argv.size(); ++i) {
            std::vector<std::string> words;
            for (const auto& w : chain.commands[i].argv) {
                words.push_back(w.text);
                CHECK(g.text.substr(w.begin, w.end - w.begin) == w.raw);
            }
            CHECK(words == g.argv[i]);
        }
    }
}
