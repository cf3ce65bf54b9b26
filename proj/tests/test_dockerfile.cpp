#include "dockerdoctor/dockerfile.hpp"
#include "dockerdoctor/error.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace dockerdoctor;

TEST_CASE("empty input has no instructions")
{
    auto ast = parse_dockerfile("");
    CHECK(ast.instructions().empty());
    CHECK(ast.stage_count() == 0);
    CHECK(print_dockerfile(ast).empty());
}

TEST_CASE("two instructions in one stage")
{
    auto ast = parse_dockerfile("FROM ubuntu\nRUN apt-get update");
    REQUIRE(ast.instructions().size() == 2);
    CHECK(ast.instructions()[0].keyword == Keyword::From);
    CHECK(ast.instructions()[1].keyword == Keyword::Run);
    CHECK(ast.instructions()[0].stage_index == 0);
    CHECK(ast.instructions()[1].stage_index == 0);
    CHECK(ast.instructions()[1].raw_args == "apt-get update");
    CHECK(ast.instructions()[1].line_ending.empty());
}

TEST_CASE("stage aliases and indices")
{
    auto ast = parse_dockerfile("FROM a AS base\nFROM b\n");
    REQUIRE(ast.instructions().size() == 2);
    CHECK(ast.instructions()[0].stage_index == 0);
    CHECK(ast.instructions()[1].stage_index == 1);
    CHECK(parse_image_ref(ast.instructions()[0].raw_args).alias == "base");
    CHECK(ast.stage_count() == 2);
}

TEST_CASE("instructions before the first FROM have no stage")
{
    auto ast = parse_dockerfile("ARG V=1\nFROM a:${V}\nRUN x\n");
    CHECK(ast.instructions()[0].stage_index == -1);
    CHECK(ast.instructions()[1].stage_index == 0);
    CHECK(ast.instructions()[2].stage_index == 0);
}

TEST_CASE("identity print")
{
    CHECK(print_dockerfile(parse_dockerfile("FROM ubuntu\n")) == "FROM ubuntu\n");
}

TEST_CASE("edited FROM prints with the new arguments")
{
    auto ast = parse_dockerfile("FROM ubuntu\n");
    ast.instructions()[0].set_args("ubuntu:20.04");
    CHECK(print_dockerfile(ast) == "FROM ubuntu:20.04\n");
}

TEST_CASE("edits keep indentation, keyword case and neighbours")
{
    std::string text = "# hi\n  add a /b\nRUN x \\\n  && y\n";
    auto ast = parse_dockerfile(text);
    REQUIRE(ast.instructions().size() == 2);
    ast.instructions()[0].set_keyword(Keyword::Copy);
    CHECK(print_dockerfile(ast) == "# hi\n  copy a /b\nRUN x \\\n  && y\n");
}

TEST_CASE("insert_before takes successor's indent and stage")
{
    auto ast = parse_dockerfile("FROM a\n  RUN x | y\n");
    ast.insert_before(1, Keyword::Shell, "[\"/bin/bash\", \"-c\"]");
    CHECK(print_dockerfile(ast) == "FROM a\n  SHELL [\"/bin/bash\", \"-c\"]\n  RUN x | y\n");
    CHECK(ast.instructions()[1].stage_index == 0);
}

TEST_CASE("continuations, comments inside continuations, CRLF")
{
    std::string text = "FROM a\r\nRUN apt-get update \\\r\n# note\r\n    && apt-get install -y curl\r\n";
    auto ast = parse_dockerfile(text);
    REQUIRE(ast.instructions().size() == 2);
    const auto& run = ast.instructions()[1];
    CHECK(run.span.start_line == 2);
    CHECK(run.span.end_line == 4);
    CHECK(run.folded_args() == "apt-get update     && apt-get install -y curl");
    CHECK(run.normalized() == "RUN apt-get update && apt-get install -y curl");
    CHECK(print_dockerfile(ast) == text);
}

TEST_CASE("escape directive switches the continuation character")
{
    std::string text = "# escape=`\nFROM mcr.microsoft.com/windows\nRUN dir `\n  c:\\\n";
    auto ast = parse_dockerfile(text);
    CHECK(ast.escape_char() == '`');
    REQUIRE(ast.instructions().size() == 2);
    CHECK(ast.instructions()[1].span.end_line == 4);
    CHECK(print_dockerfile(ast) == text);
}

TEST_CASE("directive after an instruction is a comment")
{
    auto ast = parse_dockerfile("FROM a\n# escape=`\nRUN x `\n");
    CHECK(ast.escape_char() == '\\');
}

TEST_CASE("malformed lines are collected, not thrown")
{
    auto ast = parse_dockerfile("FROM a\n=== oops\nRUN x\n");
    REQUIRE(ast.errors().size() == 1);
    CHECK(ast.errors()[0].line == 2);
    CHECK(ast.instructions()[1].malformed);
    CHECK(print_dockerfile(ast) == "FROM a\n=== oops\nRUN x\n");
}

TEST_CASE("heredoc bodies stay inside their instruction")
{
    std::string text = "FROM a\nRUN <<EOF\napt-get install -y curl\nEOF\nCMD x\n";
    auto ast = parse_dockerfile(text);
    REQUIRE(ast.instructions().size() == 3);
    CHECK(ast.instructions()[1].heredoc);
    CHECK(ast.instructions()[2].keyword == Keyword::Cmd);
    CHECK(print_dockerfile(ast) == text);
}

TEST_CASE("keyword lookup is case-insensitive")
{
    CHECK(keyword_from("from") == Keyword::From);
    CHECK(keyword_from("MaintaineR") == Keyword::Maintainer);
    CHECK(keyword_from("FROB") == Keyword::Other);
    CHECK(keyword_name(Keyword::Healthcheck) == "HEALTHCHECK");
}

TEST_CASE("parse_image_ref forms")
{
    auto a = parse_image_ref("ubuntu");
    CHECK(a.name == "ubuntu");
    CHECK_FALSE(a.tag);
    CHECK_FALSE(a.digest);
    CHECK_FALSE(a.pinned());

    auto b = parse_image_ref("ubuntu:20.04 AS builder");
    CHECK(b.name == "ubuntu");
    CHECK(b.tag == "20.04");
    CHECK(b.alias == "builder");

    auto c = parse_image_ref("img@sha256:abc ");
    CHECK(c.name == "img");
    CHECK(c.digest == "sha256:abc");
    CHECK_FALSE(c.tag);
    CHECK(c.pinned());

    auto d = parse_image_ref("--platform=linux/amd64 localhost:5000/team/app:1.2@sha256:ff as x");
    CHECK(d.flags == std::vector<std::string>{"--platform=linux/amd64"});
    CHECK(d.name == "localhost:5000/team/app");
    CHECK(d.tag == "1.2");
    CHECK(d.digest == "sha256:ff");
    CHECK(d.alias == "x");

    auto e = parse_image_ref("  registry:5000/img");
    CHECK(e.name == "registry:5000/img");
    CHECK_FALSE(e.tag);
    CHECK(std::string("  registry:5000/img").substr(e.image_offset, e.image_len) == "registry:5000/img");

    CHECK_THROWS_AS(parse_image_ref(""), EmptyImageName);
    CHECK_THROWS_AS(parse_image_ref("--platform=x"), EmptyImageName);
}

TEST_CASE("utf-8 validation")
{
    CHECK(is_valid_utf8("plain"));
    CHECK(is_valid_utf8("caf\xc3\xa9"));
    CHECK_FALSE(is_valid_utf8("\xff\xfe"));
    CHECK_FALSE(is_valid_utf8("\xc3"));
    CHECK_FALSE(is_valid_utf8("\xed\xa0\x80")); // surrogate
}

namespace {

void check_invariants(const std::string& text)
{
    auto ast = parse_dockerfile(text);
    REQUIRE(print_dockerfile(ast) == text);

    // segments tile the input; instruction spans match their offsets
    std::size_t offset = 0;
    for (const auto& seg : ast.segments()) {
        if (seg.is_instruction) {
            const auto& ins = ast.instructions()[seg.instruction];
            CHECK(ins.span.byte_offset == offset);
            CHECK(ins.span.byte_len == ins.text().size());
            CHECK(text.compare(offset, ins.span.byte_len, ins.text()) == 0);
            offset += ins.span.byte_len;
        } else {
            CHECK(text.compare(offset, seg.trivia.size(), seg.trivia) == 0);
            offset += seg.trivia.size();
        }
    }
    CHECK(offset == text.size());

    // stage of instruction i = number of FROMs at positions <= i, minus 1
    int froms = 0;
    for (const auto& ins : ast.instructions()) {
        if (ins.keyword == Keyword::From)
            ++froms;
        CHECK(ins.stage_index == froms - 1);
    }
    CHECK(ast.stage_count() == froms);
}

} // namespace

TEST_CASE("corpus round trip, span coverage, stage counting")
{
    for (const auto& p : testsupport::corpus_files()) {
        CAPTURE(p.filename().string());
        check_invariants(testsupport::read_text(p));
    }
}

TEST_CASE("random files round trip")
{
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 500; ++i)
        check_invariants(testsupport::random_dockerfile(rng));
}

TEST_CASE("random instruction shuffles round trip")
{
    std::mt19937_64 rng(99);
    for (const auto& p : testsupport::corpus_files()) {
        auto ast = parse_dockerfile(testsupport::read_text(p));
        std::vector<std::string> pieces;
        for (const auto& ins : ast.instructions()) {
            auto t = ins.text();
            if (!t.empty() && t.back() != '\n')
                t += "\n";
            pieces.push_back(t);
        }
        for (int k = 0; k < 5; ++k) {
            std::shuffle(pieces.begin(), pieces.end(), rng);
            std::string text;
            for (const auto& s : pieces)
                text += s;
            CAPTURE(text);
            auto again = parse_dockerfile(text);
            CHECK(print_dockerfile(again) == text);
        }
    }
}
