#pragma once

#include "dockerdoctor/dockerfile.hpp"
#include "dockerdoctor/shell.hpp"

#include <json.hpp>

#include <array>
#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dockerdoctor {

enum class RuleId { DL3003, DL3006, DL3008, DL3009, DL3015, DL3020, DL4000, DL4006 };

inline constexpr std::array<RuleId, 8> kAllRules{RuleId::DL3003, RuleId::DL3006, RuleId::DL3008, RuleId::DL3009,
                                                 RuleId::DL3015, RuleId::DL3020, RuleId::DL4000, RuleId::DL4006};

std::string_view rule_name(RuleId rule);
std::optional<RuleId> rule_from(std::string_view name);

/// Catalog entry. `message` is the linter-facing text; `description` and
/// `fix_explanation` complete the sentences of a pull-request body.
struct RuleInfo {
    RuleId id;
    std::string_view message;
    std::string_view description;
    std::string_view fix_explanation;
    std::vector<std::string_view> hint_keywords;
};

const RuleInfo& rule_info(RuleId rule);

/// Identity of a smell across snapshots of the same file.
///   DL3006              (stage)
///   DL3008              (stage, package)
///   DL4000              ("maintainer")
///   everything else     (stage, normalized instruction, occurrence ordinal)
struct SmellKey {
    RuleId rule = RuleId::DL3003;
    int stage = -1;
    std::string anchor;
    int ordinal = 0;

    auto operator<=>(const SmellKey&) const = default;
    std::string to_string() const;
};

struct Finding {
    RuleId rule = RuleId::DL3003;
    int line = 0;
    std::string message;
    SmellKey key;
    std::string snippet;
    std::size_t instruction = 0; // index into ast.instructions()

    auto operator<=>(const Finding& o) const
    {
        if (auto c = line <=> o.line; c != 0)
            return c;
        if (auto c = rule <=> o.rule; c != 0)
            return c;
        return key <=> o.key;
    }
    bool operator==(const Finding& o) const { return line == o.line && rule == o.rule && key == o.key; }
};

/// Shell view of a RUN instruction. Command offsets are relative to the
/// instruction's raw_args (payload_offset already applied).
struct RunView {
    std::vector<std::string> flags;
    std::size_t payload_offset = 0;
    CommandChain chain;
    std::vector<SimpleCommand> deep;
};

RunView analyze_run(const Instruction& run, char escape);

struct StageInfo {
    std::size_t from_instruction = 0;
    std::optional<ImageRef> image;
    /// Index of an earlier stage this one builds on (FROM <alias>).
    std::optional<int> base_stage;
};

std::vector<StageInfo> stages_of(const DockerfileAst& ast);

/// Image name of the stage's root, following FROM <alias> chains.
std::optional<ImageRef> root_image(const std::vector<StageInfo>& stages, int stage);

std::vector<Finding> detect_rule(RuleId rule, const DockerfileAst& ast);

/// All findings, ordered by (line, rule).
std::vector<Finding> lint(const DockerfileAst& ast);

std::set<SmellKey> smell_set(const DockerfileAst& ast);

/// {path, findings:[{rule, line, message, snippet}]}
nlohmann::ordered_json report_json(std::string_view path, const std::vector<Finding>& findings);

} // namespace dockerdoctor
