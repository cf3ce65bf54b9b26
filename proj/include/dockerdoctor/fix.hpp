#pragma once

#include "dockerdoctor/dates.hpp"
#include "dockerdoctor/dockerfile.hpp"
#include "dockerdoctor/resolvers.hpp"
#include "dockerdoctor/rules.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dockerdoctor {

struct FixContext {
    Date last_modified{};
    /// Per-stage Ubuntu series overrides; stages not listed are inferred
    /// from the FROM tag.
    std::map<int, std::string> base_series;
    std::shared_ptr<const RegistrySnapshot> registry;
    std::shared_ptr<const PackageIndexSnapshot> apt_index;
};

/// "20.04" -> "focal", "focal" -> "focal", "focal-20210416" -> "focal".
std::optional<std::string> ubuntu_series_for_tag(std::string_view tag);

/// Series of the stage's root image when it is an Ubuntu image.
std::optional<std::string> stage_series(const DockerfileAst& ast, int stage, const FixContext& ctx);

enum class FixStatus { Fixed, Refused };

enum class RefusalReason {
    UnresolvableVersion,
    NonUbuntuBase,
    VariableBearing,
    NoTagAvailable,
    TooFewSegments,
    UnsupportedShape,
};

std::string_view fix_status_name(FixStatus s);
std::string_view refusal_name(RefusalReason r);

struct FixOutcome {
    Finding finding;
    FixStatus status = FixStatus::Refused;
    std::optional<DockerfileAst> patched;
    std::set<int> touched_lines;
    std::optional<RefusalReason> refusal_reason;
    /// Instruction positions (pre-fix numbering) where new instructions were
    /// inserted; lets callers track instructions across fixes.
    std::vector<std::size_t> inserted_at;
};

/// Applies the fixing rule of the finding. Throws FindingNotPresent when the
/// finding does not belong to the AST.
FixOutcome fix(const Finding& finding, const DockerfileAst& ast, const FixContext& ctx);

struct FixAllResult {
    DockerfileAst patched;
    std::vector<FixOutcome> outcomes;
};

/// Fixes every finding of the selected rules in line order, re-parsing after
/// each applied fix. touched_lines of the outcomes use the input numbering.
FixAllResult fix_all(const DockerfileAst& ast, const FixContext& ctx, const std::set<RuleId>& rules);

/// Unified diff of the two printed files; empty when identical.
std::string render_patch(const DockerfileAst& before, const DockerfileAst& after,
                         std::string_view path = "Dockerfile");

/// Lines of `before` (1-based) deleted or changed in `after`, plus the line
/// each pure insertion lands in front of (the last line for appends).
std::set<int> touched_lines_between(std::string_view before, std::string_view after);

} // namespace dockerdoctor
