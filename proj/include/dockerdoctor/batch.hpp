#pragma once

#include "dockerdoctor/fix.hpp"
#include "dockerdoctor/history.hpp"
#include "dockerdoctor/rules.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dockerdoctor {

// Many-file drivers. Each has an OpenMP version and a plain loop kept as the
// reference; both return results in input order.

struct FileInput {
    std::string path;
    std::string content;
};

struct LintResult {
    std::string path;
    std::vector<Finding> findings;
    std::vector<ParseError> parse_errors;
    std::optional<std::string> error; // set for files that cannot be analyzed
};

LintResult lint_one(const FileInput& in);
std::vector<LintResult> lint_files(const std::vector<FileInput>& inputs);
std::vector<LintResult> lint_files_serial(const std::vector<FileInput>& inputs);

struct FixFileResult {
    std::string path;
    std::string original;
    std::string patched;
    std::vector<FixOutcome> outcomes;
    std::optional<std::string> error;
};

FixFileResult fix_one(const FileInput& in, const FixContext& ctx, const std::set<RuleId>& rules);
/// contexts[i] belongs to inputs[i].
std::vector<FixFileResult> fix_files(const std::vector<FileInput>& inputs, const std::vector<FixContext>& contexts,
                                     const std::set<RuleId>& rules);
std::vector<FixFileResult> fix_files_serial(const std::vector<FileInput>& inputs,
                                            const std::vector<FixContext>& contexts, const std::set<RuleId>& rules);

std::vector<HistoryResult> mine_histories(const std::vector<SnapshotHistory>& histories);
std::vector<HistoryResult> mine_histories_serial(const std::vector<SnapshotHistory>& histories);

} // namespace dockerdoctor
