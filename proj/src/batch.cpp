#include "dockerdoctor/batch.hpp"

#include "dockerdoctor/error.hpp"

#include <stdexcept>

namespace dockerdoctor {

LintResult lint_one(const FileInput& in)
{
    LintResult r;
    r.path = in.path;
    if (!is_valid_utf8(in.content)) {
        r.error = "not valid UTF-8";
        return r;
    }
    auto ast = parse_dockerfile(in.content);
    r.findings = lint(ast);
    r.parse_errors = ast.errors();
    return r;
}

std::vector<LintResult> lint_files(const std::vector<FileInput>& inputs)
{
    std::vector<LintResult> out(inputs.size());
    const auto n = static_cast<long>(inputs.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        auto idx = static_cast<std::size_t>(i);
        try {
            out[idx] = lint_one(inputs[idx]);
        } catch (const std::exception& e) {
            out[idx].path = inputs[idx].path;
            out[idx].error = e.what();
        }
    }
    return out;
}

std::vector<LintResult> lint_files_serial(const std::vector<FileInput>& inputs)
{
    std::vector<LintResult> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) {
        try {
            out.push_back(lint_one(in));
        } catch (const std::exception& e) {
            LintResult r;
            r.path = in.path;
            r.error = e.what();
            out.push_back(std::move(r));
        }
    }
    return out;
}

FixFileResult fix_one(const FileInput& in, const FixContext& ctx, const std::set<RuleId>& rules)
{
    FixFileResult r;
    r.path = in.path;
    r.original = in.content;
    if (!is_valid_utf8(in.content)) {
        r.error = "not valid UTF-8";
        r.patched = in.content;
        return r;
    }
    auto ast = parse_dockerfile(in.content);
    auto res = fix_all(ast, ctx, rules);
    r.patched = print_dockerfile(res.patched);
    r.outcomes = std::move(res.outcomes);
    return r;
}

std::vector<FixFileResult> fix_files(const std::vector<FileInput>& inputs, const std::vector<FixContext>& contexts,
                                     const std::set<RuleId>& rules)
{
    if (contexts.size() != inputs.size())
        throw DomainError("one fix context per input file is required");
    std::vector<FixFileResult> out(inputs.size());
    const auto n = static_cast<long>(inputs.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        auto idx = static_cast<std::size_t>(i);
        try {
            out[idx] = fix_one(inputs[idx], contexts[idx], rules);
        } catch (const std::exception& e) {
            out[idx].path = inputs[idx].path;
            out[idx].original = out[idx].patched = inputs[idx].content;
            out[idx].error = e.what();
        }
    }
    return out;
}

std::vector<FixFileResult> fix_files_serial(const std::vector<FileInput>& inputs,
                                            const std::vector<FixContext>& contexts, const std::set<RuleId>& rules)
{
    if (contexts.size() != inputs.size())
        throw DomainError("one fix context per input file is required");
    std::vector<FixFileResult> out;
    out.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        try {
            out.push_back(fix_one(inputs[i], contexts[i], rules));
        } catch (const std::exception& e) {
            FixFileResult r;
            r.path = inputs[i].path;
            r.original = r.patched = inputs[i].content;
            r.error = e.what();
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<HistoryResult> mine_histories(const std::vector<SnapshotHistory>& histories)
{
    std::vector<HistoryResult> out(histories.size());
    const auto n = static_cast<long>(histories.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        auto idx = static_cast<std::size_t>(i);
        try {
            out[idx] = mine_history(histories[idx]);
        } catch (const std::exception& e) {
            out[idx].path = histories[idx].path;
            out[idx].warnings.push_back(histories[idx].path + ": " + e.what());
        }
    }
    return out;
}

std::vector<HistoryResult> mine_histories_serial(const std::vector<SnapshotHistory>& histories)
{
    std::vector<HistoryResult> out;
    out.reserve(histories.size());
    for (const auto& h : histories) {
        try {
            out.push_back(mine_history(h));
        } catch (const std::exception& e) {
            HistoryResult r;
            r.path = h.path;
            r.warnings.push_back(h.path + ": " + e.what());
            out.push_back(std::move(r));
        }
    }
    return out;
}

} // namespace dockerdoctor
