#pragma once

#include "dockerdoctor/dates.hpp"
#include "dockerdoctor/rules.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dockerdoctor {

/// ceil(z^2 p(1-p) / margin^2) for an infinite population, z being the
/// two-sided standard normal quantile of the confidence level.
long required_sample_size(double confidence, double margin, double p);

struct CandidateRecord {
    std::string repo_id;
    long stars = 0;
    long merged_pr_count = 0;
    Date last_commit_date{};
    std::string dockerfile_path;
    RuleId rule = RuleId::DL3003;
    bool build_ok = false;
    bool smell_in_latest = false;

    bool operator==(const CandidateRecord&) const = default;
};

/// Header: repo_id,stars,merged_pr_count,last_commit_date,dockerfile_path,rule,build_ok,smell_in_latest
std::vector<CandidateRecord> load_candidates_csv(std::istream& in);
std::string candidates_csv(const std::vector<CandidateRecord>& records);

inline constexpr long kMinStars = 10;
inline constexpr long kActivityWindowDays = 92;

bool passes_filters(const CandidateRecord& r, Date today);

/// Records passing every filter, at most one per repository (first wins).
std::vector<CandidateRecord> filter_candidates(const std::vector<CandidateRecord>& records, Date today);

struct StratumQuota {
    RuleId rule;
    std::size_t population = 0;
    std::size_t quota = 0;
};

/// Largest-remainder allocation of `total` over the strata, proportional to
/// `weights` (stratum sizes when absent). Quotas above a stratum's size are
/// capped and the excess handed to the other strata.
std::vector<StratumQuota> allocate_quotas(const std::map<RuleId, std::size_t>& sizes, std::size_t total,
                                          const std::optional<std::map<RuleId, double>>& weights = std::nullopt);

std::vector<CandidateRecord> stratified_sample(const std::vector<CandidateRecord>& records, std::size_t total,
                                               std::uint64_t seed,
                                               const std::optional<std::map<RuleId, double>>& weights = std::nullopt);

std::string render_pr_body(std::string_view dockerfile_path, RuleId violation_id, std::string_view violation_description,
                           std::string_view fixing_rule_explanation);

struct PrDraft {
    std::string title;
    std::string body;
    RuleId rule = RuleId::DL3003;
    std::string patch;
};

PrDraft make_pr_draft(std::string_view dockerfile_path, RuleId rule, std::string patch);

/// "{repo_id}-{rule}" with '/' in the repository id replaced by '_'.
std::string draft_stem(std::string_view repo_id, RuleId rule);

/// Writes <stem>.md and <stem>.patch into dir; returns the two paths.
std::pair<std::filesystem::path, std::filesystem::path> write_pr_draft(const std::filesystem::path& dir,
                                                                       std::string_view repo_id, const PrDraft& draft);

enum class PrState { Ignored, RejectedClosed, Pending, Accepted, Fixed };

std::string_view pr_state_name(PrState s);
std::optional<PrState> pr_state_from(std::string_view name);

struct PrLedgerEntry {
    std::string repo_id;
    RuleId rule = RuleId::DL3003;
    PrState state = PrState::Pending;
    Date recorded_at{};
};

/// Append-only state history of submitted pull requests.
class PrLedger {
public:
    static PrLedger load(std::istream& in);
    static PrLedger load_file(const std::filesystem::path& path);

    /// Throws DomainError when the entry predates the last one recorded for
    /// the same (repo_id, rule).
    void append(PrLedgerEntry entry);

    const std::vector<PrLedgerEntry>& entries() const { return entries_; }
    std::optional<PrState> current(std::string_view repo_id, RuleId rule) const;

    static std::string to_json_line(const PrLedgerEntry& e);

private:
    std::vector<PrLedgerEntry> entries_;
};

} // namespace dockerdoctor
