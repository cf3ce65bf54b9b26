#pragma once

#include "dockerdoctor/dates.hpp"
#include "dockerdoctor/rules.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dockerdoctor {

struct Snapshot {
    std::string commit_id;
    Timestamp commit_date{};
    std::string content;
    std::string message;
    /// Set when the manifest entry could not be decoded; content is empty then.
    std::optional<std::string> decode_error;
};

struct SnapshotHistory {
    std::string path;
    std::vector<Snapshot> snapshots;
};

/// Strict base64 (whitespace ignored). Returns nullopt on malformed input.
std::optional<std::string> decode_base64(std::string_view text);
std::string encode_base64(std::string_view bytes);

/// JSON lines {path, commit_id, commit_date, message, content_base64}, oldest
/// first. Entries are grouped by path; order inside a path is kept.
std::vector<SnapshotHistory> load_manifest(std::istream& in);
std::vector<SnapshotHistory> load_manifest_file(const std::string& path);

/// η of one snapshot; nullopt when it cannot be analyzed (undecodable or not UTF-8).
std::optional<std::set<SmellKey>> snapshot_smells(const Snapshot& s);

/// δ(d_i) = η(d_{i-1}) \ η(d_i). Throws UnparseableSnapshot when either side
/// cannot be analyzed.
std::set<SmellKey> disappeared(const SnapshotHistory& history, std::size_t i);

/// PF: indices with a non-empty disappearance set. Unanalyzable snapshots are
/// skipped; the next good snapshot is compared with the last good one.
std::set<std::size_t> candidate_fix_set(const SnapshotHistory& history);

enum class Disappearance { Modified, Removed, FileRewritten };

std::string_view disappearance_name(Disappearance d);

/// Share of old lines without a counterpart above which a change counts as a
/// rewrite of the whole file.
inline constexpr double kRewriteThreshold = 0.8;

/// Classifies how `key` (present in `before`) disappeared in `after`.
Disappearance classify_change(std::string_view before, std::string_view after, const SmellKey& key);

Disappearance classify_disappearance(const SnapshotHistory& history, std::size_t i, const SmellKey& key);

/// Commit message mentions the rule id, "hadolint" or a catalog keyword.
bool informed_hint(std::string_view message, RuleId rule);

struct DisappearanceEvent {
    std::string path;
    std::size_t at = 0;
    std::string commit_id;
    Timestamp commit_date{};
    SmellKey key;
    Disappearance classification = Disappearance::Removed;
    bool informed_hint = false;
};

struct SmellLifetime {
    SmellKey key;
    std::size_t introduced_at = 0;
    Timestamp introduced_date{};
    std::optional<std::size_t> ended_at;
    std::optional<Timestamp> ended_date;
    std::optional<Disappearance> classification;
};

struct HistoryResult {
    std::string path;
    std::vector<std::optional<std::set<SmellKey>>> eta;
    std::set<std::size_t> pf;
    std::vector<DisappearanceEvent> events;
    std::vector<SmellLifetime> lifetimes;
    std::vector<std::string> warnings;
};

HistoryResult mine_history(const SnapshotHistory& history);

struct RuleTotals {
    long introduced = 0;
    long modified = 0;
    long removed = 0;
    long rewritten = 0;
    long alive = 0;
    std::vector<long> lifetime_commits;
    std::vector<long> lifetime_days;
    std::set<std::pair<std::string, std::size_t>> pf_commits;

    long disappeared() const { return modified + removed + rewritten; }
};

struct QuarterCounts {
    long introduced = 0;
    long modified = 0;
    long removed = 0;
    long rewritten = 0;
};

struct SurvivalReport {
    std::map<RuleId, RuleTotals> totals;
    std::map<std::pair<RuleId, std::string>, QuarterCounts> quarters;
    std::vector<DisappearanceEvent> events;
    std::set<std::pair<std::string, std::size_t>> pf_commits;
    std::vector<std::string> warnings;
};

SurvivalReport summarize(const std::vector<SnapshotHistory>& histories);
SurvivalReport summarize_results(const std::vector<HistoryResult>& results);

std::optional<double> median(std::vector<long> values);

/// rule,quarter,introduced,modified,removed,rewritten
std::string survival_csv(const SurvivalReport& report);
/// One DisappearanceEvent per line.
std::string events_jsonl(const SurvivalReport& report);
/// rule,introduced,modified,removed,rewritten,alive,median_lifetime_commits,median_lifetime_days,pf_commits
std::string totals_csv(const SurvivalReport& report);

nlohmann::ordered_json event_json(const DisappearanceEvent& e);

} // namespace dockerdoctor
