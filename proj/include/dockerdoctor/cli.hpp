#pragma once

#include "dockerdoctor/dates.hpp"
#include "dockerdoctor/rules.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dockerdoctor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitError = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitIo = 74;

enum class Command { Lint, Fix, History, Sample, PrDraft, PrState };
enum class Format { Text, Json };

struct CliConfig {
    Command command = Command::Lint;
    std::vector<std::string> paths;
    Format format = Format::Text;
    bool write_in_place = false;
    std::optional<std::string> registry_fixture;
    std::optional<std::string> apt_fixture;
    std::optional<Date> last_modified_override;
    std::optional<std::set<RuleId>> rules;
    std::optional<std::uint64_t> seed;

    std::optional<std::string> patch_dir;
    std::string out_dir = ".";
    std::optional<std::size_t> total;
    std::optional<Date> today;
    std::optional<std::string> weights;
    std::optional<std::string> output;
    std::optional<std::string> repo_id;
    std::optional<RuleId> rule;
    std::optional<std::string> dockerfile_path;
    std::optional<std::string> state;
    /// Directory with registry.jsonl / apt.jsonl used when no fixture flag is
    /// given (taken from DOCKERDOCTOR_FIXTURES by parse_args).
    std::optional<std::string> fixtures_dir;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int run(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and runs; help goes to `out`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace dockerdoctor::cli
