#include "dockerdoctor/cli.hpp"

#include "dockerdoctor/batch.hpp"
#include "dockerdoctor/diff.hpp"
#include "dockerdoctor/error.hpp"
#include "dockerdoctor/fix.hpp"
#include "dockerdoctor/history.hpp"
#include "dockerdoctor/resolvers.hpp"
#include "dockerdoctor/study.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace dockerdoctor::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Non-usage failures that carry their own exit code.
struct Failure : std::runtime_error {
    int code;
    Failure(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw IoError("cannot read " + path);
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out)
        throw IoError("cannot write " + path.string());
}

Date today_utc() { return std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now()); }

Date file_mtime(const std::string& path)
{
    std::error_code ec;
    auto ft = fs::last_write_time(path, ec);
    if (ec)
        throw IoError("cannot stat " + path + ": " + ec.message());
    return std::chrono::floor<std::chrono::days>(std::chrono::file_clock::to_sys(ft));
}

std::string sanitize(std::string_view path)
{
    std::string out;
    for (char c : path)
        out += (c == '/' || c == '\\' || c == ':') ? '_' : c;
    while (!out.empty() && out.front() == '.')
        out.erase(out.begin());
    return out.empty() ? "Dockerfile" : out;
}

void print_json(std::ostream& out, const ojson& j) { out << j.dump(2) << '\n'; }

std::optional<std::string> fixture_path(const std::optional<std::string>& flag, const CliConfig& cfg,
                                        const char* file)
{
    if (flag)
        return flag;
    if (cfg.fixtures_dir) {
        auto p = fs::path(*cfg.fixtures_dir) / file;
        if (fs::exists(p))
            return p.string();
    }
    return std::nullopt;
}

struct Fixtures {
    std::shared_ptr<const RegistrySnapshot> registry;
    std::shared_ptr<const PackageIndexSnapshot> apt;
};

Fixtures load_fixtures(const CliConfig& cfg)
{
    Fixtures fx;
    if (auto p = fixture_path(cfg.registry_fixture, cfg, "registry.jsonl")) {
        if (!fs::exists(*p))
            throw IoError("registry fixture not found: " + *p);
        try {
            fx.registry = std::make_shared<RegistrySnapshot>(RegistrySnapshot::load_file(*p));
        } catch (const DomainError& e) {
            throw Failure(kExitError, *p + ": " + e.what());
        }
    }
    if (auto p = fixture_path(cfg.apt_fixture, cfg, "apt.jsonl")) {
        if (!fs::exists(*p))
            throw IoError("apt fixture not found: " + *p);
        try {
            fx.apt = std::make_shared<PackageIndexSnapshot>(PackageIndexSnapshot::load_file(*p));
        } catch (const DomainError& e) {
            throw Failure(kExitError, *p + ": " + e.what());
        }
    }
    return fx;
}

// Rules for fix-like commands. Explicitly requested resolver-backed rules
// need their fixture; defaulted ones are dropped with a note.
std::set<RuleId> effective_rules(const CliConfig& cfg, const Fixtures& fx, std::ostream& err)
{
    if (cfg.rules) {
        if (cfg.rules->contains(RuleId::DL3006) && !fx.registry)
            throw UsageError("DL3006 needs --registry-fixture (or DOCKERDOCTOR_FIXTURES)");
        if (cfg.rules->contains(RuleId::DL3008) && !fx.apt)
            throw UsageError("DL3008 needs --apt-fixture (or DOCKERDOCTOR_FIXTURES)");
        return *cfg.rules;
    }
    std::set<RuleId> rules(kAllRules.begin(), kAllRules.end());
    if (!fx.registry) {
        rules.erase(RuleId::DL3006);
        err << "note: no registry fixture, skipping DL3006\n";
    }
    if (!fx.apt) {
        rules.erase(RuleId::DL3008);
        err << "note: no apt fixture, skipping DL3008\n";
    }
    return rules;
}

std::vector<FileInput> read_inputs(const std::vector<std::string>& paths)
{
    std::vector<FileInput> inputs;
    for (const auto& p : paths)
        inputs.push_back({p, read_file(p)});
    return inputs;
}

int cmd_lint(const CliConfig& cfg, std::ostream& out, std::ostream& err)
{
    auto results = lint_files(read_inputs(cfg.paths));
    bool any_finding = false, any_error = false;
    ojson doc = ojson::array();
    for (const auto& r : results) {
        for (const auto& pe : r.parse_errors)
            err << r.path << ':' << pe.line << ": " << pe.message << '\n';
        if (r.error) {
            any_error = true;
            err << r.path << ": " << *r.error << '\n';
            if (cfg.format == Format::Json)
                doc.push_back(ojson{{"path", r.path}, {"error", *r.error}});
            continue;
        }
        any_finding = any_finding || !r.findings.empty();
        if (cfg.format == Format::Json) {
            doc.push_back(report_json(r.path, r.findings));
        } else {
            for (const auto& f : r.findings)
                out << r.path << ':' << f.line << ' ' << rule_name(f.rule) << ' ' << f.message << '\n';
        }
    }
    if (cfg.format == Format::Json)
        print_json(out, doc);
    if (any_error)
        return kExitError;
    return any_finding ? kExitFindings : kExitOk;
}

ojson outcome_json(const FixOutcome& o)
{
    ojson j;
    j["rule"] = rule_name(o.finding.rule);
    j["line"] = o.finding.line;
    j["key"] = o.finding.key.to_string();
    j["status"] = fix_status_name(o.status);
    if (o.refusal_reason)
        j["refusal_reason"] = refusal_name(*o.refusal_reason);
    j["touched_lines"] = o.touched_lines;
    return j;
}

std::vector<FixContext> contexts_for(const CliConfig& cfg, const Fixtures& fx)
{
    std::vector<FixContext> ctxs;
    for (const auto& p : cfg.paths) {
        FixContext ctx;
        ctx.last_modified = cfg.last_modified_override ? *cfg.last_modified_override : file_mtime(p);
        ctx.registry = fx.registry;
        ctx.apt_index = fx.apt;
        ctxs.push_back(std::move(ctx));
    }
    return ctxs;
}

int cmd_fix(const CliConfig& cfg, std::ostream& out, std::ostream& err)
{
    auto fx = load_fixtures(cfg);
    auto rules = effective_rules(cfg, fx, err);
    auto inputs = read_inputs(cfg.paths);
    auto results = fix_files(inputs, contexts_for(cfg, fx), rules);

    bool any_refused = false, any_error = false;
    ojson doc = ojson::array();
    for (const auto& r : results) {
        ojson item;
        item["path"] = r.path;
        if (r.error) {
            any_error = true;
            err << r.path << ": " << *r.error << '\n';
            item["error"] = *r.error;
            doc.push_back(std::move(item));
            continue;
        }
        auto patch = unified_diff(r.original, r.patched, "a/" + r.path, "b/" + r.path);
        item["outcomes"] = ojson::array();
        for (const auto& o : r.outcomes) {
            any_refused = any_refused || o.status == FixStatus::Refused;
            err << r.path << ':' << o.finding.line << ' ' << rule_name(o.finding.rule) << ' '
                << fix_status_name(o.status);
            if (o.refusal_reason)
                err << " (" << refusal_name(*o.refusal_reason) << ')';
            err << '\n';
            item["outcomes"].push_back(outcome_json(o));
        }
        item["patch"] = patch;
        if (cfg.format == Format::Text)
            out << patch;
        if (cfg.write_in_place && r.patched != r.original)
            write_file(r.path, r.patched);
        if (cfg.patch_dir && !patch.empty()) {
            std::error_code ec;
            fs::create_directories(*cfg.patch_dir, ec);
            if (ec)
                throw IoError("cannot create " + *cfg.patch_dir + ": " + ec.message());
            write_file(fs::path(*cfg.patch_dir) / (sanitize(r.path) + ".patch"), patch);
        }
        doc.push_back(std::move(item));
    }
    if (cfg.format == Format::Json)
        print_json(out, doc);
    if (any_error)
        return kExitError;
    return any_refused ? kExitFindings : kExitOk;
}

int cmd_history(const CliConfig& cfg, std::ostream& out, std::ostream& err)
{
    std::vector<SnapshotHistory> histories;
    for (const auto& p : cfg.paths) {
        if (!fs::exists(p))
            throw IoError("cannot read " + p);
        try {
            auto part = load_manifest_file(p);
            histories.insert(histories.end(), std::make_move_iterator(part.begin()),
                             std::make_move_iterator(part.end()));
        } catch (const DomainError& e) {
            throw Failure(kExitError, p + ": " + e.what());
        }
    }
    auto report = summarize_results(mine_histories(histories));
    for (const auto& w : report.warnings)
        err << "warning: " << w << '\n';

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec)
        throw IoError("cannot create " + cfg.out_dir + ": " + ec.message());
    auto dir = fs::path(cfg.out_dir);
    write_file(dir / "survival.csv", survival_csv(report));
    write_file(dir / "events.jsonl", events_jsonl(report));
    auto totals = totals_csv(report);
    write_file(dir / "totals.csv", totals);

    if (cfg.format == Format::Json) {
        ojson doc;
        std::size_t snapshots = 0;
        for (const auto& h : histories)
            snapshots += h.snapshots.size();
        doc["histories"] = histories.size();
        doc["snapshots"] = snapshots;
        doc["events"] = report.events.size();
        doc["pf_commits"] = report.pf_commits.size();
        doc["rewrite_threshold"] = kRewriteThreshold;
        doc["totals"] = ojson::array();
        for (const auto& [rule, t] : report.totals) {
            ojson row;
            row["rule"] = rule_name(rule);
            row["introduced"] = t.introduced;
            row["modified"] = t.modified;
            row["removed"] = t.removed;
            row["rewritten"] = t.rewritten;
            row["alive"] = t.alive;
            auto mc = median(t.lifetime_commits);
            auto md = median(t.lifetime_days);
            row["median_lifetime_commits"] = mc ? ojson(*mc) : ojson(nullptr);
            row["median_lifetime_days"] = md ? ojson(*md) : ojson(nullptr);
            row["pf_commits"] = t.pf_commits.size();
            doc["totals"].push_back(std::move(row));
        }
        doc["outputs"] = {(dir / "survival.csv").string(), (dir / "events.jsonl").string(),
                          (dir / "totals.csv").string()};
        doc["warnings"] = report.warnings;
        print_json(out, doc);
    } else {
        out << totals;
    }
    return kExitOk;
}

std::map<RuleId, double> parse_weights(const std::string& text)
{
    std::map<RuleId, double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        auto rule = rule_from(item.substr(0, eq));
        if (eq == std::string::npos || !rule)
            throw UsageError("bad weight '" + item + "', expected RULE=NUMBER");
        try {
            std::size_t used = 0;
            auto v = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1)
                throw std::invalid_argument(item);
            out[*rule] = v;
        } catch (const std::exception&) {
            throw UsageError("bad weight '" + item + "', expected RULE=NUMBER");
        }
    }
    return out;
}

int cmd_sample(const CliConfig& cfg, std::ostream& out, std::ostream& err)
{
    if (cfg.paths.size() != 1)
        throw UsageError("sample takes exactly one candidates CSV");
    if (!cfg.total)
        throw UsageError("sample needs --total");
    std::vector<CandidateRecord> records;
    {
        std::istringstream in(read_file(cfg.paths.front()));
        try {
            records = load_candidates_csv(in);
        } catch (const DomainError& e) {
            throw Failure(kExitError, cfg.paths.front() + ": " + e.what());
        }
    }
    auto today = cfg.today ? *cfg.today : today_utc();
    auto filtered = filter_candidates(records, today);
    std::optional<std::map<RuleId, double>> weights;
    if (cfg.weights)
        weights = parse_weights(*cfg.weights);
    std::vector<CandidateRecord> sample;
    try {
        sample = stratified_sample(filtered, *cfg.total, cfg.seed.value_or(0), weights);
    } catch (const InsufficientPopulation& e) {
        throw Failure(kExitError, e.what());
    }
    err << records.size() << " candidates, " << filtered.size() << " after filters, " << sample.size()
        << " sampled\n";

    std::string text;
    if (cfg.format == Format::Json) {
        ojson doc = ojson::array();
        for (const auto& r : sample)
            doc.push_back(ojson{{"repo_id", r.repo_id},
                                {"stars", r.stars},
                                {"merged_pr_count", r.merged_pr_count},
                                {"last_commit_date", format_date(r.last_commit_date)},
                                {"dockerfile_path", r.dockerfile_path},
                                {"rule", rule_name(r.rule)},
                                {"build_ok", r.build_ok},
                                {"smell_in_latest", r.smell_in_latest}});
        text = doc.dump(2) + "\n";
    } else {
        text = candidates_csv(sample);
    }
    if (cfg.output)
        write_file(*cfg.output, text);
    else
        out << text;
    return kExitOk;
}

int cmd_pr_draft(const CliConfig& cfg, std::ostream& out, std::ostream& err)
{
    if (cfg.paths.size() != 1)
        throw UsageError("pr-draft takes exactly one Dockerfile");
    if (!cfg.repo_id || !cfg.rule)
        throw UsageError("pr-draft needs --repo and --rule");
    CliConfig scoped = cfg;
    scoped.rules = std::set<RuleId>{*cfg.rule};
    auto fx = load_fixtures(scoped);
    auto rules = effective_rules(scoped, fx, err);
    auto inputs = read_inputs(scoped.paths);
    auto result = fix_one(inputs.front(), contexts_for(scoped, fx).front(), rules);
    if (result.error)
        throw Failure(kExitError, result.path + ": " + *result.error);

    auto shown_path = cfg.dockerfile_path.value_or(result.path);
    std::string reason;
    if (result.outcomes.empty())
        reason = "no " + std::string(rule_name(*cfg.rule)) + " finding";
    for (const auto& o : result.outcomes)
        if (o.status == FixStatus::Refused)
            reason = "fix refused (" + std::string(refusal_name(*o.refusal_reason)) + ")";
    if (!reason.empty()) {
        err << result.path << ": " << reason << ", no draft written\n";
        if (cfg.format == Format::Json)
            print_json(out, ojson{{"path", result.path}, {"drafted", false}, {"reason", reason}});
        return kExitFindings;
    }
    auto patch = unified_diff(result.original, result.patched, "a/" + shown_path, "b/" + shown_path);
    auto draft = make_pr_draft(shown_path, *cfg.rule, patch);
    auto [md, patch_file] = write_pr_draft(cfg.out_dir, *cfg.repo_id, draft);
    if (cfg.format == Format::Json)
        print_json(out, ojson{{"path", result.path},
                              {"drafted", true},
                              {"title", draft.title},
                              {"body", md.string()},
                              {"patch", patch_file.string()}});
    else
        out << md.string() << '\n' << patch_file.string() << '\n';
    return kExitOk;
}

int cmd_pr_state(const CliConfig& cfg, std::ostream& out, std::ostream&)
{
    if (cfg.paths.size() != 1)
        throw UsageError("pr-state takes exactly one ledger file");
    const auto& path = cfg.paths.front();
    PrLedger ledger;
    try {
        ledger = PrLedger::load_file(path);
    } catch (const DomainError& e) {
        throw Failure(kExitError, path + ": " + e.what());
    }
    if (cfg.state) {
        if (!cfg.repo_id || !cfg.rule)
            throw UsageError("recording a state needs --repo and --rule");
        auto state = pr_state_from(*cfg.state);
        if (!state)
            throw UsageError("unknown state '" + *cfg.state
                             + "' (expected Ignored, RejectedClosed, Pending, Accepted or Fixed)");
        PrLedgerEntry entry{*cfg.repo_id, *cfg.rule, *state, cfg.today ? *cfg.today : today_utc()};
        try {
            ledger.append(entry);
        } catch (const DomainError& e) {
            throw Failure(kExitError, e.what());
        }
        std::ofstream app(path, std::ios::app | std::ios::binary);
        app << PrLedger::to_json_line(entry) << '\n';
        if (!app)
            throw IoError("cannot append to " + path);
    }
    std::vector<std::pair<std::string, RuleId>> keys;
    for (const auto& e : ledger.entries())
        if (std::find(keys.begin(), keys.end(), std::pair{e.repo_id, e.rule}) == keys.end())
            keys.emplace_back(e.repo_id, e.rule);
    ojson doc = ojson::array();
    for (const auto& [repo, rule] : keys) {
        auto st = ledger.current(repo, rule);
        if (cfg.format == Format::Json)
            doc.push_back(ojson{{"repo_id", repo}, {"rule", rule_name(rule)}, {"state", pr_state_name(*st)}});
        else
            out << repo << ' ' << rule_name(rule) << ' ' << pr_state_name(*st) << '\n';
    }
    if (cfg.format == Format::Json)
        print_json(out, doc);
    return kExitOk;
}

void report_failure(Format format, std::ostream& out, std::ostream& err, int code, const std::string& message)
{
    err << "dockerdoctor: " << message << '\n';
    if (format == Format::Json)
        print_json(out, ojson{{"error", message}, {"exit_code", code}});
}

} // namespace

int run(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    try {
        if (config.write_in_place && config.command != Command::Fix)
            throw UsageError("--write is only valid with fix");
        if (config.paths.empty())
            throw UsageError("no input files given");
        switch (config.command) {
        case Command::Lint:
            return cmd_lint(config, out, err);
        case Command::Fix:
            return cmd_fix(config, out, err);
        case Command::History:
            return cmd_history(config, out, err);
        case Command::Sample:
            return cmd_sample(config, out, err);
        case Command::PrDraft:
            return cmd_pr_draft(config, out, err);
        case Command::PrState:
            return cmd_pr_state(config, out, err);
        }
    } catch (const UsageError& e) {
        report_failure(config.format, out, err, kExitUsage, e.what());
        return kExitUsage;
    } catch (const IoError& e) {
        report_failure(config.format, out, err, kExitIo, e.what());
        return kExitIo;
    } catch (const Failure& e) {
        report_failure(config.format, out, err, e.code, e.what());
        return e.code;
    } catch (const std::exception& e) {
        report_failure(config.format, out, err, kExitError, e.what());
        return kExitError;
    }
    return kExitError;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    bool json_requested = false;
    for (int i = 1; i < argc; ++i) {
        std::string_view a = argv[i];
        if (a == "--format=json" || (a == "--format" && i + 1 < argc && std::string_view(argv[i + 1]) == "json"))
            json_requested = true;
    }

    CLI::App app{"Dockerfile smell detector, fixer and history miner"};
    app.name("dockerdoctor");
    app.require_subcommand(1, 1);

    CliConfig cfg;
    std::string format = "text";
    std::vector<std::string> rules_text;
    std::string last_modified, today, rule_text;
    std::uint64_t seed = 0;
    std::size_t total = 0;

    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    };
    auto add_fixtures = [&](CLI::App* sub) {
        sub->add_option("--registry-fixture", cfg.registry_fixture, "Registry snapshot (JSON lines)");
        sub->add_option("--apt-fixture", cfg.apt_fixture, "Package index snapshot (JSON lines)");
        sub->add_option("--last-modified-override", last_modified, "Dockerfile date (YYYY-MM-DD) used for DL3008");
    };

    auto* lint_cmd = app.add_subcommand("lint", "Report smells");
    lint_cmd->add_option("files", cfg.paths, "Dockerfiles")->required();
    add_format(lint_cmd);

    auto* fix_cmd = app.add_subcommand("fix", "Propose fixes as unified diffs");
    fix_cmd->add_option("files", cfg.paths, "Dockerfiles")->required();
    fix_cmd->add_option("--rules", rules_text, "Rules to fix (default: all)")->delimiter(',');
    fix_cmd->add_flag("--write", cfg.write_in_place, "Rewrite the files in place");
    fix_cmd->add_option("--patch-dir", cfg.patch_dir, "Also write one .patch file per input here");
    add_fixtures(fix_cmd);
    add_format(fix_cmd);

    auto* history_cmd = app.add_subcommand("history", "Mine smell histories from snapshot manifests");
    history_cmd->add_option("manifests", cfg.paths, "Manifest files (JSON lines)")->required();
    history_cmd->add_option("--out-dir", cfg.out_dir, "Where survival.csv, events.jsonl and totals.csv go");
    add_format(history_cmd);

    auto* sample_cmd = app.add_subcommand("sample", "Filter candidates and draw a stratified sample");
    sample_cmd->add_option("candidates", cfg.paths, "Candidates CSV")->required();
    sample_cmd->add_option("--total", total, "Sample size")->required();
    sample_cmd->add_option("--seed", seed, "Random seed");
    sample_cmd->add_option("--today", today, "Reference date for the activity window (YYYY-MM-DD)");
    sample_cmd->add_option("--weights", cfg.weights, "Stratum weights, e.g. DL3008=2,DL3006=1");
    sample_cmd->add_option("--output", cfg.output, "Write the sample here instead of stdout");
    add_format(sample_cmd);

    auto* draft_cmd = app.add_subcommand("pr-draft", "Fix one smell and write a pull-request draft");
    draft_cmd->add_option("file", cfg.paths, "Dockerfile")->required();
    draft_cmd->add_option("--repo", cfg.repo_id, "Repository id, e.g. owner/name")->required();
    draft_cmd->add_option("--rule", rule_text, "Rule to fix")->required();
    draft_cmd->add_option("--dockerfile-path", cfg.dockerfile_path, "Path shown in the message");
    draft_cmd->add_option("--out-dir", cfg.out_dir, "Directory for the .md and .patch files");
    add_fixtures(draft_cmd);
    add_format(draft_cmd);

    auto* state_cmd = app.add_subcommand("pr-state", "Record or list pull-request states");
    state_cmd->add_option("ledger", cfg.paths, "Ledger file (JSON lines)")->required();
    state_cmd->add_option("--repo", cfg.repo_id, "Repository id");
    state_cmd->add_option("--rule", rule_text, "Rule of the pull request");
    state_cmd->add_option("--state", cfg.state, "Ignored, RejectedClosed, Pending, Accepted or Fixed");
    state_cmd->add_option("--date", today, "Date of the state change (YYYY-MM-DD)");
    add_format(state_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report_failure(json_requested ? Format::Json : Format::Text, out, err, kExitUsage, e.what());
        return kExitUsage;
    }

    cfg.format = format == "json" ? Format::Json : Format::Text;
    try {
        if (*lint_cmd)
            cfg.command = Command::Lint;
        else if (*fix_cmd)
            cfg.command = Command::Fix;
        else if (*history_cmd)
            cfg.command = Command::History;
        else if (*sample_cmd)
            cfg.command = Command::Sample;
        else if (*draft_cmd)
            cfg.command = Command::PrDraft;
        else
            cfg.command = Command::PrState;

        if (!rules_text.empty()) {
            std::set<RuleId> rules;
            for (const auto& r : rules_text) {
                auto id = rule_from(r);
                if (!id)
                    throw UsageError("unknown rule '" + r + "'");
                rules.insert(*id);
            }
            cfg.rules = rules;
        }
        if (!rule_text.empty()) {
            cfg.rule = rule_from(rule_text);
            if (!cfg.rule)
                throw UsageError("unknown rule '" + rule_text + "'");
        }
        auto date_arg = [](const std::string& text, const char* what) {
            try {
                return parse_date(text);
            } catch (const DomainError&) {
                throw UsageError(std::string("bad ") + what + " '" + text + "', expected YYYY-MM-DD");
            }
        };
        if (!last_modified.empty())
            cfg.last_modified_override = date_arg(last_modified, "date");
        if (!today.empty())
            cfg.today = date_arg(today, "date");
        if (sample_cmd->count("--seed"))
            cfg.seed = seed;
        if (sample_cmd->count("--total"))
            cfg.total = total;
    } catch (const UsageError& e) {
        report_failure(cfg.format, out, err, kExitUsage, e.what());
        return kExitUsage;
    }
    if (const char* dir = std::getenv("DOCKERDOCTOR_FIXTURES"); dir && *dir)
        cfg.fixtures_dir = dir;
    return run(cfg, out, err);
}

} // namespace dockerdoctor::cli
