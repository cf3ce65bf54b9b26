#include "dockerdoctor/history.hpp"

#include "dockerdoctor/diff.hpp"
#include "dockerdoctor/error.hpp"
#include "dockerdoctor/resolvers.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dockerdoctor {

namespace {

using nlohmann::json;

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool blank(std::string_view line) { return line.find_first_not_of(" \t\r\n") == std::string_view::npos; }

// 2*LCS/(|a|+|b|) over characters.
double similarity(std::string_view a, std::string_view b)
{
    if (a.empty() && b.empty())
        return 1.0;
    if (a.size() > 4000 || b.size() > 4000)
        return a == b ? 1.0 : 0.0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return 2.0 * static_cast<double>(prev[b.size()]) / static_cast<double>(a.size() + b.size());
}

// Instruction index covering each 1-based line; -1 for trivia.
std::vector<long> line_owners(const DockerfileAst& ast, std::size_t line_count)
{
    std::vector<long> owner(line_count + 2, -1);
    const auto& list = ast.instructions();
    for (std::size_t i = 0; i < list.size(); ++i)
        for (int l = list[i].span.start_line; l <= list[i].span.end_line; ++l)
            if (l >= 1 && static_cast<std::size_t>(l) <= line_count)
                owner[static_cast<std::size_t>(l)] = static_cast<long>(i);
    return owner;
}

const std::set<std::string>& trivial_heads()
{
    static const std::set<std::string> kTrivial{"cd",   "rm",     "echo", "set", "true", "false", "exit",
                                                "test", "[",      "[[",   ":",   "export", "printf"};
    return kTrivial;
}

std::set<std::string> significant_heads(const Instruction& run, char escape)
{
    std::set<std::string> out;
    for (const auto& cmd : analyze_run(run, escape).deep)
        if (auto h = cmd.head(); h && !trivial_heads().contains(h->text))
            out.insert(h->text);
    return out;
}

std::set<std::string> apt_packages(const Instruction& run, char escape)
{
    std::set<std::string> out;
    for (const auto& cmd : analyze_run(run, escape).deep) {
        auto apt = analyze_apt_get(cmd);
        if (apt && apt->subcommand_name == "install")
            for (auto p : apt->packages)
                out.insert(apt_package_name(cmd.argv[p].text));
    }
    return out;
}

std::optional<std::string> destination(const Instruction& ins, char escape)
{
    auto folded = ins.folded_args(escape);
    auto [flags, off] = split_leading_flags(folded);
    std::string_view payload = std::string_view(folded).substr(off);
    if (payload.starts_with("[")) {
        auto j = json::parse(payload, nullptr, false);
        if (!j.is_discarded() && j.is_array() && !j.empty() && j.back().is_string())
            return j.back().get<std::string>();
    }
    auto end = payload.find_last_not_of(" \t");
    if (end == std::string_view::npos)
        return std::nullopt;
    auto begin = payload.find_last_of(" \t", end);
    begin = begin == std::string_view::npos ? 0 : begin + 1;
    return std::string(payload.substr(begin, end - begin + 1));
}

// What has to survive in the new file for a change to count as a fix.
struct Functionality {
    RuleId rule;
    std::string package;                 // DL3008
    std::string image;                   // DL3006
    std::optional<std::string> dest;     // DL3020
    std::set<std::string> heads;         // RUN based rules
    std::optional<std::string> cd_dir;   // DL3003

    bool carried_by(const Instruction& ins, char escape) const
    {
        switch (rule) {
        case RuleId::DL3008:
            return ins.keyword == Keyword::Run && apt_packages(ins, escape).contains(package);
        case RuleId::DL3006:
            if (ins.keyword != Keyword::From)
                return false;
            try {
                return canonical_image_name(parse_image_ref(ins.folded_args(escape)).name) == image;
            } catch (const EmptyImageName&) {
                return false;
            }
        case RuleId::DL4000:
            return ins.keyword == Keyword::Maintainer
                   || (ins.keyword == Keyword::Label
                       && lower(ins.folded_args(escape)).find("maintainer") != std::string::npos);
        case RuleId::DL3020:
            return (ins.keyword == Keyword::Copy || ins.keyword == Keyword::Add) && dest
                   && destination(ins, escape) == dest;
        case RuleId::DL3003:
            if (ins.keyword == Keyword::Workdir)
                return true;
            [[fallthrough]];
        case RuleId::DL3009:
        case RuleId::DL3015:
        case RuleId::DL4006: {
            if (ins.keyword != Keyword::Run)
                return false;
            auto mine = significant_heads(ins, escape);
            if (heads.empty())
                return rule == RuleId::DL3003 && cd_dir.has_value();
            return std::any_of(heads.begin(), heads.end(), [&](const std::string& h) { return mine.contains(h); });
        }
        }
        return false;
    }
};

bool analyzable(const Snapshot& s) { return !s.decode_error && is_valid_utf8(s.content); }

} // namespace

std::optional<std::string> decode_base64(std::string_view text)
{
    std::string clean;
    clean.reserve(text.size());
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            clean += c;
    if (clean.size() % 4 != 0)
        return std::nullopt;
    std::size_t pad = 0;
    while (pad < 2 && pad < clean.size() && clean[clean.size() - 1 - pad] == '=')
        ++pad;
    for (std::size_t i = 0; i < clean.size() - pad; ++i) {
        unsigned char c = static_cast<unsigned char>(clean[i]);
        if (!std::isalnum(c) && c != '+' && c != '/')
            return std::nullopt;
    }
    std::replace(clean.end() - static_cast<long>(pad), clean.end(), '=', 'A');
    using namespace boost::archive::iterators;
    using Decoder = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    std::string out(Decoder(clean.cbegin()), Decoder(clean.cend()));
    out.resize(out.size() - pad);
    return out;
}

std::string encode_base64(std::string_view bytes)
{
    using namespace boost::archive::iterators;
    using Encoder = base64_from_binary<transform_width<std::string_view::const_iterator, 6, 8>>;
    std::string out(Encoder(bytes.begin()), Encoder(bytes.end()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

std::vector<SnapshotHistory> load_manifest(std::istream& in)
{
    std::vector<SnapshotHistory> out;
    std::map<std::string, std::size_t> by_path;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line))
            continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw DomainError("manifest line " + std::to_string(lineno) + ": not a JSON object");
        Snapshot s;
        std::string path;
        try {
            path = j.at("path").get<std::string>();
            s.commit_id = j.at("commit_id").get<std::string>();
            s.commit_date = parse_timestamp(j.at("commit_date").get<std::string>());
            if (j.contains("message") && j["message"].is_string())
                s.message = j["message"].get<std::string>();
            auto decoded = decode_base64(j.at("content_base64").get<std::string>());
            if (decoded)
                s.content = std::move(*decoded);
            else
                s.decode_error = "invalid base64 content";
        } catch (const json::exception& e) {
            throw DomainError("manifest line " + std::to_string(lineno) + ": " + e.what());
        } catch (const DomainError& e) {
            throw DomainError("manifest line " + std::to_string(lineno) + ": " + e.what());
        }
        auto [it, fresh] = by_path.try_emplace(path, out.size());
        if (fresh)
            out.push_back({path, {}});
        auto& history = out[it->second];
        for (const auto& prior : history.snapshots)
            if (prior.commit_id == s.commit_id)
                throw DomainError("manifest line " + std::to_string(lineno) + ": duplicate commit " + s.commit_id
                                  + " for " + path);
        history.snapshots.push_back(std::move(s));
    }
    return out;
}

std::vector<SnapshotHistory> load_manifest_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    return load_manifest(in);
}

std::optional<std::set<SmellKey>> snapshot_smells(const Snapshot& s)
{
    if (!analyzable(s))
        return std::nullopt;
    return smell_set(parse_dockerfile(s.content));
}

std::set<SmellKey> disappeared(const SnapshotHistory& history, std::size_t i)
{
    if (i == 0 || i >= history.snapshots.size())
        throw DomainError("snapshot index out of range");
    auto before = snapshot_smells(history.snapshots[i - 1]);
    auto after = snapshot_smells(history.snapshots[i]);
    if (!before || !after)
        throw UnparseableSnapshot(history.path + ": snapshot " + std::to_string(before ? i : i - 1)
                                  + " cannot be analyzed");
    std::set<SmellKey> out;
    std::set_difference(before->begin(), before->end(), after->begin(), after->end(),
                        std::inserter(out, out.end()));
    return out;
}

std::set<std::size_t> candidate_fix_set(const SnapshotHistory& history) { return mine_history(history).pf; }

std::string_view disappearance_name(Disappearance d)
{
    switch (d) {
    case Disappearance::Modified:
        return "modified";
    case Disappearance::Removed:
        return "removed";
    case Disappearance::FileRewritten:
        return "file_rewritten";
    }
    return "?";
}

Disappearance classify_change(std::string_view before, std::string_view after, const SmellKey& key)
{
    auto old_ast = parse_dockerfile(before);
    auto new_ast = parse_dockerfile(after);
    auto old_lines = split_keep_newlines(before);
    auto new_lines = split_keep_newlines(after);
    auto edits = diff_lines(old_lines, new_lines);

    // Changed regions: runs of deletes/inserts between equal lines.
    std::vector<int> region_of_old(old_lines.size(), -1);
    std::vector<std::vector<std::size_t>> region_inserts;
    std::vector<std::vector<std::size_t>> region_deletes;
    bool in_region = false;
    for (const auto& e : edits) {
        if (e.kind == EditKind::Equal) {
            in_region = false;
            continue;
        }
        if (!in_region) {
            region_inserts.emplace_back();
            region_deletes.emplace_back();
            in_region = true;
        }
        if (e.kind == EditKind::Delete) {
            region_of_old[e.old_index] = static_cast<int>(region_deletes.size()) - 1;
            region_deletes.back().push_back(e.old_index);
        } else {
            region_inserts.back().push_back(e.new_index);
        }
    }

    // Rewrite check: old lines with neither an equal nor a similar counterpart.
    std::size_t counted = 0, unaligned = 0;
    for (std::size_t r = 0; r < region_deletes.size(); ++r) {
        std::vector<bool> used(region_inserts[r].size(), false);
        for (auto o : region_deletes[r]) {
            if (blank(old_lines[o]))
                continue;
            bool paired = false;
            for (std::size_t k = 0; k < region_inserts[r].size() && !paired; ++k) {
                if (used[k] || similarity(old_lines[o], new_lines[region_inserts[r][k]]) < 0.5)
                    continue;
                used[k] = paired = true;
            }
            if (!paired)
                ++unaligned;
        }
    }
    for (const auto& l : old_lines)
        if (!blank(l))
            ++counted;
    if (counted > 0 && static_cast<double>(unaligned) > kRewriteThreshold * static_cast<double>(counted))
        return Disappearance::FileRewritten;

    // Anchor of the smell in the old file.
    const char old_esc = old_ast.escape_char();
    const char new_esc = new_ast.escape_char();
    Functionality fn{key.rule, {}, {}, {}, {}, {}};
    std::set<int> anchor_lines;
    for (const auto& f : detect_rule(key.rule, old_ast)) {
        if (f.key != key)
            continue;
        const auto& ins = old_ast.instructions()[f.instruction];
        switch (key.rule) {
        case RuleId::DL3008: {
            fn.package = key.anchor;
            auto run = analyze_run(ins, old_esc);
            auto head_newlines = std::count(ins.keyword_text.begin(), ins.keyword_text.end(), '\n')
                                 + std::count(ins.separator.begin(), ins.separator.end(), '\n');
            for (const auto& cmd : run.deep) {
                auto apt = analyze_apt_get(cmd);
                if (!apt || apt->subcommand_name != "install" || !cmd.exact_offsets)
                    continue;
                for (auto p : apt->packages) {
                    const auto& w = cmd.argv[p];
                    if (apt_package_name(w.text) != key.anchor || w.begin > ins.raw_args.size())
                        continue;
                    auto nl = std::count(ins.raw_args.begin(), ins.raw_args.begin() + static_cast<long>(w.begin), '\n');
                    anchor_lines.insert(ins.span.start_line + static_cast<int>(head_newlines + nl));
                }
            }
            break;
        }
        case RuleId::DL3006:
            try {
                fn.image = canonical_image_name(parse_image_ref(ins.folded_args(old_esc)).name);
            } catch (const EmptyImageName&) {
            }
            break;
        case RuleId::DL3020:
            fn.dest = destination(ins, old_esc);
            break;
        case RuleId::DL3003: {
            auto run = analyze_run(ins, old_esc);
            for (const auto& cmd : run.deep)
                if (auto h = cmd.head(); h && h->text == "cd" && cmd.head_index() + 1 < cmd.argv.size())
                    fn.cd_dir = cmd.argv[cmd.head_index() + 1].text;
            fn.heads = significant_heads(ins, old_esc);
            break;
        }
        case RuleId::DL3009:
        case RuleId::DL3015:
        case RuleId::DL4006:
            fn.heads = significant_heads(ins, old_esc);
            break;
        case RuleId::DL4000:
            break;
        }
        if (key.rule != RuleId::DL3008)
            for (int l = ins.span.start_line; l <= ins.span.end_line; ++l)
                anchor_lines.insert(l);
        else if (anchor_lines.empty())
            anchor_lines.insert(ins.span.start_line);
    }
    if (anchor_lines.empty())
        return Disappearance::Removed;

    const auto& new_list = new_ast.instructions();
    bool anywhere = std::any_of(new_list.begin(), new_list.end(),
                                [&](const Instruction& ins) { return fn.carried_by(ins, new_esc); });
    if (!anywhere)
        return Disappearance::Removed;

    std::set<int> touched_regions;
    for (int l : anchor_lines) {
        auto idx = static_cast<std::size_t>(l - 1);
        if (idx < region_of_old.size() && region_of_old[idx] >= 0)
            touched_regions.insert(region_of_old[idx]);
    }
    // Anchor untouched: the smell went away through edits elsewhere.
    if (touched_regions.empty())
        return Disappearance::Modified;

    auto owners = line_owners(new_ast, new_lines.size());
    for (int r : touched_regions)
        for (auto n : region_inserts[static_cast<std::size_t>(r)]) {
            auto owner = owners[n + 1];
            if (owner >= 0 && fn.carried_by(new_list[static_cast<std::size_t>(owner)], new_esc))
                return Disappearance::Modified;
        }
    return Disappearance::Removed;
}

Disappearance classify_disappearance(const SnapshotHistory& history, std::size_t i, const SmellKey& key)
{
    if (i == 0 || i >= history.snapshots.size())
        throw DomainError("snapshot index out of range");
    const auto& a = history.snapshots[i - 1];
    const auto& b = history.snapshots[i];
    if (!analyzable(a) || !analyzable(b))
        throw UnparseableSnapshot(history.path + ": snapshot cannot be analyzed");
    return classify_change(a.content, b.content, key);
}

bool informed_hint(std::string_view message, RuleId rule)
{
    auto text = lower(message);
    if (text.find(lower(rule_name(rule))) != std::string::npos || text.find("hadolint") != std::string::npos)
        return true;
    const auto& kws = rule_info(rule).hint_keywords;
    return std::any_of(kws.begin(), kws.end(), [&](std::string_view kw) { return text.find(kw) != std::string::npos; });
}

HistoryResult mine_history(const SnapshotHistory& history)
{
    HistoryResult res;
    res.path = history.path;
    const auto& snaps = history.snapshots;
    res.eta.reserve(snaps.size());
    std::optional<std::size_t> prev;
    std::map<SmellKey, std::size_t> open; // key -> index into lifetimes
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        auto eta = snapshot_smells(snaps[i]);
        res.eta.push_back(eta);
        if (!eta) {
            res.warnings.push_back(history.path + ": skipping snapshot " + std::to_string(i) + " ("
                                   + snaps[i].commit_id + "): "
                                   + snaps[i].decode_error.value_or("content is not valid UTF-8"));
            continue;
        }
        if (prev) {
            const auto& before = *res.eta[*prev];
            for (const auto& key : before) {
                if (eta->contains(key))
                    continue;
                res.pf.insert(i);
                DisappearanceEvent ev;
                ev.path = history.path;
                ev.at = i;
                ev.commit_id = snaps[i].commit_id;
                ev.commit_date = snaps[i].commit_date;
                ev.key = key;
                ev.classification = classify_change(snaps[*prev].content, snaps[i].content, key);
                ev.informed_hint = informed_hint(snaps[i].message, key.rule);
                auto& life = res.lifetimes[open.at(key)];
                life.ended_at = i;
                life.ended_date = snaps[i].commit_date;
                life.classification = ev.classification;
                open.erase(key);
                res.events.push_back(std::move(ev));
            }
        }
        for (const auto& key : *eta) {
            if (open.contains(key))
                continue;
            open[key] = res.lifetimes.size();
            res.lifetimes.push_back({key, i, snaps[i].commit_date, std::nullopt, std::nullopt, std::nullopt});
        }
        prev = i;
    }
    return res;
}

SurvivalReport summarize_results(const std::vector<HistoryResult>& results)
{
    SurvivalReport rep;
    for (const auto& res : results) {
        rep.warnings.insert(rep.warnings.end(), res.warnings.begin(), res.warnings.end());
        for (const auto& life : res.lifetimes) {
            auto& t = rep.totals[life.key.rule];
            ++t.introduced;
            ++rep.quarters[{life.key.rule, quarter_of(life.introduced_date)}].introduced;
            if (!life.classification) {
                ++t.alive;
                continue;
            }
            auto& q = rep.quarters[{life.key.rule, quarter_of(*life.ended_date)}];
            switch (*life.classification) {
            case Disappearance::Modified:
                ++t.modified;
                ++q.modified;
                break;
            case Disappearance::Removed:
                ++t.removed;
                ++q.removed;
                break;
            case Disappearance::FileRewritten:
                ++t.rewritten;
                ++q.rewritten;
                break;
            }
            t.lifetime_commits.push_back(static_cast<long>(*life.ended_at - life.introduced_at));
            t.lifetime_days.push_back((day_of(*life.ended_date) - day_of(life.introduced_date)).count());
        }
        for (const auto& ev : res.events) {
            rep.totals[ev.key.rule].pf_commits.insert({res.path, ev.at});
            rep.pf_commits.insert({res.path, ev.at});
            rep.events.push_back(ev);
        }
    }
    return rep;
}

SurvivalReport summarize(const std::vector<SnapshotHistory>& histories)
{
    std::vector<HistoryResult> results;
    results.reserve(histories.size());
    for (const auto& h : histories)
        results.push_back(mine_history(h));
    return summarize_results(results);
}

std::optional<double> median(std::vector<long> values)
{
    if (values.empty())
        return std::nullopt;
    std::sort(values.begin(), values.end());
    auto n = values.size();
    if (n % 2 == 1)
        return static_cast<double>(values[n / 2]);
    return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

std::string survival_csv(const SurvivalReport& report)
{
    std::ostringstream out;
    out << "rule,quarter,introduced,modified,removed,rewritten\n";
    for (const auto& [k, q] : report.quarters)
        out << rule_name(k.first) << ',' << k.second << ',' << q.introduced << ',' << q.modified << ','
            << q.removed << ',' << q.rewritten << '\n';
    return out.str();
}

nlohmann::ordered_json event_json(const DisappearanceEvent& e)
{
    nlohmann::ordered_json j;
    j["path"] = e.path;
    j["at"] = e.at;
    j["commit_id"] = e.commit_id;
    j["commit_date"] = format_timestamp(e.commit_date);
    j["rule"] = rule_name(e.key.rule);
    j["key"] = e.key.to_string();
    j["classification"] = disappearance_name(e.classification);
    j["informed_hint"] = e.informed_hint;
    return j;
}

std::string events_jsonl(const SurvivalReport& report)
{
    std::string out;
    for (const auto& e : report.events) {
        out += event_json(e).dump();
        out += '\n';
    }
    return out;
}

std::string totals_csv(const SurvivalReport& report)
{
    auto num = [](std::optional<double> v) {
        if (!v)
            return std::string();
        std::ostringstream s;
        s << *v;
        return s.str();
    };
    std::ostringstream out;
    out << "rule,introduced,modified,removed,rewritten,alive,median_lifetime_commits,median_lifetime_days,pf_commits\n";
    RuleTotals all;
    for (const auto& [rule, t] : report.totals) {
        out << rule_name(rule) << ',' << t.introduced << ',' << t.modified << ',' << t.removed << ',' << t.rewritten
            << ',' << t.alive << ',' << num(median(t.lifetime_commits)) << ',' << num(median(t.lifetime_days)) << ','
            << t.pf_commits.size() << '\n';
        all.introduced += t.introduced;
        all.modified += t.modified;
        all.removed += t.removed;
        all.rewritten += t.rewritten;
        all.alive += t.alive;
        all.lifetime_commits.insert(all.lifetime_commits.end(), t.lifetime_commits.begin(), t.lifetime_commits.end());
        all.lifetime_days.insert(all.lifetime_days.end(), t.lifetime_days.begin(), t.lifetime_days.end());
    }
    out << "ALL," << all.introduced << ',' << all.modified << ',' << all.removed << ',' << all.rewritten << ','
        << all.alive << ',' << num(median(all.lifetime_commits)) << ',' << num(median(all.lifetime_days)) << ','
        << report.pf_commits.size() << '\n';
    return out.str();
}

} // namespace dockerdoctor
