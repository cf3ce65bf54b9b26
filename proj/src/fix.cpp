#include "dockerdoctor/fix.hpp"

#include "dockerdoctor/diff.hpp"
#include "dockerdoctor/error.hpp"

#include <algorithm>
#include <cctype>

namespace dockerdoctor {

namespace {

const std::map<std::string, std::string, std::less<>>& series_map()
{
    static const std::map<std::string, std::string, std::less<>> kMap{
        {"14.04", "trusty"}, {"16.04", "xenial"}, {"18.04", "bionic"},
        {"20.04", "focal"},  {"22.04", "jammy"},  {"24.04", "noble"},
    };
    return kMap;
}

struct Edit {
    std::size_t begin;
    std::size_t end;
    std::string replacement;
};

std::string apply_edits(std::string text, std::vector<Edit> edits)
{
    std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.begin > b.begin; });
    for (const auto& e : edits)
        text.replace(e.begin, e.end - e.begin, e.replacement);
    return text;
}

FixOutcome refused(const Finding& f, RefusalReason why)
{
    FixOutcome out;
    out.finding = f;
    out.status = FixStatus::Refused;
    out.refusal_reason = why;
    return out;
}

// Findings of the same rule that only differ by occurrence ordinal. Fixing
// one twin alone would hand its key to the next one.
std::vector<std::size_t> twin_instructions(const Finding& f, const DockerfileAst& ast)
{
    std::vector<std::size_t> out;
    for (const auto& other : detect_rule(f.rule, ast))
        if (other.key.stage == f.key.stage && other.key.anchor == f.key.anchor)
            out.push_back(other.instruction);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool literal_word(const Word& w) { return !w.has_expansion && !w.quoted && w.nested.empty() && w.raw == w.text; }

std::optional<RefusalReason> fix_dl3003(const Finding& f, DockerfileAst& work, std::vector<std::size_t>& inserted)
{
    char esc = work.escape_char();
    auto targets = twin_instructions(f, work);
    std::vector<std::pair<std::size_t, std::string>> workdirs;
    for (auto idx : targets) {
        auto& ins = work.instructions()[idx];
        auto run = analyze_run(ins, esc);
        const auto& chain = run.chain;
        if (chain.exec_form || chain.unbalanced_quote || chain.commands.size() < 2)
            return RefusalReason::UnsupportedShape;
        const auto& first = chain.commands.front();
        if (first.argv.size() != 2 || first.head_index() != 0 || first.argv[0].text != "cd"
            || chain.connectors.front().kind != Connector::AndIf || !literal_word(first.argv[1])
            || first.argv[1].text.starts_with("-"))
            return RefusalReason::UnsupportedShape;
        auto other_cd = std::count_if(run.deep.begin(), run.deep.end(), [](const SimpleCommand& c) {
            auto h = c.head();
            return h && h->text == "cd";
        });
        if (other_cd != 1)
            return RefusalReason::UnsupportedShape;
        auto cut_from = run.payload_offset + first.begin;
        auto cut_to = run.payload_offset + chain.commands[1].begin;
        ins.set_args(apply_edits(ins.raw_args, {{cut_from, cut_to, ""}}));
        workdirs.emplace_back(idx, first.argv[1].text);
    }
    for (auto it = workdirs.rbegin(); it != workdirs.rend(); ++it) {
        work.insert_before(it->first, Keyword::Workdir, it->second);
        inserted.push_back(it->first);
    }
    return std::nullopt;
}

std::optional<RefusalReason> fix_dl3006(const Finding& f, DockerfileAst& work, const FixContext& ctx)
{
    auto& ins = work.instructions()[f.instruction];
    if (!ctx.registry)
        return RefusalReason::NoTagAvailable;
    bool folded = ins.raw_args.find('\n') != std::string::npos;
    auto args = folded ? ins.folded_args(work.escape_char()) : ins.raw_args;
    ImageRef ref;
    try {
        ref = parse_image_ref(args);
    } catch (const EmptyImageName&) {
        return RefusalReason::UnsupportedShape;
    }
    auto res = resolve_image_tag(ref, *ctx.registry);
    if (res.status != TagStatus::Ok)
        return RefusalReason::NoTagAvailable;
    auto at = ref.image_offset + ref.image_len;
    ins.set_args(apply_edits(args, {{at, at, ":" + res.tag}}));
    return std::nullopt;
}

std::optional<RefusalReason> fix_dl3008(const Finding& f, DockerfileAst& work, const FixContext& ctx)
{
    const auto& name = f.key.anchor;
    auto series = stage_series(work, f.key.stage, ctx);
    if (!series)
        return RefusalReason::NonUbuntuBase;

    struct Site {
        std::size_t instruction;
        Word word;
    };
    std::vector<Site> sites;
    char esc = work.escape_char();
    for (std::size_t i = 0; i < work.instructions().size(); ++i) {
        const auto& ins = work.instructions()[i];
        if (ins.keyword != Keyword::Run || ins.stage_index != f.key.stage)
            continue;
        auto run = analyze_run(ins, esc);
        for (const auto& cmd : run.deep) {
            auto apt = analyze_apt_get(cmd);
            if (!apt || apt->subcommand_name != "install")
                continue;
            for (auto p : apt->packages) {
                const auto& w = cmd.argv[p];
                if (apt_package_pinned(w.text) || apt_package_name(w.text) != name)
                    continue;
                if (w.has_expansion)
                    return RefusalReason::VariableBearing;
                if (!cmd.exact_offsets || !literal_word(w) || run.chain.unbalanced_quote)
                    return RefusalReason::UnsupportedShape;
                sites.push_back({i, w});
            }
        }
    }
    if (sites.empty())
        return RefusalReason::UnsupportedShape;

    if (!ctx.apt_index)
        return RefusalReason::UnresolvableVersion;
    auto version = select_apt_version(name, *series, ctx.last_modified, *ctx.apt_index);
    if (!version)
        return RefusalReason::UnresolvableVersion;
    std::optional<VersionPattern> chosen;
    bool short_version = false;
    for (auto level : {PatternLevel::PatchWild, PatternLevel::MinorWild}) {
        try {
            auto pattern = degrade_version(*version, level);
            if (is_installable(name, pattern, *series, *ctx.apt_index)) {
                chosen = pattern;
                break;
            }
        } catch (const TooFewSegments&) {
            short_version = true;
            break;
        }
    }
    if (!chosen)
        return short_version ? RefusalReason::TooFewSegments : RefusalReason::UnresolvableVersion;

    std::map<std::size_t, std::vector<Edit>> edits;
    for (const auto& s : sites)
        edits[s.instruction].push_back({s.word.begin, s.word.end, s.word.text + "=" + chosen->text});
    for (auto& [idx, list] : edits) {
        auto& ins = work.instructions()[idx];
        ins.set_args(apply_edits(ins.raw_args, std::move(list)));
    }
    return std::nullopt;
}

std::optional<RefusalReason> fix_dl3009(const Finding& f, DockerfileAst& work)
{
    for (auto idx : twin_instructions(f, work)) {
        auto& ins = work.instructions()[idx];
        auto run = analyze_run(ins, work.escape_char());
        if (run.chain.exec_form || run.chain.unbalanced_quote || run.chain.commands.empty())
            return RefusalReason::UnsupportedShape;
        auto at = run.payload_offset + run.chain.commands.back().end;
        ins.set_args(apply_edits(ins.raw_args, {{at, at, " && rm -rf /var/lib/apt/lists/*"}}));
    }
    return std::nullopt;
}

std::optional<RefusalReason> fix_dl3015(const Finding& f, DockerfileAst& work)
{
    for (auto idx : twin_instructions(f, work)) {
        auto& ins = work.instructions()[idx];
        auto run = analyze_run(ins, work.escape_char());
        if (run.chain.unbalanced_quote)
            return RefusalReason::UnsupportedShape;
        std::vector<Edit> edits;
        for (const auto& cmd : run.deep) {
            auto apt = analyze_apt_get(cmd);
            if (!apt || apt->subcommand_name != "install" || apt->no_install_recommends)
                continue;
            if (!cmd.exact_offsets)
                return RefusalReason::UnsupportedShape;
            auto at = cmd.argv[*apt->subcommand].end;
            edits.push_back({at, at, " --no-install-recommends"});
        }
        ins.set_args(apply_edits(ins.raw_args, std::move(edits)));
    }
    return std::nullopt;
}

std::optional<RefusalReason> fix_dl3020(const Finding& f, DockerfileAst& work)
{
    for (auto idx : twin_instructions(f, work)) {
        auto& ins = work.instructions()[idx];
        auto folded = ins.folded_args(work.escape_char());
        auto [flags, off] = split_leading_flags(folded);
        for (const auto& flag : flags)
            if (flag.starts_with("--checksum") || flag.starts_with("--keep-git-dir"))
                return RefusalReason::UnsupportedShape;
        // COPY neither downloads nor unpacks, so any remote or archive source
        // would change meaning.
        std::vector<std::string> words;
        std::string_view payload = std::string_view(folded).substr(off);
        if (payload.starts_with("[")) {
            auto j = nlohmann::json::parse(payload, nullptr, false);
            if (j.is_discarded() || !j.is_array())
                return RefusalReason::UnsupportedShape;
            for (const auto& e : j)
                words.push_back(e.is_string() ? e.get<std::string>() : e.dump());
        } else {
            std::size_t p = 0;
            while (p < payload.size()) {
                while (p < payload.size() && std::isspace(static_cast<unsigned char>(payload[p])))
                    ++p;
                auto b = p;
                while (p < payload.size() && !std::isspace(static_cast<unsigned char>(payload[p])))
                    ++p;
                if (p > b)
                    words.emplace_back(payload.substr(b, p - b));
            }
        }
        for (std::size_t w = 0; w + 1 < words.size(); ++w) {
            const auto& src = words[w];
            if (src.find("://") != std::string::npos || src.starts_with("git@"))
                return RefusalReason::UnsupportedShape;
            for (std::string_view ext : {".tar", ".Z", ".bz2", ".gz", ".lz", ".lzma", ".tZ", ".tb2", ".tbz", ".tbz2",
                                         ".tgz", ".tlz", ".tpz", ".txz", ".xz"})
                if (std::string_view(src).ends_with(ext))
                    return RefusalReason::UnsupportedShape;
        }
        ins.set_keyword(Keyword::Copy);
    }
    return std::nullopt;
}

std::optional<RefusalReason> fix_dl4000(DockerfileAst& work)
{
    for (auto& ins : work.instructions()) {
        if (ins.keyword != Keyword::Maintainer)
            continue;
        std::string value;
        for (char c : ins.folded_args(work.escape_char())) {
            if (c == '"' || c == '\\')
                value += '\\';
            value += c;
        }
        ins.set_keyword(Keyword::Label);
        ins.set_args("maintainer=\"" + value + "\"");
    }
    return std::nullopt;
}

std::optional<RefusalReason> fix_dl4006(const Finding& f, DockerfileAst& work, const FixContext& ctx,
                                        std::vector<std::size_t>& inserted)
{
    auto stages = stages_of(work);
    if (auto root = root_image(stages, f.key.stage)) {
        std::string lower = root->name;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        if (lower.find("alpine") != std::string::npos || lower.find("windows") != std::string::npos)
            return RefusalReason::UnsupportedShape;
    }
    (void)ctx;
    const auto& list = work.instructions();
    auto flagged = detect_rule(RuleId::DL4006, work);
    std::set<std::size_t> points;
    for (auto idx : twin_instructions(f, work)) {
        // first flagged RUN after the last SHELL that precedes the target
        std::size_t seg = idx;
        while (seg > 0 && list[seg - 1].stage_index == list[idx].stage_index && list[seg - 1].keyword != Keyword::Shell)
            --seg;
        for (const auto& other : flagged)
            if (other.instruction >= seg && other.instruction <= idx) {
                points.insert(other.instruction);
                break;
            }
    }
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
        work.insert_before(*it, Keyword::Shell, R"(["/bin/bash", "-o", "pipefail", "-c"])");
        inserted.push_back(*it);
    }
    return std::nullopt;
}

bool same_site(const Finding& a, const Finding& b)
{
    if (a.rule != b.rule || a.instruction != b.instruction)
        return false;
    return a.rule != RuleId::DL3008 || a.key.anchor == b.key.anchor;
}

} // namespace

std::optional<std::string> ubuntu_series_for_tag(std::string_view tag)
{
    auto head = tag.substr(0, tag.find('-'));
    const auto& map = series_map();
    if (auto it = map.find(head); it != map.end())
        return it->second;
    for (const auto& [version, name] : map)
        if (name == head)
            return name;
    return std::nullopt;
}

std::optional<std::string> stage_series(const DockerfileAst& ast, int stage, const FixContext& ctx)
{
    if (auto it = ctx.base_series.find(stage); it != ctx.base_series.end())
        return it->second;
    auto root = root_image(stages_of(ast), stage);
    if (!root || canonical_image_name(root->name) != "ubuntu" || !root->tag)
        return std::nullopt;
    return ubuntu_series_for_tag(*root->tag);
}

std::string_view fix_status_name(FixStatus s) { return s == FixStatus::Fixed ? "fixed" : "refused"; }

std::string_view refusal_name(RefusalReason r)
{
    switch (r) {
    case RefusalReason::UnresolvableVersion:
        return "unresolvable_version";
    case RefusalReason::NonUbuntuBase:
        return "non_ubuntu_base";
    case RefusalReason::VariableBearing:
        return "variable_bearing";
    case RefusalReason::NoTagAvailable:
        return "no_tag_available";
    case RefusalReason::TooFewSegments:
        return "too_few_segments";
    case RefusalReason::UnsupportedShape:
        return "unsupported_shape";
    }
    return "?";
}

std::set<int> touched_lines_between(std::string_view before, std::string_view after)
{
    auto a = split_keep_newlines(before);
    auto b = split_keep_newlines(after);
    auto edits = diff_lines(a, b);
    std::set<int> out;
    std::size_t next_old = 0;
    bool after_delete = false;
    for (const auto& e : edits) {
        switch (e.kind) {
        case EditKind::Equal:
            next_old = e.old_index + 1;
            after_delete = false;
            break;
        case EditKind::Delete:
            out.insert(static_cast<int>(e.old_index) + 1);
            next_old = e.old_index + 1;
            after_delete = true;
            break;
        case EditKind::Insert:
            // pure insertions mark the line they land in front of
            if (!after_delete && !a.empty())
                out.insert(static_cast<int>(std::min(next_old, a.size() - 1)) + 1);
            break;
        }
    }
    return out;
}

FixOutcome fix(const Finding& finding, const DockerfileAst& ast, const FixContext& ctx)
{
    auto current = detect_rule(finding.rule, ast);
    auto it = std::find_if(current.begin(), current.end(),
                           [&](const Finding& f) { return f.key == finding.key && f.instruction == finding.instruction; });
    if (it == current.end())
        throw FindingNotPresent(std::string(rule_name(finding.rule)) + " at line " + std::to_string(finding.line)
                                + " is not present");
    const Finding& f = *it;

    DockerfileAst work = ast;
    std::vector<std::size_t> inserted;
    std::optional<RefusalReason> why;
    switch (f.rule) {
    case RuleId::DL3003:
        why = fix_dl3003(f, work, inserted);
        break;
    case RuleId::DL3006:
        why = fix_dl3006(f, work, ctx);
        break;
    case RuleId::DL3008:
        why = fix_dl3008(f, work, ctx);
        break;
    case RuleId::DL3009:
        why = fix_dl3009(f, work);
        break;
    case RuleId::DL3015:
        why = fix_dl3015(f, work);
        break;
    case RuleId::DL3020:
        why = fix_dl3020(f, work);
        break;
    case RuleId::DL4000:
        why = fix_dl4000(work);
        break;
    case RuleId::DL4006:
        why = fix_dl4006(f, work, ctx, inserted);
        break;
    }
    if (why)
        return refused(finding, *why);

    auto before = print_dockerfile(ast);
    auto after = print_dockerfile(work);
    auto reparsed = parse_dockerfile(after);
    if (smell_set(reparsed).contains(f.key))
        return refused(finding, f.rule == RuleId::DL3008 ? RefusalReason::UnresolvableVersion
                                                         : RefusalReason::UnsupportedShape);

    FixOutcome out;
    out.finding = finding;
    out.status = FixStatus::Fixed;
    out.touched_lines = touched_lines_between(before, after);
    out.inserted_at = std::move(inserted);
    out.patched = std::move(reparsed);
    return out;
}

FixAllResult fix_all(const DockerfileAst& ast, const FixContext& ctx, const std::set<RuleId>& rules)
{
    FixAllResult result{ast, {}};
    std::vector<Finding> todo;
    for (auto& f : lint(ast))
        if (rules.contains(f.rule))
            todo.push_back(std::move(f));
    if (todo.empty())
        return result;

    const auto original = print_dockerfile(ast);
    std::vector<std::size_t> position(ast.instructions().size());
    for (std::size_t i = 0; i < position.size(); ++i)
        position[i] = i;

    for (const auto& f0 : todo) {
        Finding probe = f0;
        probe.instruction = position[f0.instruction];
        std::optional<Finding> match;
        for (auto& f : detect_rule(f0.rule, result.patched))
            if (same_site(f, probe)) {
                match = std::move(f);
                break;
            }
        if (!match) {
            // taken care of by an earlier fix
            FixOutcome done;
            done.finding = f0;
            done.status = FixStatus::Fixed;
            done.patched = result.patched;
            result.outcomes.push_back(std::move(done));
            continue;
        }
        auto outcome = fix(*match, result.patched, ctx);
        outcome.finding = f0;
        if (outcome.status == FixStatus::Fixed) {
            auto before = print_dockerfile(result.patched);
            auto after = print_dockerfile(*outcome.patched);
            // touched lines in the numbering of the input file
            auto orig_lines = split_keep_newlines(original);
            auto cur_lines = split_keep_newlines(before);
            std::vector<int> to_original(cur_lines.size() + 1, static_cast<int>(orig_lines.size()));
            {
                auto edits = diff_lines(orig_lines, cur_lines);
                std::vector<int> pending;
                for (const auto& e : edits) {
                    if (e.kind == EditKind::Equal) {
                        for (auto p : pending)
                            to_original[static_cast<std::size_t>(p)] = static_cast<int>(e.old_index) + 1;
                        pending.clear();
                        to_original[e.new_index] = static_cast<int>(e.old_index) + 1;
                    } else if (e.kind == EditKind::Insert) {
                        pending.push_back(static_cast<int>(e.new_index));
                    }
                }
                for (auto p : pending)
                    to_original[static_cast<std::size_t>(p)] = std::max(1, static_cast<int>(orig_lines.size()));
            }
            std::set<int> mapped;
            for (int line : outcome.touched_lines)
                mapped.insert(to_original[static_cast<std::size_t>(line - 1)]);
            outcome.touched_lines = std::move(mapped);

            for (auto& p : position) {
                std::size_t shift = 0;
                for (auto at : outcome.inserted_at)
                    if (at <= p)
                        ++shift;
                p += shift;
            }
            result.patched = *outcome.patched;
        }
        result.outcomes.push_back(std::move(outcome));
    }
    return result;
}

std::string render_patch(const DockerfileAst& before, const DockerfileAst& after, std::string_view path)
{
    std::string p(path);
    return unified_diff(print_dockerfile(before), print_dockerfile(after), "a/" + p, "b/" + p);
}

} // namespace dockerdoctor
