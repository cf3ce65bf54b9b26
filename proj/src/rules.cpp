#include "dockerdoctor/rules.hpp"

#include "dockerdoctor/error.hpp"

#include <boost/algorithm/string/predicate.hpp>

#include <algorithm>
#include <map>

namespace dockerdoctor {

namespace {

const std::array<RuleInfo, 8>& catalog()
{
    static const std::array<RuleInfo, 8> kCatalog{{
        {RuleId::DL3003, "Use WORKDIR to switch to a directory",
         "a RUN instruction changes directory with `cd` instead of using the WORKDIR instruction.",
         "replaced the `cd` command with an equivalent WORKDIR instruction placed before the RUN instruction",
         {"workdir", "cd "}},
        {RuleId::DL3006, "Always tag the version of an image explicitly",
         "the base image in a FROM instruction is not pinned to an explicit version tag.",
         "pinned the base image to the most recent tag that points to the same image digest as `latest`",
         {"pin", "tag", "base image"}},
        {RuleId::DL3008, "Pin versions in apt get install. Instead of `apt-get install <package>` use `apt-get install <package>=<version>`",
         "packages are installed with apt-get without pinning their versions.",
         "pinned each package to the version available for the base image series at the Dockerfile's last modification date, keeping only the MAJOR.MINOR part fixed",
         {"pin", "version"}},
        {RuleId::DL3009, "Delete the apt lists (/var/lib/apt/lists) after installing something",
         "the apt package lists are left in the image after running apt-get update.",
         "added the removal of /var/lib/apt/lists at the end of the same RUN instruction",
         {"apt lists", "/var/lib/apt/lists", "apt cache", "cache"}},
        {RuleId::DL3015, "Avoid additional packages by specifying `--no-install-recommends`",
         "apt-get install is used without the `--no-install-recommends` option, pulling in packages that are not needed.",
         "added the `--no-install-recommends` option to the apt-get install command",
         {"no-install-recommends", "recommends"}},
        {RuleId::DL3020, "Use COPY instead of ADD for files and folders",
         "ADD is used to copy local files or folders, a job COPY does more transparently.",
         "replaced the ADD instruction with COPY",
         {"copy instead of add", "add to copy", "add with copy", "use copy"}},
        {RuleId::DL4000, "MAINTAINER is deprecated",
         "the deprecated MAINTAINER instruction is used.",
         "replaced the MAINTAINER instruction with the equivalent LABEL maintainer instruction",
         {"maintainer", "deprecated"}},
        {RuleId::DL4006, "Set the SHELL option -o pipefail before RUN with a pipe in it. If you are using /bin/sh in an alpine image or if your shell is symlinked to busybox then consider explicitly setting your SHELL to /bin/ash, or disable this check",
         "a RUN instruction uses a pipe without the `-o pipefail` shell option, so failures on the left of the pipe go unnoticed.",
         "added a SHELL instruction enabling `-o pipefail` before the RUN instruction that uses the pipe",
         {"pipefail"}},
    }};
    return kCatalog;
}

std::string first_line_snippet(const Instruction& ins)
{
    auto t = ins.text();
    if (auto nl = t.find('\n'); nl != std::string::npos)
        t.resize(nl);
    if (!t.empty() && t.back() == '\r')
        t.pop_back();
    return t;
}

// Ordinal of each instruction among identical normalized instructions of its stage.
std::vector<int> occurrence_ordinals(const DockerfileAst& ast)
{
    std::map<std::pair<int, std::string>, int> seen;
    std::vector<int> out;
    out.reserve(ast.instructions().size());
    for (const auto& ins : ast.instructions())
        out.push_back(seen[{ins.stage_index, ins.normalized(ast.escape_char())}]++);
    return out;
}

Finding make_finding(RuleId rule, const DockerfileAst& ast, std::size_t idx, SmellKey key, std::string snippet = {})
{
    const auto& ins = ast.instructions()[idx];
    Finding f;
    f.rule = rule;
    f.line = ins.span.start_line;
    f.message = std::string(rule_info(rule).message);
    f.key = std::move(key);
    f.snippet = snippet.empty() ? first_line_snippet(ins) : std::move(snippet);
    f.instruction = idx;
    return f;
}

SmellKey instruction_key(RuleId rule, const DockerfileAst& ast, std::size_t idx, const std::vector<int>& ordinals)
{
    const auto& ins = ast.instructions()[idx];
    return SmellKey{rule, ins.stage_index, ins.normalized(ast.escape_char()), ordinals[idx]};
}

template <typename Fn>
void for_each_run(const DockerfileAst& ast, Fn&& fn)
{
    const auto& list = ast.instructions();
    for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i].keyword == Keyword::Run)
            fn(i, analyze_run(list[i], ast.escape_char()));
}

bool has_apt_lists_cache_mount(const std::vector<std::string>& flags)
{
    return std::any_of(flags.begin(), flags.end(), [](const std::string& f) {
        return f.starts_with("--mount=") && f.find("type=cache") != std::string::npos
               && f.find("/var/lib/apt") != std::string::npos;
    });
}

bool removes_apt_lists(const SimpleCommand& cmd)
{
    auto h = cmd.head();
    if (!h || h->text != "rm")
        return false;
    for (std::size_t i = cmd.head_index() + 1; i < cmd.argv.size(); ++i) {
        const auto& a = cmd.argv[i].text;
        if (a == "/var/lib/apt/lists" || a == "/var/lib/apt/lists/" || a == "/var/lib/apt/lists/*")
            return true;
    }
    return false;
}

std::vector<std::string> json_or_words(std::string_view folded)
{
    std::vector<std::string> out;
    if (!folded.empty() && folded.front() == '[') {
        auto j = nlohmann::json::parse(folded, nullptr, false);
        if (!j.is_discarded() && j.is_array()) {
            for (const auto& e : j)
                if (e.is_string())
                    out.push_back(e.get<std::string>());
            return out;
        }
    }
    std::size_t p = 0;
    while (p < folded.size()) {
        while (p < folded.size() && std::isspace(static_cast<unsigned char>(folded[p])))
            ++p;
        auto b = p;
        while (p < folded.size() && !std::isspace(static_cast<unsigned char>(folded[p])))
            ++p;
        if (p > b)
            out.emplace_back(folded.substr(b, p - b));
    }
    return out;
}

bool shell_has_pipefail(const std::vector<std::string>& argv)
{
    for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
        const auto& a = argv[i];
        if (a.size() >= 2 && a[0] == '-' && a[1] != '-' && a.find('o') != std::string::npos
            && argv[i + 1] == "pipefail")
            return true;
    }
    return false;
}

bool non_posix_shell(const std::vector<std::string>& argv)
{
    if (argv.empty())
        return false;
    auto exe = argv.front();
    if (auto slash = exe.find_last_of("/\\"); slash != std::string::npos)
        exe = exe.substr(slash + 1);
    std::transform(exe.begin(), exe.end(), exe.begin(), [](unsigned char c) { return std::tolower(c); });
    return exe == "pwsh" || exe == "pwsh.exe" || exe == "powershell" || exe == "powershell.exe" || exe == "cmd"
           || exe == "cmd.exe";
}

const std::array<std::string_view, 15> kArchiveExtensions{".tar", ".Z",   ".bz2", ".gz",  ".lz",
                                                          ".lzma", ".tZ",  ".tb2", ".tbz", ".tbz2",
                                                          ".tgz",  ".tlz", ".tpz", ".txz", ".xz"};

bool is_url(std::string_view s) { return s.starts_with("http://") || s.starts_with("https://"); }

bool is_archive(std::string_view s)
{
    return std::any_of(kArchiveExtensions.begin(), kArchiveExtensions.end(),
                       [&](std::string_view ext) { return s.ends_with(ext); });
}

std::vector<Finding> detect_dl3003(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    auto ordinals = occurrence_ordinals(ast);
    for_each_run(ast, [&](std::size_t i, const RunView& run) {
        bool hit = std::any_of(run.deep.begin(), run.deep.end(), [](const SimpleCommand& c) {
            auto h = c.head();
            return h && h->text == "cd";
        });
        if (hit)
            out.push_back(make_finding(RuleId::DL3003, ast, i, instruction_key(RuleId::DL3003, ast, i, ordinals)));
    });
    return out;
}

std::vector<Finding> detect_dl3006(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    std::vector<std::string> aliases;
    const auto& list = ast.instructions();
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i].keyword != Keyword::From)
            continue;
        std::optional<ImageRef> ref;
        try {
            ref = parse_image_ref(list[i].folded_args(ast.escape_char()));
        } catch (const EmptyImageName&) {
            continue;
        }
        bool prior_alias = std::find(aliases.begin(), aliases.end(), ref->name) != aliases.end();
        if (!ref->pinned() && ref->name != "scratch" && !prior_alias && ref->name.find('$') == std::string::npos)
            out.push_back(make_finding(RuleId::DL3006, ast, i, SmellKey{RuleId::DL3006, list[i].stage_index, "", 0}));
        if (ref->alias)
            aliases.push_back(*ref->alias);
    }
    return out;
}

std::vector<Finding> detect_dl3008(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    std::set<std::pair<int, std::string>> seen;
    for_each_run(ast, [&](std::size_t i, const RunView& run) {
        int stage = ast.instructions()[i].stage_index;
        for (const auto& cmd : run.deep) {
            auto apt = analyze_apt_get(cmd);
            if (!apt || apt->subcommand_name != "install")
                continue;
            for (auto p : apt->packages) {
                const auto& word = cmd.argv[p].text;
                if (apt_package_pinned(word))
                    continue;
                auto name = apt_package_name(word);
                if (!seen.insert({stage, name}).second)
                    continue;
                out.push_back(make_finding(RuleId::DL3008, ast, i, SmellKey{RuleId::DL3008, stage, name, 0},
                                           cmd.argv[p].raw));
            }
        }
    });
    return out;
}

std::vector<Finding> detect_dl3009(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    auto stages = stages_of(ast);
    std::set<int> checked;
    if (!stages.empty())
        checked.insert(static_cast<int>(stages.size()) - 1);
    for (const auto& s : stages)
        if (s.base_stage)
            checked.insert(*s.base_stage);
    auto ordinals = occurrence_ordinals(ast);
    for_each_run(ast, [&](std::size_t i, const RunView& run) {
        if (!checked.contains(ast.instructions()[i].stage_index))
            return;
        if (has_apt_lists_cache_mount(run.flags))
            return;
        bool updates = std::any_of(run.deep.begin(), run.deep.end(), [](const SimpleCommand& c) {
            auto apt = analyze_apt_get(c);
            return apt && apt->subcommand_name == "update";
        });
        bool cleans = std::any_of(run.deep.begin(), run.deep.end(), removes_apt_lists);
        if (updates && !cleans)
            out.push_back(make_finding(RuleId::DL3009, ast, i, instruction_key(RuleId::DL3009, ast, i, ordinals)));
    });
    return out;
}

std::vector<Finding> detect_dl3015(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    auto ordinals = occurrence_ordinals(ast);
    for_each_run(ast, [&](std::size_t i, const RunView& run) {
        bool hit = std::any_of(run.deep.begin(), run.deep.end(), [](const SimpleCommand& c) {
            auto apt = analyze_apt_get(c);
            return apt && apt->subcommand_name == "install" && !apt->no_install_recommends;
        });
        if (hit)
            out.push_back(make_finding(RuleId::DL3015, ast, i, instruction_key(RuleId::DL3015, ast, i, ordinals)));
    });
    return out;
}

std::vector<Finding> detect_dl3020(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    auto ordinals = occurrence_ordinals(ast);
    const auto& list = ast.instructions();
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i].keyword != Keyword::Add)
            continue;
        auto folded = list[i].folded_args(ast.escape_char());
        auto [flags, off] = split_leading_flags(folded);
        auto words = json_or_words(std::string_view(folded).substr(off));
        if (words.size() < 2)
            continue;
        bool hit = std::any_of(words.begin(), words.end() - 1,
                               [](const std::string& src) { return !is_url(src) && !is_archive(src); });
        if (hit)
            out.push_back(make_finding(RuleId::DL3020, ast, i, instruction_key(RuleId::DL3020, ast, i, ordinals)));
    }
    return out;
}

std::vector<Finding> detect_dl4000(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    const auto& list = ast.instructions();
    for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i].keyword == Keyword::Maintainer)
            out.push_back(make_finding(RuleId::DL4000, ast, i, SmellKey{RuleId::DL4000, -1, "maintainer", 0}));
    return out;
}

std::vector<Finding> detect_dl4006(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    auto ordinals = occurrence_ordinals(ast);
    const auto& list = ast.instructions();
    std::optional<std::vector<std::string>> shell;
    int stage = -2;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& ins = list[i];
        if (ins.stage_index != stage) {
            stage = ins.stage_index;
            shell.reset();
        }
        if (ins.keyword == Keyword::Shell) {
            shell = json_or_words(ins.folded_args(ast.escape_char()));
            continue;
        }
        if (ins.keyword != Keyword::Run)
            continue;
        if (shell && (shell_has_pipefail(*shell) || non_posix_shell(*shell)))
            continue;
        auto run = analyze_run(ins, ast.escape_char());
        if (has_pipe_anywhere(run.chain, ast.escape_char()))
            out.push_back(make_finding(RuleId::DL4006, ast, i, instruction_key(RuleId::DL4006, ast, i, ordinals)));
    }
    return out;
}

} // namespace

std::string_view rule_name(RuleId rule)
{
    switch (rule) {
    case RuleId::DL3003:
        return "DL3003";
    case RuleId::DL3006:
        return "DL3006";
    case RuleId::DL3008:
        return "DL3008";
    case RuleId::DL3009:
        return "DL3009";
    case RuleId::DL3015:
        return "DL3015";
    case RuleId::DL3020:
        return "DL3020";
    case RuleId::DL4000:
        return "DL4000";
    case RuleId::DL4006:
        return "DL4006";
    }
    return "?";
}

std::optional<RuleId> rule_from(std::string_view name)
{
    for (auto r : kAllRules)
        if (boost::iequals(rule_name(r), name))
            return r;
    return std::nullopt;
}

const RuleInfo& rule_info(RuleId rule)
{
    for (const auto& info : catalog())
        if (info.id == rule)
            return info;
    throw Error("unknown rule");
}

std::string SmellKey::to_string() const
{
    std::string out(rule_name(rule));
    out += '|';
    out += std::to_string(stage);
    out += '|';
    out += anchor;
    out += '|';
    out += std::to_string(ordinal);
    return out;
}

RunView analyze_run(const Instruction& run, char escape)
{
    RunView view;
    auto [flags, off] = split_leading_flags(run.raw_args);
    view.flags = std::move(flags);
    view.payload_offset = off;
    view.chain = parse_run_payload(std::string_view(run.raw_args).substr(off), escape);
    view.deep = all_commands_deep(view.chain, escape);
    for (auto& cmd : view.deep) {
        if (!cmd.exact_offsets)
            continue;
        cmd.begin += off;
        cmd.end += off;
        for (auto& w : cmd.argv) {
            w.begin += off;
            w.end += off;
        }
    }
    return view;
}

std::vector<StageInfo> stages_of(const DockerfileAst& ast)
{
    std::vector<StageInfo> out;
    std::map<std::string, int> aliases;
    const auto& list = ast.instructions();
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i].keyword != Keyword::From)
            continue;
        StageInfo s;
        s.from_instruction = i;
        try {
            s.image = parse_image_ref(list[i].folded_args(ast.escape_char()));
        } catch (const EmptyImageName&) {
        }
        if (s.image) {
            if (auto it = aliases.find(s.image->name); it != aliases.end() && !s.image->pinned())
                s.base_stage = it->second;
            if (s.image->alias)
                aliases[*s.image->alias] = static_cast<int>(out.size());
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::optional<ImageRef> root_image(const std::vector<StageInfo>& stages, int stage)
{
    int guard = 0;
    while (stage >= 0 && stage < static_cast<int>(stages.size()) && guard++ < 64) {
        const auto& s = stages[static_cast<std::size_t>(stage)];
        if (!s.base_stage)
            return s.image;
        stage = *s.base_stage;
    }
    return std::nullopt;
}

std::vector<Finding> detect_rule(RuleId rule, const DockerfileAst& ast)
{
    std::vector<Finding> out;
    switch (rule) {
    case RuleId::DL3003:
        out = detect_dl3003(ast);
        break;
    case RuleId::DL3006:
        out = detect_dl3006(ast);
        break;
    case RuleId::DL3008:
        out = detect_dl3008(ast);
        break;
    case RuleId::DL3009:
        out = detect_dl3009(ast);
        break;
    case RuleId::DL3015:
        out = detect_dl3015(ast);
        break;
    case RuleId::DL3020:
        out = detect_dl3020(ast);
        break;
    case RuleId::DL4000:
        out = detect_dl4000(ast);
        break;
    case RuleId::DL4006:
        out = detect_dl4006(ast);
        break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Finding> lint(const DockerfileAst& ast)
{
    std::vector<Finding> out;
    for (auto rule : kAllRules) {
        auto part = detect_rule(rule, ast);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::set<SmellKey> smell_set(const DockerfileAst& ast)
{
    std::set<SmellKey> out;
    for (auto& f : lint(ast))
        out.insert(std::move(f.key));
    return out;
}

nlohmann::ordered_json report_json(std::string_view path, const std::vector<Finding>& findings)
{
    nlohmann::ordered_json doc;
    doc["path"] = path;
    doc["findings"] = nlohmann::ordered_json::array();
    for (const auto& f : findings) {
        nlohmann::ordered_json item;
        item["rule"] = rule_name(f.rule);
        item["line"] = f.line;
        item["message"] = f.message;
        item["snippet"] = f.snippet;
        doc["findings"].push_back(std::move(item));
    }
    return doc;
}

} // namespace dockerdoctor
