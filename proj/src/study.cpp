#include "dockerdoctor/study.hpp"

#include "dockerdoctor/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/tokenizer.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace dockerdoctor {

namespace {

const char* const kCsvHeader = "repo_id,stars,merged_pr_count,last_commit_date,dockerfile_path,rule,build_ok,smell_in_latest";

bool parse_bool(const std::string& s)
{
    std::string v(s);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw DomainError("not a boolean: '" + s + "'");
}

long parse_count(const std::string& s)
{
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        throw DomainError("not an integer: '" + s + "'");
    }
    if (used != s.size() || v < 0)
        throw DomainError("not a non-negative integer: '" + s + "'");
    return v;
}

std::string csv_field(const std::string& s)
{
    // boost's escaped_list_separator dialect: backslash escapes inside quotes
    if (s.find_first_of(",\"\\\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + '"';
}

void replace_all(std::string& text, std::string_view from, std::string_view to)
{
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
        text.replace(pos, from.size(), to);
}

} // namespace

long required_sample_size(double confidence, double margin, double p)
{
    auto open_unit = [](double v) { return std::isfinite(v) && v > 0.0 && v < 1.0; };
    if (!open_unit(confidence) || !open_unit(margin) || !open_unit(p))
        throw DomainError("confidence, margin and p must lie strictly between 0 and 1");
    boost::math::normal_distribution<double> standard;
    double z = boost::math::quantile(standard, 1.0 - (1.0 - confidence) / 2.0);
    double n = z * z * p * (1.0 - p) / (margin * margin);
    return static_cast<long>(std::ceil(n - 1e-9));
}

std::vector<CandidateRecord> load_candidates_csv(std::istream& in)
{
    using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
    std::vector<CandidateRecord> out;
    std::string line;
    int lineno = 0;
    std::map<std::string, std::size_t> column;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        try {
            Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
            cells.assign(tok.begin(), tok.end());
        } catch (const boost::escaped_list_error& e) {
            throw DomainError("candidates line " + std::to_string(lineno) + ": " + e.what());
        }
        if (column.empty()) {
            for (std::size_t i = 0; i < cells.size(); ++i)
                column[cells[i]] = i;
            for (const char* need : {"repo_id", "stars", "merged_pr_count", "last_commit_date", "dockerfile_path",
                                     "rule", "build_ok", "smell_in_latest"})
                if (!column.contains(need))
                    throw DomainError(std::string("candidates header lacks column ") + need);
            continue;
        }
        auto cell = [&](const char* name) -> const std::string& {
            auto idx = column.at(name);
            if (idx >= cells.size())
                throw DomainError("candidates line " + std::to_string(lineno) + ": missing " + name);
            return cells[idx];
        };
        try {
            CandidateRecord r;
            r.repo_id = cell("repo_id");
            r.stars = parse_count(cell("stars"));
            r.merged_pr_count = parse_count(cell("merged_pr_count"));
            r.last_commit_date = day_of(parse_timestamp(cell("last_commit_date")));
            r.dockerfile_path = cell("dockerfile_path");
            auto rule = rule_from(cell("rule"));
            if (!rule)
                throw DomainError("unknown rule '" + cell("rule") + "'");
            r.rule = *rule;
            r.build_ok = parse_bool(cell("build_ok"));
            r.smell_in_latest = parse_bool(cell("smell_in_latest"));
            out.push_back(std::move(r));
        } catch (const DomainError& e) {
            throw DomainError("candidates line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::string candidates_csv(const std::vector<CandidateRecord>& records)
{
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& r : records)
        out << csv_field(r.repo_id) << ',' << r.stars << ',' << r.merged_pr_count << ','
            << format_date(r.last_commit_date) << ',' << csv_field(r.dockerfile_path) << ',' << rule_name(r.rule)
            << ',' << (r.build_ok ? "true" : "false") << ',' << (r.smell_in_latest ? "true" : "false") << '\n';
    return out.str();
}

bool passes_filters(const CandidateRecord& r, Date today)
{
    auto age = (today - r.last_commit_date).count();
    return r.stars >= kMinStars && r.merged_pr_count >= 1 && age <= kActivityWindowDays && r.smell_in_latest
           && r.build_ok;
}

std::vector<CandidateRecord> filter_candidates(const std::vector<CandidateRecord>& records, Date today)
{
    std::vector<CandidateRecord> out;
    std::set<std::string> repos;
    for (const auto& r : records)
        if (passes_filters(r, today) && repos.insert(r.repo_id).second)
            out.push_back(r);
    return out;
}

std::vector<StratumQuota> allocate_quotas(const std::map<RuleId, std::size_t>& sizes, std::size_t total,
                                          const std::optional<std::map<RuleId, double>>& weights)
{
    std::vector<StratumQuota> strata;
    std::vector<double> weight;
    for (auto rule : kAllRules) {
        auto it = sizes.find(rule);
        if (it == sizes.end() || it->second == 0)
            continue;
        double w = static_cast<double>(it->second);
        if (weights) {
            auto wt = weights->find(rule);
            w = wt == weights->end() ? 0.0 : wt->second;
            if (!std::isfinite(w) || w < 0.0)
                throw DomainError("stratum weights must be finite and non-negative");
        }
        strata.push_back({rule, it->second, 0});
        weight.push_back(w);
    }
    std::size_t available = 0;
    for (const auto& s : strata)
        available += s.population;
    if (total > available)
        throw InsufficientPopulation("requested " + std::to_string(total) + " records but the strata hold "
                                     + std::to_string(available));

    std::vector<bool> capped(strata.size(), false);
    std::size_t remaining = total;
    for (;;) {
        double wsum = 0.0;
        for (std::size_t i = 0; i < strata.size(); ++i)
            if (!capped[i])
                wsum += weight[i];
        std::vector<std::size_t> open;
        for (std::size_t i = 0; i < strata.size(); ++i)
            if (!capped[i])
                open.push_back(i);
        if (open.empty() || remaining == 0)
            break;
        if (wsum <= 0.0)
            throw InsufficientPopulation("no stratum with a positive weight can take the remaining "
                                         + std::to_string(remaining) + " records");

        std::vector<std::size_t> share(strata.size(), 0);
        std::vector<std::pair<double, std::size_t>> rest;
        std::size_t given = 0;
        for (auto i : open) {
            double exact = static_cast<double>(remaining) * weight[i] / wsum;
            share[i] = static_cast<std::size_t>(std::floor(exact));
            given += share[i];
            rest.push_back({exact - std::floor(exact), i});
        }
        std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t k = 0; given < remaining && k < rest.size(); ++k, ++given)
            ++share[rest[k].second];

        bool overflow = false;
        for (auto i : open)
            if (share[i] > strata[i].population) {
                capped[i] = true;
                overflow = true;
            }
        if (!overflow) {
            for (auto i : open)
                strata[i].quota = share[i];
            break;
        }
        remaining = total;
        for (std::size_t i = 0; i < strata.size(); ++i)
            if (capped[i]) {
                strata[i].quota = strata[i].population;
                remaining -= strata[i].population;
            }
    }
    return strata;
}

std::vector<CandidateRecord> stratified_sample(const std::vector<CandidateRecord>& records, std::size_t total,
                                               std::uint64_t seed, const std::optional<std::map<RuleId, double>>& weights)
{
    std::map<RuleId, std::vector<const CandidateRecord*>> strata;
    for (const auto& r : records)
        strata[r.rule].push_back(&r);
    std::map<RuleId, std::size_t> sizes;
    for (const auto& [rule, list] : strata)
        sizes[rule] = list.size();
    auto quotas = allocate_quotas(sizes, total, weights);

    std::mt19937_64 rng(seed);
    std::vector<CandidateRecord> out;
    out.reserve(total);
    for (const auto& q : quotas) {
        std::vector<const CandidateRecord*> picked;
        const auto& pool = strata.at(q.rule);
        std::sample(pool.begin(), pool.end(), std::back_inserter(picked), q.quota, rng);
        for (const auto* r : picked)
            out.push_back(*r);
    }
    return out;
}

std::string render_pr_body(std::string_view dockerfile_path, RuleId violation_id, std::string_view violation_description,
                           std::string_view fixing_rule_explanation)
{
    if (dockerfile_path.empty())
        throw EmptyField("dockerfile_path");
    if (violation_description.empty())
        throw EmptyField("violation_description");
    if (fixing_rule_explanation.empty())
        throw EmptyField("fixing_rule_explanation");
    std::string body =
        "Hi!\n"
        "\n"
        "The Dockerfile placed at {dockerfile_path} contained a best practice violation, detected by the linting "
        "tool hadolint, and identified as {violation_id}.\n"
        "\n"
        "The {violation_id} occurs when {violation_description}\n"
        "\n"
        "In this pull request, we propose a fix for the detected smell, automatically generated by a tool. To fix "
        "this smell, specifically, we {fixing_rule_explanation}.\n"
        "This change is only aimed at fixing the specific smell. In case of rejection, please briefly indicate the "
        "reason (e.g., if you believe that the fix is not valid or useful and why, along with suggestions for "
        "possible improvement).\n"
        "\n"
        "Thanks in advance.\n";
    // Substitute in one pass so placeholder-like text inside values stays literal.
    std::string out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto open = body.find('{', pos);
        if (open == std::string::npos) {
            out.append(body, pos);
            break;
        }
        auto close = body.find('}', open);
        out.append(body, pos, open - pos);
        auto name = std::string_view(body).substr(open + 1, close - open - 1);
        if (name == "dockerfile_path")
            out += dockerfile_path;
        else if (name == "violation_id")
            out += rule_name(violation_id);
        else if (name == "violation_description")
            out += violation_description;
        else
            out += fixing_rule_explanation;
        pos = close + 1;
    }
    return out;
}

PrDraft make_pr_draft(std::string_view dockerfile_path, RuleId rule, std::string patch)
{
    const auto& info = rule_info(rule);
    PrDraft d;
    d.rule = rule;
    d.title = "Fix " + std::string(rule_name(rule)) + " in " + std::string(dockerfile_path);
    d.body = render_pr_body(dockerfile_path, rule, info.description, info.fix_explanation);
    d.patch = std::move(patch);
    return d;
}

std::string draft_stem(std::string_view repo_id, RuleId rule)
{
    std::string stem(repo_id);
    std::replace(stem.begin(), stem.end(), '/', '_');
    replace_all(stem, "..", "__");
    return stem + "-" + std::string(rule_name(rule));
}

std::pair<std::filesystem::path, std::filesystem::path> write_pr_draft(const std::filesystem::path& dir,
                                                                       std::string_view repo_id, const PrDraft& draft)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    auto stem = draft_stem(repo_id, draft.rule);
    auto md = dir / (stem + ".md");
    auto patch = dir / (stem + ".patch");
    for (const auto& [path, text] : {std::pair{md, draft.body}, std::pair{patch, draft.patch}}) {
        std::ofstream out(path, std::ios::binary);
        out << text;
        if (!out)
            throw IoError("cannot write " + path.string());
    }
    return {md, patch};
}

std::string_view pr_state_name(PrState s)
{
    switch (s) {
    case PrState::Ignored:
        return "Ignored";
    case PrState::RejectedClosed:
        return "RejectedClosed";
    case PrState::Pending:
        return "Pending";
    case PrState::Accepted:
        return "Accepted";
    case PrState::Fixed:
        return "Fixed";
    }
    return "?";
}

std::optional<PrState> pr_state_from(std::string_view name)
{
    std::string v;
    for (char c : name)
        if (std::isalpha(static_cast<unsigned char>(c)))
            v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto s : {PrState::Ignored, PrState::RejectedClosed, PrState::Pending, PrState::Accepted, PrState::Fixed}) {
        std::string n;
        for (char c : pr_state_name(s))
            n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (n == v)
            return s;
    }
    return std::nullopt;
}

PrLedger PrLedger::load(std::istream& in)
{
    PrLedger ledger;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw DomainError("ledger line " + std::to_string(lineno) + ": not a JSON object");
        try {
            PrLedgerEntry e;
            e.repo_id = j.at("repo_id").get<std::string>();
            auto rule = rule_from(j.at("rule").get<std::string>());
            auto state = pr_state_from(j.at("state").get<std::string>());
            if (!rule || !state)
                throw DomainError("unknown rule or state");
            e.rule = *rule;
            e.state = *state;
            e.recorded_at = day_of(parse_timestamp(j.at("recorded_at").get<std::string>()));
            ledger.append(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw DomainError("ledger line " + std::to_string(lineno) + ": " + e.what());
        } catch (const DomainError& e) {
            throw DomainError("ledger line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return ledger;
}

PrLedger PrLedger::load_file(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path))
        return {};
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    return load(in);
}

void PrLedger::append(PrLedgerEntry entry)
{
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
        if (it->repo_id == entry.repo_id && it->rule == entry.rule) {
            if (entry.recorded_at < it->recorded_at)
                throw DomainError("state for " + entry.repo_id + " " + std::string(rule_name(entry.rule))
                                  + " recorded out of order");
            break;
        }
    entries_.push_back(std::move(entry));
}

std::optional<PrState> PrLedger::current(std::string_view repo_id, RuleId rule) const
{
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
        if (it->repo_id == repo_id && it->rule == rule)
            return it->state;
    return std::nullopt;
}

std::string PrLedger::to_json_line(const PrLedgerEntry& e)
{
    nlohmann::ordered_json j;
    j["repo_id"] = e.repo_id;
    j["rule"] = rule_name(e.rule);
    j["state"] = pr_state_name(e.state);
    j["recorded_at"] = format_date(e.recorded_at);
    return j.dump();
}

} // namespace dockerdoctor
