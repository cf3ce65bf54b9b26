#include "dockerdoctor/resolvers.hpp"

#include "dockerdoctor/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>

namespace dockerdoctor {

namespace {

using nlohmann::json;

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn)
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw DomainError("line " + std::to_string(lineno) + ": not a JSON object");
        try {
            fn(j);
        } catch (const json::exception& e) {
            throw DomainError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const DomainError& e) {
            throw DomainError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::ifstream open_or_throw(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    return in;
}

Date json_date(const json& j, const char* field)
{
    return day_of(parse_timestamp(j.at(field).get<std::string>()));
}

} // namespace

std::string canonical_image_name(std::string_view name)
{
    if (name.starts_with("docker.io/"))
        name.remove_prefix(10);
    else if (name.starts_with("index.docker.io/"))
        name.remove_prefix(16);
    if (name.starts_with("library/"))
        name.remove_prefix(8);
    return std::string(name);
}

void RegistrySnapshot::add(std::string_view image, std::string_view digest, std::string_view tag, Date pushed)
{
    if (image.empty() || digest.empty() || tag.empty())
        throw DomainError("registry entry needs image, digest and tag");
    auto& digests = entries_[canonical_image_name(image)];
    for (const auto& d : digests)
        for (const auto& t : d.tags)
            if (t.tag_name == tag)
                throw DomainError("duplicate tag '" + std::string(tag) + "' for image " + std::string(image));
    auto it = std::find_if(digests.begin(), digests.end(), [&](const RegistryDigest& d) { return d.digest == digest; });
    if (it == digests.end()) {
        digests.push_back({std::string(digest), {}});
        it = digests.end() - 1;
    }
    it->tags.push_back({std::string(tag), pushed});
}

RegistrySnapshot RegistrySnapshot::load(std::istream& in)
{
    RegistrySnapshot snap;
    for_each_json_line(in, [&](const json& j) {
        snap.add(j.at("image").get<std::string>(), j.at("digest").get<std::string>(), j.at("tag").get<std::string>(),
                 json_date(j, "pushed_date"));
    });
    return snap;
}

RegistrySnapshot RegistrySnapshot::load_file(const std::string& path)
{
    auto in = open_or_throw(path);
    return load(in);
}

const std::vector<RegistryDigest>* RegistrySnapshot::find(std::string_view image) const
{
    auto it = entries_.find(canonical_image_name(image));
    return it == entries_.end() ? nullptr : &it->second;
}

TagResolution resolve_image_tag(const ImageRef& ref, const RegistrySnapshot& registry)
{
    const auto* digests = registry.find(ref.name);
    if (!digests)
        return {TagStatus::ImageNotFound, {}};
    const RegistryDigest* current = nullptr;
    for (const auto& d : *digests)
        for (const auto& t : d.tags)
            if (t.tag_name == "latest")
                current = &d;
    if (!current)
        return {TagStatus::NoTagAvailable, {}};
    const RegistryTag* best = nullptr;
    for (const auto& t : current->tags) {
        if (t.tag_name == "latest")
            continue;
        if (!best || t.pushed_date > best->pushed_date
            || (t.pushed_date == best->pushed_date && t.tag_name > best->tag_name))
            best = &t;
    }
    if (!best)
        return {TagStatus::NoTagAvailable, {}};
    return {TagStatus::Ok, best->tag_name};
}

void PackageIndexSnapshot::add(PackageRow row)
{
    if (row.distribution.empty() || row.series.empty() || row.package.empty() || row.version.empty())
        throw DomainError("package row needs distribution, series, package and version");
    for (const auto& r : rows_)
        if (r.distribution == row.distribution && r.series == row.series && r.package == row.package
            && r.version == row.version)
            throw DomainError("duplicate package row " + row.package + "=" + row.version);
    rows_.push_back(std::move(row));
}

PackageIndexSnapshot PackageIndexSnapshot::load(std::istream& in)
{
    PackageIndexSnapshot snap;
    for_each_json_line(in, [&](const json& j) {
        PackageRow row;
        row.distribution = j.at("distribution").get<std::string>();
        row.series = j.at("series").get<std::string>();
        row.package = j.at("package").get<std::string>();
        row.version = j.at("version").get<std::string>();
        row.published_date = json_date(j, "published_date");
        row.available = j.value("available", true);
        snap.add(std::move(row));
    });
    return snap;
}

PackageIndexSnapshot PackageIndexSnapshot::load_file(const std::string& path)
{
    auto in = open_or_throw(path);
    return load(in);
}

bool VersionPattern::matches(std::string_view version) const
{
    if (!text.empty() && text.back() == '*')
        return version.starts_with(std::string_view(text).substr(0, text.size() - 1));
    return version == text;
}

std::optional<std::string> select_apt_version(std::string_view package, std::string_view series, Date cutoff,
                                              const PackageIndexSnapshot& index)
{
    const PackageRow* best = nullptr;
    for (const auto& r : index.rows()) {
        if (r.distribution != "ubuntu" || r.series != series || r.package != package || r.published_date > cutoff)
            continue;
        // same-day publications: prefer the later row in the file
        if (!best || r.published_date >= best->published_date)
            best = &r;
    }
    if (!best)
        return std::nullopt;
    return best->version;
}

VersionPattern degrade_version(std::string_view version, PatternLevel level)
{
    if (level == PatternLevel::Exact)
        return {std::string(version), level};
    auto last = version.rfind('.');
    if (version.empty() || last == std::string_view::npos)
        throw TooFewSegments(std::string(version));
    if (level == PatternLevel::PatchWild)
        return {std::string(version.substr(0, last + 1)) + "*", level};
    auto prev = last == 0 ? std::string_view::npos : version.rfind('.', last - 1);
    if (prev == std::string_view::npos)
        throw TooFewSegments(std::string(version));
    return {std::string(version.substr(0, prev + 1)) + "*", level};
}

bool is_installable(std::string_view package, const VersionPattern& pattern, std::string_view series,
                    const PackageIndexSnapshot& index)
{
    return std::any_of(index.rows().begin(), index.rows().end(), [&](const PackageRow& r) {
        return r.available && r.distribution == "ubuntu" && r.series == series && r.package == package
               && pattern.matches(r.version);
    });
}

} // namespace dockerdoctor
