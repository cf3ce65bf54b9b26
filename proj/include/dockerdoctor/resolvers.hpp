#pragma once

#include "dockerdoctor/dates.hpp"
#include "dockerdoctor/dockerfile.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dockerdoctor {

struct RegistryTag {
    std::string tag_name;
    Date pushed_date;
};

struct RegistryDigest {
    std::string digest;
    std::vector<RegistryTag> tags;
};

/// Image name -> digests and the tags pointing at them. Names are stored in
/// canonical form ("ubuntu", "bitnami/nginx").
class RegistrySnapshot {
public:
    void add(std::string_view image, std::string_view digest, std::string_view tag, Date pushed);

    /// JSON lines {image, digest, tag, pushed_date}. Throws DomainError with the
    /// offending line number on bad input.
    static RegistrySnapshot load(std::istream& in);
    static RegistrySnapshot load_file(const std::string& path);

    const std::vector<RegistryDigest>* find(std::string_view image) const;
    bool empty() const { return entries_.empty(); }

private:
    std::map<std::string, std::vector<RegistryDigest>, std::less<>> entries_;
};

/// Strips "docker.io/" and "library/" prefixes.
std::string canonical_image_name(std::string_view name);

enum class TagStatus { Ok, NoTagAvailable, ImageNotFound };

struct TagResolution {
    TagStatus status = TagStatus::ImageNotFound;
    std::string tag;
};

/// Most recently pushed non-"latest" tag sharing the digest that `latest`
/// points at. Ties go to the lexicographically last tag name.
TagResolution resolve_image_tag(const ImageRef& ref, const RegistrySnapshot& registry);

struct PackageRow {
    std::string distribution;
    std::string series;
    std::string package;
    std::string version;
    Date published_date;
    /// False for versions that were published but are gone from the archive;
    /// they can be selected by date but an install of them fails.
    bool available = true;
};

class PackageIndexSnapshot {
public:
    void add(PackageRow row);

    /// JSON lines {distribution, series, package, version, published_date[, available]}.
    static PackageIndexSnapshot load(std::istream& in);
    static PackageIndexSnapshot load_file(const std::string& path);

    const std::vector<PackageRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }

    /// Copy without the rows matching the predicate, for what-if tests.
    template <typename Pred>
    PackageIndexSnapshot without(Pred&& pred) const
    {
        PackageIndexSnapshot out;
        for (const auto& r : rows_)
            if (!pred(r))
                out.rows_.push_back(r);
        return out;
    }

private:
    std::vector<PackageRow> rows_;
};

enum class PatternLevel { Exact, PatchWild, MinorWild };

struct VersionPattern {
    std::string text;
    PatternLevel level = PatternLevel::Exact;

    bool matches(std::string_view version) const;
};

/// Version of (ubuntu, series, package) with the latest publication date not
/// after the cutoff.
std::optional<std::string> select_apt_version(std::string_view package, std::string_view series, Date cutoff,
                                              const PackageIndexSnapshot& index);

/// PatchWild replaces the last dot-segment with '*', MinorWild the last two.
/// Throws TooFewSegments. Exact returns the version unchanged.
VersionPattern degrade_version(std::string_view version, PatternLevel level);

/// Simulated `apt-get install pkg=pattern`: true iff an available row of the
/// series matches.
bool is_installable(std::string_view package, const VersionPattern& pattern, std::string_view series,
                    const PackageIndexSnapshot& index);

} // namespace dockerdoctor
