#include "dockerdoctor/error.hpp"
#include "dockerdoctor/resolvers.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace dockerdoctor;

namespace {

Date day(const char* s) { return parse_date(s); }

} // namespace

TEST_CASE("canonical image names")
{
    CHECK(canonical_image_name("ubuntu") == "ubuntu");
    CHECK(canonical_image_name("library/ubuntu") == "ubuntu");
    CHECK(canonical_image_name("docker.io/library/ubuntu") == "ubuntu");
    CHECK(canonical_image_name("index.docker.io/library/ubuntu") == "ubuntu");
    CHECK(canonical_image_name("docker.io/bitnami/nginx") == "bitnami/nginx");
    CHECK(canonical_image_name("ghcr.io/x/y") == "ghcr.io/x/y");
}

TEST_CASE("latest digest's most recent other tag")
{
    RegistrySnapshot reg;
    reg.add("ubuntu", "d1", "latest", day("2020-06-01"));
    reg.add("ubuntu", "d1", "20.04", day("2020-05-20"));
    reg.add("ubuntu", "d0", "18.04", day("2020-07-01"));
    auto r = resolve_image_tag(parse_image_ref("ubuntu"), reg);
    CHECK(r.status == TagStatus::Ok);
    CHECK(r.tag == "20.04");
}

TEST_CASE("latest-only digest")
{
    RegistrySnapshot reg;
    reg.add("x", "d1", "latest", day("2020-06-01"));
    CHECK(resolve_image_tag(parse_image_ref("x"), reg).status == TagStatus::NoTagAvailable);
    CHECK(resolve_image_tag(parse_image_ref("y"), reg).status == TagStatus::ImageNotFound);
}

TEST_CASE("equal dates break toward the lexicographically last tag")
{
    RegistrySnapshot reg;
    reg.add("ubuntu", "d1", "latest", day("2020-06-01"));
    reg.add("ubuntu", "d1", "20.04", day("2020-05-20"));
    reg.add("ubuntu", "d1", "focal", day("2020-05-20"));
    CHECK(resolve_image_tag(parse_image_ref("docker.io/library/ubuntu"), reg).tag == "focal");
}

TEST_CASE("registry loading")
{
    std::istringstream good(R"({"image":"library/ubuntu","digest":"d","tag":"latest","pushed_date":"2021-01-01"}
{"image":"ubuntu","digest":"d","tag":"x","pushed_date":"2021-01-02T10:00:00Z"}
)");
    auto reg = RegistrySnapshot::load(good);
    CHECK(resolve_image_tag(parse_image_ref("ubuntu"), reg).tag == "x");

    std::istringstream bad("{\"image\":\"u\"}\n");
    CHECK_THROWS_AS(RegistrySnapshot::load(bad), DomainError);
    std::istringstream notjson("nope\n");
    CHECK_THROWS_AS(RegistrySnapshot::load(notjson), DomainError);
    std::istringstream dup(R"({"image":"u","digest":"a","tag":"t","pushed_date":"2021-01-01"}
{"image":"u","digest":"b","tag":"t","pushed_date":"2021-01-02"}
)");
    CHECK_THROWS_AS(RegistrySnapshot::load(dup), DomainError);
}

TEST_CASE("brute-force max date over random registries")
{
    std::mt19937_64 rng(1234);
    for (int round = 0; round < 500; ++round) {
        RegistrySnapshot reg;
        struct Row {
            std::string digest, tag;
            Date pushed;
        };
        std::vector<Row> rows;
        std::uniform_int_distribution<int> ndig(1, 3), ntag(0, 4), dd(0, 40);
        int digests = ndig(rng);
        int tag_id = 0;
        std::string latest_digest = "d" + std::to_string(std::uniform_int_distribution<int>(0, digests - 1)(rng));
        for (int d = 0; d < digests; ++d) {
            auto name = "d" + std::to_string(d);
            if (name == latest_digest)
                rows.push_back({name, "latest", day("2021-01-01") + std::chrono::days(dd(rng))});
            for (int t = ntag(rng); t > 0; --t)
                rows.push_back({name, "t" + std::to_string(tag_id++), day("2021-01-01") + std::chrono::days(dd(rng))});
        }
        for (const auto& r : rows)
            reg.add("img", r.digest, r.tag, r.pushed);

        // enumerate: every non-latest tag on the latest digest, keep the max (date, name)
        std::optional<std::pair<Date, std::string>> best;
        for (const auto& r : rows)
            if (r.digest == latest_digest && r.tag != "latest") {
                std::pair<Date, std::string> cand{r.pushed, r.tag};
                if (!best || cand > *best)
                    best = cand;
            }
        auto got = resolve_image_tag(parse_image_ref("img"), reg);
        if (best) {
            CHECK(got.status == TagStatus::Ok);
            CHECK(got.tag == best->second);
        } else {
            CHECK(got.status == TagStatus::NoTagAvailable);
        }
        CHECK(got.tag != "latest");
    }
}

TEST_CASE("apt version selection on fixtures")
{
    auto apt = testsupport::apt_fixture();
    CHECK(select_apt_version("curl", "focal", day("2021-07-01"), *apt) == "7.68.0-1ubuntu2.5");
    CHECK(select_apt_version("curl", "trusty", day("2019-01-01"), *apt) == "7.35.0-1ubuntu2.20");
    CHECK(select_apt_version("curl", "focal", day("2021-09-01"), *apt) == "7.68.0-1ubuntu2.6");
    CHECK_FALSE(select_apt_version("nosuchpkg", "focal", day("2021-07-01"), *apt));
    CHECK_FALSE(select_apt_version("curl", "focal", day("2019-01-01"), *apt));
    // the cutoff day itself qualifies
    CHECK(select_apt_version("curl", "focal", day("2021-05-10"), *apt) == "7.68.0-1ubuntu2.5");
}

TEST_CASE("same-day rows resolve to the later row")
{
    PackageIndexSnapshot idx;
    idx.add({"ubuntu", "focal", "p", "1.0", day("2021-01-01")});
    idx.add({"ubuntu", "focal", "p", "1.1", day("2021-01-01")});
    CHECK(select_apt_version("p", "focal", day("2021-02-01"), idx) == "1.1");
    CHECK_THROWS_AS(idx.add({"ubuntu", "focal", "p", "1.1", day("2021-03-01")}), DomainError);
}

TEST_CASE("degrade_version")
{
    CHECK(degrade_version("7.68.0-1ubuntu2.5", PatternLevel::PatchWild).text == "7.68.0-1ubuntu2.*");
    CHECK(degrade_version("7.68.0-1ubuntu2.5", PatternLevel::MinorWild).text == "7.68.*");
    CHECK(degrade_version("1.2.3", PatternLevel::MinorWild).text == "1.*");
    CHECK(degrade_version("1.2.3", PatternLevel::Exact).text == "1.2.3");
    CHECK_THROWS_AS(degrade_version("5", PatternLevel::PatchWild), TooFewSegments);
    CHECK_THROWS_AS(degrade_version("5.1", PatternLevel::MinorWild), TooFewSegments);
    CHECK(degrade_version("5.1", PatternLevel::PatchWild).text == "5.*");
}

TEST_CASE("is_installable")
{
    auto apt = testsupport::apt_fixture();
    CHECK(is_installable("curl", {"7.68.0-1ubuntu2.*", PatternLevel::PatchWild}, "focal", *apt));
    CHECK_FALSE(is_installable("curl", {"9.*", PatternLevel::MinorWild}, "focal", *apt));
    CHECK(is_installable("curl", {"7.68.0-1ubuntu2.5", PatternLevel::Exact}, "focal", *apt));
    CHECK_FALSE(is_installable("curl", {"7.68.0-1ubuntu2", PatternLevel::Exact}, "focal", *apt));
    // published but withdrawn
    CHECK_FALSE(is_installable("curl", {"7.68.0-1ubuntu0.1", PatternLevel::Exact}, "focal", *apt));
    CHECK_FALSE(is_installable("curl", {"7.68.0-1ubuntu2.5", PatternLevel::Exact}, "bionic", *apt));
}

TEST_CASE("property: selected versions are never published after the cutoff")
{
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> nrows(0, 12), off(0, 60), pkg(0, 2), ser(0, 1);
    const char* pkgs[] = {"a", "b", "c"};
    const char* series[] = {"focal", "bionic"};
    for (int round = 0; round < 400; ++round) {
        PackageIndexSnapshot idx;
        int n = nrows(rng);
        for (int i = 0; i < n; ++i)
            idx.add({"ubuntu", series[ser(rng)], pkgs[pkg(rng)], "1." + std::to_string(i),
                     day("2021-01-01") + std::chrono::days(off(rng))});
        auto cutoff = day("2021-01-01") + std::chrono::days(off(rng));
        for (auto p : pkgs)
            for (auto s : series) {
                auto v = select_apt_version(p, s, cutoff, idx);
                std::optional<Date> best;
                for (const auto& r : idx.rows())
                    if (r.package == p && r.series == s && r.published_date <= cutoff)
                        best = best ? std::max(*best, r.published_date) : r.published_date;
                CHECK(v.has_value() == best.has_value());
                if (!v)
                    continue;
                auto row = std::find_if(idx.rows().begin(), idx.rows().end(), [&](const PackageRow& r) {
                    return r.package == p && r.series == s && r.version == *v;
                });
                REQUIRE(row != idx.rows().end());
                CHECK(row->published_date <= cutoff);
                CHECK(row->published_date == *best);
            }
    }
}

TEST_CASE("property: degradation widens the match set")
{
    auto apt = testsupport::apt_fixture();
    std::vector<std::string> versions;
    for (const auto& r : apt->rows())
        versions.push_back(r.version);
    versions.insert(versions.end(), {"1.2.3", "1.2.4", "1.3.0", "2.0", "7.68.0-1ubuntu2.55", "7.68.1"});
    for (const auto& v : versions) {
        auto segments = std::count(v.begin(), v.end(), '.');
        VersionPattern exact{v, PatternLevel::Exact};
        for (const auto& w : versions) {
            bool e = exact.matches(w);
            if (segments >= 1) {
                bool p = degrade_version(v, PatternLevel::PatchWild).matches(w);
                CHECK((!e || p));
                if (segments >= 2)
                    CHECK((!p || degrade_version(v, PatternLevel::MinorWild).matches(w)));
            }
        }
    }
}

TEST_CASE("apt index loading")
{
    std::istringstream in(
        R"({"distribution":"ubuntu","series":"focal","package":"p","version":"1","published_date":"2021-01-01","available":false}
{"distribution":"ubuntu","series":"focal","package":"p","version":"2","published_date":"2021-01-02"}
)");
    auto idx = PackageIndexSnapshot::load(in);
    REQUIRE(idx.rows().size() == 2);
    CHECK_FALSE(idx.rows()[0].available);
    CHECK(idx.rows()[1].available);
    std::istringstream bad(R"({"distribution":"ubuntu","series":"focal","package":"p","version":"1","published_date":"x"})");
    CHECK_THROWS_AS(PackageIndexSnapshot::load(bad), DomainError);
}
