#include "dockerdoctor/error.hpp"
#include "dockerdoctor/history.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace dockerdoctor;
using testsupport::make_snapshot;

namespace {

SmellKey key(RuleId r, int stage, std::string anchor, int ordinal = 0) { return {r, stage, std::move(anchor), ordinal}; }

SnapshotHistory history_of(std::vector<Snapshot> snaps)
{
    SnapshotHistory h;
    h.path = "Dockerfile";
    h.snapshots = std::move(snaps);
    return h;
}

} // namespace

TEST_CASE("base64")
{
    CHECK(encode_base64("") == "");
    CHECK(encode_base64("f") == "Zg==");
    CHECK(encode_base64("foobar") == "Zm9vYmFy");
    CHECK(decode_base64("Zm9v\nYmE=") == "fooba");
    CHECK(decode_base64("") == "");
    CHECK_FALSE(decode_base64("Zm9v!"));
    CHECK_FALSE(decode_base64("Zm9vY"));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        std::string s(std::uniform_int_distribution<int>(0, 40)(rng), '\0');
        for (auto& c : s)
            c = static_cast<char>(rng());
        CHECK(decode_base64(encode_base64(s)) == s);
    }
}

TEST_CASE("manifest loading")
{
    std::istringstream in(
        R"({"path":"a/Dockerfile","commit_id":"1","commit_date":"2020-01-01T00:00:00Z","message":"m","content_base64":"RlJPTSB1YnVudHUK"}
{"path":"b/Dockerfile","commit_id":"1","commit_date":"2020-01-01T00:00:00Z","message":"m","content_base64":"RlJPTSBhOjEK"}
{"path":"a/Dockerfile","commit_id":"2","commit_date":"2020-01-02T00:00:00Z","message":"m","content_base64":"%%%"}
)");
    auto hs = load_manifest(in);
    REQUIRE(hs.size() == 2);
    CHECK(hs[0].path == "a/Dockerfile");
    REQUIRE(hs[0].snapshots.size() == 2);
    CHECK(hs[0].snapshots[0].content == "FROM ubuntu\n");
    CHECK(hs[0].snapshots[1].decode_error.has_value());

    std::istringstream dup(
        R"({"path":"a","commit_id":"1","commit_date":"2020-01-01","message":"","content_base64":""}
{"path":"a","commit_id":"1","commit_date":"2020-01-02","message":"","content_base64":""}
)");
    CHECK_THROWS_AS(load_manifest(dup), DomainError);
    std::istringstream bad("{\"path\":\"a\"}\n");
    CHECK_THROWS_AS(load_manifest(bad), DomainError);
}

TEST_CASE("disappeared: examples")
{
    auto same = history_of({make_snapshot("0", "2020-01-01", "FROM ubuntu\n"), make_snapshot("1", "2020-01-02", "FROM ubuntu\n")});
    CHECK(disappeared(same, 1).empty());

    auto pinned = history_of(
        {make_snapshot("0", "2020-01-01", "FROM ubuntu\n"), make_snapshot("1", "2020-01-02", "FROM ubuntu:20.04\n")});
    CHECK(disappeared(pinned, 1) == std::set<SmellKey>{key(RuleId::DL3006, 0, "")});

    auto wget = history_of({make_snapshot("0", "2020-01-01",
                                          "FROM ubuntu:20.04\nRUN apt-get install -y --no-install-recommends curl=1 wget\n"),
                            make_snapshot("1", "2020-01-02",
                                          "FROM ubuntu:20.04\nRUN apt-get install -y --no-install-recommends curl=1\n")});
    CHECK(disappeared(wget, 1) == std::set<SmellKey>{key(RuleId::DL3008, 0, "wget")});
    CHECK(classify_disappearance(wget, 1, key(RuleId::DL3008, 0, "wget")) == Disappearance::Removed);
}

TEST_CASE("candidate fix set examples")
{
    CHECK(candidate_fix_set(history_of({make_snapshot("0", "2020-01-01", "FROM ubuntu\n")})).empty());

    auto h = history_of({make_snapshot("0", "2020-01-01", "FROM ubuntu\n"),
                         make_snapshot("1", "2020-01-02", "FROM ubuntu:20.04\n"),
                         make_snapshot("2", "2020-01-03", "FROM ubuntu:20.04\nCMD x\n")});
    CHECK(candidate_fix_set(h) == std::set<std::size_t>{1});

    auto h2 = history_of({make_snapshot("0", "2020-01-01", "FROM a:1\n"),
                          make_snapshot("1", "2020-01-02", "FROM a:1\nMAINTAINER me\n"),
                          make_snapshot("2", "2020-01-03", "FROM a:1\n")});
    CHECK(candidate_fix_set(h2) == std::set<std::size_t>{2});
}

TEST_CASE("classification")
{
    auto curl = key(RuleId::DL3008, 0, "curl");
    CHECK(classify_change("FROM ubuntu:20.04\nRUN apt-get install -y curl\n",
                          "FROM ubuntu:20.04\nRUN apt-get install -y curl=7.68.0-1ubuntu2.*\n", curl)
          == Disappearance::Modified);
    CHECK(classify_change("FROM ubuntu:20.04\nRUN apt-get install -y curl wget\n",
                          "FROM ubuntu:20.04\nRUN apt-get install -y wget\n", curl)
          == Disappearance::Removed);
    CHECK(classify_change("FROM ubuntu:20.04\nRUN apt-get install -y curl\nCMD [\"x\"]\n",
                          "FROM python:3.9-slim\nWORKDIR /srv\nENTRYPOINT [\"gunicorn\", \"app:wsgi\"]\n", curl)
          == Disappearance::FileRewritten);

    // a line moved past its neighbours is unaligned, so it counts as removed
    CHECK(classify_change("FROM ubuntu:20.04\nRUN apt-get install -y curl\nCMD x\n",
                          "FROM ubuntu:20.04\nCMD x\nRUN apt-get install -y curl=1.0\n", curl)
          == Disappearance::Removed);

    auto add = key(RuleId::DL3020, 0, "ADD . /app");
    CHECK(classify_change("FROM a:1\nADD . /app\nCMD x\n", "FROM a:1\nCOPY . /app\nCMD x\n", add)
          == Disappearance::Modified);
    CHECK(classify_change("FROM a:1\nADD . /app\nCMD x\n", "FROM a:1\nCMD x\n", add) == Disappearance::Removed);

    auto maint = key(RuleId::DL4000, -1, "maintainer");
    CHECK(classify_change("FROM a:1\nMAINTAINER me\nCMD x\n", "FROM a:1\nLABEL maintainer=me\nCMD x\n", maint)
          == Disappearance::Modified);
    CHECK(classify_change("FROM a:1\nMAINTAINER me\nCMD x\n", "FROM a:1\nCMD x\n", maint) == Disappearance::Removed);
}

TEST_CASE("informed hints")
{
    CHECK(informed_hint("Fix DL3008 warnings", RuleId::DL3008));
    CHECK(informed_hint("run hadolint", RuleId::DL3020));
    CHECK(informed_hint("pin package versions", RuleId::DL3008));
    CHECK_FALSE(informed_hint("update readme", RuleId::DL3008));
}

TEST_CASE("unanalyzable snapshots are skipped")
{
    auto bad = make_snapshot("1", "2020-01-02", "FROM ubuntu\n\xff\n");
    auto h = history_of({make_snapshot("0", "2020-01-01", "FROM ubuntu\nMAINTAINER x\n"), bad,
                         make_snapshot("2", "2020-01-03", "FROM ubuntu\n")});
    CHECK_FALSE(snapshot_smells(h.snapshots[1]));
    CHECK_THROWS_AS(disappeared(h, 1), UnparseableSnapshot);
    CHECK(candidate_fix_set(h) == std::set<std::size_t>{2});
    auto r = mine_history(h);
    CHECK(r.warnings.size() == 1);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].at == 2);
    CHECK(r.events[0].key.rule == RuleId::DL4000);
}

namespace {

struct Hand {
    std::vector<std::set<std::string>> eta;
    std::vector<std::set<std::string>> delta;
};

std::set<std::string> strings(const std::set<SmellKey>& keys)
{
    std::set<std::string> out;
    for (const auto& k : keys)
        out.insert(k.to_string());
    return out;
}

} // namespace

TEST_CASE("synthetic five-commit manifest")
{
    auto hs = load_manifest_file(testsupport::data_path("history/synthetic.jsonl").string());
    REQUIRE(hs.size() == 1);
    const auto& h = hs[0];
    REQUIRE(h.snapshots.size() == 5);

    const std::string wget = "DL3008|0|wget|0", curl = "DL3008|0|curl|0", from = "DL3006|0||0",
                      maint = "DL4000|-1|maintainer|0", add = "DL3020|0|ADD . /app|0",
                      cd = "DL3003|0|RUN cd /app && make|0";
    Hand hand{{{from, maint, curl, wget, add}, {from, maint, curl, add}, {from, maint, add}, {maint, add, cd}, {}},
              {{}, {wget}, {curl}, {from}, {maint, add, cd}}};

    for (std::size_t i = 0; i < 5; ++i) {
        CAPTURE(i);
        CHECK(strings(*snapshot_smells(h.snapshots[i])) == hand.eta[i]);
        if (i > 0)
            CHECK(strings(disappeared(h, i)) == hand.delta[i]);
    }
    CHECK(candidate_fix_set(h) == std::set<std::size_t>{1, 2, 3, 4});

    auto r = mine_history(h);
    std::map<std::string, std::pair<std::size_t, Disappearance>> got;
    for (const auto& e : r.events)
        got[e.key.to_string()] = {e.at, e.classification};
    CHECK(got.at(wget) == std::pair{std::size_t{1}, Disappearance::Removed});
    CHECK(got.at(curl) == std::pair{std::size_t{2}, Disappearance::Modified});
    CHECK(got.at(from) == std::pair{std::size_t{3}, Disappearance::Modified});
    CHECK(got.at(maint) == std::pair{std::size_t{4}, Disappearance::FileRewritten});
    CHECK(got.at(add) == std::pair{std::size_t{4}, Disappearance::FileRewritten});
    CHECK(got.at(cd) == std::pair{std::size_t{4}, Disappearance::FileRewritten});
    for (const auto& e : r.events)
        CHECK(e.informed_hint == (e.at == 2));

    auto report = summarize(hs);
    CHECK(totals_csv(report) == testsupport::read_text(testsupport::data_path("history/expected_totals.csv")));
    CHECK(survival_csv(report) == testsupport::read_text(testsupport::data_path("history/expected_survival.csv")));
    CHECK(events_jsonl(report) == testsupport::read_text(testsupport::data_path("history/expected_events.jsonl")));
}

TEST_CASE("summaries")
{
    auto empty = summarize({});
    CHECK(survival_csv(empty) == "rule,quarter,introduced,modified,removed,rewritten\n");
    CHECK(events_jsonl(empty).empty());

    // alive for 3 commits and 10 days, then modified
    auto h = history_of({make_snapshot("0", "2021-03-01", "FROM a:1\nADD x /y\n"),
                         make_snapshot("1", "2021-03-04", "FROM a:1\nADD x /y\nCMD a\n"),
                         make_snapshot("2", "2021-03-08", "FROM a:1\nADD x /y\nCMD b\n"),
                         make_snapshot("3", "2021-03-11", "FROM a:1\nCOPY x /y\nCMD b\n")});
    auto r = mine_history(h);
    REQUIRE(r.lifetimes.size() == 1);
    const auto& life = r.lifetimes[0];
    CHECK(*life.ended_at - life.introduced_at == 3);
    CHECK((day_of(*life.ended_date) - day_of(life.introduced_date)).count() == 10);
    CHECK(life.classification == Disappearance::Modified);

    // two rules gone in one commit: two events, one PF commit
    auto h2 = history_of({make_snapshot("0", "2021-01-01", "FROM ubuntu\nMAINTAINER me\n"),
                          make_snapshot("1", "2021-01-02", "FROM ubuntu:20.04\nLABEL maintainer=me\n")});
    auto rep = summarize({h2});
    CHECK(rep.events.size() == 2);
    CHECK(rep.pf_commits.size() == 1);
    CHECK(rep.totals.at(RuleId::DL3006).pf_commits.size() == 1);
    CHECK(rep.totals.at(RuleId::DL4000).pf_commits.size() == 1);

    CHECK(median({}) == std::nullopt);
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({1, 2, 3, 4}) == 2.5);
}

TEST_CASE("re-introduced smells start a new lifetime")
{
    auto h = history_of({make_snapshot("0", "2021-01-01", "FROM ubuntu\n"),
                         make_snapshot("1", "2021-01-02", "FROM ubuntu:20.04\n"),
                         make_snapshot("2", "2021-01-03", "FROM ubuntu\n")});
    auto r = mine_history(h);
    REQUIRE(r.lifetimes.size() == 2);
    CHECK(r.lifetimes[1].introduced_at == 2);
    CHECK_FALSE(r.lifetimes[1].ended_at);
    auto rep = summarize_results({r});
    CHECK(rep.totals.at(RuleId::DL3006).introduced == 2);
    CHECK(rep.totals.at(RuleId::DL3006).alive == 1);
}

TEST_CASE("properties on random histories")
{
    std::mt19937_64 rng(8675309);
    std::vector<SnapshotHistory> all;
    for (int n = 0; n < 100; ++n) {
        auto h = testsupport::random_history(rng, "f" + std::to_string(n) + "/Dockerfile",
                                             std::uniform_int_distribution<std::size_t>(1, 12)(rng));
        all.push_back(h);
        auto pf = candidate_fix_set(h);
        auto r = mine_history(h);
        std::optional<std::size_t> last_good;
        std::size_t events_seen = 0;
        for (std::size_t i = 0; i < h.snapshots.size(); ++i) {
            auto now = snapshot_smells(h.snapshots[i]);
            if (!now)
                continue;
            if (last_good && *last_good + 1 == i) {
                auto d = disappeared(h, i);
                auto prev = *snapshot_smells(h.snapshots[i - 1]);
                for (const auto& k : d) {
                    CHECK(now->count(k) == 0);
                    CHECK(prev.count(k) == 1);
                }
                CHECK(pf.count(i) == (d.empty() ? 0u : 1u));
            }
            if (last_good) {
                auto prev = *snapshot_smells(h.snapshots[*last_good]);
                std::size_t gone = 0;
                for (const auto& k : prev)
                    gone += now->count(k) == 0;
                events_seen += gone;
                CHECK(pf.count(i) == (gone > 0 ? 1u : 0u));
            }
            last_good = i;
        }
        CHECK(r.events.size() == events_seen);
        CHECK(r.pf == pf);
    }
    auto rep = summarize(all);
    long introduced = 0, gone = 0, alive = 0;
    for (const auto& [rule, t] : rep.totals) {
        CHECK(t.introduced - t.disappeared() == t.alive);
        introduced += t.introduced;
        gone += t.disappeared();
        alive += t.alive;
    }
    CHECK(static_cast<std::size_t>(gone) == rep.events.size());
    CHECK(introduced - gone == alive);
}
