#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace testsupport {

namespace fs = std::filesystem;
using namespace dockerdoctor;

fs::path data_path(const std::string& rel) { return fs::path(DOCKERDOCTOR_TEST_DATA) / rel; }

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<fs::path> corpus_files()
{
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(data_path("corpus")))
        if (e.path().extension() == ".Dockerfile")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::set<std::pair<std::string, int>> golden_for(const fs::path& dockerfile)
{
    auto name = dockerfile.stem().string() + ".hadolint.txt";
    std::istringstream in(read_text(data_path("golden/" + name)));
    std::set<std::pair<std::string, int>> out;
    std::string rule;
    int line = 0;
    while (in >> rule >> line)
        out.insert({rule, line});
    return out;
}

std::shared_ptr<const RegistrySnapshot> registry_fixture()
{
    static auto snap =
        std::make_shared<const RegistrySnapshot>(RegistrySnapshot::load_file(data_path("fixtures/registry.jsonl")));
    return snap;
}

std::shared_ptr<const PackageIndexSnapshot> apt_fixture()
{
    static auto snap =
        std::make_shared<const PackageIndexSnapshot>(PackageIndexSnapshot::load_file(data_path("fixtures/apt.jsonl")));
    return snap;
}

FixContext corpus_context()
{
    FixContext ctx;
    ctx.last_modified = parse_date("2021-07-01");
    ctx.registry = registry_fixture();
    ctx.apt_index = apt_fixture();
    return ctx;
}

namespace {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v)
{
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string recase(std::mt19937_64& rng, std::string kw)
{
    if (coin(rng, 0.2))
        std::transform(kw.begin(), kw.end(), kw.begin(), [](unsigned char c) { return std::tolower(c); });
    return kw;
}

} // namespace

std::string random_dockerfile(std::mt19937_64& rng)
{
    static const std::vector<std::string> froms{"ubuntu", "ubuntu:20.04", "ubuntu:18.04 AS build", "node:16",
                                                "--platform=linux/amd64 debian:bullseye", "scratch",
                                                "alpine@sha256:0123abcd"};
    static const std::vector<std::string> runs{
        "apt-get update && apt-get install -y curl",
        "apt-get install -y --no-install-recommends git=1:2.17.1 && rm -rf /var/lib/apt/lists/*",
        "cd /app && make",
        "echo 'a && b' | tee /x",
        "[\"/bin/sh\", \"-c\", \"echo hi\"]",
        "set -eux; \\\n    wget -O- https://example.com | tar xz",
        "FOO=bar make \\\n    # inner comment\n    install",
        "echo \"$(uname -a)\" > /etc/info",
        "if [ -f x ]; then cd y; fi",
        "npm ci && npm run build",
    };
    static const std::vector<std::string> others{
        "COPY . /app",         "ADD src/ /app/",           "WORKDIR /app",       "ENV A=1 B=\"two words\"",
        "LABEL a=b",           "MAINTAINER me <me@x.y>",   "EXPOSE 80 443",      "USER nobody",
        "CMD [\"run\"]",       "ENTRYPOINT [\"/init\"]",   "ARG V=1",            "VOLUME /data",
        "HEALTHCHECK CMD true", "STOPSIGNAL SIGTERM",      "ONBUILD RUN cd /x",  "SHELL [\"/bin/bash\", \"-c\"]",
        "CUSTOMKW something",
    };
    std::string nl = coin(rng, 0.15) ? "\r\n" : "\n";
    std::string out;
    if (coin(rng, 0.2))
        out += "# syntax=docker/dockerfile:1" + nl;
    if (coin(rng, 0.1))
        out += "# escape=\\" + nl;
    if (coin(rng, 0.3))
        out += "# a leading comment" + nl;
    int stages = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int s = 0; s < stages; ++s) {
        out += recase(rng, "FROM") + " " + pick(rng, froms) + nl;
        int body = std::uniform_int_distribution<int>(0, 8)(rng);
        for (int i = 0; i < body; ++i) {
            if (coin(rng, 0.15))
                out += nl;
            if (coin(rng, 0.1))
                out += "  # note " + std::to_string(i) + nl;
            std::string line;
            if (coin(rng, 0.5)) {
                auto payload = pick(rng, runs);
                for (auto pos = payload.find('\n'); pos != std::string::npos; pos = payload.find('\n', pos + nl.size()))
                    payload.replace(pos, 1, nl);
                line = recase(rng, "RUN") + " " + payload;
            } else {
                line = pick(rng, others);
                auto sp = line.find(' ');
                line = recase(rng, line.substr(0, sp)) + line.substr(sp);
            }
            if (coin(rng, 0.15))
                line = "    " + line;
            if (coin(rng, 0.1))
                line += "   ";
            out += line + nl;
        }
    }
    if (coin(rng, 0.2) && !out.empty()) {
        // drop the final line ending
        out.resize(out.size() - nl.size());
    }
    return out;
}

Snapshot make_snapshot(const std::string& id, const std::string& date, const std::string& content,
                       const std::string& message)
{
    Snapshot s;
    s.commit_id = id;
    s.commit_date = parse_timestamp(date);
    s.content = content;
    s.message = message;
    return s;
}

SnapshotHistory random_history(std::mt19937_64& rng, const std::string& path, std::size_t length)
{
    // Slots hold one line each; every commit re-rolls a few slots.
    static const std::vector<std::vector<std::string>> variants{
        {"FROM ubuntu", "FROM ubuntu:20.04", "FROM ubuntu:18.04"},
        {"", "MAINTAINER a@b.c", "LABEL maintainer=\"a@b.c\""},
        {"", "RUN apt-get update && apt-get install -y curl wget",
         "RUN apt-get update && apt-get install -y --no-install-recommends curl=7.68.0-1ubuntu2.* && rm -rf /var/lib/apt/lists/*",
         "RUN apt-get update && apt-get install -y curl", "RUN apt-get install -y --no-install-recommends wget"},
        {"", "ADD . /app", "COPY . /app", "ADD app.tar.gz /app"},
        {"", "RUN cd /app && make", "WORKDIR /app", "RUN make -C /app"},
        {"", "RUN curl -s https://x.y | sh", "RUN curl -s https://x.y -o /tmp/i.sh && sh /tmp/i.sh"},
        {"", "CMD [\"app\"]"},
    };
    static const std::vector<std::string> messages{"update", "pin versions", "fix hadolint warnings", "refactor",
                                                   "Use COPY instead of ADD", "add pipefail", "bump"};
    std::vector<std::size_t> state(variants.size());
    for (std::size_t s = 0; s < state.size(); ++s)
        state[s] = std::uniform_int_distribution<std::size_t>(0, variants[s].size() - 1)(rng);
    SnapshotHistory h;
    h.path = path;
    auto date = parse_date("2019-01-01");
    for (std::size_t i = 0; i < length; ++i) {
        if (i > 0) {
            int changes = std::uniform_int_distribution<int>(0, 3)(rng);
            for (int c = 0; c < changes; ++c) {
                auto s = std::uniform_int_distribution<std::size_t>(0, state.size() - 1)(rng);
                state[s] = std::uniform_int_distribution<std::size_t>(0, variants[s].size() - 1)(rng);
            }
        }
        std::string text;
        for (std::size_t s = 0; s < state.size(); ++s)
            if (!variants[s][state[s]].empty())
                text += variants[s][state[s]] + "\n";
        if (coin(rng, 0.05))
            text = "FROM debian\nRUN echo rewritten\nRUN echo totally\n";
        date += std::chrono::days(std::uniform_int_distribution<int>(0, 60)(rng));
        Snapshot snap;
        snap.commit_id = "c" + std::to_string(i);
        snap.commit_date = std::chrono::sys_seconds(date);
        snap.content = text;
        snap.message = pick(rng, messages);
        if (coin(rng, 0.03)) {
            snap.content = "FROM ubuntu\n\xff\xfe\n";
        }
        h.snapshots.push_back(std::move(snap));
    }
    return h;
}

} // namespace testsupport
