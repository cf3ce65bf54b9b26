// Serial loop vs OpenMP driver on synthetic workloads.

#include "dockerdoctor/batch.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dockerdoctor;

namespace {

const char* const kLines[] = {
    "MAINTAINER dev@example.com",
    "RUN apt-get update && apt-get install -y curl wget git",
    "RUN cd /src && make && make install",
    "ADD . /app",
    "COPY requirements.txt /app/",
    "RUN curl -fsSL https://example.com/install.sh | sh",
    "ENV PATH=/app/bin:$PATH",
    "RUN apt-get install -y --no-install-recommends ca-certificates=20210119~18.04.1",
    "WORKDIR /app",
    "EXPOSE 8080",
};

std::vector<FileInput> make_files(std::size_t n)
{
    std::mt19937_64 rng(n);
    std::vector<FileInput> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text = i % 3 == 0 ? "FROM ubuntu\n" : "FROM ubuntu:20.04\n";
        int lines = 10 + static_cast<int>(rng() % 30);
        for (int l = 0; l < lines; ++l)
            text += std::string(kLines[rng() % std::size(kLines)]) + "\n";
        out.push_back({"f" + std::to_string(i), text});
    }
    return out;
}

std::vector<SnapshotHistory> make_histories(std::size_t n)
{
    std::mt19937_64 rng(n + 1);
    std::vector<SnapshotHistory> out;
    for (std::size_t h = 0; h < n; ++h) {
        SnapshotHistory hist;
        hist.path = "h" + std::to_string(h);
        std::vector<std::string> lines{"FROM ubuntu"};
        auto date = parse_timestamp("2020-01-01");
        for (int c = 0; c < 20; ++c) {
            if (rng() % 3 == 0 && lines.size() > 1)
                lines.erase(lines.begin() + 1 + static_cast<long>(rng() % (lines.size() - 1)));
            else
                lines.push_back(kLines[rng() % std::size(kLines)]);
            Snapshot s;
            s.commit_id = std::to_string(c);
            s.commit_date = date + std::chrono::hours(24 * c);
            for (const auto& l : lines)
                s.content += l + "\n";
            hist.snapshots.push_back(std::move(s));
        }
        out.push_back(std::move(hist));
    }
    return out;
}

void BM_LintSerial(benchmark::State& state)
{
    auto files = make_files(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(lint_files_serial(files));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LintParallel(benchmark::State& state)
{
    auto files = make_files(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(lint_files(files));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

std::set<RuleId> no_resolver_rules()
{
    return {RuleId::DL3003, RuleId::DL3009, RuleId::DL3015, RuleId::DL3020, RuleId::DL4000, RuleId::DL4006};
}

void BM_FixSerial(benchmark::State& state)
{
    auto files = make_files(static_cast<std::size_t>(state.range(0)));
    std::vector<FixContext> ctxs(files.size());
    for (auto _ : state)
        benchmark::DoNotOptimize(fix_files_serial(files, ctxs, no_resolver_rules()));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FixParallel(benchmark::State& state)
{
    auto files = make_files(static_cast<std::size_t>(state.range(0)));
    std::vector<FixContext> ctxs(files.size());
    for (auto _ : state)
        benchmark::DoNotOptimize(fix_files(files, ctxs, no_resolver_rules()));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MineSerial(benchmark::State& state)
{
    auto hs = make_histories(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(mine_histories_serial(hs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MineParallel(benchmark::State& state)
{
    auto hs = make_histories(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(mine_histories(hs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_LintSerial)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LintParallel)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FixSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FixParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MineSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MineParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
