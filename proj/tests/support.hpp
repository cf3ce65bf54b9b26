#pragma once

#include "dockerdoctor/fix.hpp"
#include "dockerdoctor/history.hpp"
#include "dockerdoctor/resolvers.hpp"

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

std::filesystem::path data_path(const std::string& rel);
std::string read_text(const std::filesystem::path& p);

/// Corpus Dockerfiles, sorted by name.
std::vector<std::filesystem::path> corpus_files();

/// (rule, line) pairs recorded from the reference linter for a corpus file.
std::set<std::pair<std::string, int>> golden_for(const std::filesystem::path& dockerfile);

std::shared_ptr<const dockerdoctor::RegistrySnapshot> registry_fixture();
std::shared_ptr<const dockerdoctor::PackageIndexSnapshot> apt_fixture();

/// Context used by the corpus tests: fixtures above, cutoff 2021-07-01.
dockerdoctor::FixContext corpus_context();

/// Random but well-formed Dockerfile text: directives, comments, blank lines,
/// continuations, mixed keyword case, CRLF endings, optional final newline.
std::string random_dockerfile(std::mt19937_64& rng);

/// Random history whose snapshots add, drop, pin and rewrite lines drawn from
/// a pool of smelly and clean instructions.
dockerdoctor::SnapshotHistory random_history(std::mt19937_64& rng, const std::string& path, std::size_t length);

dockerdoctor::Snapshot make_snapshot(const std::string& id, const std::string& date, const std::string& content,
                                     const std::string& message = {});

} // namespace testsupport
