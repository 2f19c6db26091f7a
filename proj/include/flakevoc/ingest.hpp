#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace flakevoc {

enum class Label { non_flaky = 0, flaky = 1 };
enum class Provenance { mean_rule, rerun_rule, external };
enum class HistoryMode { mass_execution, rerun };

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view text);
std::string_view provenance_name(Provenance provenance);
std::optional<Provenance> parse_provenance(std::string_view text);

// One raw test-result row. result: 0 = pass, 1 = fail. attempt 0 is the
// initial run; rerun data uses attempts 1..3 for the re-executions, while
// mass-execution data uses the attempt field as a plain execution index.
struct ExecutionRecord {
    std::string test_id;
    std::string build_id;
    int attempt = 0;
    int result = 0;
    std::string timestamp; // optional ISO-8601, empty when absent
};

// Per-build pass counters used by the global-issue filter.
struct BuildStats {
    std::string build_id;
    std::uint64_t n_total = 0;
    std::uint64_t n_passed = 0;
};

struct RunHistory {
    std::string test_id;
    std::vector<int> results; // 0 pass / 1 fail, in execution order
    HistoryMode mode = HistoryMode::mass_execution;
};

// One failure-triggered re-execution episode: initial run plus up to three
// reruns of a test within one build.
struct RerunEpisode {
    std::string test_id;
    std::string build_id;
    std::vector<int> results; // ordered by attempt
};

struct LabeledTest {
    std::string test_id;
    std::string source_text;
    Label label = Label::non_flaky;
    Provenance provenance = Provenance::external;
    bool always_failing = false; // advisory: every recorded execution failed
    std::size_t episodes = 1;    // rerun episodes observed
};

// --- execution history parsing -------------------------------------------

// Line-delimited UTF-8 records: test_id<TAB>build_id<TAB>attempt<TAB>result
// with an optional fifth timestamp field. Blank lines and lines starting
// with '#' are skipped. Reports malformed rows with their line number and
// rejects duplicate (test_id, build_id, attempt) triples.
std::vector<ExecutionRecord> parse_executions(std::istream& in);
std::vector<ExecutionRecord> load_executions(const std::filesystem::path& path);

// --- labeling rules --------------------------------------------------------

// Flaky iff the mean result over the history is strictly between 0 and 1.
// Requires a mass-execution history with at least two executions.
Label label_mean_rule(const RunHistory& history);

// Flaky iff the episode contains both a pass and a fail. Requires a rerun
// history of length 1..4.
Label label_rerun_rule(const RunHistory& history);

// Build retained iff n_passed/n_total > 0.99 and n_total > 1000, both
// strict. Evaluated in exact integer arithmetic.
std::set<std::string> filter_global_issues(const std::vector<BuildStats>& stats);

// Derives per-build counters from raw records: n_total counts distinct tests
// in the build, n_passed counts tests with at least one passing attempt (a
// rerun that passes makes the test count as passing).
std::vector<BuildStats> derive_build_stats(const std::vector<ExecutionRecord>& records);

// Groups mass-execution records into one history per test, ordered by the
// attempt index. All executions of a test must belong to a single build.
std::vector<RunHistory> group_mass_histories(const std::vector<ExecutionRecord>& records);

// Groups rerun records into episodes keyed by (test_id, build_id), ordered
// by attempt. Attempts must be contiguous from 0 and at most 3.
std::vector<RerunEpisode> group_rerun_episodes(const std::vector<ExecutionRecord>& records);

// --- dataset assembly ------------------------------------------------------

struct LabelInfo {
    Label label = Label::non_flaky;
    Provenance provenance = Provenance::external;
    bool always_failing = false;
    std::size_t episodes = 1;
};

// One LabeledTest per labeled id, sorted by test_id. Ids without source text
// (or with empty source text) are reported together in one error.
std::vector<LabeledTest> assemble_dataset(const std::map<std::string, LabelInfo>& labels,
                                          const std::map<std::string, std::string>& sources);

// Balances classes by keeping the minority intact and drawing the same
// number of majority samples uniformly without replacement. Output preserves
// the input order of the kept elements, so an already balanced dataset comes
// back unchanged.
std::vector<LabeledTest> undersample(const std::vector<LabeledTest>& dataset, std::uint64_t seed);

// Index-level core of undersample, shared with fold-wise balancing.
std::vector<std::size_t> undersample_indices(const std::vector<Label>& labels, std::uint64_t seed);

// --- labeled dataset table ---------------------------------------------------

// Table columns: test_id, label, provenance, source_path. Source text lives
// in side files referenced by path; "-" marks an absent path.
struct DatasetRow {
    std::string test_id;
    Label label = Label::non_flaky;
    Provenance provenance = Provenance::external;
    std::string source_path = "-";
};

void write_dataset_table(std::ostream& out, const std::vector<DatasetRow>& rows,
                         const std::vector<std::string>& header_comments);
std::vector<DatasetRow> read_dataset_table(std::istream& in);

// Reads the table and pulls in the referenced source files. Relative paths
// resolve against the table's directory.
std::vector<LabeledTest> load_dataset(const std::filesystem::path& table_path);

} // namespace flakevoc
