#include "flakevoc/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "flakevoc/error.hpp"
#include "flakevoc/random.hpp"

namespace flakevoc {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::optional<int> parse_int(std::string_view text) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

[[noreturn]] void row_error(std::size_t line_no, const std::string& what) {
    throw DataError("line " + std::to_string(line_no) + ": " + what);
}

std::string join_ids(const std::vector<std::string>& ids, std::size_t limit = 10) {
    std::string out;
    for (std::size_t i = 0; i < ids.size() && i < limit; ++i) {
        if (i) out += ", ";
        out += ids[i];
    }
    if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
    return out;
}

} // namespace

std::string_view label_name(Label label) {
    return label == Label::flaky ? "flaky" : "non-flaky";
}

std::optional<Label> parse_label(std::string_view text) {
    if (text == "flaky") return Label::flaky;
    if (text == "non-flaky") return Label::non_flaky;
    return std::nullopt;
}

std::string_view provenance_name(Provenance provenance) {
    switch (provenance) {
    case Provenance::mean_rule: return "mean-rule";
    case Provenance::rerun_rule: return "rerun-rule";
    case Provenance::external: return "external";
    }
    return "external";
}

std::optional<Provenance> parse_provenance(std::string_view text) {
    if (text == "mean-rule") return Provenance::mean_rule;
    if (text == "rerun-rule") return Provenance::rerun_rule;
    if (text == "external") return Provenance::external;
    return std::nullopt;
}

std::vector<ExecutionRecord> parse_executions(std::istream& in) {
    std::vector<ExecutionRecord> records;
    std::set<std::tuple<std::string, std::string, int>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        const auto fields = split_fields(line);
        if (fields.size() != 4 && fields.size() != 5) {
            row_error(line_no, "expected 4 or 5 tab-separated fields, got " +
                                   std::to_string(fields.size()));
        }
        if (fields[0].empty()) row_error(line_no, "empty test_id");
        if (fields[1].empty()) row_error(line_no, "empty build_id");

        const auto attempt = parse_int(fields[2]);
        if (!attempt || *attempt < 0) {
            row_error(line_no, "invalid attempt '" + std::string(fields[2]) + "'");
        }
        const auto result = parse_int(fields[3]);
        if (!result || (*result != 0 && *result != 1)) {
            row_error(line_no, "invalid result '" + std::string(fields[3]) + "'");
        }

        ExecutionRecord rec;
        rec.test_id = std::string(fields[0]);
        rec.build_id = std::string(fields[1]);
        rec.attempt = *attempt;
        rec.result = *result;
        if (fields.size() == 5) rec.timestamp = std::string(fields[4]);

        if (!seen.emplace(rec.test_id, rec.build_id, rec.attempt).second) {
            row_error(line_no, "duplicate execution record (" + rec.test_id + ", " +
                                   rec.build_id + ", attempt " + std::to_string(rec.attempt) + ")");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<ExecutionRecord> load_executions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open executions file: " + path.string());
    return parse_executions(in);
}

Label label_mean_rule(const RunHistory& history) {
    if (history.mode != HistoryMode::mass_execution) {
        throw DataError("mean rule requires a mass-execution history");
    }
    if (history.results.size() < 2) throw DataError("insufficient executions");
    const double mean = std::accumulate(history.results.begin(), history.results.end(), 0.0) /
                        static_cast<double>(history.results.size());
    return (mean > 0.0 && mean < 1.0) ? Label::flaky : Label::non_flaky;
}

Label label_rerun_rule(const RunHistory& history) {
    if (history.mode != HistoryMode::rerun) {
        throw DataError("rerun rule requires a rerun history");
    }
    if (history.results.empty() || history.results.size() > 4) {
        throw DataError("rerun history must contain 1 to 4 executions, got " +
                        std::to_string(history.results.size()));
    }
    const bool has_pass = std::find(history.results.begin(), history.results.end(), 0) !=
                          history.results.end();
    const bool has_fail = std::find(history.results.begin(), history.results.end(), 1) !=
                          history.results.end();
    return (has_pass && has_fail) ? Label::flaky : Label::non_flaky;
}

std::set<std::string> filter_global_issues(const std::vector<BuildStats>& stats) {
    std::set<std::string> retained;
    for (const BuildStats& build : stats) {
        if (build.n_total == 0) throw DataError("empty build: " + build.build_id);
        if (build.n_passed > build.n_total) {
            throw DataError("build " + build.build_id + " reports more passing tests than executed");
        }
        // pass ratio > 0.99, evaluated exactly: 100 * passed > 99 * total
        if (build.n_passed * 100 > build.n_total * 99 && build.n_total > 1000) {
            retained.insert(build.build_id);
        }
    }
    return retained;
}

std::vector<BuildStats> derive_build_stats(const std::vector<ExecutionRecord>& records) {
    // build -> test -> has a passing attempt
    std::map<std::string, std::map<std::string, bool>> builds;
    for (const ExecutionRecord& rec : records) {
        bool& passed = builds[rec.build_id][rec.test_id];
        if (rec.result == 0) passed = true;
    }
    std::vector<BuildStats> stats;
    stats.reserve(builds.size());
    for (const auto& [build_id, tests] : builds) {
        BuildStats s;
        s.build_id = build_id;
        s.n_total = tests.size();
        for (const auto& [test_id, passed] : tests) {
            if (passed) ++s.n_passed;
        }
        stats.push_back(std::move(s));
    }
    return stats;
}

std::vector<RunHistory> group_mass_histories(const std::vector<ExecutionRecord>& records) {
    std::map<std::string, std::vector<std::pair<int, int>>> by_test; // attempt, result
    std::map<std::string, std::string> build_of;
    for (const ExecutionRecord& rec : records) {
        const auto [it, inserted] = build_of.emplace(rec.test_id, rec.build_id);
        if (!inserted && it->second != rec.build_id) {
            throw DataError("mass-execution history for test " + rec.test_id +
                            " spans multiple builds (" + it->second + ", " + rec.build_id + ")");
        }
        by_test[rec.test_id].emplace_back(rec.attempt, rec.result);
    }
    std::vector<RunHistory> histories;
    histories.reserve(by_test.size());
    for (auto& [test_id, runs] : by_test) {
        std::sort(runs.begin(), runs.end());
        RunHistory h;
        h.test_id = test_id;
        h.mode = HistoryMode::mass_execution;
        for (const auto& [attempt, result] : runs) h.results.push_back(result);
        histories.push_back(std::move(h));
    }
    return histories;
}

std::vector<RerunEpisode> group_rerun_episodes(const std::vector<ExecutionRecord>& records) {
    std::map<std::pair<std::string, std::string>, std::vector<std::pair<int, int>>> by_episode;
    for (const ExecutionRecord& rec : records) {
        if (rec.attempt > 3) {
            throw DataError("attempt " + std::to_string(rec.attempt) + " out of range for test " +
                            rec.test_id + " in build " + rec.build_id +
                            " (rerun data allows attempts 0..3)");
        }
        by_episode[{rec.test_id, rec.build_id}].emplace_back(rec.attempt, rec.result);
    }
    std::vector<RerunEpisode> episodes;
    episodes.reserve(by_episode.size());
    for (auto& [key, runs] : by_episode) {
        std::sort(runs.begin(), runs.end());
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (runs[i].first != static_cast<int>(i)) {
                throw DataError("non-contiguous attempts for test " + key.first + " in build " +
                                key.second);
            }
        }
        RerunEpisode ep;
        ep.test_id = key.first;
        ep.build_id = key.second;
        for (const auto& [attempt, result] : runs) ep.results.push_back(result);
        episodes.push_back(std::move(ep));
    }
    return episodes;
}

std::vector<LabeledTest> assemble_dataset(const std::map<std::string, LabelInfo>& labels,
                                          const std::map<std::string, std::string>& sources) {
    std::vector<std::string> missing;
    std::vector<LabeledTest> dataset;
    dataset.reserve(labels.size());
    for (const auto& [test_id, info] : labels) {
        const auto it = sources.find(test_id);
        if (it == sources.end() || it->second.empty()) {
            missing.push_back(test_id);
            continue;
        }
        LabeledTest test;
        test.test_id = test_id;
        test.source_text = it->second;
        test.label = info.label;
        test.provenance = info.provenance;
        test.always_failing = info.always_failing;
        test.episodes = info.episodes;
        dataset.push_back(std::move(test));
    }
    if (!missing.empty()) {
        throw DataError("missing source text for " + std::to_string(missing.size()) +
                        " test(s): " + join_ids(missing));
    }
    return dataset; // labels map iterates sorted by test_id
}

std::vector<std::size_t> undersample_indices(const std::vector<Label>& labels, std::uint64_t seed) {
    std::vector<std::size_t> flaky_idx;
    std::vector<std::size_t> non_flaky_idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == Label::flaky ? flaky_idx : non_flaky_idx).push_back(i);
    }
    if (flaky_idx.empty() || non_flaky_idx.empty()) {
        throw DataError("cannot balance a single-class dataset");
    }
    auto& minority = flaky_idx.size() <= non_flaky_idx.size() ? flaky_idx : non_flaky_idx;
    auto& majority = flaky_idx.size() <= non_flaky_idx.size() ? non_flaky_idx : flaky_idx;

    // partial Fisher-Yates: the first |minority| slots end up holding a
    // uniform sample without replacement
    Rng rng(seed);
    const std::size_t keep = minority.size();
    for (std::size_t i = 0; i < keep && i + 1 < majority.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(majority.size() - i));
        std::swap(majority[i], majority[j]);
    }

    std::vector<std::size_t> kept(minority.begin(), minority.end());
    kept.insert(kept.end(), majority.begin(), majority.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::vector<LabeledTest> undersample(const std::vector<LabeledTest>& dataset, std::uint64_t seed) {
    std::vector<Label> labels;
    labels.reserve(dataset.size());
    for (const LabeledTest& t : dataset) labels.push_back(t.label);
    std::vector<LabeledTest> balanced;
    for (const std::size_t i : undersample_indices(labels, seed)) balanced.push_back(dataset[i]);
    return balanced;
}

void write_dataset_table(std::ostream& out, const std::vector<DatasetRow>& rows,
                         const std::vector<std::string>& header_comments) {
    for (const std::string& comment : header_comments) out << "# " << comment << '\n';
    for (const DatasetRow& row : rows) {
        out << row.test_id << '\t' << label_name(row.label) << '\t'
            << provenance_name(row.provenance) << '\t'
            << (row.source_path.empty() ? "-" : row.source_path) << '\n';
    }
}

std::vector<DatasetRow> read_dataset_table(std::istream& in) {
    std::vector<DatasetRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        const auto fields = split_fields(line);
        if (fields.size() != 4) {
            row_error(line_no, "expected 4 tab-separated fields, got " +
                                   std::to_string(fields.size()));
        }
        if (fields[0].empty()) row_error(line_no, "empty test_id");
        const auto label = parse_label(fields[1]);
        if (!label) row_error(line_no, "invalid label '" + std::string(fields[1]) + "'");
        const auto provenance = parse_provenance(fields[2]);
        if (!provenance) row_error(line_no, "invalid provenance '" + std::string(fields[2]) + "'");

        DatasetRow row;
        row.test_id = std::string(fields[0]);
        row.label = *label;
        row.provenance = *provenance;
        row.source_path = std::string(fields[3]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<LabeledTest> load_dataset(const std::filesystem::path& table_path) {
    std::ifstream in(table_path);
    if (!in) throw DataError("cannot open dataset file: " + table_path.string());
    const std::vector<DatasetRow> rows = read_dataset_table(in);

    const std::filesystem::path base = table_path.parent_path();
    std::vector<LabeledTest> dataset;
    dataset.reserve(rows.size());
    for (const DatasetRow& row : rows) {
        if (row.source_path.empty() || row.source_path == "-") {
            throw DataError("dataset row for test " + row.test_id +
                            " has no source path; re-run labeling with --sources");
        }
        std::filesystem::path path(row.source_path);
        if (path.is_relative()) path = base / path;
        std::ifstream src(path, std::ios::binary);
        if (!src) throw DataError("cannot open source file: " + path.string());
        std::ostringstream text;
        text << src.rdbuf();
        if (text.str().empty()) throw DataError("source file is empty: " + path.string());

        LabeledTest test;
        test.test_id = row.test_id;
        test.source_text = text.str();
        test.label = row.label;
        test.provenance = row.provenance;
        dataset.push_back(std::move(test));
    }
    return dataset;
}

} // namespace flakevoc
