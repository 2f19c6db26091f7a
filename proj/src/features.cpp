#include "flakevoc/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "flakevoc/digest.hpp"
#include "flakevoc/error.hpp"

namespace flakevoc {

namespace {

// Per-document term frequencies resolved against the vocabulary, ordered by
// column index. OOV tokens and keywords drop out here.
std::vector<std::pair<const TermStats*, double>> term_frequencies(const std::vector<Token>& doc,
                                                                  const Vocabulary& vocab) {
    std::map<std::string_view, double> counts;
    for (const Token& tok : doc) {
        if (tok.kind == TokenKind::keyword) continue;
        ++counts[tok.text];
    }
    std::vector<std::pair<const TermStats*, double>> tf;
    tf.reserve(counts.size());
    for (const auto& [term, count] : counts) {
        if (const TermStats* stats = vocab.find(term)) tf.emplace_back(stats, count);
    }
    std::sort(tf.begin(), tf.end(), [](const auto& a, const auto& b) {
        return a.first->index < b.first->index;
    });
    return tf;
}

void normalize(SparseVector& vec) {
    double squared = 0.0;
    for (const auto& [index, value] : vec.entries) squared += value * value;
    if (squared <= 0.0) return;
    const double norm = std::sqrt(squared);
    for (auto& [index, value] : vec.entries) value /= norm;
}

[[noreturn]] void vocab_format_error(const std::string& what) {
    throw DataError("invalid vocabulary file: " + what);
}

} // namespace

std::string_view scheme_name(WeightScheme scheme) {
    switch (scheme) {
    case WeightScheme::bow: return "bow";
    case WeightScheme::tfidf: return "tfidf";
    case WeightScheme::tfidfc_rf: return "tfidfc-rf";
    }
    return "bow";
}

std::optional<WeightScheme> parse_scheme(std::string_view text) {
    if (text == "bow") return WeightScheme::bow;
    if (text == "tfidf") return WeightScheme::tfidf;
    if (text == "tfidfc-rf" || text == "tfidfc_rf") return WeightScheme::tfidfc_rf;
    return std::nullopt;
}

Vocabulary Vocabulary::fit(const std::vector<std::vector<Token>>& docs,
                           const std::vector<Label>& labels) {
    if (docs.empty()) throw DataError("cannot fit a vocabulary on an empty corpus");
    if (docs.size() != labels.size()) {
        throw DataError("vocabulary fit: " + std::to_string(docs.size()) + " documents but " +
                        std::to_string(labels.size()) + " labels");
    }
    Vocabulary vocab;
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const bool flaky = labels[i] == Label::flaky;
        if (flaky) {
            ++vocab.n_flaky_;
        } else {
            ++vocab.n_non_flaky_;
        }
        seen.clear();
        for (const Token& tok : docs[i]) {
            if (tok.kind == TokenKind::keyword) continue;
            seen.insert(tok.text);
        }
        for (const std::string_view term : seen) {
            TermStats& stats = vocab.terms_[std::string(term)];
            ++stats.df;
            if (flaky) {
                ++stats.in_flaky;
            } else {
                ++stats.in_non_flaky;
            }
        }
    }
    std::uint32_t index = 0;
    for (auto& [term, stats] : vocab.terms_) stats.index = index++;
    return vocab;
}

const TermStats* Vocabulary::find(std::string_view term) const {
    const auto it = terms_.find(term);
    return it == terms_.end() ? nullptr : &it->second;
}

std::string Vocabulary::serialize(WeightScheme scheme) const {
    std::ostringstream out;
    out << "flakevoc-vocab 1\n";
    out << "scheme\t" << scheme_name(scheme) << '\n';
    out << "n_flaky\t" << n_flaky_ << '\n';
    out << "n_nonflaky\t" << n_non_flaky_ << '\n';
    out << "terms\t" << terms_.size() << '\n';
    for (const auto& [term, stats] : terms_) {
        out << term << '\t' << stats.index << '\t' << stats.df << '\t' << stats.in_flaky << '\t'
            << stats.in_non_flaky << '\n';
    }
    return out.str();
}

std::uint64_t Vocabulary::content_hash(WeightScheme scheme) const {
    return fnv1a64(serialize(scheme));
}

void Vocabulary::save_file(const std::filesystem::path& path, WeightScheme scheme) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary file: " + path.string());
    out << serialize(scheme);
}

std::pair<Vocabulary, WeightScheme> Vocabulary::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "flakevoc-vocab 1") {
        vocab_format_error("missing or unsupported version header");
    }

    auto read_header = [&](std::string_view key) -> std::string {
        if (!std::getline(in, line)) vocab_format_error("truncated header");
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || line.substr(0, tab) != key) {
            vocab_format_error("expected header field '" + std::string(key) + "'");
        }
        return line.substr(tab + 1);
    };

    const auto scheme = parse_scheme(read_header("scheme"));
    if (!scheme) vocab_format_error("unknown scheme");
    Vocabulary vocab;
    vocab.n_flaky_ = static_cast<std::uint32_t>(std::stoul(read_header("n_flaky")));
    vocab.n_non_flaky_ = static_cast<std::uint32_t>(std::stoul(read_header("n_nonflaky")));
    const auto term_count = std::stoul(read_header("terms"));

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t field_start = 0;
        std::array<std::string, 5> fields;
        for (int f = 0; f < 5; ++f) {
            const std::size_t tab = line.find('\t', field_start);
            if (tab == std::string::npos) {
                if (f != 4) vocab_format_error("term row with fewer than 5 fields");
                fields[f] = line.substr(field_start);
            } else {
                fields[f] = line.substr(field_start, tab - field_start);
                field_start = tab + 1;
            }
        }
        TermStats stats;
        stats.index = static_cast<std::uint32_t>(std::stoul(fields[1]));
        stats.df = static_cast<std::uint32_t>(std::stoul(fields[2]));
        stats.in_flaky = static_cast<std::uint32_t>(std::stoul(fields[3]));
        stats.in_non_flaky = static_cast<std::uint32_t>(std::stoul(fields[4]));
        vocab.terms_.emplace(fields[0], stats);
    }
    if (vocab.terms_.size() != term_count) {
        vocab_format_error("term count mismatch: header says " + std::to_string(term_count) +
                           ", found " + std::to_string(vocab.terms_.size()));
    }
    return {std::move(vocab), *scheme};
}

std::pair<Vocabulary, WeightScheme> Vocabulary::load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary file: " + path.string());
    return load(in);
}

double smoothed_idf(std::uint32_t n_docs, std::uint32_t df) {
    return std::log((1.0 + n_docs) / (1.0 + df)) + 1.0;
}

double relevance_factor(std::uint32_t in_flaky, std::uint32_t in_non_flaky) {
    return std::log2(2.0 + in_flaky / std::max(1.0, static_cast<double>(in_non_flaky)));
}

double class_idf(std::uint32_t n_docs, std::uint32_t in_flaky, std::uint32_t in_non_flaky) {
    return std::log((1.0 + n_docs) / (1.0 + in_flaky + in_non_flaky)) + 1.0;
}

SparseVector embed_bow(const std::vector<Token>& doc, const Vocabulary& vocab) {
    SparseVector vec;
    for (const auto& [stats, count] : term_frequencies(doc, vocab)) {
        vec.entries.emplace_back(stats->index, count);
    }
    return vec;
}

SparseVector embed_tfidf(const std::vector<Token>& doc, const Vocabulary& vocab) {
    SparseVector vec;
    for (const auto& [stats, count] : term_frequencies(doc, vocab)) {
        vec.entries.emplace_back(stats->index, count * smoothed_idf(vocab.n_docs(), stats->df));
    }
    normalize(vec);
    return vec;
}

SparseVector embed_tfidfc_rf(const std::vector<Token>& doc, const Vocabulary& vocab) {
    SparseVector vec;
    for (const auto& [stats, count] : term_frequencies(doc, vocab)) {
        const double weight = count * class_idf(vocab.n_docs(), stats->in_flaky, stats->in_non_flaky) *
                              relevance_factor(stats->in_flaky, stats->in_non_flaky);
        vec.entries.emplace_back(stats->index, weight);
    }
    normalize(vec);
    return vec;
}

SparseVector embed(WeightScheme scheme, const std::vector<Token>& doc, const Vocabulary& vocab) {
    switch (scheme) {
    case WeightScheme::bow: return embed_bow(doc, vocab);
    case WeightScheme::tfidf: return embed_tfidf(doc, vocab);
    case WeightScheme::tfidfc_rf: return embed_tfidfc_rf(doc, vocab);
    }
    return embed_bow(doc, vocab);
}

AuxFeatures compute_aux(const std::vector<Token>& tokens, std::string_view source,
                        const KeywordSet& keywords) {
    AuxFeatures aux;
    aux.keyword_counts = count_keywords(tokens);
    for (const auto& [keyword, count] : aux.keyword_counts) {
        if (!keywords.contains(keyword)) {
            throw DataError("token stream counts keyword '" + keyword +
                            "' that is not in the keyword list");
        }
        (void)count;
    }
    aux.loc = count_loc(source);
    return aux;
}

FeatureMatrix embed_corpus(WeightScheme scheme, const std::vector<std::vector<Token>>& docs,
                           const std::vector<std::string>& row_ids, const Vocabulary& vocab) {
    if (docs.size() != row_ids.size()) throw DataError("row id count does not match document count");
    FeatureMatrix matrix;
    matrix.scheme = scheme;
    matrix.n_term_columns = vocab.size();
    matrix.n_columns = vocab.size();
    matrix.row_ids = row_ids;
    matrix.rows.reserve(docs.size());
    for (const auto& doc : docs) matrix.rows.push_back(embed(scheme, doc, vocab));
    return matrix;
}

FeatureMatrix append_aux(FeatureMatrix matrix, const std::vector<AuxFeatures>& aux,
                         const KeywordSet& keywords) {
    if (aux.size() != matrix.rows.size()) {
        throw DataError("missing aux features: " + std::to_string(matrix.rows.size()) +
                        " rows but " + std::to_string(aux.size()) + " aux entries");
    }
    const std::vector<std::string>& keyword_order = keywords.ordered();
    matrix.n_columns = matrix.n_term_columns + keyword_order.size() + 1;
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        SparseVector& row = matrix.rows[i];
        for (std::size_t j = 0; j < keyword_order.size(); ++j) {
            const auto it = aux[i].keyword_counts.find(keyword_order[j]);
            if (it != aux[i].keyword_counts.end() && it->second > 0) {
                row.entries.emplace_back(static_cast<std::uint32_t>(matrix.n_term_columns + j),
                                         static_cast<double>(it->second));
            }
        }
        if (aux[i].loc > 0) {
            row.entries.emplace_back(
                static_cast<std::uint32_t>(matrix.n_term_columns + keyword_order.size()),
                static_cast<double>(aux[i].loc));
        }
    }
    return matrix;
}

} // namespace flakevoc
