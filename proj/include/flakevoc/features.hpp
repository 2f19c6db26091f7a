#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flakevoc/ingest.hpp"
#include "flakevoc/lexer.hpp"

namespace flakevoc {

enum class WeightScheme { bow, tfidf, tfidfc_rf };

std::string_view scheme_name(WeightScheme scheme);
std::optional<WeightScheme> parse_scheme(std::string_view text);

struct TermStats {
    std::uint32_t index = 0;
    std::uint32_t df = 0;            // training documents containing the term
    std::uint32_t in_flaky = 0;      // flaky training documents containing it
    std::uint32_t in_non_flaky = 0;  // non-flaky training documents containing it
};

// Train-fitted term index with per-class document frequencies. Terms are the
// texts of name/string_word/number_mask tokens; keyword tokens never enter
// the vocabulary. Indices are dense and assigned in lexicographic term order,
// which makes fitting deterministic.
class Vocabulary {
public:
    static Vocabulary fit(const std::vector<std::vector<Token>>& docs,
                          const std::vector<Label>& labels);

    std::size_t size() const { return terms_.size(); }
    std::uint32_t n_flaky() const { return n_flaky_; }
    std::uint32_t n_non_flaky() const { return n_non_flaky_; }
    std::uint32_t n_docs() const { return n_flaky_ + n_non_flaky_; }

    const TermStats* find(std::string_view term) const;
    const std::map<std::string, TermStats, std::less<>>& terms() const { return terms_; }

    // Versioned text form: a header carrying scheme, class sizes and term
    // count, then term<TAB>index<TAB>df<TAB>a<TAB>b rows in index order.
    std::string serialize(WeightScheme scheme) const;
    std::uint64_t content_hash(WeightScheme scheme) const;
    void save_file(const std::filesystem::path& path, WeightScheme scheme) const;
    static std::pair<Vocabulary, WeightScheme> load(std::istream& in);
    static std::pair<Vocabulary, WeightScheme> load_file(const std::filesystem::path& path);

private:
    std::map<std::string, TermStats, std::less<>> terms_;
    std::uint32_t n_flaky_ = 0;
    std::uint32_t n_non_flaky_ = 0;
};

// Entries sorted by column index.
struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;
};

// Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1.
double smoothed_idf(std::uint32_t n_docs, std::uint32_t df);

// Relevance factor log2(2 + a / max(1, b)); a counts flaky documents with the
// term, b non-flaky ones. Floors at 1 when the term is absent from training.
double relevance_factor(std::uint32_t in_flaky, std::uint32_t in_non_flaky);

// Class-aggregated smoothed idf: ln((1+N)/(1+a+b)) + 1.
double class_idf(std::uint32_t n_docs, std::uint32_t in_flaky, std::uint32_t in_non_flaky);

// Raw term counts; out-of-vocabulary tokens are ignored.
SparseVector embed_bow(const std::vector<Token>& doc, const Vocabulary& vocab);

// tf * smoothed_idf, then Euclidean normalization of the term vector.
SparseVector embed_tfidf(const std::vector<Token>& doc, const Vocabulary& vocab);

// tf * class_idf * relevance_factor, then Euclidean normalization.
SparseVector embed_tfidfc_rf(const std::vector<Token>& doc, const Vocabulary& vocab);

SparseVector embed(WeightScheme scheme, const std::vector<Token>& doc, const Vocabulary& vocab);

struct AuxFeatures {
    std::map<std::string, std::size_t> keyword_counts;
    std::size_t loc = 0;
};

AuxFeatures compute_aux(const std::vector<Token>& tokens, std::string_view source,
                        const KeywordSet& keywords);

struct FeatureMatrix {
    WeightScheme scheme = WeightScheme::bow;
    std::size_t n_columns = 0;      // term columns + keyword columns + loc
    std::size_t n_term_columns = 0; // |vocabulary|
    std::vector<SparseVector> rows;
    std::vector<std::string> row_ids;
};

// Embeds each document as term columns only (n_columns == |vocabulary|).
FeatureMatrix embed_corpus(WeightScheme scheme, const std::vector<std::vector<Token>>& docs,
                           const std::vector<std::string>& row_ids, const Vocabulary& vocab);

// Appends the auxiliary columns unnormalized: per-keyword counts in keyword
// list order, then LOC. aux must supply one entry per row.
FeatureMatrix append_aux(FeatureMatrix matrix, const std::vector<AuxFeatures>& aux,
                         const KeywordSet& keywords);

} // namespace flakevoc
