#pragma once

#include <optional>
#include <string>

#include "flakevoc/evaluate.hpp"

namespace flakevoc {

// Report rendering. Outputs carry the resolved run configuration (minus the
// thread count, which never influences results) and no timestamps, so a rerun
// of the same command yields byte-identical files.

std::string render_eval_text(const EvalReport& report);
std::string render_eval_json(const EvalReport& report);

struct ExplainContext {
    std::string dataset_name;
    std::size_t dataset_size = 0;
    std::size_t n_flaky = 0;
    std::size_t n_non_flaky = 0;
    std::uint64_t seed = 0;
    UndersampleMode undersample = UndersampleMode::train_only;
};

std::string render_explain_text(const VocabularyReport& vocab_report,
                                const std::optional<TokenAnalysis>& token_analysis,
                                const ExplainContext& context);
std::string render_explain_json(const VocabularyReport& vocab_report,
                                const std::optional<TokenAnalysis>& token_analysis,
                                const ExplainContext& context);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

} // namespace flakevoc
