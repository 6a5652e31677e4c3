#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssa {

enum class ExtractionFormat {
    answer_tags,        // last <answer>...</answer>
    think_answer_tags,  // <think>...</think> ... <answer>...</answer>
    boxed,              // last \boxed{...}
    last_number,        // last numeric literal in free prose
};

struct Extraction {
    std::string answer;        // raw slot content, not normalized
    bool format_correct = false;
};

// Recovers the answer slot from a complete generation. Last well-formed slot
// wins; unclosed tags never match. format_correct reports whether the whole
// generation satisfies the format's structural contract (for
// think_answer_tags: a think span followed by an answer span).
std::optional<Extraction> extract_answer(std::string_view text, ExtractionFormat format);

// Splits a solution on blank-line delimiters, dropping empty segments.
std::vector<std::string> split_steps(std::string_view solution);

inline constexpr std::string_view kStepDelimiter = "\n\n";

}  // namespace ssa
