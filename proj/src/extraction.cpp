#include "ssa/extraction.hpp"

#include <algorithm>
#include <cctype>

namespace ssa {
namespace {

struct Span {
    std::size_t begin = 0;  // of the opening tag
    std::size_t end = 0;    // one past the closing tag
    std::string content;
};

// Last well-formed <tag>...</tag> pair at or after `from`.
std::optional<Span> last_tag_span(std::string_view text, std::string_view tag,
                                  std::size_t from = 0) {
    std::string open = "<" + std::string(tag) + ">";
    std::string close = "</" + std::string(tag) + ">";
    std::optional<Span> found;
    std::size_t pos = from;
    while ((pos = text.find(open, pos)) != std::string_view::npos) {
        std::size_t body = pos + open.size();
        std::size_t end = text.find(close, body);
        if (end == std::string_view::npos) break;  // unclosed: nothing further can match
        found = Span{pos, end + close.size(), std::string(text.substr(body, end - body))};
        pos = body;
    }
    return found;
}

std::string_view trimmed(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Last \boxed{...} with balanced braces.
std::optional<std::string> last_boxed(std::string_view text) {
    constexpr std::string_view kBoxed = "\\boxed{";
    std::optional<std::string> found;
    std::size_t pos = 0;
    while ((pos = text.find(kBoxed, pos)) != std::string_view::npos) {
        std::size_t i = pos + kBoxed.size();
        int depth = 1;
        std::size_t start = i;
        for (; i < text.size() && depth > 0; ++i) {
            if (text[i] == '{') ++depth;
            else if (text[i] == '}') --depth;
        }
        if (depth == 0) found = std::string(text.substr(start, i - 1 - start));
        pos += kBoxed.size();
    }
    return found;
}

std::optional<std::string> last_number(std::string_view text) {
    std::optional<std::string> found;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        bool sign = (c == '-') && i + 1 < text.size() &&
                    std::isdigit(static_cast<unsigned char>(text[i + 1]));
        if (std::isdigit(static_cast<unsigned char>(c)) || sign) {
            std::size_t start = i;
            if (sign) ++i;
            bool seen_dot = false;
            while (i < text.size()) {
                char d = text[i];
                if (std::isdigit(static_cast<unsigned char>(d))) ++i;
                else if (d == '.' && !seen_dot && i + 1 < text.size() &&
                         std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                    seen_dot = true;
                    ++i;
                } else if (d == ',' && i + 1 < text.size() &&
                           std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                    ++i;  // thousands separator
                } else break;
            }
            found = std::string(text.substr(start, i - start));
        } else {
            ++i;
        }
    }
    return found;
}

}  // namespace

std::optional<Extraction> extract_answer(std::string_view text, ExtractionFormat format) {
    switch (format) {
        case ExtractionFormat::answer_tags: {
            auto ans = last_tag_span(text, "answer");
            if (!ans) return std::nullopt;
            bool correct = trimmed(text).substr(trimmed(text).size() -
                                                std::min<std::size_t>(9, trimmed(text).size())) ==
                           "</answer>";
            return Extraction{ans->content, correct};
        }
        case ExtractionFormat::think_answer_tags: {
            auto ans = last_tag_span(text, "answer");
            if (!ans) return std::nullopt;
            auto think = last_tag_span(text, "think");
            std::string_view t = trimmed(text);
            bool correct = think.has_value() && think->end <= ans->begin &&
                           t.substr(0, std::min<std::size_t>(7, t.size())) == "<think>" &&
                           t.substr(t.size() - std::min<std::size_t>(9, t.size())) == "</answer>";
            return Extraction{ans->content, correct};
        }
        case ExtractionFormat::boxed: {
            auto b = last_boxed(text);
            if (!b) return std::nullopt;
            return Extraction{*b, true};
        }
        case ExtractionFormat::last_number: {
            auto n = last_number(text);
            if (!n) return std::nullopt;
            return Extraction{*n, true};
        }
    }
    return std::nullopt;
}

std::vector<std::string> split_steps(std::string_view solution) {
    std::vector<std::string> steps;
    std::size_t pos = 0;
    while (pos <= solution.size()) {
        std::size_t next = solution.find(kStepDelimiter, pos);
        std::string_view seg = next == std::string_view::npos
                                   ? solution.substr(pos)
                                   : solution.substr(pos, next - pos);
        if (!seg.empty()) steps.emplace_back(seg);
        if (next == std::string_view::npos) break;
        pos = next + kStepDelimiter.size();
    }
    return steps;
}

}  // namespace ssa
