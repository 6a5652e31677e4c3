#include "ssa/core_types.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace ssa {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool strip_pair(std::string_view& s, std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && s.substr(0, open.size()) == open &&
        s.substr(s.size() - close.size()) == close) {
        s.remove_prefix(open.size());
        s.remove_suffix(close.size());
        return true;
    }
    return false;
}

// Strips "\cmd{...}" when the braces span the whole string.
bool strip_command(std::string_view& s, std::string_view cmd) {
    if (s.size() < cmd.size() + 2 || s.substr(0, cmd.size()) != cmd) return false;
    std::string_view rest = s.substr(cmd.size());
    if (rest.front() != '{' || rest.back() != '}') return false;
    int depth = 0;
    for (std::size_t i = 0; i < rest.size(); ++i) {
        if (rest[i] == '{') ++depth;
        else if (rest[i] == '}') {
            --depth;
            if (depth == 0 && i + 1 != rest.size()) return false;  // closes early
        }
    }
    if (depth != 0) return false;
    s = rest.substr(1, rest.size() - 2);
    return true;
}

struct Rational {
    long long num = 0;
    long long den = 1;
};

bool parse_integer(std::string_view s, long long& out) {
    if (s.empty()) return false;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) return false;
    long long v = 0;
    for (; i < s.size(); ++i) {
        if (!is_digit(s[i])) return false;
        if (v > (std::numeric_limits<long long>::max() - (s[i] - '0')) / 10) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = neg ? -v : v;
    return true;
}

// Accepts "123", "-1.25", "3/6". Returns a reduced rational with den > 0.
bool parse_rational(std::string_view s, Rational& out) {
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        long long n, d;
        if (!parse_integer(s.substr(0, slash), n)) return false;
        if (!parse_integer(s.substr(slash + 1), d)) return false;
        if (d == 0) return false;
        out = {n, d};
    } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view frac = s.substr(dot + 1);
        if (frac.empty() || frac.size() > 15) return false;
        long long ipart;
        std::string_view ip = s.substr(0, dot);
        bool neg = !ip.empty() && ip[0] == '-';
        if (ip.empty() || ip == "-" || ip == "+") ipart = 0;
        else if (!parse_integer(ip, ipart)) return false;
        long long fpart, scale = 1;
        if (!parse_integer(frac, fpart)) return false;
        if (fpart < 0) return false;  // "1.-5"
        for (std::size_t i = 0; i < frac.size(); ++i) {
            if (scale > std::numeric_limits<long long>::max() / 10) return false;
            scale *= 10;
        }
        long long mag = std::abs(ipart);
        if (mag > (std::numeric_limits<long long>::max() - fpart) / scale) return false;
        long long num = mag * scale + fpart;
        out = {neg || ipart < 0 ? -num : num, scale};
    } else {
        long long v;
        if (!parse_integer(s, v)) return false;
        out = {v, 1};
    }
    if (out.den < 0) {
        out.num = -out.num;
        out.den = -out.den;
    }
    long long g = std::gcd(std::abs(out.num), out.den);
    if (g > 1) {
        out.num /= g;
        out.den /= g;
    }
    return true;
}

// "\frac{a}{b}" / "\dfrac{a}{b}" -> "a/b" when it spans the whole string.
bool rewrite_frac(std::string_view s, std::string& out) {
    for (std::string_view cmd : {"\\frac", "\\dfrac", "\\tfrac"}) {
        if (s.size() <= cmd.size() || s.substr(0, cmd.size()) != cmd) continue;
        std::string_view rest = s.substr(cmd.size());
        if (rest.empty() || rest.front() != '{') continue;
        auto close1 = rest.find('}');
        if (close1 == std::string_view::npos) continue;
        std::string_view a = rest.substr(1, close1 - 1);
        std::string_view rest2 = rest.substr(close1 + 1);
        if (rest2.empty() || rest2.front() != '{' || rest2.back() != '}') continue;
        std::string_view b = rest2.substr(1, rest2.size() - 2);
        if (a.find('{') != std::string_view::npos || b.find('{') != std::string_view::npos) continue;
        out = std::string(a) + "/" + std::string(b);
        return true;
    }
    return false;
}

std::string strip_thousands_separators(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ',' && i > 0 && i + 1 < s.size() && is_digit(s[i - 1]) && is_digit(s[i + 1]))
            continue;
        out.push_back(s[i]);
    }
    return out;
}

}  // namespace

std::string normalize_answer(std::string_view raw) {
    std::string owned(raw);
    std::string_view s = trim(owned);

    // Peel markup wrappers until a fixed point.
    bool changed = true;
    std::string rewritten;
    while (changed) {
        changed = false;
        s = trim(s);
        changed |= strip_pair(s, "$$", "$$");
        changed |= strip_pair(s, "$", "$");
        changed |= strip_pair(s, "\\(", "\\)");
        changed |= strip_pair(s, "\\[", "\\]");
        changed |= strip_command(s, "\\boxed");
        changed |= strip_command(s, "\\text");
        changed |= strip_command(s, "\\mathrm");
        changed |= strip_pair(s, "{", "}");
        if (s.size() > 1 && s.back() == '.' && s[s.size() - 2] != '.') {
            // trailing sentence period; a decimal point is never final
            s.remove_suffix(1);
            changed = true;
        }
        if (s.size() >= 2 && s.substr(s.size() - 2) == "\\\\") {
            s.remove_suffix(2);
            changed = true;
        }
        if (rewrite_frac(s, rewritten)) {
            owned = rewritten;
            s = owned;
            changed = true;
        }
    }

    std::string cleaned = strip_thousands_separators(s);

    Rational r;
    if (parse_rational(cleaned, r)) {
        std::string out = std::to_string(r.num);
        if (r.den != 1) out += "/" + std::to_string(r.den);
        return out;
    }

    // Word answer: case-fold, collapse internal whitespace.
    std::string out;
    out.reserve(cleaned.size());
    bool in_space = false;
    for (char c : cleaned) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

bool answers_equivalent(std::string_view a, std::string_view b) {
    if (a == b) return true;
    Rational ra, rb;
    if (parse_rational(std::string(a), ra) && parse_rational(std::string(b), rb)) {
        // both reduced with positive denominators; cross-multiply exactly
        return static_cast<__int128>(ra.num) * rb.den == static_cast<__int128>(rb.num) * ra.den;
    }
    return false;
}

std::vector<std::size_t> token_starts(std::string_view text) {
    std::vector<std::size_t> starts;
    bool in_word = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            in_word = false;
        } else if (std::isalnum(c)) {
            if (!in_word) starts.push_back(i);
            in_word = true;
        } else {
            starts.push_back(i);  // punctuation: one token per char
            in_word = false;
        }
    }
    return starts;
}

std::uint64_t count_tokens(std::string_view text) { return token_starts(text).size(); }

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::majority: return "majority";
        case Strategy::scorer_rerank: return "scorer_rerank";
        case Strategy::ssa: return "ssa";
        case Strategy::ssa_two_stage: return "ssa_two_stage";
        case Strategy::usc: return "usc";
        case Strategy::ssa_nothink: return "ssa_nothink";
    }
    return "unknown";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
    for (Strategy s : {Strategy::majority, Strategy::scorer_rerank, Strategy::ssa,
                       Strategy::ssa_two_stage, Strategy::usc, Strategy::ssa_nothink})
        if (strategy_name(s) == name) return s;
    return std::nullopt;
}

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::copied: return "copied";
        case Provenance::synthesized: return "synthesized";
        case Provenance::none: return "none";
    }
    return "none";
}

std::optional<Provenance> provenance_from_name(std::string_view name) {
    for (Provenance p : {Provenance::copied, Provenance::synthesized, Provenance::none})
        if (provenance_name(p) == name) return p;
    return std::nullopt;
}

}  // namespace ssa
