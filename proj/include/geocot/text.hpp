#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace geocot {

// Reported alongside every text metric; bump when tokenize() changes.
inline constexpr std::string_view kTokenizerVersion = "geocot-tok-1";

using Tokens = std::vector<std::string>;

// Lowercase, split on whitespace and ASCII punctuation, drop the punctuation.
// Bytes >= 0x80 (UTF-8 continuation etc.) are kept as word characters.
inline Tokens tokenize(std::string_view text) {
    Tokens out;
    std::string cur;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (u < 0x80 && (std::isspace(u) || std::ispunct(u) || std::iscntrl(u))) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(static_cast<char>(u < 0x80 ? std::tolower(u) : u));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline bool is_article(std::string_view t) { return t == "a" || t == "an" || t == "the"; }

inline Tokens normalized_tokens(std::string_view text) {
    Tokens t = tokenize(text);
    t.erase(std::remove_if(t.begin(), t.end(), [](const std::string& s) { return is_article(s); }), t.end());
    return t;
}

inline std::string join(const Tokens& t, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) out.append(sep);
        out.append(t[i]);
    }
    return out;
}

inline std::string normalize_answer(std::string_view text) { return join(normalized_tokens(text)); }

// Multiset token overlap F1 between two normalized answers.
inline double token_f1(std::string_view pred, std::string_view gt) {
    const Tokens p = normalized_tokens(pred), g = normalized_tokens(gt);
    if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;
    std::map<std::string, int> cnt;
    for (const auto& t : g) ++cnt[t];
    int common = 0;
    for (const auto& t : p) {
        auto it = cnt.find(t);
        if (it != cnt.end() && it->second > 0) --it->second, ++common;
    }
    if (common == 0) return 0.0;
    const double prec = static_cast<double>(common) / p.size();
    const double rec = static_cast<double>(common) / g.size();
    return 2 * prec * rec / (prec + rec);
}

} // namespace geocot
