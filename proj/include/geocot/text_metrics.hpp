#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "geocot/error.hpp"
#include "geocot/text.hpp"

namespace geocot {

using NGramCounts = std::map<std::string, int>;

inline NGramCounts ngram_counts(const Tokens& t, std::size_t n) {
    NGramCounts out;
    if (n == 0 || t.size() < n) return out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
        std::string key = t[i];
        for (std::size_t k = 1; k < n; ++k) key.append("\x1f").append(t[i + k]);
        ++out[key];
    }
    return out;
}

// ---- BLEU-4 ----------------------------------------------------------------

inline constexpr double kBleuSmoothing = 1e-9;

inline double bleu4(const Tokens& cand, const std::vector<Tokens>& refs) {
    if (refs.empty()) throw Error(Errc::EmptyReferenceSet, "bleu4 needs at least one reference");
    if (cand.empty()) return 0.0;
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const NGramCounts c = ngram_counts(cand, n);
        NGramCounts max_ref;
        for (const auto& r : refs)
            for (const auto& [g, k] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], k);
        long matched = 0, total = 0;
        for (const auto& [g, k] : c) {
            total += k;
            auto it = max_ref.find(g);
            if (it != max_ref.end()) matched += std::min(k, it->second);
        }
        double p = total > 0 ? static_cast<double>(matched) / total : 0.0;
        if (matched == 0) p += kBleuSmoothing;
        log_sum += std::log(p);
    }
    // closest reference length, ties to the shorter one
    const double c = static_cast<double>(cand.size());
    std::size_t r = refs.front().size();
    for (const auto& ref : refs) {
        const double d = std::abs(static_cast<double>(ref.size()) - c);
        const double best = std::abs(static_cast<double>(r) - c);
        if (d < best || (d == best && ref.size() < r)) r = ref.size();
    }
    const double bp = c < static_cast<double>(r) ? std::exp(1.0 - static_cast<double>(r) / c) : 1.0;
    return bp * std::exp(log_sum / 4.0);
}

// ---- ROUGE-L ---------------------------------------------------------------

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline double rouge_l(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    const double l = static_cast<double>(lcs_length(cand, ref));
    if (l == 0) return 0.0;
    const double p = l / cand.size(), r = l / ref.size();
    return 2 * p * r / (p + r);
}

inline double rouge_l(const Tokens& cand, const std::vector<Tokens>& refs) {
    double best = 0.0;
    for (const auto& r : refs) best = std::max(best, rouge_l(cand, r));
    return best;
}

// ---- METEOR-lite -----------------------------------------------------------

// Light suffix stripper: plural, -ing/-ed/-ly, trailing e.
inline std::string stem(std::string w) {
    auto ends = [&](std::string_view s) {
        return w.size() >= s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0;
    };
    if (ends("sses"))
        w.resize(w.size() - 2);
    else if (ends("ies"))
        w.replace(w.size() - 3, 3, "i");
    else if (!ends("ss") && ends("s") && w.size() > 3)
        w.pop_back();

    if (ends("ing") && w.size() >= 6)
        w.resize(w.size() - 3);
    else if (ends("ed") && w.size() >= 5)
        w.resize(w.size() - 2);
    else if (ends("ly") && w.size() >= 5)
        w.resize(w.size() - 2);

    if (ends("e") && w.size() > 3) w.pop_back();
    return w;
}

struct MeteorAlignment {
    std::vector<std::pair<std::size_t, std::size_t>> matches; // (cand index, ref index)
    std::size_t chunks = 0;
};

inline MeteorAlignment meteor_align(const Tokens& cand, const Tokens& ref) {
    std::vector<long> cand_to_ref(cand.size(), -1);
    std::vector<bool> ref_used(ref.size(), false);

    auto stage = [&](auto&& key) {
        long last_ref = -2;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (cand_to_ref[i] >= 0) {
                last_ref = cand_to_ref[i];
                continue;
            }
            const auto k = key(cand[i]);
            long pick = -1;
            // prefer the slot that extends the current chunk
            if (last_ref >= -1 && static_cast<std::size_t>(last_ref + 1) < ref.size() && !ref_used[last_ref + 1] &&
                key(ref[last_ref + 1]) == k)
                pick = last_ref + 1;
            for (std::size_t j = 0; pick < 0 && j < ref.size(); ++j)
                if (!ref_used[j] && key(ref[j]) == k) pick = static_cast<long>(j);
            if (pick >= 0) {
                cand_to_ref[i] = pick;
                ref_used[pick] = true;
                last_ref = pick;
            } else {
                last_ref = -2;
            }
        }
    };
    stage([](const std::string& s) { return s; });
    stage([](const std::string& s) { return stem(s); });

    MeteorAlignment a;
    for (std::size_t i = 0; i < cand.size(); ++i)
        if (cand_to_ref[i] >= 0) a.matches.emplace_back(i, static_cast<std::size_t>(cand_to_ref[i]));
    for (std::size_t k = 0; k < a.matches.size(); ++k) {
        if (k == 0 || a.matches[k].first != a.matches[k - 1].first + 1 ||
            a.matches[k].second != a.matches[k - 1].second + 1)
            ++a.chunks;
    }
    return a;
}

inline double meteor_lite(const Tokens& cand, const Tokens& ref) {
    if (cand.empty() || ref.empty()) return 0.0;
    const auto a = meteor_align(cand, ref);
    const double m = static_cast<double>(a.matches.size());
    if (m == 0) return 0.0;
    const double p = m / cand.size(), r = m / ref.size();
    const double fmean = 10 * p * r / (r + 9 * p);
    const double frag = static_cast<double>(a.chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

inline double meteor_lite(const Tokens& cand, const std::vector<Tokens>& refs) {
    double best = 0.0;
    for (const auto& r : refs) best = std::max(best, meteor_lite(cand, r));
    return best;
}

// ---- CIDEr -----------------------------------------------------------------

inline constexpr double kCiderSigma = 6.0;

// Document frequencies over the reference sets of a corpus; immutable once built.
class CiderIdf {
public:
    explicit CiderIdf(const std::vector<std::vector<Tokens>>& corpus_refs) : size_(corpus_refs.size()) {
        if (size_ < 2) throw Error(Errc::CorpusTooSmall, "CIDEr needs a corpus of at least 2 items");
        for (const auto& refs : corpus_refs) {
            for (std::size_t n = 1; n <= 4; ++n) {
                std::map<std::string, bool> seen;
                for (const auto& r : refs)
                    for (const auto& kv : ngram_counts(r, n)) seen[kv.first] = true;
                for (const auto& kv : seen) ++df_[n - 1][kv.first];
            }
        }
    }

    std::size_t corpus_size() const { return size_; }

    std::size_t doc_freq(std::size_t n, const std::string& gram) const {
        auto it = df_[n - 1].find(gram);
        return it == df_[n - 1].end() ? 0 : it->second;
    }

    double idf(std::size_t n, const std::string& gram) const {
        const double df = static_cast<double>(std::max<std::size_t>(1, doc_freq(n, gram)));
        return std::log(static_cast<double>(size_) / df);
    }

    // Per-item score in [0,10].
    double score(const Tokens& cand, const std::vector<Tokens>& refs) const {
        if (refs.empty()) throw Error(Errc::EmptyReferenceSet, "CIDEr item without references");
        double total = 0.0;
        for (std::size_t n = 1; n <= 4; ++n) {
            const auto cv = vec(cand, n);
            double acc = 0.0;
            for (const auto& r : refs) {
                const auto rv = vec(r, n);
                const double delta = static_cast<double>(cand.size()) - static_cast<double>(r.size());
                acc += cosine(cv, rv) * std::exp(-delta * delta / (2 * kCiderSigma * kCiderSigma));
            }
            total += 10.0 * acc / static_cast<double>(refs.size());
        }
        return total / 4.0;
    }

private:
    std::unordered_map<std::string, double> vec(const Tokens& t, std::size_t n) const {
        std::unordered_map<std::string, double> v;
        for (const auto& [g, k] : ngram_counts(t, n)) v[g] = k * idf(n, g);
        return v;
    }

    static double cosine(const std::unordered_map<std::string, double>& a,
                         const std::unordered_map<std::string, double>& b) {
        double dot = 0, na = 0, nb = 0;
        for (const auto& [g, x] : a) {
            na += x * x;
            auto it = b.find(g);
            if (it != b.end()) dot += x * it->second;
        }
        for (const auto& kv : b) nb += kv.second * kv.second;
        if (na == 0 || nb == 0) return 0.0;
        return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
    }

    std::size_t size_;
    std::array<std::unordered_map<std::string, std::size_t>, 4> df_;
};

struct CaptionItem {
    Tokens candidate;
    std::vector<Tokens> references;
};

struct CiderResult {
    std::vector<double> per_item;
    double mean = 0.0;
};

inline CiderResult cider(const std::vector<CaptionItem>& corpus) {
    std::vector<std::vector<Tokens>> refs;
    refs.reserve(corpus.size());
    for (const auto& it : corpus) refs.push_back(it.references);
    const CiderIdf idf(refs);
    CiderResult res;
    for (const auto& it : corpus) res.per_item.push_back(idf.score(it.candidate, it.references));
    double s = 0;
    for (double v : res.per_item) s += v;
    res.mean = s / static_cast<double>(corpus.size());
    return res;
}

} // namespace geocot
