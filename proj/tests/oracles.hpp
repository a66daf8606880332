#pragma once

// Independent reference computations used to check the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "geocot/rng.hpp"
#include "geocot/types.hpp"

namespace oracle {

using geocot::BBox;

inline double box_iou(const BBox& a, const BBox& b) {
    const double ix0 = std::max(a.x_min, b.x_min), iy0 = std::max(a.y_min, b.y_min);
    const double ix1 = std::min(a.x_max, b.x_max), iy1 = std::min(a.y_max, b.y_max);
    const double inter = (ix1 > ix0 && iy1 > iy0) ? (ix1 - ix0) * (iy1 - iy0) : 0.0;
    const double ua = (a.x_max - a.x_min) * (a.y_max - a.y_min) + (b.x_max - b.x_min) * (b.y_max - b.y_min) - inter;
    return ua > 0 ? inter / ua : 0.0;
}

// Predictions listed in rank order. Builds the full PR table and, for every
// recall level m / n_gt, takes the best precision at any cutoff that reaches it.
inline double brute_force_ap(const std::vector<BBox>& preds, const std::vector<BBox>& gts, double thr) {
    if (gts.empty()) return preds.empty() ? 1.0 : 0.0;
    std::vector<bool> taken(gts.size(), false);
    std::vector<int> tp_at; // cumulative TP count after each cutoff
    int tp = 0;
    for (const auto& p : preds) {
        int best = -1;
        double best_v = -1;
        for (std::size_t j = 0; j < gts.size(); ++j) {
            if (taken[j]) continue;
            const double v = box_iou(p, gts[j]);
            if (v > best_v) best_v = v, best = static_cast<int>(j);
        }
        if (best >= 0 && best_v >= thr) taken[best] = true, ++tp;
        tp_at.push_back(tp);
    }
    double sum = 0;
    for (int m = 1; m <= tp; ++m) {
        double best_p = 0;
        for (std::size_t j = 0; j < tp_at.size(); ++j)
            if (tp_at[j] >= m) best_p = std::max(best_p, static_cast<double>(tp_at[j]) / static_cast<double>(j + 1));
        sum += best_p;
    }
    return sum / static_cast<double>(gts.size());
}

using Toks = std::vector<std::string>;

inline std::map<Toks, int> grams(const Toks& t, std::size_t n) {
    std::map<Toks, int> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Toks(t.begin() + i, t.begin() + i + n)];
    return out;
}

// Straight TF-IDF/cosine CIDEr with a Gaussian length penalty, sigma 6.
inline std::vector<double> cider(const std::vector<Toks>& cands, const std::vector<std::vector<Toks>>& refs) {
    const double N = static_cast<double>(refs.size());
    std::vector<double> out;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        double total = 0;
        for (std::size_t n = 1; n <= 4; ++n) {
            auto df = [&](const Toks& g) {
                int c = 0;
                for (const auto& item : refs) {
                    bool in = false;
                    for (const auto& r : item) in = in || grams(r, n).count(g);
                    c += in;
                }
                return std::max(c, 1);
            };
            auto vec = [&](const Toks& t) {
                std::map<Toks, double> v;
                for (const auto& [g, c] : grams(t, n)) v[g] = c * std::log(N / df(g));
                return v;
            };
            const auto cv = vec(cands[i]);
            double acc = 0;
            for (const auto& r : refs[i]) {
                const auto rv = vec(r);
                double dot = 0, na = 0, nb = 0;
                for (const auto& [g, x] : cv) {
                    na += x * x;
                    if (auto it = rv.find(g); it != rv.end()) dot += x * it->second;
                }
                for (const auto& [g, y] : rv) nb += y * y;
                const double cs = (na > 0 && nb > 0) ? dot / std::sqrt(na * nb) : 0.0;
                const double d = static_cast<double>(cands[i].size()) - static_cast<double>(r.size());
                acc += std::min(1.0, std::max(0.0, cs)) * std::exp(-d * d / 72.0);
            }
            total += 10.0 * acc / static_cast<double>(refs[i].size());
        }
        out.push_back(total / 4.0);
    }
    return out;
}

// LCS by enumerating every subsequence of a (|a| <= 12).
inline std::size_t lcs_enumerate(const Toks& a, const Toks& b) {
    std::size_t best = 0;
    for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
        Toks sub;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask & (1u << i)) sub.push_back(a[i]);
        std::size_t j = 0;
        for (std::size_t k = 0; k < b.size() && j < sub.size(); ++k)
            if (b[k] == sub[j]) ++j;
        if (j == sub.size()) best = std::max(best, sub.size());
    }
    return best;
}

// Central differences of f at x, one coordinate at a time.
inline std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double h = 1e-6) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double up = f(x);
        x[i] = x0 - h;
        const double dn = f(x);
        x[i] = x0;
        g[i] = (up - dn) / (2 * h);
    }
    return g;
}

// |a - b| <= tol * max(1, |a|, |b|)
inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline BBox random_box(geocot::Rng& rng) {
    double x0 = rng.uniform(), x1 = rng.uniform(), y0 = rng.uniform(), y1 = rng.uniform();
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    return {x0, y0, x1, y1};
}

// Boxes on a coarse lattice so overlaps, ties and exact hits are common.
inline BBox lattice_box(geocot::Rng& rng, int cells = 5) {
    int a = rng.uniform_int(0, cells), b = rng.uniform_int(0, cells), c = rng.uniform_int(0, cells),
        d = rng.uniform_int(0, cells);
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    if (a == b) b = std::min(cells, b + 1), a = b - 1;
    if (c == d) d = std::min(cells, d + 1), c = d - 1;
    const double s = cells;
    return {a / s, c / s, b / s, d / s};
}

inline Toks random_tokens(geocot::Rng& rng, int min_len, int max_len, int vocab) {
    static const char* words[] = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"};
    Toks t;
    const int n = rng.uniform_int(min_len, max_len);
    for (int i = 0; i < n; ++i) t.push_back(words[rng.uniform_int(0, std::min(vocab, 12) - 1)]);
    return t;
}

} // namespace oracle
