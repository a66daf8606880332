#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "geocot/error.hpp"
#include "geocot/types.hpp"

namespace geocot {

inline double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    const double inter = iw > 0 && ih > 0 ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    if (!(uni > 0)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

// Percentages (0..100).
struct GroundingScores {
    std::size_t count = 0;
    double acc_at_50 = 0, acc_at_75 = 0, miou = 0;
    std::vector<std::string> warnings;
};

inline GroundingScores grounding_scores(const std::vector<BBox>& preds, const std::vector<BBox>& gts) {
    if (preds.size() != gts.size())
        throw Error(Errc::LengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                              std::to_string(gts.size()) + " ground truths");
    GroundingScores s;
    s.count = preds.size();
    if (s.count == 0) {
        s.warnings.push_back("no grounding pairs; metrics reported as 0");
        return s;
    }
    double sum = 0;
    std::size_t hit50 = 0, hit75 = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double v = iou(preds[i], gts[i]);
        sum += v;
        hit50 += v >= 0.5;
        hit75 += v >= 0.75;
    }
    const double n = static_cast<double>(s.count);
    s.acc_at_50 = 100.0 * hit50 / n;
    s.acc_at_75 = 100.0 * hit75 / n;
    s.miou = 100.0 * sum / n;
    return s;
}

// Predictions and ground truth for one image; boxes from different images never match.
struct ImageDetections {
    std::vector<Detection> preds;
    std::vector<BBox> gts;
};

struct PRPoint {
    double recall = 0, precision = 0;
};

// Greedy matching of rank-ordered predictions; returns the TP flag of each
// prediction in the global order (rank, then image index).
inline std::vector<std::pair<bool, std::size_t>> match_detections(const std::vector<ImageDetections>& images,
                                                                  double iou_threshold) {
    struct Ref {
        int rank;
        std::size_t image, idx;
    };
    std::vector<Ref> order;
    for (std::size_t im = 0; im < images.size(); ++im)
        for (std::size_t k = 0; k < images[im].preds.size(); ++k) order.push_back({images[im].preds[k].rank, im, k});
    std::stable_sort(order.begin(), order.end(), [](const Ref& a, const Ref& b) {
        return a.rank != b.rank ? a.rank < b.rank : a.image < b.image;
    });

    std::vector<std::vector<bool>> used(images.size());
    for (std::size_t im = 0; im < images.size(); ++im) used[im].assign(images[im].gts.size(), false);

    std::vector<std::pair<bool, std::size_t>> out;
    for (const auto& r : order) {
        const auto& img = images[r.image];
        const BBox& p = img.preds[r.idx].box;
        double best = -1;
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < img.gts.size(); ++j) {
            if (used[r.image][j]) continue;
            const double v = iou(p, img.gts[j]);
            if (v > best) best = v, best_j = j;
        }
        const bool tp = best >= iou_threshold && best >= 0;
        if (tp) used[r.image][best_j] = true;
        out.emplace_back(tp, r.image);
    }
    return out;
}

inline std::vector<PRPoint> pr_curve(const std::vector<ImageDetections>& images, double iou_threshold) {
    std::size_t n_gt = 0;
    for (const auto& im : images) n_gt += im.gts.size();
    std::vector<PRPoint> pts;
    if (n_gt == 0) return pts;
    std::size_t tp = 0, fp = 0;
    for (const auto& [hit, im] : match_detections(images, iou_threshold)) {
        (void)im;
        hit ? ++tp : ++fp;
        pts.push_back({static_cast<double>(tp) / n_gt, static_cast<double>(tp) / (tp + fp)});
    }
    return pts;
}

// All-point interpolated AP over a pool of images. Recall rises by exactly
// 1/n_gt at each true positive, so the area is the sum of the interpolated
// precision (max precision at any later cutoff) at those points, over n_gt.
inline double average_precision(const std::vector<ImageDetections>& images, double iou_threshold) {
    std::size_t n_gt = 0, n_pred = 0;
    for (const auto& im : images) n_gt += im.gts.size(), n_pred += im.preds.size();
    if (n_gt == 0) return n_pred == 0 ? 1.0 : 0.0;
    const auto matches = match_detections(images, iou_threshold);
    std::vector<double> prec;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < matches.size(); ++i) {
        tp += matches[i].first;
        prec.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    }
    for (std::size_t i = prec.size(); i > 1; --i) prec[i - 2] = std::max(prec[i - 2], prec[i - 1]);
    double sum = 0.0;
    for (std::size_t i = 0; i < matches.size(); ++i)
        if (matches[i].first) sum += prec[i];
    return sum / static_cast<double>(n_gt);
}

inline double average_precision(const std::vector<Detection>& preds, const std::vector<BBox>& gts,
                                double iou_threshold) {
    return average_precision(std::vector<ImageDetections>{{preds, gts}}, iou_threshold);
}

struct LabeledBox {
    BBox box;
    std::string label;
};

// One image's labelled predictions and ground truth, for per-class AP.
struct LabeledImage {
    std::vector<Detection> preds;
    std::vector<LabeledBox> gts;
};

// Unweighted mean of per-class AP over classes present in the ground truth.
inline std::map<double, double> mean_ap(const std::vector<LabeledImage>& images, const std::vector<double>& thresholds) {
    std::set<std::string> classes;
    std::size_t n_pred = 0;
    for (const auto& im : images) {
        for (const auto& g : im.gts) classes.insert(g.label);
        n_pred += im.preds.size();
    }
    std::map<double, double> out;
    for (double thr : thresholds) {
        if (classes.empty()) {
            out[thr] = n_pred == 0 ? 1.0 : 0.0;
            continue;
        }
        double sum = 0;
        for (const auto& c : classes) {
            std::vector<ImageDetections> per(images.size());
            for (std::size_t i = 0; i < images.size(); ++i) {
                for (const auto& p : images[i].preds)
                    if (p.label == c) per[i].preds.push_back(p);
                for (const auto& g : images[i].gts)
                    if (g.label == c) per[i].gts.push_back(g.box);
            }
            sum += average_precision(per, thr);
        }
        out[thr] = sum / static_cast<double>(classes.size());
    }
    return out;
}

inline double mean_ap(const std::vector<Detection>& preds, const std::vector<LabeledBox>& gts, double threshold) {
    return mean_ap(std::vector<LabeledImage>{{preds, gts}}, {threshold}).at(threshold);
}

struct CountingScores {
    std::size_t count = 0;
    double accuracy = 0; // percent
    double mae = 0;
};

inline CountingScores counting_scores(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pairs) {
    if (pairs.empty()) throw Error(Errc::EmptyInput, "no counting pairs");
    CountingScores s;
    s.count = pairs.size();
    std::size_t hits = 0;
    double err = 0;
    for (const auto& [p, g] : pairs) {
        hits += p == g;
        err += p > g ? static_cast<double>(p - g) : static_cast<double>(g - p);
    }
    s.accuracy = 100.0 * hits / static_cast<double>(s.count);
    s.mae = err / static_cast<double>(s.count);
    return s;
}

} // namespace geocot
