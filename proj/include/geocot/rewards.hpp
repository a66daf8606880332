#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "geocot/error.hpp"
#include "geocot/format.hpp"
#include "geocot/geometry.hpp"
#include "geocot/text.hpp"
#include "geocot/text_metrics.hpp"
#include "geocot/types.hpp"

namespace geocot {

inline constexpr const char* kMetricBleu4 = "bleu4";
inline constexpr const char* kMetricMeteor = "meteor";
inline constexpr const char* kMetricRougeL = "rouge_l";
inline constexpr const char* kMetricCider = "cider";

struct RewardConfig {
    double alpha = 1.0;
    std::map<std::string, double> caption_weights{
        {kMetricBleu4, 0.25}, {kMetricMeteor, 0.25}, {kMetricRougeL, 0.25}, {kMetricCider, 0.25}};
    double partial_credit = 0.6;
    double partial_rule_threshold = 0.5;
    double cider_normalizer = 10.0;
    bool format_gate = true;

    double weight(const std::string& m) const {
        auto it = caption_weights.find(m);
        return it == caption_weights.end() ? 0.0 : it->second;
    }

    void validate() const {
        if (!(alpha > 0 && alpha <= 1)) throw Error(Errc::InvalidConfig, "alpha must lie in (0,1]");
        double sum = 0;
        for (const auto& [k, w] : caption_weights) {
            if (k != kMetricBleu4 && k != kMetricMeteor && k != kMetricRougeL && k != kMetricCider)
                throw Error(Errc::InvalidConfig, "unknown caption metric '" + k + "'");
            if (!(w >= 0)) throw Error(Errc::InvalidConfig, "caption weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::InvalidConfig, "caption weights must sum to 1");
        if (!(partial_credit >= 0 && partial_credit <= 1))
            throw Error(Errc::InvalidConfig, "partial_credit must lie in [0,1]");
        if (!(partial_rule_threshold > 0 && partial_rule_threshold < 1))
            throw Error(Errc::InvalidConfig, "partial_rule_threshold must lie in (0,1)");
        if (!(cider_normalizer > 0)) throw Error(Errc::InvalidConfig, "cider_normalizer must be positive");
    }
};

struct RewardOutcome {
    double value = 0.0;
    std::map<std::string, double> components;
    bool format_valid = true;
    std::string diagnostic; // parse/extraction error, if any
};

// ---- per-task rewards --------------------------------------------------------

inline RewardOutcome reward_vqa_or_classification(std::string_view pred, std::string_view gt,
                                                  const RewardConfig& cfg) {
    RewardOutcome o;
    const double f1 = token_f1(pred, gt);
    o.components["token_f1"] = f1;
    if (normalize_answer(pred) == normalize_answer(gt))
        o.value = 1.0;
    else if (f1 >= cfg.partial_rule_threshold)
        o.value = cfg.partial_credit;
    else
        o.value = 0.0;
    return o;
}

inline RewardOutcome reward_grounding(const BBox& pred, const BBox& gt) {
    RewardOutcome o;
    o.value = iou(pred, gt);
    o.components["iou"] = o.value;
    return o;
}

inline RewardOutcome reward_counting(std::uint64_t pred, std::uint64_t gt, const RewardConfig& cfg) {
    RewardOutcome o;
    const double p = static_cast<double>(pred), g = static_cast<double>(gt);
    const double err = std::abs(p - g);
    o.components["abs_error"] = err;
    if (pred == 0 && gt == 0)
        o.value = 1.0;
    else
        o.value = std::clamp(1.0 - cfg.alpha * err / std::max(p, g), 0.0, 1.0);
    return o;
}

// Predicted boxes carry no class; they take the record's query class, which
// is the shared ground-truth label (or "*" when the ground truth mixes classes,
// in which case every box is compared class-agnostically).
inline std::string detection_query_class(const std::vector<LabeledBox>& gts) {
    if (gts.empty()) return "";
    for (const auto& g : gts)
        if (g.label != gts.front().label) return "*";
    return gts.front().label;
}

inline LabeledImage label_detections(const std::vector<BBox>& pred_boxes, const std::vector<LabeledBox>& gts) {
    const std::string cls = detection_query_class(gts);
    LabeledImage im;
    for (std::size_t i = 0; i < pred_boxes.size(); ++i)
        im.preds.push_back(Detection{pred_boxes[i], static_cast<int>(i) + 1, cls});
    for (const auto& g : gts) im.gts.push_back(LabeledBox{g.box, cls == "*" ? "*" : g.label});
    return im;
}

inline RewardOutcome reward_detection(const std::vector<BBox>& pred_boxes, const std::vector<LabeledBox>& gts,
                                      const RewardConfig&) {
    RewardOutcome o;
    o.value = mean_ap({label_detections(pred_boxes, gts)}, {0.5}).at(0.5);
    o.components["map50"] = o.value;
    return o;
}

// corpus may be null when the CIDEr weight is zero.
inline RewardOutcome reward_captioning(std::string_view candidate, const std::vector<std::string>& references,
                                       const CiderIdf* corpus, const RewardConfig& cfg) {
    if (references.empty()) throw Error(Errc::EmptyReferenceSet, "caption reward without references");
    const Tokens cand = tokenize(candidate);
    std::vector<Tokens> refs;
    for (const auto& r : references) refs.push_back(tokenize(r));

    RewardOutcome o;
    const double b = bleu4(cand, refs);
    const double m = meteor_lite(cand, refs);
    const double r = rouge_l(cand, refs);
    double c = 0.0;
    if (cfg.weight(kMetricCider) > 0) {
        if (!corpus) throw Error(Errc::CorpusTooSmall, "CIDEr weight set but no corpus context given");
        c = corpus->score(cand, refs);
    } else if (corpus) {
        c = corpus->score(cand, refs);
    }
    const double cn = c / cfg.cider_normalizer;
    o.components[kMetricBleu4] = b;
    o.components[kMetricMeteor] = m;
    o.components[kMetricRougeL] = r;
    o.components[kMetricCider] = c;
    o.value = cfg.weight(kMetricBleu4) * b + cfg.weight(kMetricMeteor) * m + cfg.weight(kMetricRougeL) * r +
              cfg.weight(kMetricCider) * cn;
    o.value = std::clamp(o.value, 0.0, 1.0);
    return o;
}

// ---- dispatcher ----------------------------------------------------------

// Ground truth payload; the alternative must match the task.
using GroundTruth = std::variant<std::uint64_t,             // counting
                                 BBox,                      // grounding
                                 std::vector<LabeledBox>,   // detection
                                 std::string,               // VQA / classification
                                 std::vector<std::string>>; // caption references

inline bool ground_truth_matches(TaskKind task, const GroundTruth& gt) {
    switch (task) {
    case TaskKind::ObjectCounting: return std::holds_alternative<std::uint64_t>(gt);
    case TaskKind::VisualGrounding: return std::holds_alternative<BBox>(gt);
    case TaskKind::ObjectDetection: return std::holds_alternative<std::vector<LabeledBox>>(gt);
    case TaskKind::VQA:
    case TaskKind::SceneClassification: return std::holds_alternative<std::string>(gt);
    case TaskKind::ImageCaptioning: return std::holds_alternative<std::vector<std::string>>(gt);
    }
    return false;
}

namespace detail {

inline RewardOutcome invalid_outcome(std::string why) {
    RewardOutcome o;
    o.value = 0.0;
    o.format_valid = false;
    o.diagnostic = std::move(why);
    return o;
}

inline RewardOutcome score_parsed(const ParsedAnswer& p, TaskKind task, const GroundTruth& gt,
                                  const RewardConfig& cfg, const CiderIdf* corpus) {
    switch (task) {
    case TaskKind::ObjectCounting:
        return reward_counting(std::get<Count>(p).value, std::get<std::uint64_t>(gt), cfg);
    case TaskKind::VisualGrounding: {
        const auto& boxes = std::get<Boxes>(p).boxes;
        if (boxes.empty()) {
            RewardOutcome o;
            o.components["iou"] = 0.0;
            return o;
        }
        return reward_grounding(boxes.front(), std::get<BBox>(gt));
    }
    case TaskKind::ObjectDetection:
        return reward_detection(std::get<Boxes>(p).boxes, std::get<std::vector<LabeledBox>>(gt), cfg);
    case TaskKind::SceneClassification:
        return reward_vqa_or_classification(std::get<Label>(p).text, std::get<std::string>(gt), cfg);
    case TaskKind::VQA:
        return reward_vqa_or_classification(std::get<FreeText>(p).text, std::get<std::string>(gt), cfg);
    case TaskKind::ImageCaptioning:
        return reward_captioning(std::get<Caption>(p).text, std::get<std::vector<std::string>>(gt), corpus, cfg);
    }
    return invalid_outcome("unhandled task");
}

} // namespace detail

// Total over output text: malformed outputs are encoded in the outcome.
// With the format gate off, an output that fails to parse is scored as if the
// whole text were the answer block.
inline RewardOutcome reward(std::string_view output, TaskKind task, const GroundTruth& gt, const RewardConfig& cfg,
                            const CiderIdf* corpus = nullptr) {
    if (!ground_truth_matches(task, gt))
        throw Error(Errc::AnswerTypeMismatch, "ground truth does not match task " + std::string(task_name(task)));

    Rationale r;
    bool parsed = true;
    std::string why;
    try {
        r = parse_rationale(output);
    } catch (const Error& e) {
        parsed = false;
        why = e.what();
    }
    if (!parsed) {
        if (cfg.format_gate) return detail::invalid_outcome(why);
        r.answer_raw = std::string(output);
    }

    ParsedAnswer p;
    try {
        p = extract_answer(r, task);
    } catch (const Error& e) {
        return detail::invalid_outcome(e.what());
    }
    RewardOutcome o = detail::score_parsed(p, task, gt, cfg, corpus);
    if (!std::isfinite(o.value)) o.value = 0.0;
    o.value = std::clamp(o.value, 0.0, 1.0);
    o.format_valid = parsed;
    if (!parsed) o.diagnostic = why;
    return o;
}

} // namespace geocot
