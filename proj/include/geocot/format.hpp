#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "geocot/error.hpp"
#include "geocot/types.hpp"
#include "geocot/util.hpp"

namespace geocot {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

// Output of parse_rationale: the task is not known yet.
struct Rationale {
    std::string think;
    std::string answer_raw;
    friend bool operator==(const Rationale&, const Rationale&) = default;
};

struct RationaleRecord {
    std::string think;
    std::string answer_raw;
    TaskKind task = TaskKind::VQA;
    ParsedAnswer parsed;
};

inline bool has_tag_literal(std::string_view s) {
    for (auto tag : {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose})
        if (util::contains(s, tag)) return true;
    return false;
}

// Exactly one think block followed by exactly one answer block. Whitespace
// around and between the blocks is tolerated; any other text outside them is
// rejected. Section contents are returned verbatim.
inline Rationale parse_rationale(std::string_view raw) {
    const std::array<std::string_view, 4> tags = {kThinkOpen, kThinkClose, kAnswerOpen, kAnswerClose};
    std::array<std::size_t, 4> pos{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (util::count_occurrences(raw, tags[i]) == 0)
            throw Error(Errc::MissingTag, "missing " + std::string(tags[i]));
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (util::count_occurrences(raw, tags[i]) > 1)
            throw Error(Errc::DuplicateTag, "repeated " + std::string(tags[i]));
        pos[i] = raw.find(tags[i]);
    }
    const auto [to, tc, ao, ac] = pos;
    if (!(to < tc && tc + kThinkClose.size() <= ao && ao < ac))
        throw Error(Errc::Interleaved, "blocks out of order or nested");
    if (!util::trim(raw.substr(0, to)).empty() ||
        !util::trim(raw.substr(tc + kThinkClose.size(), ao - tc - kThinkClose.size())).empty() ||
        !util::trim(raw.substr(ac + kAnswerClose.size())).empty())
        throw Error(Errc::StrayContent, "text outside the think/answer blocks");

    Rationale r;
    r.think = std::string(raw.substr(to + kThinkOpen.size(), tc - to - kThinkOpen.size()));
    r.answer_raw = std::string(raw.substr(ao + kAnswerOpen.size(), ac - ao - kAnswerOpen.size()));
    if (util::trim(r.think).empty()) throw Error(Errc::EmptySection, "empty think block");
    if (util::trim(r.answer_raw).empty()) throw Error(Errc::EmptySection, "empty answer block");
    return r;
}

inline std::string serialize_record(std::string_view think, std::string_view answer_raw) {
    if (has_tag_literal(think)) throw Error(Errc::EscapeError, "think contains a tag literal");
    if (has_tag_literal(answer_raw)) throw Error(Errc::EscapeError, "answer contains a tag literal");
    if (util::trim(think).empty() || util::trim(answer_raw).empty())
        throw Error(Errc::EmptySection, "cannot serialize an empty section");
    std::string out;
    out.reserve(think.size() + answer_raw.size() + 34);
    out.append(kThinkOpen).append(think).append(kThinkClose);
    out.append(kAnswerOpen).append(answer_raw).append(kAnswerClose);
    return out;
}

inline std::string serialize_record(const Rationale& r) { return serialize_record(r.think, r.answer_raw); }
inline std::string serialize_record(const RationaleRecord& r) { return serialize_record(r.think, r.answer_raw); }

namespace detail {

// Innermost bracket groups "[...]" (no nested brackets) in order of appearance.
inline std::vector<std::string_view> innermost_groups(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t open = std::string_view::npos;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '[') {
            open = i;
        } else if (s[i] == ']' && open != std::string_view::npos) {
            out.push_back(s.substr(open + 1, i - open - 1));
            open = std::string_view::npos;
        }
    }
    return out;
}

// Comma-separated numbers; nullopt if any field is not a number.
inline std::optional<std::vector<double>> parse_number_list(std::string_view body) {
    std::vector<double> vals;
    if (util::trim(body).empty()) return vals;
    for (const auto& field : util::split(body, ",")) {
        auto v = util::parse_double(field);
        if (!v || !std::isfinite(*v)) return std::nullopt;
        vals.push_back(*v);
    }
    return vals;
}

enum class Scale { Fraction, Thousandths, Mixed };

inline Scale detect_scale(const std::vector<double>& vals) {
    bool any_large = false, any_fractional_small = false;
    for (double v : vals) {
        if (v > 1.0) any_large = true;
        if (std::abs(v) < 1.0 && v != std::floor(v)) any_fractional_small = true;
    }
    if (!any_large) return Scale::Fraction;
    return any_fractional_small ? Scale::Mixed : Scale::Thousandths;
}

inline BBox make_box(const double* v, Scale s) {
    const double d = s == Scale::Thousandths ? 1000.0 : 1.0;
    return BBox{v[0] / d, v[1] / d, v[2] / d, v[3] / d};
}

} // namespace detail

// Parses a list of 4-tuples in either fractional or thousandths scale.
inline std::vector<BBox> parse_box_list(std::string_view text) {
    if (!util::contains(text, "["))
        throw Error(Errc::AnswerTypeMismatch, "expected a bracketed box list");
    std::vector<double> all;
    for (auto g : detail::innermost_groups(text)) {
        auto vals = detail::parse_number_list(g);
        if (!vals) throw Error(Errc::AnswerTypeMismatch, "non-numeric box field");
        if (vals->empty()) continue;
        if (vals->size() != 4) throw Error(Errc::AnswerTypeMismatch, "box is not a 4-tuple");
        all.insert(all.end(), vals->begin(), vals->end());
    }
    const auto scale = detail::detect_scale(all);
    if (scale == detail::Scale::Mixed) throw Error(Errc::ScaleAmbiguous, "fractions mixed with thousandths");
    std::vector<BBox> boxes;
    for (std::size_t i = 0; i < all.size(); i += 4) {
        BBox b = detail::make_box(&all[i], scale);
        if (!b.valid()) throw Error(Errc::InvalidBox, "box violates 0 <= min <= max <= 1");
        boxes.push_back(b);
    }
    return boxes;
}

// Single non-negative integer; surrounding words are ignored.
inline std::uint64_t parse_count(std::string_view text) {
    std::optional<std::uint64_t> found;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!util::is_digit(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && util::is_digit(text[j])) ++j;
        if (i > 0 && text[i - 1] == '-') throw Error(Errc::AnswerTypeMismatch, "negative count");
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + j, v);
        if (ec != std::errc()) throw Error(Errc::AnswerTypeMismatch, "count out of range");
        if (found && *found != v) throw Error(Errc::AnswerTypeMismatch, "more than one integer");
        found = v;
        i = j;
    }
    if (!found) throw Error(Errc::AnswerTypeMismatch, "no integer in counting answer");
    return *found;
}

inline ParsedAnswer extract_answer(const Rationale& r, TaskKind task) {
    const std::string_view a = r.answer_raw;
    switch (task) {
    case TaskKind::ObjectCounting: return Count{parse_count(a)};
    case TaskKind::VisualGrounding:
    case TaskKind::ObjectDetection: return Boxes{parse_box_list(a)};
    case TaskKind::SceneClassification: return Label{std::string(util::trim(a))};
    case TaskKind::ImageCaptioning: return Caption{std::string(util::trim(a))};
    case TaskKind::VQA: return FreeText{std::string(util::trim(a))};
    }
    throw Error(Errc::UnknownTask, "unhandled task");
}

inline RationaleRecord make_record(std::string_view raw, TaskKind task) {
    Rationale r = parse_rationale(raw);
    ParsedAnswer p = extract_answer(r, task);
    return RationaleRecord{std::move(r.think), std::move(r.answer_raw), task, std::move(p)};
}

struct GroundedBoxes {
    std::vector<BBox> boxes;
    std::size_t skipped_malformed = 0;
};

// Every bracketed 4-number tuple in the trace that normalizes to a valid box.
// Tuples of other arity are ignored; 4-tuples that fail normalization are
// counted in skipped_malformed.
inline GroundedBoxes extract_grounded_boxes(std::string_view think) {
    GroundedBoxes out;
    for (auto g : detail::innermost_groups(think)) {
        auto vals = detail::parse_number_list(g);
        if (!vals || vals->size() != 4) continue;
        const auto scale = detail::detect_scale(*vals);
        if (scale == detail::Scale::Mixed) {
            ++out.skipped_malformed;
            continue;
        }
        BBox b = detail::make_box(vals->data(), scale);
        if (b.valid())
            out.boxes.push_back(b);
        else
            ++out.skipped_malformed;
    }
    return out;
}

} // namespace geocot
