#pragma once

#include <array>
#include <map>
#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "geocot/error.hpp"
#include "geocot/format.hpp"
#include "geocot/rewards.hpp"
#include "geocot/types.hpp"

namespace geocot::data {

using json = nlohmann::json;

struct ImageRef {
    int width = 0, height = 0;
    std::string path; // file path or URL
    std::optional<std::array<int, 4>> crop; // x, y, w, h within path, for tiled records
};

// One JSONL line:
// {"id", "task", "image": {"width", "height", "path"}, "question", "answer",
//  "rationale"?, "aux"?}
// answer: counting -> integer; grounding -> [x0,y0,x1,y1];
// detection -> [{"box": [...], "label": "..."}]; vqa/classification -> string;
// captioning -> list of reference strings.
struct DatasetRecord {
    std::string id;
    TaskKind task = TaskKind::VQA;
    ImageRef image;
    std::string question;
    GroundTruth answer;
    std::optional<std::string> rationale;
    std::optional<json> aux;
};

struct PredictionRecord {
    std::string id;
    std::string output;
};

namespace detail {

[[noreturn]] inline void schema_fail(std::size_t line, const std::string& msg) {
    throw Error(Errc::Schema, "line " + std::to_string(line) + ": " + msg);
}

inline BBox box_from_json(const json& j, std::size_t line) {
    if (!j.is_array() || j.size() != 4) schema_fail(line, "box must be an array of 4 numbers");
    std::vector<double> v;
    for (const auto& e : j) {
        if (!e.is_number()) schema_fail(line, "box must be an array of 4 numbers");
        v.push_back(e.get<double>());
    }
    const auto s = geocot::detail::detect_scale(v);
    if (s == geocot::detail::Scale::Mixed) schema_fail(line, "box mixes fractions and thousandths");
    const BBox b = geocot::detail::make_box(v.data(), s);
    if (!b.valid()) schema_fail(line, "box violates 0 <= min <= max <= 1");
    return b;
}

inline std::string require_string(const json& o, const char* key, std::size_t line) {
    if (!o.contains(key) || !o[key].is_string()) schema_fail(line, std::string("missing string field '") + key + "'");
    return o[key].get<std::string>();
}

} // namespace detail

inline GroundTruth answer_from_json(TaskKind task, const json& a, std::size_t line = 0) {
    switch (task) {
    case TaskKind::ObjectCounting:
        if (!a.is_number_unsigned() && !(a.is_number_integer() && a.get<long long>() >= 0))
            detail::schema_fail(line, "counting answer must be a non-negative integer");
        return a.get<std::uint64_t>();
    case TaskKind::VisualGrounding: return detail::box_from_json(a, line);
    case TaskKind::ObjectDetection: {
        if (!a.is_array()) detail::schema_fail(line, "detection answer must be a list of {box, label}");
        std::vector<LabeledBox> out;
        for (const auto& e : a) {
            if (!e.is_object() || !e.contains("box")) detail::schema_fail(line, "detection entry needs a box");
            out.push_back({detail::box_from_json(e["box"], line), detail::require_string(e, "label", line)});
        }
        return out;
    }
    case TaskKind::VQA:
    case TaskKind::SceneClassification:
        if (!a.is_string() || util::trim(a.get<std::string>()).empty())
            detail::schema_fail(line, "answer must be a non-empty string");
        return a.get<std::string>();
    case TaskKind::ImageCaptioning: {
        std::vector<std::string> refs;
        if (a.is_string()) {
            refs.push_back(a.get<std::string>());
        } else if (a.is_array()) {
            for (const auto& e : a) {
                if (!e.is_string()) detail::schema_fail(line, "caption references must be strings");
                refs.push_back(e.get<std::string>());
            }
        }
        if (refs.empty()) detail::schema_fail(line, "captioning answer needs at least one reference");
        return refs;
    }
    }
    detail::schema_fail(line, "unhandled task");
}

inline json box_to_json(const BBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

inline json answer_to_json(const GroundTruth& gt) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, BBox>) {
                return box_to_json(v);
            } else if constexpr (std::is_same_v<T, std::vector<LabeledBox>>) {
                json a = json::array();
                for (const auto& lb : v) a.push_back({{"box", box_to_json(lb.box)}, {"label", lb.label}});
                return a;
            } else {
                return v;
            }
        },
        gt);
}

// Ground truth as the plain text an annotator sees.
inline std::string answer_text(const GroundTruth& gt) {
    if (const auto* s = std::get_if<std::string>(&gt)) return *s;
    if (const auto* n = std::get_if<std::uint64_t>(&gt)) return std::to_string(*n);
    if (const auto* c = std::get_if<std::vector<std::string>>(&gt)) return c->front();
    return answer_to_json(gt).dump();
}

inline DatasetRecord record_from_json(const json& j, std::size_t line = 0) {
    if (!j.is_object()) detail::schema_fail(line, "record must be an object");
    static const std::set<std::string> known{"id", "task", "image", "question", "answer", "rationale", "aux"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) detail::schema_fail(line, "unknown field '" + k + "'");
    DatasetRecord r;
    r.id = detail::require_string(j, "id", line);
    if (r.id.empty()) detail::schema_fail(line, "empty id");
    const auto task = parse_task(detail::require_string(j, "task", line));
    if (!task) detail::schema_fail(line, "unknown task '" + j["task"].get<std::string>() + "'");
    r.task = *task;
    if (!j.contains("image") || !j["image"].is_object()) detail::schema_fail(line, "missing image object");
    const auto& im = j["image"];
    if (!im.contains("width") || !im["width"].is_number_integer() || !im.contains("height") ||
        !im["height"].is_number_integer())
        detail::schema_fail(line, "image needs integer width and height");
    r.image.width = im["width"].get<int>();
    r.image.height = im["height"].get<int>();
    if (r.image.width < 1 || r.image.height < 1) detail::schema_fail(line, "image dimensions must be >= 1");
    if (im.contains("path")) {
        if (!im["path"].is_string()) detail::schema_fail(line, "image.path must be a string");
        r.image.path = im["path"].get<std::string>();
    }
    if (im.contains("crop")) {
        const auto& c = im["crop"];
        if (!c.is_array() || c.size() != 4 ||
            !std::all_of(c.begin(), c.end(), [](const json& e) { return e.is_number_integer(); }))
            detail::schema_fail(line, "image.crop must be [x, y, width, height]");
        r.image.crop = std::array<int, 4>{c[0].get<int>(), c[1].get<int>(), c[2].get<int>(), c[3].get<int>()};
    }
    r.question = j.contains("question") && j["question"].is_string() ? j["question"].get<std::string>() : "";
    if (!j.contains("answer")) detail::schema_fail(line, "missing answer");
    r.answer = answer_from_json(r.task, j["answer"], line);
    if (j.contains("rationale") && !j["rationale"].is_null()) {
        if (!j["rationale"].is_string()) detail::schema_fail(line, "rationale must be a string");
        r.rationale = j["rationale"].get<std::string>();
    }
    if (j.contains("aux") && !j["aux"].is_null()) r.aux = j["aux"];
    return r;
}

inline json record_to_json(const DatasetRecord& r) {
    json j{{"id", r.id},
           {"task", task_name(r.task)},
           {"image", {{"width", r.image.width}, {"height", r.image.height}, {"path", r.image.path}}},
           {"question", r.question},
           {"answer", answer_to_json(r.answer)}};
    if (r.image.crop) j["image"]["crop"] = *r.image.crop;
    if (r.rationale) j["rationale"] = *r.rationale;
    if (r.aux) j["aux"] = *r.aux;
    return j;
}

// Calls fn(line_number, parsed_json) for every non-blank line.
template <class Fn>
inline void for_each_jsonl(const std::string& text, Fn&& fn) {
    std::istringstream is(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (util::trim(line).empty()) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) detail::schema_fail(n, "not valid JSON");
        fn(n, j);
    }
}

struct DatasetValidation {
    std::size_t records = 0;
    std::vector<std::string> errors;     // schema problems, one per bad line
    std::vector<std::string> duplicates; // ids seen more than once
    bool ok() const { return errors.empty() && duplicates.empty(); }
};

// Checks every line; never throws on bad records.
inline DatasetValidation validate_dataset(const std::string& text) {
    DatasetValidation v;
    std::map<std::string, int> seen;
    std::istringstream is(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (util::trim(line).empty()) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            v.errors.push_back("line " + std::to_string(n) + ": not valid JSON");
            continue;
        }
        try {
            auto r = record_from_json(j, n);
            ++v.records;
            if (++seen[r.id] == 2) v.duplicates.push_back(r.id);
        } catch (const Error& e) {
            v.errors.push_back(e.what());
        }
    }
    return v;
}

// Strict load: any schema error or duplicate id throws Schema.
inline std::vector<DatasetRecord> load_dataset(const std::string& text) {
    std::vector<DatasetRecord> out;
    std::set<std::string> ids;
    for_each_jsonl(text, [&](std::size_t n, const json& j) {
        auto r = record_from_json(j, n);
        if (!ids.insert(r.id).second) detail::schema_fail(n, "duplicate id '" + r.id + "'");
        out.push_back(std::move(r));
    });
    return out;
}

inline std::vector<PredictionRecord> load_predictions(const std::string& text) {
    std::vector<PredictionRecord> out;
    std::set<std::string> ids;
    for_each_jsonl(text, [&](std::size_t n, const json& j) {
        if (!j.is_object()) detail::schema_fail(n, "prediction must be an object");
        PredictionRecord p{detail::require_string(j, "id", n), detail::require_string(j, "output", n)};
        if (!ids.insert(p.id).second) detail::schema_fail(n, "duplicate prediction id '" + p.id + "'");
        out.push_back(std::move(p));
    });
    return out;
}

} // namespace geocot::data
