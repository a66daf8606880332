#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "geocot/error.hpp"
#include "geocot/prompt_text.hpp"
#include "geocot/rng.hpp"
#include "geocot/text.hpp"
#include "geocot/types.hpp"
#include "geocot/util.hpp"

namespace geocot::annotate {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct AnnotationRequest {
    std::string id;
    TaskKind task = TaskKind::VQA;
    std::string image_ref;
    int width = 0, height = 0;
    std::string question;
    std::string answer; // ground truth as text (JSON text for box answers)
    json auxiliary = json::object();
};

// Top-level auxiliary keys accepted per task.
inline const std::set<std::string>& aux_schema(TaskKind t) {
    static const std::set<std::string> counting{"image_size", "objects", "count"};
    static const std::set<std::string> described{"image_size", "objects", "caption"};
    if (t == TaskKind::ObjectCounting || t == TaskKind::ObjectDetection) return counting;
    return described;
}

inline bool aux_schema_ok(const AnnotationRequest& r) {
    if (r.auxiliary.is_null()) return true;
    if (!r.auxiliary.is_object()) return false;
    const auto& allowed = aux_schema(r.task);
    for (const auto& [k, v] : r.auxiliary.items())
        if (!allowed.count(k)) return false;
    return true;
}

// ---- prompts -----------------------------------------------------------------

inline constexpr std::string_view kExemplarSlot = "{Task-specific exemplars}";
inline constexpr std::string_view kTaskToken = "TASK";

struct TaskTemplate {
    std::string task_label; // substituted for the TASK token
    std::vector<std::string> exemplars;
};

struct PromptTemplates {
    std::string base_text;
    std::map<TaskKind, TaskTemplate> tasks;
};

inline PromptTemplates default_templates() {
    PromptTemplates t;
    t.base_text = std::string(prompts::kBasePrompt);
    t.tasks[TaskKind::ObjectCounting] = {"count", {std::string(prompts::kCountingExemplars)}};
    t.tasks[TaskKind::ImageCaptioning] = {"caption", {std::string(prompts::kCaptionExemplars)}};
    t.tasks[TaskKind::ObjectDetection] = {"Object Detect", {std::string(prompts::kDetectionExemplars)}};
    t.tasks[TaskKind::VQA] = {"VQA", {std::string(prompts::kVqaExemplars)}};
    t.tasks[TaskKind::SceneClassification] = {"Scene Classification",
                                              {std::string(prompts::kClassificationExemplars)}};
    t.tasks[TaskKind::VisualGrounding] = {"VG", {std::string(prompts::kGroundingExemplars)}};
    return t;
}

// Answer as it appears in the request JSON: box lists stay structured.
inline json answer_json(const AnnotationRequest& r) {
    if (r.task == TaskKind::ObjectDetection || r.task == TaskKind::VisualGrounding) {
        auto j = json::parse(r.answer, nullptr, false);
        if (!j.is_discarded() && j.is_array()) return j;
    }
    return r.answer;
}

inline std::string render_request(const AnnotationRequest& r) {
    ordered_json j;
    j["question"] = r.question;
    if (!r.auxiliary.is_null() && !r.auxiliary.empty()) j["auxiliary information"] = r.auxiliary;
    j["answer"] = answer_json(r);
    return j.dump(4);
}

inline std::string build_prompt(const AnnotationRequest& r, const PromptTemplates& templates) {
    auto it = templates.tasks.find(r.task);
    if (it == templates.tasks.end())
        throw Error(Errc::UnknownTask, "no prompt template for task " + std::string(task_name(r.task)));
    const auto& tt = it->second;
    if (tt.exemplars.empty())
        throw Error(Errc::MissingExemplars, "template for " + std::string(task_name(r.task)) + " has no exemplars");
    std::string ex;
    for (std::size_t i = 0; i < tt.exemplars.size(); ++i) ex += (i ? "\n\n" : "") + tt.exemplars[i];
    std::string out = util::replace_all(templates.base_text, kTaskToken, tt.task_label);
    out = util::replace_all(out, kExemplarSlot, ex);
    out += "\n\nInput:\n" + render_request(r) + "\n";
    return out;
}

// ---- annotator client ------------------------------------------------------

struct AnnotatorConfig {
    std::string url = "mock://echo";
    std::string token_env = "GEOCOT_ANNOTATOR_TOKEN";
    double timeout_s = 60.0;
    int max_retries = 3;
    double initial_backoff_ms = 500.0;
    double backoff_factor = 2.0;
    double jitter = 0.2;
    int max_in_flight = 4;
    std::string on_invalid = "drop"; // drop | keep | regenerate
    int max_regenerations = 2;

    void validate() const {
        if (url.empty()) throw Error(Errc::InvalidConfig, "annotator.url is empty");
        if (!(timeout_s > 0)) throw Error(Errc::InvalidConfig, "annotator.timeout_s must be positive");
        if (max_retries < 0) throw Error(Errc::InvalidConfig, "annotator.max_retries must be >= 0");
        if (!(initial_backoff_ms >= 0) || !(backoff_factor >= 1))
            throw Error(Errc::InvalidConfig, "bad annotator backoff");
        if (!(jitter >= 0 && jitter < 1)) throw Error(Errc::InvalidConfig, "annotator.jitter must lie in [0,1)");
        if (max_in_flight < 1) throw Error(Errc::InvalidConfig, "annotator.max_in_flight must be >= 1");
        if (on_invalid != "drop" && on_invalid != "keep" && on_invalid != "regenerate")
            throw Error(Errc::InvalidConfig, "annotator.on_invalid must be drop, keep or regenerate");
        if (max_regenerations < 0) throw Error(Errc::InvalidConfig, "annotator.max_regenerations must be >= 0");
    }
};

struct TransportResponse {
    enum class Failure { None, Transport, Timeout };
    Failure failure = Failure::None;
    int status = 0;
    std::string body;
    std::string detail;
};

class AnnotatorTransport {
public:
    virtual ~AnnotatorTransport() = default;
    virtual TransportResponse post(const std::string& body) = 0;
};

inline std::string extract_input_json(const std::string& prompt) {
    const auto p = prompt.rfind("\nInput:\n");
    return p == std::string::npos ? std::string() : prompt.substr(p + 8);
}

// Template-echo annotator: answers every prompt with a three-segment CoT
// built from the request embedded in it; the answer only appears at the end.
class MockAnnotator : public AnnotatorTransport {
public:
    TransportResponse post(const std::string& body) override {
        TransportResponse r;
        r.status = 200;
        r.body = json{{"CoT", respond(body)}}.dump();
        return r;
    }

    static std::string respond(const std::string& body) {
        auto req = json::parse(body, nullptr, false);
        std::string question = "the question", answer = "the result";
        if (!req.is_discarded() && req.contains("prompt") && req["prompt"].is_string()) {
            auto in = json::parse(extract_input_json(req["prompt"].get<std::string>()), nullptr, false);
            if (!in.is_discarded() && in.is_object()) {
                if (in.contains("question") && in["question"].is_string()) question = in["question"];
                if (in.contains("answer"))
                    answer = in["answer"].is_string() ? in["answer"].get<std::string>() : in["answer"].dump();
            }
        }
        const std::string q = util::replace_all(question, "\n", " ");
        return "To address the request '" + q + "', I first survey the overall layout of the scene." +
               "\n\n\nNext, I inspect the regions relevant to the request and collect the visible evidence, "
               "checking each candidate against its shape, size and context." +
               "\n\n\nAfter verifying the evidence, the final result is " + answer + ".";
    }
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

struct AnnotatorResult {
    std::string cot;
    int attempts = 0;
    int retries = 0;
    std::vector<std::string> log;
};

inline std::string image_payload(const std::string& image_ref) {
    if (image_ref.rfind("http://", 0) == 0 || image_ref.rfind("https://", 0) == 0 || image_ref.rfind("data:", 0) == 0)
        return image_ref;
    return util::base64_encode(util::read_file(image_ref));
}

// POST {"prompt", "image"}; expects {"CoT": text}. Transport failures and
// malformed bodies are retried with jittered exponential backoff; after
// max_retries + 1 attempts the last failure class is raised.
inline AnnotatorResult call_annotator(AnnotatorTransport& transport, const AnnotatorConfig& cfg,
                                      const std::string& prompt, const std::string& image_ref, Rng& rng,
                                      const Sleeper& sleep = real_sleeper()) {
    const std::string body = json{{"prompt", prompt}, {"image", image_payload(image_ref)}}.dump();
    AnnotatorResult res;
    Errc last = Errc::Transport;
    std::string last_msg;
    double backoff = cfg.initial_backoff_ms;
    for (int attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
        res.attempts = attempt;
        const TransportResponse r = transport.post(body);
        if (r.failure == TransportResponse::Failure::Timeout) {
            last = Errc::Timeout, last_msg = "request timed out " + r.detail;
        } else if (r.failure == TransportResponse::Failure::Transport) {
            last = Errc::Transport, last_msg = "transport failure " + r.detail;
        } else if (r.status != 200) {
            last = Errc::Transport, last_msg = "HTTP status " + std::to_string(r.status);
        } else {
            auto j = json::parse(r.body, nullptr, false);
            if (!j.is_discarded() && j.is_object() && j.contains("CoT") && j["CoT"].is_string()) {
                res.cot = j["CoT"].get<std::string>();
                return res;
            }
            last = Errc::MalformedResponse, last_msg = "response body lacks a string CoT field";
        }
        res.log.push_back("attempt " + std::to_string(attempt) + ": " + last_msg);
        if (attempt <= cfg.max_retries) {
            ++res.retries;
            const double j = 1.0 + cfg.jitter * (2.0 * rng.uniform() - 1.0);
            sleep(std::chrono::milliseconds(static_cast<long long>(std::llround(backoff * j))));
            backoff *= cfg.backoff_factor;
        }
    }
    throw Error(last, last_msg + " (after " + std::to_string(res.attempts) + " attempts)");
}

// ---- CoT validation ------------------------------------------------------------

inline constexpr std::string_view kSegmentSeparator = "\n\n\n";

inline const std::vector<std::string>& forbidden_phrases() {
    static const std::vector<std::string> v{"consistent with the correct answer", "correct answer"};
    return v;
}

struct ValidationReport {
    std::size_t segment_count = 0;
    bool separator_ok = false;
    std::vector<std::string> aux_leak;
    bool premature_answer = false;
    bool schema_ok = true;
    std::vector<std::string> forbidden;
    bool pass = false;
    std::vector<std::string> reasons;
};

namespace detail {

inline std::string compact_numbers(std::string_view s) {
    std::string out;
    for (char c : s)
        if (!util::is_space(c)) out.push_back(c);
    return out;
}

inline bool is_number_array(const json& j) {
    if (!j.is_array() || j.empty()) return false;
    return std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_number(); });
}

inline std::string number_text(const json& j) {
    if (j.is_number_integer() || j.is_number_unsigned()) return j.dump();
    const double v = j.get<double>();
    if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
    return j.dump();
}

struct LeakCandidates {
    std::vector<std::string> keys;    // snake_case schema fields
    std::vector<std::string> phrases; // multi-word string values
    std::vector<std::string> numbers; // standalone numbers with >= 2 significant chars
    std::vector<std::string> tuples;  // numeric tuples, whitespace-free
};

inline void collect(const json& j, LeakCandidates& c) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            if (k.find('_') != std::string::npos) c.keys.push_back(k);
            collect(v, c);
        }
    } else if (j.is_array()) {
        if (is_number_array(j)) {
            std::string t = "[";
            for (std::size_t i = 0; i < j.size(); ++i) t += (i ? "," : "") + number_text(j[i]);
            c.tuples.push_back(t + "]");
        } else {
            for (const auto& e : j) collect(e, c);
        }
    } else if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (tokenize(s).size() >= 4) c.phrases.push_back(s);
    } else if (j.is_number()) {
        const auto s = number_text(j);
        if (s.size() >= 2) c.numbers.push_back(s);
    }
}

// Whole-number match: not adjacent to other digits or a decimal point.
inline bool contains_number(std::string_view hay, std::string_view num) {
    for (std::size_t p = hay.find(num); p != std::string_view::npos; p = hay.find(num, p + 1)) {
        const bool left_ok = p == 0 || !(util::is_digit(hay[p - 1]) || hay[p - 1] == '.');
        const std::size_t e = p + num.size();
        const bool right_ok = e >= hay.size() || !(util::is_digit(hay[e]) || (hay[e] == '.' && e + 1 < hay.size() &&
                                                                                   util::is_digit(hay[e + 1])));
        if (left_ok && right_ok) return true;
    }
    return false;
}

inline bool contains_token_run(const Tokens& hay, const Tokens& needle) {
    if (needle.empty() || needle.size() > hay.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i)
        if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(i))) return true;
    return false;
}

} // namespace detail

// String-literal checks only. Auxiliary values that also occur in the question
// or in the ground-truth answer are not treated as leaks.
inline ValidationReport validate_cot(const std::string& cot, const AnnotationRequest& req) {
    ValidationReport rep;
    const auto raw_segments = util::split(cot, kSegmentSeparator);
    std::vector<std::string> segments;
    for (const auto& s : raw_segments)
        if (!util::trim(s).empty()) segments.push_back(s);
    rep.segment_count = segments.size();
    rep.separator_ok = rep.segment_count >= 2;

    const std::string cot_lower = util::to_lower(cot);
    const std::string cot_compact = detail::compact_numbers(cot);
    const std::string q_lower = util::to_lower(req.question);
    const std::string a_lower = util::to_lower(req.answer);
    const std::string qa_compact = detail::compact_numbers(req.question + " " + req.answer);

    detail::LeakCandidates c;
    if (!req.auxiliary.is_null()) detail::collect(req.auxiliary, c);
    auto add_leak = [&](const std::string& s) {
        if (std::find(rep.aux_leak.begin(), rep.aux_leak.end(), s) == rep.aux_leak.end()) rep.aux_leak.push_back(s);
    };
    auto in_question_or_answer = [&](const std::string& lower) {
        return util::contains(q_lower, lower) || util::contains(a_lower, lower);
    };
    for (const auto& k : c.keys) {
        const auto kl = util::to_lower(k);
        if (!in_question_or_answer(kl) && util::contains(cot_lower, kl)) add_leak(k);
    }
    for (const auto& p : c.phrases) {
        const auto pl = util::to_lower(p);
        if (!in_question_or_answer(pl) && util::contains(cot_lower, pl)) add_leak(p);
    }
    for (const auto& n : c.numbers) {
        if (detail::contains_number(req.question, n) || detail::contains_number(req.answer, n)) continue;
        if (detail::contains_number(cot, n)) add_leak(n);
    }
    for (const auto& t : c.tuples) {
        if (util::contains(qa_compact, t)) continue;
        if (util::contains(cot_compact, t)) add_leak(t);
    }
    if (util::contains(cot_lower, "auxiliary information")) add_leak("auxiliary information");

    // premature answer: GT tokens in the first segment, unless the question
    // itself already contains them
    const Tokens ans = normalized_tokens(req.answer);
    if (!segments.empty() && !ans.empty() && !detail::contains_token_run(normalized_tokens(req.question), ans))
        rep.premature_answer = detail::contains_token_run(normalized_tokens(segments.front()), ans);

    for (const auto& f : forbidden_phrases())
        if (util::contains(cot_lower, f)) rep.forbidden.push_back(f);

    rep.schema_ok = aux_schema_ok(req) && !util::trim(cot).empty();

    if (!rep.separator_ok) rep.reasons.push_back("fewer than 2 segments separated by a blank triple newline");
    if (!rep.aux_leak.empty()) rep.reasons.push_back("auxiliary information leaked into the CoT");
    if (rep.premature_answer) rep.reasons.push_back("answer stated in the first segment");
    if (!rep.forbidden.empty()) rep.reasons.push_back("forbidden meta-phrase present");
    if (!rep.schema_ok) rep.reasons.push_back("request auxiliary keys outside the task schema or empty CoT");
    rep.pass = rep.reasons.empty();
    return rep;
}

// ---- tiling ------------------------------------------------------------------

struct Tile {
    int x = 0, y = 0, width = 0, height = 0;
    friend bool operator==(const Tile&, const Tile&) = default;
};

inline std::vector<int> tile_offsets(int extent, int tile) {
    if (extent <= tile) return {0};
    std::vector<int> out;
    int x = 0;
    for (; x + tile <= extent; x += tile) out.push_back(x);
    if (out.back() + tile < extent) out.push_back(extent - tile);
    return out;
}

// Stride = tile; the last row/column is shifted inward to stay full size.
// Images smaller than the tile in a dimension get a single full-extent span.
inline std::vector<Tile> tile_image_grid(int width, int height, int tile = 800) {
    if (width < 1 || height < 1 || tile < 1) throw Error(Errc::CoordOutOfRange, "image and tile sizes must be >= 1");
    std::vector<Tile> out;
    const int tw = std::min(tile, width), th = std::min(tile, height);
    for (int y : tile_offsets(height, tile))
        for (int x : tile_offsets(width, tile)) out.push_back({x, y, tw, th});
    return out;
}

// Global fractional box -> tile-local fractional box. Boxes are clipped to the
// tile and dropped when less than min_retained of their area survives.
inline std::optional<BBox> remap_box(const Tile& t, int image_w, int image_h, const BBox& g,
                                     double min_retained = 0.3) {
    const double W = image_w, H = image_h;
    const double x0 = g.x_min * W, y0 = g.y_min * H, x1 = g.x_max * W, y1 = g.y_max * H;
    const double cx0 = std::max(x0, static_cast<double>(t.x)), cy0 = std::max(y0, static_cast<double>(t.y));
    const double cx1 = std::min(x1, static_cast<double>(t.x + t.width));
    const double cy1 = std::min(y1, static_cast<double>(t.y + t.height));
    if (cx1 < cx0 || cy1 < cy0) return std::nullopt;
    const double area = (x1 - x0) * (y1 - y0);
    const double kept = (cx1 - cx0) * (cy1 - cy0);
    if (area > 0 ? kept < min_retained * area : false) return std::nullopt;
    BBox b{(cx0 - t.x) / t.width, (cy0 - t.y) / t.height, (cx1 - t.x) / t.width, (cy1 - t.y) / t.height};
    b.x_min = std::clamp(b.x_min, 0.0, 1.0), b.y_min = std::clamp(b.y_min, 0.0, 1.0);
    b.x_max = std::clamp(b.x_max, b.x_min, 1.0), b.y_max = std::clamp(b.y_max, b.y_min, 1.0);
    return b;
}

inline BBox unmap_box(const Tile& t, int image_w, int image_h, const BBox& l) {
    const double W = image_w, H = image_h;
    return BBox{(l.x_min * t.width + t.x) / W, (l.y_min * t.height + t.y) / H, (l.x_max * t.width + t.x) / W,
                (l.y_max * t.height + t.y) / H};
}

} // namespace geocot::annotate
