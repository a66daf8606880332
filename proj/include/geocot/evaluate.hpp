#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "geocot/dataset.hpp"
#include "geocot/format.hpp"
#include "geocot/geometry.hpp"
#include "geocot/rewards.hpp"
#include "geocot/text.hpp"
#include "geocot/text_metrics.hpp"
#include "geocot/version.hpp"

namespace geocot::eval {

using json = nlohmann::json;

inline constexpr const char* kReportSchema = "geocot.eval/1";
inline const std::vector<double> kDetectionThresholds{0.25, 0.5, 0.75};

struct EvalOptions {
    std::optional<TaskKind> task; // restrict to one task
    bool strict_join = true;      // missing/unknown ids are failures
    unsigned threads = 0;         // 0 = hardware concurrency
};

struct TaskReport {
    TaskKind task = TaskKind::VQA;
    std::size_t count = 0;
    std::size_t unparseable = 0;
    std::size_t missing = 0; // records without a prediction, scored as unparseable
    std::map<std::string, double> metrics; // percentages
};

struct EvalReport {
    std::size_t dataset_records = 0;
    std::size_t predictions = 0;
    std::size_t joined = 0;
    std::size_t missing_predictions = 0;
    std::vector<std::string> unknown_prediction_ids;
    std::vector<TaskReport> tasks;
    std::vector<std::string> warnings;

    bool join_failed() const { return missing_predictions > 0 || !unknown_prediction_ids.empty(); }
};

namespace detail {

struct Scored {
    bool parsed = false;
    std::optional<ParsedAnswer> answer;
};

inline Scored parse_prediction(const std::optional<std::string>& output, TaskKind task) {
    Scored s;
    if (!output) return s;
    try {
        s.answer = extract_answer(parse_rationale(*output), task);
        s.parsed = true;
    } catch (const Error&) {
    }
    return s;
}

template <class Fn>
inline void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct Item {
    const data::DatasetRecord* rec = nullptr;
    std::optional<std::string> output;
    Scored scored;
};

inline TaskReport score_task(TaskKind task, const std::vector<Item>& items, std::vector<std::string>& warnings) {
    TaskReport r;
    r.task = task;
    r.count = items.size();
    for (const auto& it : items) {
        r.unparseable += !it.scored.parsed;
        r.missing += !it.output.has_value();
    }
    switch (task) {
    case TaskKind::VisualGrounding: {
        std::vector<BBox> preds, gts;
        for (const auto& it : items) {
            BBox p{0, 0, 0, 0}; // zero-area: IoU 0 against anything
            if (it.scored.parsed) {
                const auto& b = std::get<Boxes>(*it.scored.answer).boxes;
                if (!b.empty()) p = b.front();
            }
            preds.push_back(p);
            gts.push_back(std::get<BBox>(it.rec->answer));
        }
        const auto g = grounding_scores(preds, gts);
        r.metrics = {{"acc@0.5", g.acc_at_50}, {"acc@0.75", g.acc_at_75}, {"miou", g.miou}};
        for (const auto& w : g.warnings) warnings.push_back(w);
        break;
    }
    case TaskKind::ObjectCounting: {
        if (items.empty()) {
            r.metrics = {{"accuracy", 0.0}, {"mae", 0.0}};
            warnings.push_back("no counting records; metrics reported as 0");
            break;
        }
        std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
        for (const auto& it : items) {
            const auto gt = std::get<std::uint64_t>(it.rec->answer);
            // unparseable: scored as a wrong count of 0 (1 when the truth is 0)
            const std::uint64_t p = it.scored.parsed ? std::get<Count>(*it.scored.answer).value : (gt == 0 ? 1 : 0);
            pairs.emplace_back(p, gt);
        }
        const auto c = counting_scores(pairs);
        r.metrics = {{"accuracy", c.accuracy}, {"mae", c.mae}};
        break;
    }
    case TaskKind::ObjectDetection: {
        std::vector<LabeledImage> images;
        for (const auto& it : items) {
            std::vector<BBox> boxes;
            if (it.scored.parsed) boxes = std::get<Boxes>(*it.scored.answer).boxes;
            images.push_back(label_detections(boxes, std::get<std::vector<LabeledBox>>(it.rec->answer)));
        }
        if (items.empty()) warnings.push_back("no detection records; metrics reported as 0");
        const auto m = items.empty() ? std::map<double, double>{} : mean_ap(images, kDetectionThresholds);
        for (double t : kDetectionThresholds) {
            char key[32];
            std::snprintf(key, sizeof key, "map@%.2g", t);
            r.metrics[key] = items.empty() ? 0.0 : 100.0 * m.at(t);
        }
        break;
    }
    case TaskKind::VQA:
    case TaskKind::SceneClassification: {
        std::size_t hits = 0;
        for (const auto& it : items) {
            if (!it.scored.parsed) continue;
            const std::string pred = task == TaskKind::VQA ? std::get<FreeText>(*it.scored.answer).text
                                                           : std::get<Label>(*it.scored.answer).text;
            hits += normalize_answer(pred) == normalize_answer(std::get<std::string>(it.rec->answer));
        }
        if (items.empty()) warnings.push_back(std::string("no ") + std::string(task_name(task)) + " records");
        r.metrics["accuracy"] = items.empty() ? 0.0 : 100.0 * hits / static_cast<double>(items.size());
        break;
    }
    case TaskKind::ImageCaptioning: {
        std::vector<CaptionItem> corpus;
        for (const auto& it : items) {
            CaptionItem ci;
            if (it.scored.parsed) ci.candidate = tokenize(std::get<Caption>(*it.scored.answer).text);
            for (const auto& ref : std::get<std::vector<std::string>>(it.rec->answer))
                ci.references.push_back(tokenize(ref));
            corpus.push_back(std::move(ci));
        }
        double b = 0, m = 0, rl = 0, c = 0;
        for (const auto& ci : corpus) {
            if (ci.candidate.empty()) continue;
            b += bleu4(ci.candidate, ci.references);
            m += meteor_lite(ci.candidate, ci.references);
            rl += rouge_l(ci.candidate, ci.references);
        }
        if (corpus.size() >= 2) {
            const auto cr = cider(corpus);
            c = cr.mean;
        } else {
            warnings.push_back("CIDEr needs at least 2 captioning records; reported as 0");
        }
        const double n = corpus.empty() ? 1.0 : static_cast<double>(corpus.size());
        r.metrics = {{"bleu4", 100.0 * b / n}, {"meteor", 100.0 * m / n}, {"rouge_l", 100.0 * rl / n},
                     {"cider", 100.0 * c}};
        break;
    }
    }
    return r;
}

} // namespace detail

// Aggregates are computed over records sorted by id, so input order never
// changes the result.
inline EvalReport evaluate(const std::vector<data::PredictionRecord>& preds,
                           const std::vector<data::DatasetRecord>& dataset, const EvalOptions& opt = {}) {
    EvalReport rep;
    std::map<std::string, const data::DatasetRecord*> by_id;
    for (const auto& r : dataset)
        if (!opt.task || r.task == *opt.task) by_id[r.id] = &r;
    std::set<std::string> all_ids;
    for (const auto& r : dataset) all_ids.insert(r.id);

    std::map<std::string, const std::string*> outputs;
    for (const auto& p : preds) {
        if (by_id.count(p.id)) {
            outputs[p.id] = &p.output;
            ++rep.predictions;
        } else if (!all_ids.count(p.id)) {
            rep.unknown_prediction_ids.push_back(p.id);
            ++rep.predictions;
        }
    }
    std::sort(rep.unknown_prediction_ids.begin(), rep.unknown_prediction_ids.end());
    rep.dataset_records = by_id.size();

    std::vector<detail::Item> items;
    for (const auto& [id, rec] : by_id) {
        detail::Item it;
        it.rec = rec;
        if (auto o = outputs.find(id); o != outputs.end()) it.output = *o->second;
        if (it.output) {
            ++rep.joined;
        } else {
            ++rep.missing_predictions;
            if (!opt.strict_join) continue;
        }
        items.push_back(std::move(it));
    }
    detail::parallel_for(items.size(), opt.threads,
                         [&](std::size_t i) { items[i].scored = detail::parse_prediction(items[i].output, items[i].rec->task); });

    if (preds.empty()) rep.warnings.push_back("prediction file is empty; every record scored as unparseable");
    if (rep.missing_predictions)
        rep.warnings.push_back(std::to_string(rep.missing_predictions) + " dataset records have no prediction" +
                               (opt.strict_join ? " (scored as unparseable)" : " (skipped)"));
    if (!rep.unknown_prediction_ids.empty())
        rep.warnings.push_back(std::to_string(rep.unknown_prediction_ids.size()) +
                               " predictions reference ids absent from the dataset");

    std::map<TaskKind, std::vector<detail::Item>> groups;
    for (auto& it : items) groups[it.rec->task].push_back(std::move(it));
    if (opt.task && !groups.count(*opt.task)) groups[*opt.task];
    for (const auto& [task, g] : groups) {
        auto tr = detail::score_task(task, g, rep.warnings);
        if (tr.unparseable)
            rep.warnings.push_back(std::string(task_name(task)) + ": " + std::to_string(tr.unparseable) +
                                   " unparseable predictions scored as task minimum");
        rep.tasks.push_back(std::move(tr));
    }
    if (rep.tasks.empty()) rep.warnings.push_back("nothing to evaluate");
    return rep;
}

inline json report_to_json(const EvalReport& r) {
    json tasks = json::object();
    for (const auto& t : r.tasks)
        tasks[std::string(task_name(t.task))] = {
            {"count", t.count}, {"unparseable", t.unparseable}, {"missing", t.missing}, {"metrics", t.metrics}};
    return json{{"schema_version", kReportSchema},
                {"engine_version", kVersion},
                {"tokenizer", kTokenizerVersion},
                {"scale", "percent"},
                {"dataset_records", r.dataset_records},
                {"predictions", r.predictions},
                {"joined", r.joined},
                {"missing_predictions", r.missing_predictions},
                {"unknown_prediction_ids", r.unknown_prediction_ids},
                {"tasks", tasks},
                {"warnings", r.warnings}};
}

inline std::string report_table(const EvalReport& r) {
    std::string out;
    char buf[256];
    for (const auto& w : r.warnings) out += "WARNING: " + w + "\n";
    std::snprintf(buf, sizeof buf, "records %zu  predictions %zu  joined %zu  missing %zu  unknown %zu\n",
                  r.dataset_records, r.predictions, r.joined, r.missing_predictions, r.unknown_prediction_ids.size());
    out += buf;
    for (const auto& t : r.tasks) {
        std::snprintf(buf, sizeof buf, "%-22s n=%-6zu unparseable=%zu\n", std::string(task_name(t.task)).c_str(),
                      t.count, t.unparseable);
        out += buf;
        for (const auto& [k, v] : t.metrics) {
            std::snprintf(buf, sizeof buf, "    %-10s %8.2f\n", k.c_str(), v);
            out += buf;
        }
    }
    return out;
}

} // namespace geocot::eval
