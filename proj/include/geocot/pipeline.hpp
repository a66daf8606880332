#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "geocot/annotation.hpp"
#include "geocot/dataset.hpp"
#include "geocot/rng.hpp"

namespace geocot::pipeline {

using json = nlohmann::json;

inline annotate::AnnotationRequest to_request(const data::DatasetRecord& r) {
    annotate::AnnotationRequest q;
    q.id = r.id;
    q.task = r.task;
    q.image_ref = r.image.path;
    q.width = r.image.width;
    q.height = r.image.height;
    q.question = r.question;
    q.answer = data::answer_text(r.answer);
    q.auxiliary = r.aux ? *r.aux : json::object();
    return q;
}

struct AnnotatedRecord {
    data::DatasetRecord record; // rationale filled on success
    bool written = false;       // goes to the dataset output
    int generations = 0;
    int retries = 0;
    std::optional<annotate::ValidationReport> report;
    std::string error;
};

inline json report_to_json(const AnnotatedRecord& a) {
    json j{{"id", a.record.id}, {"written", a.written}, {"generations", a.generations}, {"retries", a.retries}};
    if (a.report) {
        const auto& r = *a.report;
        j["validation"] = {{"segment_count", r.segment_count}, {"separator_ok", r.separator_ok},
                           {"aux_leak", r.aux_leak},           {"premature_answer", r.premature_answer},
                           {"schema_ok", r.schema_ok},         {"forbidden", r.forbidden},
                           {"verdict", r.pass ? "pass" : "fail"}, {"reasons", r.reasons}};
    }
    if (!a.error.empty()) j["error"] = a.error;
    return j;
}

struct AnnotateContext {
    annotate::AnnotatorConfig cfg;
    annotate::PromptTemplates templates = annotate::default_templates();
    std::uint64_t seed = 0;
    annotate::Sleeper sleep = annotate::real_sleeper();
};

// One record: build prompt, call, validate; regenerate on invalid output if
// configured.
inline AnnotatedRecord annotate_one(const data::DatasetRecord& rec, std::size_t index,
                                    annotate::AnnotatorTransport& transport, const AnnotateContext& ctx) {
    AnnotatedRecord out;
    out.record = rec;
    Rng rng(ctx.seed, 0xa770000ULL + index);
    try {
        const auto req = to_request(rec);
        const std::string prompt = annotate::build_prompt(req, ctx.templates);
        const int budget = ctx.cfg.on_invalid == "regenerate" ? 1 + ctx.cfg.max_regenerations : 1;
        for (int g = 0; g < budget; ++g) {
            auto res = annotate::call_annotator(transport, ctx.cfg, prompt, req.image_ref, rng, ctx.sleep);
            ++out.generations;
            out.retries += res.retries;
            out.report = annotate::validate_cot(res.cot, req);
            out.record.rationale = res.cot;
            if (out.report->pass) break;
        }
        out.written = out.report->pass || ctx.cfg.on_invalid == "keep";
        if (!out.written) out.record.rationale.reset();
    } catch (const Error& e) {
        out.error = e.what();
        out.written = false;
    }
    return out;
}

// Up to max_in_flight records are in flight at once; results come back in
// input order, and sink() sees each finished record exactly once.
inline std::vector<AnnotatedRecord> annotate_all(const std::vector<data::DatasetRecord>& recs,
                                                 annotate::AnnotatorTransport& transport, const AnnotateContext& ctx,
                                                 const std::function<void(const AnnotatedRecord&)>& sink = {}) {
    ctx.cfg.validate();
    std::vector<AnnotatedRecord> out(recs.size());
    const std::size_t width = static_cast<std::size_t>(ctx.cfg.max_in_flight);
    for (std::size_t b = 0; b < recs.size(); b += width) {
        const std::size_t e = std::min(recs.size(), b + width);
        std::vector<std::thread> pool;
        for (std::size_t i = b; i < e; ++i)
            pool.emplace_back([&, i] { out[i] = annotate_one(recs[i], i, transport, ctx); });
        for (auto& t : pool) t.join();
        if (sink)
            for (std::size_t i = b; i < e; ++i) sink(out[i]);
    }
    return out;
}

// ---- tiling of dataset records -------------------------------------------

struct TileOutcome {
    std::vector<data::DatasetRecord> records;
    std::size_t tiled = 0;       // parents split into tiles
    std::size_t passthrough = 0; // records copied unchanged
    std::size_t dropped_tiles = 0;
};

// Box-bearing records larger than the tile are split; a grounding child whose
// target does not survive clipping is omitted. Other tasks have no geometry to
// remap and are copied unchanged.
inline TileOutcome tile_records(const std::vector<data::DatasetRecord>& recs, int tile, double min_retained) {
    TileOutcome out;
    for (const auto& r : recs) {
        const bool boxes = r.task == TaskKind::VisualGrounding || r.task == TaskKind::ObjectDetection;
        const bool large = r.image.width > tile || r.image.height > tile;
        if (!boxes || !large || r.image.crop) {
            out.records.push_back(r);
            ++out.passthrough;
            continue;
        }
        ++out.tiled;
        const auto tiles = annotate::tile_image_grid(r.image.width, r.image.height, tile);
        for (std::size_t t = 0; t < tiles.size(); ++t) {
            const auto& tl = tiles[t];
            data::DatasetRecord c = r;
            c.id = r.id + "#t" + std::to_string(t);
            c.image.width = tl.width;
            c.image.height = tl.height;
            c.image.crop = std::array<int, 4>{tl.x, tl.y, tl.width, tl.height};
            c.rationale.reset(); // rationale coordinates refer to the parent image
            if (r.task == TaskKind::VisualGrounding) {
                auto b = annotate::remap_box(tl, r.image.width, r.image.height, std::get<BBox>(r.answer), min_retained);
                if (!b) {
                    ++out.dropped_tiles;
                    continue;
                }
                c.answer = *b;
            } else {
                std::vector<LabeledBox> kept;
                for (const auto& lb : std::get<std::vector<LabeledBox>>(r.answer))
                    if (auto b = annotate::remap_box(tl, r.image.width, r.image.height, lb.box, min_retained))
                        kept.push_back({*b, lb.label});
                c.answer = kept;
            }
            out.records.push_back(std::move(c));
        }
    }
    return out;
}

} // namespace geocot::pipeline
