// geocot: command-line front end for the reward, metric, training-demo and
// dataset tooling.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "geocot/config.hpp"
#include "geocot/dataset.hpp"
#include "geocot/demo.hpp"
#include "geocot/evaluate.hpp"
#include "geocot/http_transport.hpp"
#include "geocot/pipeline.hpp"
#include "geocot/posenc.hpp"
#include "geocot/version.hpp"

namespace {

using json = nlohmann::json;
using namespace geocot;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kIoConfig = 2;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config_path;
    bool quiet = false;

    EngineConfig load() const {
        EngineConfig c = config_path.empty() ? EngineConfig{} : load_config(config_path);
        if (seed) c.seed = *seed;
        return c;
    }
};

void note(const Globals& g, const std::string& s) {
    if (!g.quiet) std::cerr << s << "\n";
}

std::string read_stdin() {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
}

// Writes whole lines and flushes after each, so an interrupted run leaves
// only complete records.
class LineWriter {
public:
    explicit LineWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw Error(Errc::Io, "cannot write " + path);
    }
    void write(const std::string& line) {
        std::lock_guard<std::mutex> lock(mu_);
        out_ << line << '\n';
        out_.flush();
        if (!out_) throw Error(Errc::Io, "write failed");
    }

private:
    std::ofstream out_;
    std::mutex mu_;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
    std::string predictions, dataset, task, json_out;
    bool lenient = false;
    bool as_json = false;
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a) {
    g.load();
    eval::EvalOptions opt;
    if (!a.task.empty()) opt.task = task_from_string(a.task);
    opt.strict_join = !a.lenient;
    const auto dataset = data::load_dataset(util::read_file(a.dataset));
    const auto preds = data::load_predictions(util::read_file(a.predictions));
    const auto rep = eval::evaluate(preds, dataset, opt);
    const auto j = eval::report_to_json(rep);
    if (!a.json_out.empty()) util::write_file(a.json_out, j.dump(2) + "\n");
    if (a.as_json) {
        std::cout << j.dump(2) << "\n";
    } else if (!g.quiet) {
        std::cout << eval::report_table(rep);
    }
    if (preds.empty()) std::cerr << "WARNING: prediction file is empty\n";
    return preds.empty() || rep.join_failed() ? kValidation : kOk;
}

// ---- reward ------------------------------------------------------------------

struct RewardArgs {
    std::string task, gt, output, corpus;
    bool output_set = false;
};

int cmd_reward(const Globals& g, const RewardArgs& a) {
    const auto cfg = g.load();
    const TaskKind task = task_from_string(a.task);
    auto gtj = json::parse(a.gt, nullptr, false);
    if (gtj.is_discarded()) gtj = a.gt; // bare text answers
    const GroundTruth gt = data::answer_from_json(task, gtj);
    const std::string output = a.output_set ? a.output : read_stdin();

    std::optional<CiderIdf> idf;
    if (task == TaskKind::ImageCaptioning && !a.corpus.empty()) {
        std::vector<std::vector<Tokens>> refs;
        for (const auto& r : data::load_dataset(util::read_file(a.corpus)))
            if (r.task == TaskKind::ImageCaptioning) {
                std::vector<Tokens> t;
                for (const auto& s : std::get<std::vector<std::string>>(r.answer)) t.push_back(tokenize(s));
                refs.push_back(std::move(t));
            }
        idf.emplace(refs);
    }
    const auto o = reward(output, task, gt, cfg.reward, idf ? &*idf : nullptr);
    json j{{"value", o.value}, {"format_valid", o.format_valid}, {"components", o.components}};
    if (!o.diagnostic.empty()) j["diagnostic"] = o.diagnostic;
    std::cout << j.dump() << "\n";
    return kOk;
}

// ---- grpo-demo / sft-demo --------------------------------------------------------

struct GrpoArgs {
    std::optional<int> steps;
    std::optional<double> beta;
    std::string csv, summary;
};

int cmd_grpo_demo(const Globals& g, const GrpoArgs& a) {
    auto cfg = g.load();
    if (a.steps) cfg.demo.steps = *a.steps;
    if (a.beta) cfg.grpo.beta = *a.beta;
    cfg.validate();
    std::unique_ptr<LineWriter> csv;
    if (!a.csv.empty()) {
        csv = std::make_unique<LineWriter>(a.csv);
        csv->write("step,mean_reward,kl,loss");
    }
    if (!g.quiet) std::cout << "step,mean_reward,kl,loss\n";
    const auto res = toy::run_grpo_demo(cfg.demo, cfg.grpo, cfg.reward, cfg.seed, [&](const toy::StepLog& s) {
        const std::string row = std::to_string(s.step) + "," + fmt(s.mean_reward) + "," + fmt(s.kl) + "," + fmt(s.loss);
        if (csv) csv->write(row);
        if (!g.quiet) std::cout << row << "\n";
    });
    json sj{{"seed", cfg.seed},
            {"steps", cfg.demo.steps},
            {"beta", cfg.grpo.beta},
            {"random_baseline", res.random_baseline},
            {"reference_reward", res.reference_reward},
            {"initial_kl", res.initial_kl},
            {"final_reward", res.final_reward},
            {"final_kl", res.final_kl},
            {"first_step_at_target", res.first_step_at_target ? json(*res.first_step_at_target) : json(nullptr)},
            {"seconds", res.seconds}};
    if (!a.summary.empty()) util::write_file(a.summary, sj.dump(2) + "\n");
    std::cerr << "summary " << sj.dump() << "\n";
    return kOk;
}

struct SftArgs {
    std::optional<int> epochs;
    std::string csv;
};

int cmd_sft_demo(const Globals& g, const SftArgs& a) {
    auto cfg = g.load();
    if (a.epochs) cfg.sft.epochs = *a.epochs;
    cfg.validate();
    const auto curve = toy::run_sft_demo(cfg.demo, cfg.sft, cfg.seed);
    std::string text = "epoch,step,loss\n";
    for (const auto& p : curve) text += std::to_string(p.epoch) + "," + std::to_string(p.step) + "," + fmt(p.loss) + "\n";
    if (!a.csv.empty()) util::write_file(a.csv, text);
    if (!g.quiet) std::cout << text;
    std::cerr << "summary {\"initial_loss\":" << fmt(curve.front().loss) << ",\"final_loss\":" << fmt(curve.back().loss)
              << ",\"reduction\":\"" << reduction_name(cfg.sft.reduction) << "\"}\n";
    return kOk;
}

// ---- dataset tools ------------------------------------------------------------

int cmd_validate_dataset(const Globals& g, const std::string& path) {
    g.load();
    const auto v = data::validate_dataset(util::read_file(path));
    json j{{"records", v.records}, {"errors", v.errors}, {"duplicate_ids", v.duplicates}, {"ok", v.ok()}};
    std::cout << j.dump(2) << "\n";
    if (!g.quiet)
        for (const auto& d : v.duplicates) std::cerr << "duplicate id: " << d << "\n";
    return v.ok() ? kOk : kValidation;
}

struct AnnotateArgs {
    std::string requests, out, sidecar;
};

int cmd_annotate(const Globals& g, const AnnotateArgs& a) {
    const auto cfg = g.load();
    const auto recs = data::load_dataset(util::read_file(a.requests));
    std::unique_ptr<annotate::AnnotatorTransport> transport;
    if (cfg.annotator.url.rfind("mock://", 0) == 0)
        transport = std::make_unique<annotate::MockAnnotator>();
    else
        transport = std::make_unique<annotate::HttpTransport>(cfg.annotator.url, annotator_token(cfg.annotator),
                                                              cfg.annotator.timeout_s);
    pipeline::AnnotateContext ctx;
    ctx.cfg = cfg.annotator;
    ctx.seed = cfg.seed;
    LineWriter out(a.out);
    LineWriter side(a.sidecar.empty() ? a.out + ".report.jsonl" : a.sidecar);
    std::size_t written = 0, failed = 0;
    pipeline::annotate_all(recs, *transport, ctx, [&](const pipeline::AnnotatedRecord& r) {
        if (r.written) {
            out.write(data::record_to_json(r.record).dump());
            ++written;
        }
        if (!r.written) ++failed;
        side.write(pipeline::report_to_json(r).dump());
    });
    note(g, "annotated " + std::to_string(written) + " of " + std::to_string(recs.size()) + " records, " +
                std::to_string(failed) + " dropped");
    return failed ? kValidation : kOk;
}

struct TileArgs {
    std::string dataset, out;
    std::optional<int> size;
};

int cmd_tile(const Globals& g, const TileArgs& a) {
    auto cfg = g.load();
    if (a.size) cfg.tiling.tile = *a.size;
    cfg.tiling.validate();
    const auto recs = data::load_dataset(util::read_file(a.dataset));
    const auto res = pipeline::tile_records(recs, cfg.tiling.tile, cfg.tiling.min_retained);
    std::string text;
    for (const auto& r : res.records) text += data::record_to_json(r).dump() + "\n";
    util::write_file(a.out, text);
    note(g, "tiled " + std::to_string(res.tiled) + " records into " +
                std::to_string(res.records.size() - res.passthrough) + " tiles; " + std::to_string(res.passthrough) +
                " copied unchanged; " + std::to_string(res.dropped_tiles) + " tiles without a surviving target");
    return kOk;
}

struct PosencArgs {
    std::string in, out;
    std::uint32_t width = 0, height = 0;
};

bool is_csv(const std::string& p) { return p.size() >= 4 && p.compare(p.size() - 4, 4, ".csv") == 0; }

int cmd_posenc(const Globals& g, const PosencArgs& a) {
    g.load();
    const std::string raw = util::read_file(a.in);
    const auto src = is_csv(a.in) ? posenc::decode_csv(raw) : posenc::decode_binary(raw);
    const auto dst = posenc::adapt_table(src, a.width, a.height);
    util::write_file(a.out, is_csv(a.out) ? posenc::encode_csv(dst) : posenc::encode_binary(dst));
    note(g, "adapted " + std::to_string(src.height) + "x" + std::to_string(src.width) + " -> " +
                std::to_string(dst.height) + "x" + std::to_string(dst.width) + " (dim " + std::to_string(src.dim) + ")");
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"geocot: rewards, metrics, GRPO/SFT toy training and dataset tooling"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "random seed (overrides the config file)");
    app.add_option("--config", g.config_path, "engine config (JSON)");
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "score predictions against a dataset");
    ev->add_option("--predictions", ea.predictions, "prediction JSONL")->required();
    ev->add_option("--dataset", ea.dataset, "dataset JSONL")->required();
    ev->add_option("--task", ea.task, "restrict to one task");
    ev->add_option("--json-out", ea.json_out, "also write the JSON report here");
    ev->add_flag("--json", ea.as_json, "print the JSON report instead of the table");
    ev->add_flag("--lenient", ea.lenient, "skip records without predictions instead of failing");

    RewardArgs ra;
    auto* rw = app.add_subcommand("reward", "reward for one model output (read from stdin unless --output)");
    rw->add_option("--task", ra.task, "task name")->required();
    rw->add_option("--gt", ra.gt, "ground truth in the dataset answer format")->required();
    rw->add_option("--output", ra.output, "raw model output text");
    rw->add_option("--corpus", ra.corpus, "captioning dataset supplying CIDEr document frequencies");

    GrpoArgs ga;
    auto* gd = app.add_subcommand("grpo-demo", "GRPO on the toy grid-grounding task");
    gd->add_option("--steps", ga.steps, "policy updates");
    gd->add_option("--beta", ga.beta, "KL penalty coefficient");
    gd->add_option("--csv", ga.csv, "write the training log here");
    gd->add_option("--summary", ga.summary, "write the JSON summary here");

    SftArgs sa;
    auto* sd = app.add_subcommand("sft-demo", "SFT loss curve on the toy demonstrations");
    sd->add_option("--epochs", sa.epochs, "passes over the corpus");
    sd->add_option("--csv", sa.csv, "write the loss curve here");

    std::string vd_path;
    auto* vd = app.add_subcommand("validate-dataset", "check a dataset JSONL file");
    vd->add_option("path", vd_path, "dataset JSONL")->required();

    AnnotateArgs aa;
    auto* an = app.add_subcommand("annotate", "generate rationales with the configured annotator");
    an->add_option("--requests", aa.requests, "dataset JSONL without rationales")->required();
    an->add_option("--out", aa.out, "annotated dataset JSONL")->required();
    an->add_option("--report", aa.sidecar, "validation report JSONL (default <out>.report.jsonl)");

    TileArgs ta;
    auto* tl = app.add_subcommand("tile", "split large images into tiles with remapped boxes");
    tl->add_option("--dataset", ta.dataset, "dataset JSONL")->required();
    tl->add_option("--out", ta.out, "tiled dataset JSONL")->required();
    tl->add_option("--size", ta.size, "tile edge in pixels");

    PosencArgs pa;
    auto* pe = app.add_subcommand("posenc", "resample a position table (.csv or little-endian f32 binary)");
    pe->add_option("--in", pa.in, "source table")->required();
    pe->add_option("--out", pa.out, "adapted table")->required();
    pe->add_option("--width", pa.width, "target grid width")->required()->check(CLI::PositiveNumber);
    pe->add_option("--height", pa.height, "target grid height")->required()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kIoConfig;
    }
    if (app.count("--seed")) g.seed = seed;

    try {
        if (ev->parsed()) return cmd_evaluate(g, ea);
        if (rw->parsed()) {
            ra.output_set = rw->count("--output") > 0;
            return cmd_reward(g, ra);
        }
        if (gd->parsed()) return cmd_grpo_demo(g, ga);
        if (sd->parsed()) return cmd_sft_demo(g, sa);
        if (vd->parsed()) return cmd_validate_dataset(g, vd_path);
        if (an->parsed()) return cmd_annotate(g, aa);
        if (tl->parsed()) return cmd_tile(g, ta);
        if (pe->parsed()) return cmd_posenc(g, pa);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIoConfig;
    }
    return kIoConfig;
}
