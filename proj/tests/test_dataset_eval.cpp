#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include "geocot/config.hpp"
#include "geocot/dataset.hpp"
#include "geocot/evaluate.hpp"
#include "geocot/pipeline.hpp"

using namespace geocot;
using json = nlohmann::json;
using Catch::Approx;

namespace {

std::string grounding_line(const std::string& id, const std::string& box) {
    return R"({"id":")" + id + R"(","task":"visual_grounding","image":{"width":800,"height":800},)" +
           R"("question":"where is the plane?","answer":)" + box + "}";
}

data::PredictionRecord pred(const std::string& id, const std::string& answer) {
    return {id, "<think>look at the apron</think><answer>" + answer + "</answer>"};
}

std::string join_lines(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& l : v) s += l + "\n";
    return s;
}

} // namespace

TEST_CASE("dataset records parse per task") {
    const auto recs = data::load_dataset(join_lines({
        R"({"id":"a","task":"object_counting","image":{"width":10,"height":10,"path":"a.png"},"question":"q","answer":4})",
        R"({"id":"b","task":"grounding","image":{"width":10,"height":10},"answer":[0.1,0.2,0.3,0.4]})",
        R"({"id":"c","task":"detection","image":{"width":10,"height":10},"answer":[{"box":[100,200,300,400],"label":"ship"}]})",
        R"({"id":"d","task":"vqa","image":{"width":10,"height":10},"answer":"left","rationale":"<think>x</think><answer>left</answer>"})",
        R"({"id":"e","task":"image_captioning","image":{"width":10,"height":10},"answer":["a port","a harbour"]})",
        "",
        R"({"id":"f","task":"scene_classification","image":{"width":10,"height":10,"crop":[0,0,5,5]},"answer":"forest","aux":{"caption":"trees"}})",
    }));
    REQUIRE(recs.size() == 6);
    CHECK(std::get<std::uint64_t>(recs[0].answer) == 4);
    CHECK(recs[0].image.path == "a.png");
    CHECK(std::get<BBox>(recs[1].answer) == BBox{0.1, 0.2, 0.3, 0.4});
    const auto& det = std::get<std::vector<LabeledBox>>(recs[2].answer);
    REQUIRE(det.size() == 1);
    CHECK(det[0].box.x_min == Approx(0.1));
    CHECK(det[0].label == "ship");
    CHECK(recs[3].rationale);
    CHECK(std::get<std::vector<std::string>>(recs[4].answer).size() == 2);
    CHECK(recs[5].image.crop == std::array<int, 4>{0, 0, 5, 5});
    CHECK((*recs[5].aux)["caption"] == "trees");

    for (const auto& r : recs) {
        const auto back = data::record_from_json(data::record_to_json(r));
        CHECK(data::record_to_json(back) == data::record_to_json(r));
    }
}

TEST_CASE("dataset schema errors") {
    auto fails = [](const std::string& line) {
        try {
            data::load_dataset(line);
        } catch (const Error& e) {
            return e.code() == Errc::Schema;
        }
        return false;
    };
    CHECK(fails(R"({"id":"a","task":"nope","image":{"width":1,"height":1},"answer":1})"));
    CHECK(fails(R"({"id":"a","task":"counting","image":{"width":1,"height":1},"answer":-1})"));
    CHECK(fails(R"({"id":"a","task":"counting","image":{"width":0,"height":1},"answer":1})"));
    CHECK(fails(R"({"id":"a","task":"counting","image":{"width":1,"height":1}})"));
    CHECK(fails(R"({"id":"a","task":"counting","image":{"width":1,"height":1},"answer":1,"extra":true})"));
    CHECK(fails(R"({"id":"a","task":"grounding","image":{"width":1,"height":1},"answer":[0.5,0.5,0.1,0.1]})"));
    CHECK(fails(R"({"id":"a","task":"grounding","image":{"width":1,"height":1},"answer":[0.5,0.2,600,700]})"));
    CHECK(fails(R"({"id":"a","task":"vqa","image":{"width":1,"height":1},"answer":"  "})"));
    CHECK(fails("{not json"));
}

TEST_CASE("duplicate ids are reported and rejected") {
    const std::string text = join_lines({
        R"({"id":"dup","task":"counting","image":{"width":1,"height":1},"answer":1})",
        R"({"id":"ok","task":"counting","image":{"width":1,"height":1},"answer":1})",
        R"({"id":"dup","task":"counting","image":{"width":1,"height":1},"answer":2})",
        R"({"id":"bad","task":"counting","image":{"width":1,"height":1},"answer":"x"})",
    });
    const auto v = data::validate_dataset(text);
    CHECK(v.records == 3);
    CHECK(v.duplicates == std::vector<std::string>{"dup"});
    CHECK(v.errors.size() == 1);
    CHECK_FALSE(v.ok());
    CHECK_THROWS_AS(data::load_dataset(text), Error);

    CHECK_THROWS_AS(data::load_predictions(R"({"id":"a","output":"x"})"
                                           "\n"
                                           R"({"id":"a","output":"y"})"),
                    Error);
}

TEST_CASE("grounding evaluation fixture") {
    const auto ds = data::load_dataset(join_lines({grounding_line("g1", "[0,0,500,500]"),
                                                   grounding_line("g2", "[0.5,0.5,1,1]"),
                                                   grounding_line("g3", "[0,0,10,10]"),
                                                   grounding_line("g4", "[0,0,100,100]")}));
    const std::vector<data::PredictionRecord> preds{pred("g1", "[[0,0,500,500]]"), pred("g2", "[[500,500,1000,1000]]"),
                                                    pred("g3", "[[5,5,15,15]]"), pred("g4", "[[600,600,700,700]]")};
    const auto rep = eval::evaluate(preds, ds);
    REQUIRE(rep.tasks.size() == 1);
    const auto& m = rep.tasks[0].metrics;
    CHECK(m.at("miou") == Approx(100.0 * (2.0 + 1.0 / 7) / 4).epsilon(1e-12));
    CHECK(m.at("miou") == Approx(53.57).margin(0.01));
    CHECK(m.at("acc@0.5") == 50.0);
    CHECK(m.at("acc@0.75") == 50.0);
    CHECK_FALSE(rep.join_failed());

    // input order never matters
    auto shuffled = preds;
    std::reverse(shuffled.begin(), shuffled.end());
    auto ds2 = ds;
    std::rotate(ds2.begin(), ds2.begin() + 1, ds2.end());
    CHECK(eval::report_to_json(eval::evaluate(shuffled, ds2)) == eval::report_to_json(rep));
}

TEST_CASE("empty and partial prediction files") {
    const auto ds = data::load_dataset(join_lines({grounding_line("g1", "[0,0,500,500]"),
                                                   grounding_line("g2", "[0.5,0.5,1,1]")}));
    auto rep = eval::evaluate({}, ds);
    CHECK(rep.tasks[0].metrics.at("miou") == 0.0);
    CHECK(rep.tasks[0].unparseable == 2);
    CHECK(rep.join_failed());
    CHECK_FALSE(rep.warnings.empty());

    rep = eval::evaluate({pred("g1", "[[0,0,500,500]]"), pred("zz", "[[0,0,1,1]]")}, ds);
    CHECK(rep.missing_predictions == 1);
    CHECK(rep.unknown_prediction_ids == std::vector<std::string>{"zz"});
    CHECK(rep.tasks[0].metrics.at("miou") == Approx(50.0));

    eval::EvalOptions lenient;
    lenient.strict_join = false;
    rep = eval::evaluate({pred("g1", "[[0,0,500,500]]")}, ds, lenient);
    CHECK(rep.tasks[0].count == 1);
    CHECK(rep.tasks[0].metrics.at("miou") == Approx(100.0));
}

TEST_CASE("captioning, counting, classification and detection evaluation") {
    const auto ds = data::load_dataset(join_lines({
        R"({"id":"c1","task":"captioning","image":{"width":1,"height":1},"answer":["many planes parked near the terminal"]})",
        R"({"id":"c2","task":"captioning","image":{"width":1,"height":1},"answer":["a river crossing green farmland"]})",
        R"({"id":"n1","task":"counting","image":{"width":1,"height":1},"answer":3})",
        R"({"id":"n2","task":"counting","image":{"width":1,"height":1},"answer":5})",
        R"({"id":"s1","task":"scene_classification","image":{"width":1,"height":1},"answer":"Forest"})",
        R"({"id":"s2","task":"scene_classification","image":{"width":1,"height":1},"answer":"river"})",
        R"({"id":"d1","task":"detection","image":{"width":1,"height":1},"answer":[{"box":[0,0,500,500],"label":"plane"}]})",
    }));
    const std::vector<data::PredictionRecord> preds{
        pred("c1", "many planes parked near the terminal"), pred("c2", "a river crossing green farmland"),
        pred("n1", "3"), {"n2", "five"}, pred("s1", "forest"), pred("s2", "lake"),
        pred("d1", "[[0,0,500,500],[600,600,900,900]]")};
    const auto rep = eval::evaluate(preds, ds);
    std::map<std::string, eval::TaskReport> by;
    for (const auto& t : rep.tasks) by[std::string(task_name(t.task))] = t;

    const auto& cap = by.at("image_captioning").metrics;
    CHECK(cap.at("bleu4") == Approx(100.0).margin(1e-9));
    CHECK(cap.at("rouge_l") == Approx(100.0).margin(1e-9));
    CHECK(cap.at("cider") == Approx(1000.0).margin(1e-9));

    CHECK(by.at("object_counting").metrics.at("accuracy") == 50.0);
    CHECK(by.at("object_counting").metrics.at("mae") == 2.5);
    CHECK(by.at("object_counting").unparseable == 1);
    CHECK(by.at("scene_classification").metrics.at("accuracy") == 50.0);
    CHECK(by.at("object_detection").metrics.at("map@0.5") == Approx(100.0));

    eval::EvalOptions only;
    only.task = TaskKind::ObjectCounting;
    const auto one = eval::evaluate(preds, ds, only);
    REQUIRE(one.tasks.size() == 1);
    CHECK(one.tasks[0].task == TaskKind::ObjectCounting);
    CHECK(one.unknown_prediction_ids.empty());
}

TEST_CASE("report JSON carries versions and scale") {
    const auto ds = data::load_dataset(grounding_line("g1", "[0,0,500,500]"));
    const auto j = eval::report_to_json(eval::evaluate({pred("g1", "[[0,0,500,500]]")}, ds));
    CHECK(j["schema_version"] == eval::kReportSchema);
    CHECK(j["engine_version"] == kVersion);
    CHECK(j["scale"] == "percent");
    CHECK(j["tasks"]["visual_grounding"]["metrics"]["miou"] == 100.0);
    CHECK_FALSE(eval::report_table(eval::evaluate({pred("g1", "[[0,0,500,500]]")}, ds)).empty());
}

TEST_CASE("engine config round-trips and rejects unknown keys") {
    EngineConfig c;
    c.seed = 7;
    c.grpo.beta = 0.1;
    c.annotator.on_invalid = "regenerate";
    c.sft.reduction = LossReduction::MeanPerToken;
    const auto j = config_to_json(c);
    CHECK(config_to_json(config_from_json(j)) == j);

    auto bad = j;
    bad["grpo"]["betta"] = 0.1;
    CHECK_THROWS_AS(config_from_json(bad), Error);
    bad = j;
    bad["surprise"] = 1;
    CHECK_THROWS_AS(config_from_json(bad), Error);
    bad = j;
    bad["grpo"]["epsilon"] = "wide";
    CHECK_THROWS_AS(config_from_json(bad), Error);
    bad = j;
    bad["grpo"]["epsilon"] = 1.5;
    CHECK_THROWS_AS(config_from_json(bad), Error);
    bad = j;
    bad["annotator"]["on_invalid"] = "ignore";
    CHECK_THROWS_AS(config_from_json(bad), Error);

    CHECK(config_from_json(json::object()).grpo.k == 8);
}

TEST_CASE("annotator token comes from the named environment variable") {
    annotate::AnnotatorConfig a;
    a.token_env = "GEOCOT_TEST_TOKEN_VAR";
    ::setenv("GEOCOT_TEST_TOKEN_VAR", "abc", 1);
    CHECK(annotator_token(a) == "abc");
    ::unsetenv("GEOCOT_TEST_TOKEN_VAR");
    CHECK(annotator_token(a).empty());
}

TEST_CASE("tile_records splits large box records") {
    const auto recs = data::load_dataset(join_lines({
        R"({"id":"big","task":"grounding","image":{"width":1600,"height":1600},"answer":[0.55,0.1,0.7,0.3]})",
        R"({"id":"det","task":"detection","image":{"width":1600,"height":1600},"answer":[{"box":[0.1,0.1,0.2,0.2],"label":"a"},{"box":[0.6,0.6,0.7,0.7],"label":"b"}]})",
        R"({"id":"small","task":"grounding","image":{"width":800,"height":800},"answer":[0.1,0.1,0.2,0.2]})",
        R"({"id":"vqa","task":"vqa","image":{"width":1600,"height":1600},"answer":"yes"})",
    }));
    const auto out = pipeline::tile_records(recs, 800, 0.3);
    CHECK(out.tiled == 2);
    CHECK(out.passthrough == 2);
    CHECK(out.dropped_tiles == 3);
    std::vector<std::string> ids;
    for (const auto& r : out.records) ids.push_back(r.id);
    CHECK(ids == std::vector<std::string>{"big#t1", "det#t0", "det#t1", "det#t2", "det#t3", "small", "vqa"});
    const auto& g = out.records[0];
    CHECK(g.image.crop == std::array<int, 4>{800, 0, 800, 800});
    const auto b = std::get<BBox>(g.answer);
    CHECK(b.x_min == Approx(0.1));
    CHECK(b.y_max == Approx(0.6));
    CHECK(std::get<std::vector<LabeledBox>>(out.records[1].answer).size() == 1);
    CHECK(std::get<std::vector<LabeledBox>>(out.records[2].answer).empty());
    CHECK(std::get<std::vector<LabeledBox>>(out.records[4].answer).at(0).label == "b");
}
