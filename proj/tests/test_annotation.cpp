#include "catch_amalgamated.hpp"

#include <atomic>
#include <deque>
#include <thread>

#include "geocot/annotation.hpp"
#include "geocot/http_transport.hpp"
#include "geocot/pipeline.hpp"

using namespace geocot;
using namespace geocot::annotate;
using json = nlohmann::json;

namespace {

// The first counting exemplar, used as a known-good rationale.
std::string exemplar_cot() {
    const std::string ex(prompts::kCountingExemplars);
    const auto a = ex.find("Output:\n") + 8;
    const auto b = ex.find("\n\nThe first example end.");
    return json::parse(ex.substr(a, b - a))["CoT"].get<std::string>();
}

AnnotationRequest ship_request() {
    AnnotationRequest r;
    r.id = "ship-1";
    r.task = TaskKind::ObjectCounting;
    r.image_ref = "https://example.org/ship.png";
    r.width = r.height = 800;
    r.question = "What is the amount of ship in the image? \nAnswer the question using a single word or phrase.";
    r.answer = "3";
    r.auxiliary = json::parse(R"({
        "image_size": [800,800],
        "objects": {
            "ship_position": [[612, 761], [628, 705], [657, 531]],
            "harbor_position": [[492, 715], [527, 504], [568, 8]]
        },
        "count": {"ship": 3, "harbor": 3}
    })");
    return r;
}

class ScriptedTransport : public AnnotatorTransport {
public:
    std::deque<TransportResponse> script;
    TransportResponse fallback;
    int calls = 0;

    TransportResponse post(const std::string&) override {
        ++calls;
        if (script.empty()) return fallback;
        auto r = script.front();
        script.pop_front();
        return r;
    }
};

TransportResponse ok(const std::string& cot) { return {TransportResponse::Failure::None, 200, json{{"CoT", cot}}.dump(), ""}; }

struct SleepLog {
    std::vector<long long> ms;
    Sleeper sleeper() {
        return [this](std::chrono::milliseconds d) { ms.push_back(d.count()); };
    }
};

} // namespace

TEST_CASE("build_prompt fills the task token and the exemplar slot") {
    const auto t = default_templates();
    auto r = ship_request();
    const auto p = build_prompt(r, t);
    CHECK(p.find(kExemplarSlot) == std::string::npos);
    CHECK(p.find("TASK-CoT") == std::string::npos);
    CHECK(p.find("count-CoT dataset") != std::string::npos);
    CHECK(p.find("The first example for a smaller number of targets") != std::string::npos);
    CHECK(p.find("The Second example is a larger number of targets") != std::string::npos);
    const auto in = json::parse(extract_input_json(p));
    CHECK(in["answer"] == "3");
    CHECK(in["auxiliary information"]["count"]["ship"] == 3);

    r.task = TaskKind::VQA;
    r.question = "Is the runway to the left of the terminal?";
    r.answer = "yes";
    r.auxiliary = json::object();
    const auto v = build_prompt(r, t);
    CHECK(v.find("VQA-CoT") != std::string::npos);
    const auto vin = json::parse(extract_input_json(v));
    CHECK(vin["question"] == r.question);
    CHECK_FALSE(vin.contains("auxiliary information"));

    // keys keep question, auxiliary, answer order
    CHECK(extract_input_json(p).find("question") < extract_input_json(p).find("auxiliary information"));
    CHECK(extract_input_json(p).find("auxiliary information") < extract_input_json(p).find("answer"));
}

TEST_CASE("build_prompt errors") {
    auto t = default_templates();
    auto r = ship_request();
    t.tasks.erase(TaskKind::ObjectCounting);
    try {
        build_prompt(r, t);
        FAIL("expected UnknownTask");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnknownTask);
    }
    t = default_templates();
    t.tasks[TaskKind::ObjectCounting].exemplars.clear();
    try {
        build_prompt(r, t);
        FAIL("expected MissingExemplars");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MissingExemplars);
    }
}

TEST_CASE("the exemplar rationale passes validation") {
    const auto rep = validate_cot(exemplar_cot(), ship_request());
    CHECK(rep.segment_count == 5);
    CHECK(rep.separator_ok);
    CHECK(rep.aux_leak.empty());
    CHECK_FALSE(rep.premature_answer);
    CHECK(rep.forbidden.empty());
    CHECK(rep.schema_ok);
    CHECK(rep.pass);
}

TEST_CASE("validation flags leaks, premature answers and meta-phrases") {
    const auto req = ship_request();
    const std::string tail = "\n\n\nCounting the docked vessels gives 3.";

    auto rep = validate_cot("The auxiliary information lists ships." + tail, req);
    CHECK_FALSE(rep.pass);
    CHECK(rep.aux_leak == std::vector<std::string>{"auxiliary information"});

    rep = validate_cot("A vessel sits at [612, 761] near the pier." + tail, req);
    CHECK_FALSE(rep.pass);
    CHECK(std::find(rep.aux_leak.begin(), rep.aux_leak.end(), "[612,761]") != rep.aux_leak.end());

    rep = validate_cot("The ship_position field is long." + tail, req);
    CHECK(rep.aux_leak == std::vector<std::string>{"ship_position"});

    rep = validate_cot("Clearly there are 3 ships here." + tail, req);
    CHECK(rep.premature_answer);
    CHECK_FALSE(rep.pass);

    rep = validate_cot("Survey the docks." + tail + " This is consistent with the correct answer.", req);
    CHECK(rep.forbidden.size() == 2);
    CHECK_FALSE(rep.pass);

    rep = validate_cot("One paragraph only, concluding 3.", req);
    CHECK_FALSE(rep.separator_ok);
    CHECK_FALSE(rep.pass);

    auto bad = req;
    bad.auxiliary["caption"] = "a harbour";
    rep = validate_cot(exemplar_cot(), bad);
    CHECK_FALSE(rep.schema_ok);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("values shared with the question are not leaks") {
    auto req = ship_request();
    req.question = "How many ships lie within 800 pixels of the pier at [612,761]?";
    const auto rep = validate_cot("We look within 800 pixels of [612, 761].\n\n\nThere are 3.", req);
    CHECK(rep.aux_leak.empty());
    // 8000 is not the number 800
    CHECK(annotate::detail::contains_number("about 8000 m", "800") == false);
    CHECK(annotate::detail::contains_number("about 800.", "800"));
    CHECK(annotate::detail::contains_number("800.5", "800") == false);
}

TEST_CASE("mock annotator output validates") {
    MockAnnotator mock;
    AnnotatorConfig cfg;
    Rng rng(1);
    SleepLog s;
    const auto req = ship_request();
    const auto res = call_annotator(mock, cfg, build_prompt(req, default_templates()), req.image_ref, rng, s.sleeper());
    CHECK(res.attempts == 1);
    CHECK(res.retries == 0);
    CHECK(validate_cot(res.cot, req).pass);
}

TEST_CASE("retry contract") {
    AnnotatorConfig cfg;
    cfg.jitter = 0;
    const auto req = ship_request();

    SECTION("malformed twice then valid") {
        ScriptedTransport t;
        t.script = {{TransportResponse::Failure::None, 200, R"({"text": "x"})", ""},
                    {TransportResponse::Failure::None, 200, "not json", ""},
                    ok("a\n\n\nb")};
        Rng rng(2);
        SleepLog s;
        const auto res = call_annotator(t, cfg, "p", req.image_ref, rng, s.sleeper());
        CHECK(res.cot == "a\n\n\nb");
        CHECK(res.retries == 2);
        CHECK(res.attempts == 3);
        CHECK(s.ms == std::vector<long long>{500, 1000});
    }

    SECTION("always failing exhausts max_retries + 1 attempts") {
        ScriptedTransport t;
        t.fallback = {TransportResponse::Failure::Transport, 0, "", "refused"};
        Rng rng(3);
        SleepLog s;
        try {
            call_annotator(t, cfg, "p", req.image_ref, rng, s.sleeper());
            FAIL("expected Transport");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Transport);
        }
        CHECK(t.calls == 4);
        CHECK(s.ms == std::vector<long long>{500, 1000, 2000});
    }

    SECTION("the last failure class is reported") {
        ScriptedTransport t;
        t.fallback = {TransportResponse::Failure::Timeout, 0, "", ""};
        cfg.max_retries = 1;
        Rng rng(4);
        SleepLog s;
        try {
            call_annotator(t, cfg, "p", req.image_ref, rng, s.sleeper());
            FAIL("expected Timeout");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Timeout);
        }
        CHECK(t.calls == 2);

        ScriptedTransport m;
        m.fallback = {TransportResponse::Failure::None, 200, "{}", ""};
        try {
            call_annotator(m, cfg, "p", req.image_ref, rng, s.sleeper());
            FAIL("expected MalformedResponse");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::MalformedResponse);
        }
    }

    SECTION("jitter stays within its band") {
        cfg.jitter = 0.2;
        cfg.max_retries = 6;
        cfg.backoff_factor = 1;
        ScriptedTransport t;
        t.fallback = {TransportResponse::Failure::None, 503, "", ""};
        Rng rng(5);
        SleepLog s;
        CHECK_THROWS_AS(call_annotator(t, cfg, "p", req.image_ref, rng, s.sleeper()), Error);
        REQUIRE(s.ms.size() == 6);
        for (auto v : s.ms) {
            CHECK(v >= 400);
            CHECK(v <= 600);
        }
    }
}

TEST_CASE("image payloads") {
    CHECK(image_payload("https://x/y.png") == "https://x/y.png");
    CHECK(image_payload("data:image/png;base64,AA==") == "data:image/png;base64,AA==");
    try {
        image_payload("/nonexistent/geocot/image.png");
        FAIL("expected Io");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Io);
    }
}

TEST_CASE("HTTP transport against a local server") {
    httplib::Server svr;
    std::atomic<int> hits{0};
    std::string seen_auth;
    svr.Post("/cot", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        if (hits++ == 0) {
            res.status = 500;
            return;
        }
        const auto body = json::parse(req.body);
        const std::string cot = MockAnnotator::respond(json{{"prompt", body["prompt"]}}.dump());
        res.set_content(json{{"CoT", cot}}.dump(), "application/json");
    });
    svr.Post("/slow", [&](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1200));
        res.set_content("{}", "application/json");
    });
    const int port = svr.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { svr.listen_after_bind(); });
    svr.wait_until_ready();

    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    AnnotatorConfig cfg;
    cfg.initial_backoff_ms = 1;
    const auto req = ship_request();
    SleepLog s;
    Rng rng(6);

    HttpTransport http(base + "/cot", "secret-token", 5.0);
    const auto res = call_annotator(http, cfg, build_prompt(req, default_templates()), req.image_ref, rng, s.sleeper());
    CHECK(res.retries == 1);
    CHECK(seen_auth == "Bearer secret-token");
    CHECK(validate_cot(res.cot, req).pass);

    HttpTransport slow(base + "/slow", "", 0.3);
    const auto r = slow.post("{}");
    CHECK(r.failure == TransportResponse::Failure::Timeout);

    HttpTransport closed("http://127.0.0.1:1/none", "", 1.0);
    CHECK(closed.post("{}").failure != TransportResponse::Failure::None);

    svr.stop();
    th.join();

    CHECK(split_url("http://h:8/a/b").origin == "http://h:8");
    CHECK(split_url("http://h:8/a/b").path == "/a/b");
    CHECK(split_url("http://h").path == "/");
    CHECK_THROWS_AS(split_url("ftp://h/x"), Error);
}

TEST_CASE("tile grid layout") {
    auto t = tile_image_grid(1600, 1600);
    REQUIRE(t.size() == 4);
    CHECK(t[0] == Tile{0, 0, 800, 800});
    CHECK(t[1] == Tile{800, 0, 800, 800});
    CHECK(t[2] == Tile{0, 800, 800, 800});
    CHECK(t[3] == Tile{800, 800, 800, 800});

    t = tile_image_grid(900, 800);
    REQUIRE(t.size() == 2);
    CHECK(t[0].x == 0);
    CHECK(t[1].x == 100);

    CHECK(tile_image_grid(800, 800).size() == 1);
    CHECK(tile_image_grid(300, 200) == std::vector<Tile>{{0, 0, 300, 200}});
    CHECK_THROWS_AS(tile_image_grid(0, 10), Error);
}

TEST_CASE("tiles cover every pixel and stay inside the image") {
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const int W = rng.uniform_int(1, 4000), H = rng.uniform_int(1, 4000);
        const auto tiles = tile_image_grid(W, H);
        for (const auto& t : tiles) {
            REQUIRE(t.x >= 0);
            REQUIRE(t.y >= 0);
            REQUIRE(t.x + t.width <= W);
            REQUIRE(t.y + t.height <= H);
            REQUIRE(t.width == std::min(800, W));
            REQUIRE(t.height == std::min(800, H));
        }
        // coverage along each axis is enough for a product grid
        auto covered = [&](int extent, auto start, auto size) {
            std::vector<char> hit(static_cast<std::size_t>(extent), 0);
            for (const auto& t : tiles)
                for (int p = start(t); p < start(t) + size(t); ++p) hit[static_cast<std::size_t>(p)] = 1;
            return std::all_of(hit.begin(), hit.end(), [](char c) { return c == 1; });
        };
        REQUIRE(covered(W, [](const Tile& t) { return t.x; }, [](const Tile& t) { return t.width; }));
        REQUIRE(covered(H, [](const Tile& t) { return t.y; }, [](const Tile& t) { return t.height; }));
    }
}

TEST_CASE("box remapping round-trips and drops mostly clipped boxes") {
    const Tile t{800, 0, 800, 800};
    const BBox g{0.55, 0.1, 0.7, 0.3}; // fully inside the second tile of a 1600x1600 image
    const auto l = remap_box(t, 1600, 1600, g);
    REQUIRE(l);
    const auto back = unmap_box(t, 1600, 1600, *l);
    CHECK(std::abs(back.x_min - g.x_min) <= 1e-12);
    CHECK(std::abs(back.y_min - g.y_min) <= 1e-12);
    CHECK(std::abs(back.x_max - g.x_max) <= 1e-12);
    CHECK(std::abs(back.y_max - g.y_max) <= 1e-12);

    // 25% of the box falls in the tile: dropped at the default 30%
    const BBox straddle{0.4625, 0.1, 0.5125, 0.2};
    CHECK_FALSE(remap_box(t, 1600, 1600, straddle));
    CHECK(remap_box(t, 1600, 1600, straddle, 0.2));
    // 75% survives
    CHECK(remap_box(t, 1600, 1600, BBox{0.4875, 0.1, 0.5375, 0.2}));

    Rng rng(8);
    for (int i = 0; i < 2000; ++i) {
        const double x0 = rng.uniform(0.5, 0.95), y0 = rng.uniform(0, 0.45);
        const BBox b{x0, y0, rng.uniform(x0, 1.0), rng.uniform(y0, 0.5)};
        const auto r = remap_box(t, 1600, 1600, b);
        REQUIRE(r);
        REQUIRE(r->valid());
        const auto u = unmap_box(t, 1600, 1600, *r);
        REQUIRE(std::abs(u.x_min - b.x_min) <= 1e-12);
        REQUIRE(std::abs(u.y_max - b.y_max) <= 1e-12);
    }
}

TEST_CASE("pipeline annotates with the mock and reports in order") {
    std::vector<data::DatasetRecord> recs;
    for (int i = 0; i < 7; ++i) {
        data::DatasetRecord r;
        r.id = "r" + std::to_string(i);
        r.task = TaskKind::ObjectCounting;
        r.image = {800, 800, "https://example.org/" + r.id + ".png", std::nullopt};
        r.question = "How many planes are on the apron?";
        r.answer = std::uint64_t(i + 2);
        r.aux = json{{"count", {{"plane", i + 2}}}};
        recs.push_back(r);
    }
    MockAnnotator mock;
    pipeline::AnnotateContext ctx;
    ctx.cfg.max_in_flight = 3;
    ctx.sleep = [](std::chrono::milliseconds) {};
    std::vector<std::string> order;
    const auto out = pipeline::annotate_all(recs, mock, ctx, [&](const pipeline::AnnotatedRecord& a) { order.push_back(a.record.id); });
    REQUIRE(out.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(order[i] == recs[i].id);
        CHECK(out[i].written);
        CHECK(out[i].record.rationale);
        CHECK(pipeline::report_to_json(out[i])["validation"]["verdict"] == "pass");
    }
}

TEST_CASE("pipeline drops, keeps or regenerates invalid rationales") {
    data::DatasetRecord r;
    r.id = "x";
    r.task = TaskKind::ObjectCounting;
    r.image = {800, 800, "https://example.org/x.png", std::nullopt};
    r.question = "How many ships?";
    r.answer = std::uint64_t{5};

    pipeline::AnnotateContext ctx;
    ctx.sleep = [](std::chrono::milliseconds) {};
    const auto bad = ok("There are 5 ships.\n\n\nDone.");

    ScriptedTransport t;
    t.fallback = bad;
    auto a = pipeline::annotate_one(r, 0, t, ctx);
    CHECK_FALSE(a.written);
    CHECK_FALSE(a.record.rationale);
    CHECK(a.generations == 1);

    ctx.cfg.on_invalid = "keep";
    a = pipeline::annotate_one(r, 0, t, ctx);
    CHECK(a.written);
    CHECK(a.record.rationale);

    ctx.cfg.on_invalid = "regenerate";
    ScriptedTransport t2;
    t2.script = {bad, ok("Survey the harbour.\n\n\nFive hulls are visible, so 5.")};
    a = pipeline::annotate_one(r, 0, t2, ctx);
    CHECK(a.written);
    CHECK(a.generations == 2);

    ScriptedTransport t3;
    t3.fallback = bad;
    a = pipeline::annotate_one(r, 0, t3, ctx);
    CHECK_FALSE(a.written);
    CHECK(a.generations == 3);

    ScriptedTransport dead;
    dead.fallback = {TransportResponse::Failure::Transport, 0, "", ""};
    a = pipeline::annotate_one(r, 0, dead, ctx);
    CHECK_FALSE(a.written);
    CHECK_FALSE(a.error.empty());
}
