#include <catch_amalgamated.hpp>

#include <json.hpp>

#include "genperf/error.hpp"
#include "genperf/report.hpp"
#include "genperf/spec_io.hpp"
#include "test_helpers.hpp"

using namespace genperf;

namespace {

std::string metric(const Report& r, const std::string& table, const std::string& name) {
    const Table* t = r.find(table);
    REQUIRE(t != nullptr);
    for (const auto& row : t->rows) {
        if (row.at(0) == name) return row.at(1);
    }
    FAIL("missing metric " << name);
    return {};
}

}  // namespace

TEST_CASE("analyze tables", "[report]") {
    const Report r = analyze(preset("stable-diffusion"), default_hardware(), {});
    CHECK(r.kind == "analyze");
    CHECK(r.model_name == "stable-diffusion");
    for (const char* name : {"seqlen", "cost", "roofline", "time", "amdahl", "reported"}) {
        CHECK(r.find(name) != nullptr);
    }
    CHECK(metric(r, "seqlen", "max_q_len") == "4096");
    CHECK(metric(r, "seqlen", "min_q_len") == "64");
    CHECK(metric(r, "roofline", "bound") == "compute");
    CHECK(metric(r, "reported", "reported_flash_end_to_end") == "1.67");
    CHECK(r.find("cost")->rows.size() == 10);
    CHECK(r.find("amdahl")->rows.size() == 4);
    CHECK(r.find("amdahl")->rows.back()[1] == "inf");
}

TEST_CASE("analyze honors overrides", "[report]") {
    AnalyzeOptions opts;
    opts.image = ImageSize{1024, 1024};
    const Report big = analyze(preset("stable-diffusion"), default_hardware(), opts);
    CHECK(metric(big, "seqlen", "max_q_len") == "16384");
    opts.image = ImageSize{100, 100};
    CHECK_THROWS_AS(analyze(preset("stable-diffusion"), default_hardware(), opts), ValidationError);
    CHECK_THROWS_AS(resolve_config(preset("parti"), ImageSize{256, 256}, std::nullopt), ValidationError);
    CHECK_THROWS_AS(resolve_config(preset("stable-diffusion"), std::nullopt, std::nullopt, Count{8}),
                    ValidationError);
    const ModelSpec v = resolve_config(preset("make-a-video-like"), std::nullopt, Count{10}, Count{32});
    CHECK(std::get<VideoSpec>(v.variant).num_frames == 32);
    CHECK(std::get<VideoSpec>(v.variant).base.denoising_steps == 10);
}

TEST_CASE("flash mode moves fewer bytes", "[report]") {
    AnalyzeOptions opts;
    opts.mode = AttentionMode::flash;
    const Report r = analyze(preset("stable-diffusion"), default_hardware(), opts);
    CHECK(metric(r, "roofline", "mode") == "flash");
    CHECK(std::stod(metric(r, "roofline", "modeled_flash_attention_speedup")) > 1.0);
}

TEST_CASE("seqlen report", "[report]") {
    const Report r = seqlen_report(preset("stable-diffusion"));
    const Table* h = r.find("histogram");
    REQUIRE(h != nullptr);
    REQUIRE(h->rows.size() == 4);
    CHECK(h->rows[0][0] == "64");
    CHECK(h->rows[3][0] == "4096");
}

TEST_CASE("parse_range", "[report]") {
    CHECK(parse_range("8:64") == std::vector<Count>{8, 16, 32, 64});
    CHECK(parse_range("1:100:10") == std::vector<Count>{1, 10, 100});
    CHECK(parse_range("3,5,9") == std::vector<Count>{3, 5, 9});
    CHECK_THROWS_AS(parse_range("8"), ValidationError);
    CHECK_THROWS_AS(parse_range("8,4"), ValidationError);
    CHECK_THROWS_AS(parse_range("0,4"), ValidationError);
    CHECK_THROWS_AS(parse_range("8:64:1"), ValidationError);
    CHECK_THROWS_AS(parse_range("a,b"), ValidationError);
    CHECK_THROWS_AS(parse_range("8:8"), ValidationError);
}

TEST_CASE("latent sweep", "[report]") {
    SweepOptions opts;
    opts.axis = SweepAxis::latent;
    opts.points = {8, 16, 32, 64};
    opts.text_encode = 0;
    const Report r = sweep(preset("stable-diffusion"), opts);
    CHECK(metric(r, "summary", "memory_exponent") == "4.000");
    CHECK(r.find("points")->rows.size() == 4 * 5);
    opts.text_encode = 77;
    const double e = std::stod(metric(sweep(preset("stable-diffusion"), opts), "summary", "memory_exponent"));
    CHECK(e > 3.5);
    CHECK(e < 4.0);
}

TEST_CASE("frames sweep", "[report]") {
    SweepOptions opts;
    opts.axis = SweepAxis::frames;
    opts.points = parse_range("8:256");
    const Report r = sweep(preset("make-a-video-like"), opts);
    CHECK(std::stod(metric(r, "summary", "temporal_slope")) == Catch::Approx(2.0).margin(0.01));
    CHECK(std::stod(metric(r, "summary", "spatial_slope")) == Catch::Approx(1.0).margin(0.01));
    CHECK_THROWS_AS(sweep(preset("stable-diffusion"), opts), ValidationError);
}

TEST_CASE("image-size sweep", "[report]") {
    SweepOptions opts;
    opts.axis = SweepAxis::image_size;
    opts.points = {256, 512, 1024};
    const Report r = sweep(preset("stable-diffusion"), opts);
    CHECK(metric(r, "summary", "max_self_q_len@256") == "1024");
    CHECK(metric(r, "summary", "max_self_q_len@512") == "4096");
    CHECK(metric(r, "summary", "max_self_q_len@1024") == "16384");
    CHECK_THROWS_AS(sweep(preset("llama-like"), opts), ValidationError);
}

TEST_CASE("renderings embed versions and config", "[report]") {
    const Report r = analyze(preset("muse"), default_hardware(), {});
    const std::string table = render(r, ReportFormat::table);
    CHECK(table.find("spec_version 1") != std::string::npos);
    CHECK(table.find(std::string(toolkit_version())) != std::string::npos);
    CHECK(table.find("[config]") != std::string::npos);

    const std::string csv = render(r, ReportFormat::csv);
    CHECK(csv.rfind("table,row,column,value\n", 0) == 0);
    CHECK(csv.find("meta,0,spec_version,1") != std::string::npos);
    CHECK(csv.find("meta,0,config,") != std::string::npos);

    const auto doc = nlohmann::json::parse(render(r, ReportFormat::doc));
    CHECK(doc["spec_version"] == 1);
    CHECK(doc["toolkit_version"] == std::string(toolkit_version()));
    CHECK(doc["config"]["name"] == "muse");
    CHECK(parse_spec(doc["config"].dump()) == preset("muse"));
    CHECK(doc["tables"]["roofline"]["columns"][0] == "metric");

    CHECK(render(r, ReportFormat::doc) == render(analyze(preset("muse"), default_hardware(), {}), ReportFormat::doc));
    CHECK_THROWS_AS(parse_report_format("xml"), ValidationError);
}

TEST_CASE("audit report", "[report]") {
    const Report r = audit_report(0.413, {});
    const Table* t = r.find("audit");
    REQUIRE(t != nullptr);
    CHECK(t->rows.size() == std::size(kReportedFlashSpeedups));
    // limit 1/(1-0.413) = 1.7036: every reported figure fits.
    for (const auto& row : t->rows) CHECK(row[5] == "true");
    const Report low = audit_report(0.1, {1.67, 1.04});
    CHECK(low.find("audit")->rows[0][5] == "false");
    CHECK(low.find("audit")->rows[1][5] == "true");
}

TEST_CASE("trace report", "[report]") {
    const auto base = link_kernels(parse_trace(testing::fixture("baseline.json")), default_rules());
    const auto opt = link_kernels(parse_trace(testing::fixture("optimized.json")), default_rules());
    const Report r = trace_report(base, opt);
    CHECK(metric(r, "speedup", "module_speedup") == "2");
    CHECK(metric(r, "speedup", "amdahl_consistent") == "true");
    CHECK(trace_report(base, std::nullopt).find("speedup") == nullptr);
}

TEST_CASE("roofline plot data", "[report]") {
    const Report r = roofline_report({preset("stable-diffusion"), preset("llama-like")}, default_hardware());
    const Table* t = r.find("points");
    REQUIRE(t != nullptr);
    CHECK(t->header == std::vector<std::string>{"model", "arithmetic_intensity", "attainable_flops", "bound"});
    REQUIRE(t->rows.size() == 2);
    CHECK(t->rows[0][0] == "stable-diffusion");
    CHECK(t->rows[0][3] == "compute");
    const auto doc = nlohmann::json::parse(render(r, ReportFormat::doc));
    CHECK(doc["config"].size() == 2);
    CHECK(doc["config"][1]["name"] == "llama-like");
    CHECK(render(r, ReportFormat::table).find("[config]") != std::string::npos);
    CHECK_THROWS_AS(roofline_report({}, default_hardware()), ValidationError);
}
