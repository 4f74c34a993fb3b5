#include <catch_amalgamated.hpp>

#include <filesystem>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "genperf/csv.hpp"
#include "genperf/spec_io.hpp"
#include "test_helpers.hpp"

using namespace genperf;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "genperf_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

// Column `col` of a header-first CSV.
std::vector<std::string> column(const std::string& text, std::size_t col) {
    std::vector<std::string> values;
    auto rows = parse_csv(text);
    for (std::size_t i = 1; i < rows.size(); ++i) values.push_back(rows[i].at(col));
    return values;
}

}  // namespace

TEST_CASE("seqlen on the latent diffusion preset", "[cli]") {
    const fs::path out = scratch("sd.csv");
    const Result r = run({"seqlen", "--spec", "preset:stable-diffusion", "--image-size", "512x512", "--out", out.string()});
    REQUIRE(r.code == 0);
    const std::string trace = read_file(out);
    CHECK(trace.rfind("index,step,stage,kind,q_len,kv_len,batch,heads,head_dim\n", 0) == 0);
    std::set<std::string> support;
    const auto kinds = column(trace, 3);
    const auto q = column(trace, 4);
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (kinds[i] == "self") support.insert(q[i]);
    }
    CHECK(support == std::set<std::string>{"64", "256", "1024", "4096"});
    CHECK(read_file(scratch("sd.hist.csv")) == "q_len,count\n64,100\n256,200\n1024,200\n4096,200\n");
    CHECK(r.out.find("max_q_len") != std::string::npos);
}

TEST_CASE("seqlen on transformers", "[cli]") {
    const fs::path parti = scratch("parti.csv");
    REQUIRE(run({"seqlen", "--spec", "preset:parti", "--out", parti.string()}).code == 0);
    const auto kv = column(read_file(parti), 5);
    REQUIRE(kv.size() == 1024);
    for (std::size_t i = 1; i < kv.size(); ++i) CHECK(std::stoull(kv[i]) > std::stoull(kv[i - 1]));

    const fs::path muse = scratch("muse.csv");
    REQUIRE(run({"seqlen", "--spec", "preset:muse", "--out", muse.string()}).code == 0);
    const auto mq = column(read_file(muse), 4);
    CHECK(std::set<std::string>(mq.begin(), mq.end()).size() == 1);
}

TEST_CASE("analyze", "[cli]") {
    const Result sd = run({"analyze", "--spec", "preset:stable-diffusion", "--format", "doc"});
    REQUIRE(sd.code == 0);
    CHECK(sd.out.find("\"compute\"") != std::string::npos);
    const fs::path out = scratch("muse.report.csv");
    const Result muse = run({"analyze", "--spec", "preset:muse", "--mode", "flash", "--format", "csv", "--out", out.string()});
    REQUIRE(muse.code == 0);
    CHECK(muse.out.empty());
    CHECK(read_file(out).find("roofline,") != std::string::npos);
}

TEST_CASE("sweep writes points and summary", "[cli]") {
    const fs::path out = scratch("latent.csv");
    const Result r = run({"sweep", "--spec", "preset:stable-diffusion", "--axis", "latent", "--range", "8:64",
                          "--text-encode", "0", "--out", out.string()});
    REQUIRE(r.code == 0);
    const std::string summary = read_file(scratch("latent.summary.csv"));
    CHECK(summary.rfind("metric,value\nspec_version,1\n", 0) == 0);
    CHECK(summary.find("memory_exponent,4.000") != std::string::npos);
    CHECK(read_file(out).rfind("x,category,flops,bytes_moved,footprint\n8,attention,", 0) == 0);
}

TEST_CASE("trace", "[cli]") {
    const fs::path out = scratch("two_kernel.csv");
    const Result r = run({"trace", "--trace", testing::fixture("two_kernel.json"), "--out", out.string()});
    REQUIRE(r.code == 0);
    CHECK(read_file(out) ==
          "category,microseconds,fraction\nattention,80,0.8\nconvolution,20,0.2\nlinear,0,0\ngroupnorm,0,0\nother,0,0\n");

    const Result s = run({"trace", "--trace", testing::fixture("baseline.json"), "--optimized",
                          testing::fixture("optimized.json"), "--format", "csv"});
    REQUIRE(s.code == 0);
    CHECK(s.out.find("speedup,0,value,0.5") != std::string::npos);
    CHECK(s.out.find("speedup,1,value,2") != std::string::npos);

    const Result empty = run({"trace", "--trace", testing::fixture("empty.json")});
    CHECK(empty.code == 1);
    CHECK(empty.err.find("no accelerator kernels found") != std::string::npos);

    const Result bad = run({"trace", "--trace", testing::fixture("truncated.json")});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("byte") != std::string::npos);
}

TEST_CASE("compare and audit", "[cli]") {
    const Result c = run({"compare", "--spec", "preset:stable-diffusion", "--trace", testing::fixture("two_kernel.json")});
    REQUIRE(c.code == 0);
    CHECK(c.out.find("rank_agreement") != std::string::npos);

    const Result a = run({"audit", "--fraction", "0.1", "--speedup", "1.67", "--format", "csv"});
    REQUIRE(a.code == 0);
    CHECK(a.out.find("audit,0,feasible,false") != std::string::npos);
    CHECK(run({"audit", "--fraction", "1.5"}).code != 0);
}

TEST_CASE("usage errors", "[cli]") {
    CHECK(run({}).code != 0);
    CHECK(run({"analyze"}).code != 0);
    CHECK(run({"analyze", "--spec", "preset:nope"}).code == 1);
    CHECK(run({"analyze", "--spec", "preset:stable-diffusion", "--image-size", "12xq"}).code == 1);
    CHECK(run({"seqlen", "--spec", "preset:muse", "--frames", "4", "--out", scratch("x.csv").string()}).code == 1);
}

TEST_CASE("outputs are byte-identical across runs", "[cli]") {
    for (const char* name : {"stable-diffusion", "make-a-video-like", "llama-like"}) {
        const std::vector<std::string> args = {"analyze", "--spec", std::string("preset:") + name, "--format", "csv"};
        CHECK(run(args).out == run(args).out);
    }
    const fs::path a = scratch("det_a.csv"), b = scratch("det_b.csv");
    run({"seqlen", "--spec", "preset:imagen", "--out", a.string()});
    run({"seqlen", "--spec", "preset:imagen", "--out", b.string()});
    CHECK(read_file(a) == read_file(b));
}

TEST_CASE("presets", "[cli]") {
    const Result list = run({"presets"});
    CHECK(list.out.find("stable-diffusion\n") != std::string::npos);
    const Result show = run({"presets", "--show", "muse"});
    CHECK(parse_spec(show.out) == preset("muse"));
}

TEST_CASE("roofline", "[cli]") {
    const fs::path out = scratch("roofline.csv");
    const Result r = run({"roofline", "--out", out.string()});
    REQUIRE(r.code == 0);
    const std::string csv = read_file(out);
    CHECK(csv.rfind("model,arithmetic_intensity,attainable_flops,bound\n", 0) == 0);
    CHECK(column(csv, 0).size() == preset_names().size());
    const Result one = run({"roofline", "--spec", "preset:muse", "--format", "csv"});
    REQUIRE(one.code == 0);
    CHECK(one.out.find("points,0,model,muse") != std::string::npos);
}
