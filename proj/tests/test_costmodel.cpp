#include <catch_amalgamated.hpp>

#include <random>

#include "genperf/costmodel.hpp"
#include "genperf/error.hpp"
#include "genperf/fit.hpp"
#include "genperf/spec_io.hpp"
#include "test_helpers.hpp"

using namespace genperf;
using genperf::testing::small_diffusion;
using Catch::Approx;

namespace {

// Similarity-matrix bytes of every call in one traversal, counted call by call.
Count brute_force_sim_bytes(const DiffusionSpec& s, Count bpe) {
    Count total = 0;
    for (const auto& c : diffusion_trace(s, 1).calls) {
        total += bpe * c.q_len * c.kv_len;
    }
    return total;
}

AttentionCall call(Count q, Count kv, Count hd, Count heads = 1, Count batch = 1) {
    AttentionCall c;
    c.q_len = q;
    c.kv_len = kv;
    c.head_dim = hd;
    c.num_heads = heads;
    c.batch = batch;
    return c;
}

}  // namespace

TEST_CASE("similarity matrix memory", "[costmodel]") {
    CHECK(sim_matrix_memory(64, 64, 77, 2) == 34185216ULL);
    CHECK(sim_matrix_memory(1, 1, 0, 2) == 2);
    CHECK(sim_matrix_memory(8, 8, 77, 2) == 18048);
    CHECK(sim_matrix_memory(16, 16, 0, 2) == 16 * sim_matrix_memory(8, 8, 0, 2));
    CHECK_THROWS_AS(sim_matrix_memory(8, 8, 0, 3), DomainError);
    CHECK_THROWS_AS(sim_matrix_memory(1ULL << 40, 1ULL << 40, 0, 2), OverflowError);
}

TEST_CASE("cumulative similarity memory", "[costmodel]") {
    CHECK(cumulative_sim_memory(small_diffusion(2, 2, 1, 0)) == 66);
    DiffusionSpec flat = small_diffusion(8, 2, 0, 77);
    CHECK(cumulative_sim_memory(flat) == sim_matrix_memory(8, 8, 77, 2));
    DiffusionSpec sd = std::get<DiffusionSpec>(preset("stable-diffusion").variant);
    CHECK(cumulative_sim_memory(sd) == brute_force_sim_bytes(sd, 2));
    CHECK(cumulative_sim_memory(sd, 2, 8) == 8 * cumulative_sim_memory(sd));
}

TEST_CASE("cumulative memory matches trace enumeration on random specs", "[costmodel][property]") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        const unsigned depth = rng() % 5;
        const Count d = 1 + rng() % 3;
        Count mult = 1;
        for (unsigned k = 0; k < depth; ++k) mult *= d;
        DiffusionSpec s = small_diffusion(mult * (1 + rng() % 4), d, depth, rng() % 2 ? 0 : rng() % 128);
        s.latent_width = mult * (1 + rng() % 4);
        s.self_attn_stages.clear();
        s.cross_attn_stages.clear();
        for (unsigned n = 0; n <= depth; ++n) {
            if (rng() % 2) s.self_attn_stages.insert(n);
            if (rng() % 2) s.cross_attn_stages.insert(n);
        }
        s.blocks_per_stage = 1 + rng() % 3;
        const Count bpe = std::array<Count, 3>{1, 2, 4}[rng() % 3];
        CHECK(cumulative_sim_memory(s, bpe) == brute_force_sim_bytes(s, bpe));
    }
}

TEST_CASE("attention FLOPs", "[costmodel]") {
    CHECK(attn_flops(call(16, 16, 64)) == 65536);
    CHECK(attn_flops(call(1, 1, 1)) == 4);
    CHECK(attn_flops(call(16, 16, 64, 1, 2)) == 2 * 65536);
    CHECK(attn_flops(call(3, 7, 5, 2, 3)) == attn_flops(call(7, 3, 5, 2, 3)));
}

TEST_CASE("attention traffic", "[costmodel]") {
    CHECK(attn_bytes(call(1, 1, 1), AttentionMode::baseline) == 14);
    CHECK(attn_bytes(call(1, 1, 1), AttentionMode::flash) == 8);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        AttentionCall c = call(1 + rng() % 5000, 1 + rng() % 5000, 1 + rng() % 256, 1 + rng() % 16, 1 + rng() % 8);
        const Count base = attn_bytes(c, AttentionMode::baseline);
        const Count flash = attn_bytes(c, AttentionMode::flash);
        CHECK(flash < base);
        CHECK(base - flash == 3 * 2 * c.batch * c.num_heads * c.q_len * c.kv_len);
        CHECK(attn_footprint(c, AttentionMode::flash) < attn_footprint(c, AttentionMode::baseline));
    }
}

TEST_CASE("convolution FLOPs", "[costmodel]") {
    CHECK(conv_flops(1, 1, 1, 1, 1) == 2);
    CHECK(conv_flops(64, 64, 3, 320, 320) == 7549747200ULL);
    CHECK(conv_flops(128, 64, 3, 320, 320) == 2 * conv_flops(64, 64, 3, 320, 320));
}

TEST_CASE("model cost aggregates", "[costmodel]") {
    ModelSpec sd = preset("stable-diffusion");
    const CostBreakdown base = model_cost(sd, std::nullopt, AttentionMode::baseline);
    const CostBreakdown flash = model_cost(sd, std::nullopt, AttentionMode::flash);

    Count attn = 0;
    for (const auto& c : model_trace(sd).calls) attn += attn_flops(c);
    CHECK(base[OpCategory::attention].flops == attn);

    CHECK(flash[OpCategory::attention].flops == base[OpCategory::attention].flops);
    CHECK(flash[OpCategory::attention].bytes_moved < base[OpCategory::attention].bytes_moved);
    CHECK(flash[OpCategory::convolution] == base[OpCategory::convolution]);

    OpCost sum;
    for (const auto& c : base.categories) {
        sum.flops += c.flops;
        sum.bytes_moved += c.bytes_moved;
    }
    CHECK(base.totals().flops == sum.flops);
    CHECK(base.totals().bytes_moved == sum.bytes_moved);
    CHECK(base[OpCategory::convolution].flops > 0);
    CHECK(base[OpCategory::groupnorm].bytes_moved > 0);
}

TEST_CASE("halving the steps halves every category", "[costmodel]") {
    for (const char* name : {"stable-diffusion", "make-a-video-like"}) {
        INFO(name);
        const CostBreakdown full = model_cost(with_steps(preset(name), 50), std::nullopt, AttentionMode::baseline);
        const CostBreakdown half = model_cost(with_steps(preset(name), 25), std::nullopt, AttentionMode::baseline);
        for (OpCategory c : kCategories) {
            CHECK(full[c].flops == 2 * half[c].flops);
            CHECK(full[c].bytes_moved == 2 * half[c].bytes_moved);
        }
    }
}

TEST_CASE("attention-only spec has no convolution cost", "[costmodel]") {
    ModelSpec m;
    m.name = "attn-only";
    m.total_params = 1000;
    m.variant = small_diffusion(16, 2, 1, 0);
    const CostBreakdown c = model_cost(m, std::nullopt, AttentionMode::baseline);
    CHECK(c[OpCategory::convolution] == OpCost{});
    CHECK(c[OpCategory::attention].flops > 0);
}

TEST_CASE("transformer weights are streamed once per forward pass", "[costmodel]") {
    TransformerSpec t;
    t.num_layers = 2;
    t.model_dim = 64;
    t.num_heads = 4;
    t.prompt_len = 10;
    t.gen_tokens = 5;
    const CostBreakdown c = variant_cost(t, 2, AttentionMode::baseline);
    const Count weights = 2 * (4 * 64 * 64 + 2 * 4 * 64 * 64) * 2;
    CHECK(c[OpCategory::linear].param_bytes == weights);
    // 14 prompt + generated tokens pass through every projection.
    const Count tokens = 10 + 4;
    CHECK(c[OpCategory::linear].flops == 2 * tokens * (4 * 64 * 64 + 2 * 4 * 64 * 64) * 2);
    CHECK(c[OpCategory::linear].bytes_moved >= 5 * weights);
}

TEST_CASE("frame sweep scaling", "[costmodel]") {
    VideoSpec v{small_diffusion(8, 2, 0, 0), 1, {0}};
    v.base.head_dim = 1;
    const std::vector<Count> frames{8, 16, 32, 64, 128, 256};
    const auto rows = temporal_spatial_sweep(v, frames);
    std::vector<double> f, sp, te;
    for (const auto& r : rows) {
        f.push_back(static_cast<double>(r.frames));
        sp.push_back(static_cast<double>(r.spatial_flops));
        te.push_back(static_cast<double>(r.temporal_flops));
        CHECK((r.temporal_flops < r.spatial_flops) == (r.frames < 64));
    }
    CHECK(loglog_slope(f, sp) == Approx(1.0).margin(1e-9));
    CHECK(loglog_slope(f, te) == Approx(2.0).margin(1e-9));
    CHECK(crossover_frames(v) == 64.0);
    CHECK(rows[3].spatial_flops == rows[3].temporal_flops);

    VideoSpec one{small_diffusion(8, 2, 0, 0), 1, {0}};
    const auto single = temporal_spatial_sweep(one, std::vector<Count>{1});
    CHECK(single[0].temporal_flops == 4 * 64 * one.base.head_dim);
}

TEST_CASE("crossover grows with resolution", "[costmodel][property]") {
    double previous = 0.0;
    for (Count side : {2, 4, 8, 16, 32, 64}) {
        VideoSpec v{small_diffusion(side, 2, 0, 0), 1, {0}};
        const double x = crossover_frames(v);
        CHECK(x == static_cast<double>(side * side));
        CHECK(x >= previous);
        previous = x;
    }
    VideoSpec none{small_diffusion(8, 2, 0, 0), 1, {}};
    CHECK(std::isinf(crossover_frames(none)));
}

TEST_CASE("memory scaling exponent", "[costmodel]") {
    const std::vector<Count> sizes{8, 16, 32, 64};
    DiffusionSpec no_text = small_diffusion(64, 2, 3, 0);
    CHECK(memory_scaling_exponent(no_text, sizes) == Approx(4.0).margin(1e-9));
    DiffusionSpec text = small_diffusion(64, 2, 3, 77);
    const double e = memory_scaling_exponent(text, sizes);
    CHECK(e > 3.5);
    CHECK(e <= 4.0);
    CHECK_THROWS_AS(memory_scaling_exponent(text, std::vector<Count>{8, 8}), DomainError);
}
