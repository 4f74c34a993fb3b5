#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "genperf/error.hpp"
#include "genperf/roofline.hpp"
#include "genperf/spec_io.hpp"

using namespace genperf;
using Catch::Approx;

namespace {

AttentionCall call(Count q, Count kv, Count hd) {
    AttentionCall c;
    c.q_len = q;
    c.kv_len = kv;
    c.head_dim = hd;
    return c;
}

}  // namespace

TEST_CASE("roofline classification", "[roofline]") {
    const HardwareSpec hw = default_hardware();
    CHECK(hw.ridge_point() == Approx(153.016).epsilon(1e-5));
    const double ai = 5e13 / 2.9e9;
    CHECK(ai == Approx(17241.38).epsilon(1e-6));
    CHECK(classify_bound(ai, hw).bound == Bound::compute);
    CHECK(classify_bound(ai, hw).attainable_flops == hw.peak_flops);
    CHECK(classify_bound(hw.ridge_point(), hw).bound == Bound::compute);
    const RooflinePoint low = classify_bound(1.0, hw);
    CHECK(low.bound == Bound::memory);
    CHECK(low.attainable_flops == hw.mem_bandwidth);
}

TEST_CASE("classification is invariant under scaling flops and bytes together", "[roofline][property]") {
    const HardwareSpec hw = default_hardware();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> flops(1e6, 1e15), bytes(1e3, 1e13), scale(1e-3, 1e3);
    for (int i = 0; i < 500; ++i) {
        const double f = flops(rng), b = bytes(rng), k = scale(rng);
        CHECK(classify_bound(f / b, hw).bound == classify_bound((f * k) / (b * k), hw).bound);
    }
}

TEST_CASE("time bound takes the larger roof", "[roofline]") {
    const HardwareSpec hw = default_hardware();
    CHECK(estimate_time(OpCost{0, 2039000000000ULL, 0, 0}, hw) == Approx(1.0));
    CHECK(estimate_time(OpCost{312000000000000ULL, 0, 0, 0}, hw) == Approx(1.0));
    const double bytes = 1e9;
    const OpCost balanced{static_cast<Count>(bytes * hw.ridge_point()), static_cast<Count>(bytes), 0, 0};
    CHECK(static_cast<double>(balanced.flops) / hw.peak_flops ==
          Approx(static_cast<double>(balanced.bytes_moved) / hw.mem_bandwidth).epsilon(1e-9));
}

TEST_CASE("Amdahl projections", "[roofline]") {
    CHECK(amdahl(0.413, 2.0).end_to_end == Approx(1.0 / (0.587 + 0.2065)).epsilon(1e-12));
    CHECK(amdahl(0.413, 2.0).end_to_end == Approx(1.260).margin(0.001));
    CHECK(amdahl(0.7, 1.0).end_to_end == 1.0);
    CHECK(amdahl(1.0, 3.0).end_to_end == Approx(3.0));
    CHECK(amdahl(0.5, std::numeric_limits<double>::infinity()).end_to_end == Approx(2.0));
    CHECK(std::isinf(amdahl(1.0, std::numeric_limits<double>::infinity()).end_to_end));
    CHECK_THROWS_AS(amdahl(1.2, 2.0), DomainError);
    CHECK_THROWS_AS(amdahl(0.5, 0.5), DomainError);
}

TEST_CASE("Amdahl is monotone and bounded", "[roofline][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> frac(0.0, 1.0), speed(1.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double p = frac(rng), s = speed(rng);
        const double e = amdahl(p, s).end_to_end;
        CHECK(e >= 1.0);
        CHECK(e <= amdahl_limit(p) * (1 + 1e-12));
        CHECK(amdahl(std::min(1.0, p + 0.01), s).end_to_end >= e);
        CHECK(amdahl(p, s + 1.0).end_to_end >= e);
        CHECK(required_module_speedup(p, e) == Approx(s).epsilon(1e-6));
    }
}

TEST_CASE("end-to-end audit", "[roofline]") {
    const AmdahlAudit ok = audit_end_to_end(0.5, 1.67);
    CHECK(ok.feasible);
    CHECK(ok.limit == Approx(2.0));
    CHECK(ok.required_module_speedup >= 1.67);
    CHECK(ok.required_module_speedup == Approx(0.5 / (1 / 1.67 - 0.5)));
    const AmdahlAudit bad = audit_end_to_end(0.3, 1.67);
    CHECK_FALSE(bad.feasible);
    CHECK(std::isinf(bad.required_module_speedup));
}

TEST_CASE("prefill and decode classification", "[roofline]") {
    CHECK(prefill_decode_classify(call(4096, 4096, 64)) == PhaseLike::prefill);
    CHECK(prefill_decode_classify(call(1, 512, 64)) == PhaseLike::decode);
    CHECK(prefill_decode_classify(call(1, 1, 64)) == PhaseLike::prefill);
}

TEST_CASE("modeled Flash Attention speedup", "[roofline]") {
    const HardwareSpec hw = default_hardware();
    for (Count hd : {32, 64, 128}) {
        const double prefill = flash_speedup_model(call(4096, 4096, hd), hw);
        const double decode = flash_speedup_model(call(1, 4096, hd), hw);
        CHECK(prefill >= 1.0);
        CHECK(decode >= 1.0);
        CHECK(prefill > decode);
    }
    // Huge head_dim pushes both modes onto the FLOP roof.
    CHECK(flash_speedup_model(call(4096, 4096, 4096), hw) == Approx(1.0));
}

TEST_CASE("arithmetic intensity follows parameter reuse", "[roofline]") {
    const ModelSpec sd = preset("stable-diffusion");
    const double ai = arithmetic_intensity(sd, std::nullopt);
    CHECK(arithmetic_intensity(with_steps(sd, 100), std::nullopt) == Approx(2 * ai).epsilon(1e-12));
    ModelSpec zero = sd;
    zero.total_params = 0;
    CHECK_THROWS_AS(arithmetic_intensity(zero, std::nullopt), DomainError);
    for (const auto& name : preset_names()) {
        const ModelSpec m = preset(name);
        if (!m.is_transformer()) {
            INFO(name);
            CHECK(classify_bound(arithmetic_intensity(m, std::nullopt), default_hardware()).bound == Bound::compute);
        }
    }
}
