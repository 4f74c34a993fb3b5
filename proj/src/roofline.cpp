#include "genperf/roofline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "genperf/error.hpp"

namespace genperf {

std::string to_string(Bound bound) {
    return bound == Bound::compute ? "compute" : "memory";
}

std::string to_string(PhaseLike phase) {
    return phase == PhaseLike::prefill ? "prefill-like" : "decode-like";
}

double arithmetic_intensity(const ModelSpec& spec, std::optional<ImageSize> image) {
    const double param_bytes = static_cast<double>(spec.total_params) * static_cast<double>(spec.bytes_per_param);
    if (param_bytes <= 0.0) {
        throw DomainError("arithmetic intensity undefined for a zero-parameter model");
    }
    const CostBreakdown cost = model_cost(spec, image, AttentionMode::baseline);
    return static_cast<double>(cost.totals().flops) / param_bytes;
}

double traffic_intensity(const CostBreakdown& cost) {
    const OpCost t = cost.totals();
    if (t.bytes_moved == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(t.flops) / static_cast<double>(t.bytes_moved);
}

RooflinePoint classify_bound(double ai, const HardwareSpec& hw) {
    validate(hw);
    RooflinePoint p;
    p.arithmetic_intensity = ai;
    p.bound = ai >= hw.ridge_point() ? Bound::compute : Bound::memory;
    p.attainable_flops = std::min(hw.peak_flops, ai * hw.mem_bandwidth);
    return p;
}

double estimate_time(const OpCost& cost, const HardwareSpec& hw) {
    validate(hw);
    const double compute = static_cast<double>(cost.flops) / hw.peak_flops;
    const double memory = static_cast<double>(cost.bytes_moved) / hw.mem_bandwidth;
    return std::max(compute, memory);
}

SpeedupProjection amdahl(double fraction, double module_speedup) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw DomainError("amdahl: fraction must lie in [0, 1]");
    }
    if (!(module_speedup >= 1.0)) {
        throw DomainError("amdahl: module speedup must be >= 1");
    }
    SpeedupProjection s{fraction, module_speedup, 1.0};
    const double optimized = std::isinf(module_speedup) ? 0.0 : fraction / module_speedup;
    const double remaining = (1.0 - fraction) + optimized;
    s.end_to_end = remaining == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / remaining;
    return s;
}

double amdahl_limit(double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw DomainError("amdahl: fraction must lie in [0, 1]");
    }
    return fraction == 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - fraction);
}

double required_module_speedup(double fraction, double end_to_end) {
    if (!(end_to_end >= 1.0)) {
        throw DomainError("amdahl: end-to-end speedup must be >= 1");
    }
    if (end_to_end == 1.0) {
        return 1.0;
    }
    // 1/e = (1 - p) + p / s  =>  s = p / (1/e - (1 - p))
    const double slack = 1.0 / end_to_end - (1.0 - fraction);
    if (fraction == 0.0 || slack <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return fraction / slack;
}

AmdahlAudit audit_end_to_end(double fraction, double end_to_end) {
    AmdahlAudit a;
    a.fraction = fraction;
    a.end_to_end = end_to_end;
    a.limit = amdahl_limit(fraction);
    a.required_module_speedup = required_module_speedup(fraction, end_to_end);
    a.feasible = end_to_end <= a.limit;
    return a;
}

PhaseLike prefill_decode_classify(const AttentionCall& call) {
    validate(call);
    return call.q_len == 1 && call.kv_len > 1 ? PhaseLike::decode : PhaseLike::prefill;
}

double flash_speedup_model(const AttentionCall& call, const HardwareSpec& hw, const TrafficModel& traffic) {
    validate(call);
    const double baseline = estimate_time(attn_cost(call, AttentionMode::baseline, traffic), hw);
    const double flash = estimate_time(attn_cost(call, AttentionMode::flash, traffic), hw);
    return baseline / flash;
}

}  // namespace genperf
