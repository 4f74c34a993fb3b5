#pragma once

#include <optional>
#include <string>

#include "genperf/archspec.hpp"
#include "genperf/costmodel.hpp"
#include "genperf/seqprofile.hpp"

namespace genperf {

enum class Bound { compute, memory };
std::string to_string(Bound bound);

struct RooflinePoint {
    double arithmetic_intensity = 0.0;
    double attainable_flops = 0.0;
    Bound bound = Bound::memory;
};

struct SpeedupProjection {
    double fraction = 0.0;
    double module_speedup = 1.0;
    double end_to_end = 1.0;
};

/// Inference FLOPs (model_cost totals) per byte of model parameters
/// (total_params * bytes_per_param).
double arithmetic_intensity(const ModelSpec& spec, std::optional<ImageSize> image);

/// Inference FLOPs per byte of main-memory traffic under the cost model's traffic model.
double traffic_intensity(const CostBreakdown& cost);

/// Compute-bound iff ai >= peak / bandwidth (a tie counts as compute-bound);
/// attainable = min(peak, ai * bandwidth).
RooflinePoint classify_bound(double ai, const HardwareSpec& hw);

/// Max-of-two-roofs time bound in seconds.
double estimate_time(const OpCost& cost, const HardwareSpec& hw);

/// 1 / ((1 - fraction) + fraction / module_speedup). module_speedup may be +infinity.
/// Throws DomainError outside 0 <= fraction <= 1, module_speedup >= 1.
SpeedupProjection amdahl(double fraction, double module_speedup);

/// Largest end-to-end speedup reachable by accelerating `fraction` of the run: 1 / (1 - fraction).
double amdahl_limit(double fraction);

/// Module speedup needed for `end_to_end` given `fraction`; +infinity when unreachable.
double required_module_speedup(double fraction, double end_to_end);

struct AmdahlAudit {
    double fraction = 0.0;
    double end_to_end = 1.0;
    double limit = 1.0;
    double required_module_speedup = 1.0;
    bool feasible = true;
};

/// Checks end_to_end <= 1 / (1 - fraction).
AmdahlAudit audit_end_to_end(double fraction, double end_to_end);

enum class PhaseLike { prefill, decode };
std::string to_string(PhaseLike phase);

/// Decode-like iff q_len == 1 and kv_len > 1.
PhaseLike prefill_decode_classify(const AttentionCall& call);

/// Roofline time of baseline attention over flash attention for one call.
double flash_speedup_model(const AttentionCall& call, const HardwareSpec& hw, const TrafficModel& traffic = {});

/// Measured end-to-end Flash Attention speedups reported for the reference model suite.
struct ReportedSpeedup {
    const char* model;
    double end_to_end;
};
inline constexpr ReportedSpeedup kReportedFlashSpeedups[] = {
    {"llama", 1.52}, {"imagen", 1.22},       {"stable-diffusion", 1.67}, {"muse", 1.11},
    {"parti", 1.17}, {"prod-image", 1.04}, {"make-a-video", 1.06},     {"phenaki", 1.15},
};

}  // namespace genperf
