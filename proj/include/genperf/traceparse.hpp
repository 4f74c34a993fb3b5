#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genperf/costmodel.hpp"
#include "genperf/roofline.hpp"

namespace genperf {

/// Trace timestamps and durations in integer nanoseconds. Trace files carry
/// microseconds (possibly fractional); they are rounded to the nearest nanosecond
/// so that aggregation is exact and independent of event order.
using Nanos = std::int64_t;

/// One retained event of a Chrome trace-event document.
struct TraceEvent {
    std::string name;
    char phase = 'X';
    Nanos timestamp = 0;
    Nanos duration = 0;
    std::string process_id;
    std::string thread_id;
    std::optional<std::int64_t> correlation;
    std::optional<std::string> category;
    // Flow events ('s', 't', 'f') carry a binding id.
    std::optional<std::string> flow_id;

    bool operator==(const TraceEvent&) const = default;
};

struct AnnotationSpan {
    std::string label;
    OpCategory category = OpCategory::other;
    Nanos start = 0;
    Nanos end = 0;
    std::string process_id;
    std::string thread_id;
};

/// Parses a trace-event document: either a bare event array or an object with a
/// `traceEvents` array. Complete ('X'), duration ('B'/'E') and flow ('s'/'t'/'f')
/// events are retained in document order; other phases are dropped. Metadata
/// events ('M') need only `name` and `ph`; every other event needs `name`, `ph`, `ts`.
std::vector<TraceEvent> parse_trace_text(std::string_view text);
std::vector<TraceEvent> parse_trace(const std::filesystem::path& path);

/// Serializes retained events as `{"traceEvents": [...]}`.
std::string write_trace(const std::vector<TraceEvent>& events);

/// Ordered (pattern, category) rules; patterns match case-insensitive substrings and
/// the first matching rule wins.
struct CategoryRule {
    std::string pattern;
    OpCategory category = OpCategory::other;
};

struct CategoryRules {
    std::vector<CategoryRule> rules;

    std::optional<OpCategory> match(std::string_view label) const;
};

/// Rules file: one `pattern,category` pair per line; blank lines and `#` comments ignored.
CategoryRules parse_rules(std::string_view text);
CategoryRules load_rules(const std::filesystem::path& path);
CategoryRules default_rules();

struct CategoryTime {
    Nanos time = 0;
    double fraction = 0.0;

    bool operator==(const CategoryTime&) const = default;
};

struct OperatorBreakdown {
    std::array<CategoryTime, kCategories.size()> categories{};
    // Sum of kernel busy time (overlapping kernels on different streams both count).
    Nanos total_time = 0;
    // First kernel start to last kernel end.
    Nanos wall_span = 0;
    std::size_t kernel_count = 0;
    // Kernels with neither an annotation nor a kernel-name rule match.
    std::size_t unattributed = 0;
    // Kernels categorized from their own name because no annotation covered them.
    std::size_t name_matched = 0;

    CategoryTime& operator[](OpCategory c) { return categories[static_cast<std::size_t>(c)]; }
    const CategoryTime& operator[](OpCategory c) const { return categories[static_cast<std::size_t>(c)]; }

    bool operator==(const OperatorBreakdown&) const = default;
};

/// True for accelerator kernel events (category "kernel").
bool is_kernel(const TraceEvent& e);
/// True for runtime launch events (category "cuda_runtime", "cuda_driver", "hip_runtime", ...).
bool is_launch(const TraceEvent& e);

/// Annotation spans: non-kernel, non-launch events whose names match a rule.
/// 'B'/'E' pairs on the same thread are joined.
std::vector<AnnotationSpan> annotation_spans(const std::vector<TraceEvent>& events, const CategoryRules& rules);

/// Attributes every kernel to a category and aggregates kernel time. A kernel's launch
/// point is found through its correlation id (or a flow binding); the innermost
/// annotation span on the launching thread containing that point decides the category.
/// Without a launch event, spans containing the kernel's own start are used. Kernels
/// not covered by a span fall back to kernel-name rules, then to `other`.
OperatorBreakdown link_kernels(const std::vector<TraceEvent>& events, const CategoryRules& rules);

/// Breakdown built from per-category times (used for synthetic inputs).
OperatorBreakdown breakdown_from_times(const std::array<Nanos, kCategories.size()>& times);

struct CategoryComparison {
    OpCategory category = OpCategory::other;
    double measured_fraction = 0.0;
    double modeled_fraction = 0.0;
    // measured - modeled
    double delta = 0.0;
    // delta / modeled; NaN when the model predicts zero time.
    double relative_delta = 0.0;
};

struct BreakdownComparison {
    std::vector<CategoryComparison> categories;
    // Kendall tau-b between measured and modeled category fractions (1.0 when all tie).
    double rank_agreement = 1.0;
    double modeled_total_seconds = 0.0;
    double measured_total_seconds = 0.0;
};

/// Compares measured fractions with modeled roofline-time fractions per category.
BreakdownComparison compare_breakdown(const OperatorBreakdown& measured, const CostBreakdown& modeled,
                                      const HardwareSpec& hw);

struct TraceSpeedup {
    double module_speedup = 1.0;
    double end_to_end = 1.0;
    // Baseline attention share of kernel time.
    double attention_fraction = 0.0;
    // amdahl(attention_fraction, module_speedup).end_to_end
    double amdahl_end_to_end = 1.0;
    // |end_to_end - amdahl_end_to_end| <= 1e-9, i.e. only attention time changed.
    bool amdahl_consistent = true;
};

/// Attention-module and end-to-end speedup between a baseline and an optimized run.
/// Throws DomainError when the optimized run has no attention time.
TraceSpeedup attention_speedup_from_traces(const OperatorBreakdown& baseline, const OperatorBreakdown& optimized);

/// CSV with columns category,microseconds,fraction.
std::string breakdown_csv(const OperatorBreakdown& breakdown);

std::string format_micros(Nanos ns);

}  // namespace genperf
