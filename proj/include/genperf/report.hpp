#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genperf/archspec.hpp"
#include "genperf/costmodel.hpp"
#include "genperf/traceparse.hpp"

namespace genperf {

std::string_view toolkit_version();

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// A report is a list of named tables plus the exact configuration it was computed from.
struct Report {
    std::string kind;
    std::string model_name;
    // Canonical JSON of the resolved spec and hardware (empty when not applicable).
    std::string config;
    std::string hardware;
    std::vector<Table> tables;

    const Table* find(std::string_view name) const;
};

enum class ReportFormat { table, csv, doc };
ReportFormat parse_report_format(std::string_view name);

/// table: aligned text; csv: long form `table,row,column,value`; doc: JSON document.
/// All three embed spec_version, the toolkit version and the resolved config.
std::string render(const Report& report, ReportFormat format);

struct AnalyzeOptions {
    std::optional<ImageSize> image;
    std::optional<Count> steps;
    std::optional<Count> frames;
    AttentionMode mode = AttentionMode::baseline;
};

/// Applies image size, step and frame-count overrides the same way every command does.
ModelSpec resolve_config(const ModelSpec& spec, std::optional<ImageSize> image, std::optional<Count> steps,
                         std::optional<Count> frames = std::nullopt);

/// Sequence-length summary, cost breakdown in both attention modes, roofline point,
/// prefill/decode census and Amdahl projections for attention speedups {1.5, 2, 4, inf}.
Report analyze(const ModelSpec& spec, const HardwareSpec& hw, const AnalyzeOptions& options);

/// Tables "summary" (metric,value) and "histogram" (q_len,count) for an already resolved spec.
Report seqlen_report(const ModelSpec& spec);

enum class SweepAxis { image_size, frames, latent };
SweepAxis parse_sweep_axis(std::string_view name);
std::string to_string(SweepAxis axis);

/// Parses "a,b,c" or "lo:hi[:factor]" (geometric, factor defaults to 2). At least two
/// strictly increasing positive points are required.
std::vector<Count> parse_range(std::string_view text);

struct SweepOptions {
    SweepAxis axis = SweepAxis::image_size;
    std::vector<Count> points;
    AttentionMode mode = AttentionMode::baseline;
    std::optional<Count> text_encode;
    std::optional<Count> steps;
};

/// Tables "points" (x,category,flops,bytes_moved,footprint) and "summary" (metric,value).
/// frames adds crossover and log-log slopes; latent adds the fitted memory exponent.
Report sweep(const ModelSpec& spec, const SweepOptions& options);

/// Table "points" (model,arithmetic_intensity,attainable_flops,bound): roofline plot data
/// for each spec at its nominal configuration. The config echo is the array of specs.
Report roofline_report(const std::vector<ModelSpec>& specs, const HardwareSpec& hw);

/// Table "breakdown" (category,microseconds,fraction) plus "counts"; with an optimized
/// breakdown also "speedup".
Report trace_report(const OperatorBreakdown& baseline, const std::optional<OperatorBreakdown>& optimized);

/// Modeled-versus-measured comparison for the spec's nominal configuration.
Report compare_report(const OperatorBreakdown& measured, const ModelSpec& spec, const HardwareSpec& hw,
                      AttentionMode mode);

/// Feasibility of end-to-end speedups given an attention fraction. Without explicit
/// speedups the reported Flash Attention end-to-end figures are audited.
Report audit_report(double fraction, const std::vector<double>& speedups);

}  // namespace genperf
