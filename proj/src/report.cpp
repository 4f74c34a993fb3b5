#include "genperf/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "genperf/csv.hpp"
#include "genperf/error.hpp"
#include "genperf/fit.hpp"
#include "genperf/roofline.hpp"
#include "genperf/seqprofile.hpp"
#include "genperf/spec_io.hpp"

namespace genperf {

using nlohmann::ordered_json;

namespace {

std::string num(Count v) {
    return std::to_string(v);
}

std::string num(double v) {
    return format_double(v);
}

Table metric_table(std::string name) {
    return Table{std::move(name), {"metric", "value"}, {}};
}

void add_metric(Table& t, std::string metric, std::string value) {
    t.rows.push_back({std::move(metric), std::move(value)});
}

std::string compact_json(const std::string& text) {
    if (text.empty()) {
        return {};
    }
    return ordered_json::parse(text).dump();
}

Count parse_count(std::string_view text, std::string_view what) {
    Count v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ValidationError("invalid " + std::string(what) + " '" + std::string(text) + "'");
    }
    return v;
}

// Modeled roofline seconds per category.
std::array<double, kCategories.size()> category_times(const CostBreakdown& cost, const HardwareSpec& hw) {
    std::array<double, kCategories.size()> out{};
    for (OpCategory c : kCategories) {
        out[static_cast<std::size_t>(c)] = estimate_time(cost[c], hw);
    }
    return out;
}

double sum(const std::array<double, kCategories.size()>& values) {
    double s = 0.0;
    for (double v : values) {
        s += v;
    }
    return s;
}

void add_cost_rows(Table& t, const std::string& prefix, const CostBreakdown& cost) {
    for (OpCategory c : kCategories) {
        const OpCost& o = cost[c];
        std::vector<std::string> row;
        if (!prefix.empty()) {
            row.push_back(prefix);
        }
        row.insert(row.end(),
                   {to_string(c), num(o.flops), num(o.bytes_moved), num(o.footprint), num(o.param_bytes)});
        t.rows.push_back(std::move(row));
    }
}

std::string reported_speedup_for(const std::string& model) {
    for (const auto& r : kReportedFlashSpeedups) {
        if (model.find(r.model) != std::string::npos) {
            return num(r.end_to_end);
        }
    }
    return {};
}

std::string render_table(const Report& r) {
    std::ostringstream out;
    out << r.kind << " report: " << r.model_name << "\n";
    out << "spec_version " << kSpecVersion << ", genperf " << toolkit_version() << "\n";
    for (const auto& t : r.tables) {
        out << "\n[" << t.name << "]\n";
        std::vector<std::size_t> width(t.header.size(), 0);
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            width[i] = t.header[i].size();
            for (const auto& row : t.rows) {
                width[i] = std::max(width[i], row[i].size());
            }
        }
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out << (i == 0 ? "" : "  ") << cells[i];
                if (i + 1 < cells.size()) {
                    out << std::string(width[i] - cells[i].size(), ' ');
                }
            }
            out << "\n";
        };
        line(t.header);
        for (const auto& row : t.rows) {
            line(row);
        }
    }
    if (!r.config.empty()) {
        out << "\n[config]\n" << r.config;
    }
    if (!r.hardware.empty()) {
        out << "\n[hardware]\n" << r.hardware;
    }
    return out.str();
}

std::string render_csv(const Report& r) {
    CsvWriter csv({"table", "row", "column", "value"});
    csv.row({"meta", "0", "kind", r.kind});
    csv.row({"meta", "0", "model", r.model_name});
    csv.row({"meta", "0", "spec_version", std::to_string(kSpecVersion)});
    csv.row({"meta", "0", "toolkit_version", std::string(toolkit_version())});
    if (!r.config.empty()) {
        csv.row({"meta", "0", "config", compact_json(r.config)});
    }
    if (!r.hardware.empty()) {
        csv.row({"meta", "0", "hardware", compact_json(r.hardware)});
    }
    for (const auto& t : r.tables) {
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            for (std::size_t c = 0; c < t.header.size(); ++c) {
                csv.row({t.name, std::to_string(i), t.header[c], t.rows[i][c]});
            }
        }
    }
    return csv.str();
}

std::string render_doc(const Report& r) {
    ordered_json doc;
    doc["kind"] = r.kind;
    doc["model"] = r.model_name;
    doc["spec_version"] = kSpecVersion;
    doc["toolkit_version"] = std::string(toolkit_version());
    doc["config"] = r.config.empty() ? ordered_json(nullptr) : ordered_json::parse(r.config);
    doc["hardware"] = r.hardware.empty() ? ordered_json(nullptr) : ordered_json::parse(r.hardware);
    ordered_json tables = ordered_json::object();
    for (const auto& t : r.tables) {
        ordered_json rows = ordered_json::array();
        for (const auto& row : t.rows) {
            ordered_json obj = ordered_json::object();
            for (std::size_t c = 0; c < t.header.size(); ++c) {
                obj[t.header[c]] = row[c];
            }
            rows.push_back(std::move(obj));
        }
        tables[t.name] = {{"columns", t.header}, {"rows", rows}};
    }
    doc["tables"] = std::move(tables);
    return doc.dump(2) + "\n";
}

DiffusionSpec& diffusion_of(Variant& v, std::string_view axis) {
    if (auto* d = std::get_if<DiffusionSpec>(&v)) {
        return *d;
    }
    if (auto* vid = std::get_if<VideoSpec>(&v)) {
        return vid->base;
    }
    throw ValidationError("sweep axis '" + std::string(axis) + "' needs a diffusion or video spec");
}

}  // namespace

std::string_view toolkit_version() {
    return GENPERF_VERSION;
}

const Table* Report::find(std::string_view name) const {
    for (const auto& t : tables) {
        if (t.name == name) {
            return &t;
        }
    }
    return nullptr;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "table") return ReportFormat::table;
    if (name == "csv") return ReportFormat::csv;
    if (name == "doc") return ReportFormat::doc;
    throw ValidationError("unknown format '" + std::string(name) + "' (expected table, csv or doc)");
}

std::string render(const Report& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::table:
            return render_table(report);
        case ReportFormat::csv:
            return render_csv(report);
        case ReportFormat::doc:
            return render_doc(report);
    }
    return {};
}

ModelSpec resolve_config(const ModelSpec& spec, std::optional<ImageSize> image, std::optional<Count> steps,
                         std::optional<Count> frames) {
    ModelSpec out = spec;
    if (frames) {
        auto* vid = std::get_if<VideoSpec>(&out.variant);
        if (vid == nullptr) {
            throw ValidationError("--frames needs a video spec");
        }
        vid->num_frames = *frames;
    }
    if (image) {
        if (!nominal_image(out)) {
            throw ValidationError("--image-size needs a model with a diffusion component");
        }
        out = with_image_size(out, *image);
    }
    if (steps) {
        if (*steps == 0) {
            throw ValidationError("steps must be >= 1");
        }
        out = with_steps(out, *steps);
    }
    validate(out);
    return out;
}

Report analyze(const ModelSpec& spec, const HardwareSpec& hw, const AnalyzeOptions& options) {
    const ModelSpec resolved = resolve_config(spec, options.image, options.steps, options.frames);
    validate(hw);
    Report r;
    r.kind = "analyze";
    r.model_name = resolved.name;
    r.config = write_spec(resolved);
    r.hardware = write_hardware(hw);

    const SeqLenTrace trace = model_trace(resolved);
    Table seq = metric_table("seqlen");
    if (!trace.calls.empty()) {
        const SeqLenSummary s = summarize(trace, resolved.variant);
        add_metric(seq, "attention_calls", num(s.calls));
        add_metric(seq, "min_q_len", num(s.min_q_len));
        add_metric(seq, "max_q_len", num(s.max_q_len));
        add_metric(seq, "whole_trace_ratio", num(s.whole_trace_ratio));
        add_metric(seq, "per_stage_ratio", num(s.per_stage_ratio));
    } else {
        add_metric(seq, "attention_calls", "0");
    }
    Count prefill = 0, decode = 0;
    for (const auto& call : trace.calls) {
        (prefill_decode_classify(call) == PhaseLike::decode ? decode : prefill) += 1;
    }
    add_metric(seq, "prefill_like_calls", num(prefill));
    add_metric(seq, "decode_like_calls", num(decode));
    r.tables.push_back(std::move(seq));

    const CostBreakdown baseline = model_cost(resolved, std::nullopt, AttentionMode::baseline);
    const CostBreakdown flash = model_cost(resolved, std::nullopt, AttentionMode::flash);
    Table cost{"cost", {"mode", "category", "flops", "bytes_moved", "footprint", "param_bytes"}, {}};
    add_cost_rows(cost, "baseline", baseline);
    add_cost_rows(cost, "flash", flash);
    r.tables.push_back(std::move(cost));

    const CostBreakdown& selected = options.mode == AttentionMode::flash ? flash : baseline;
    const double ai = arithmetic_intensity(resolved, std::nullopt);
    const RooflinePoint point = classify_bound(ai, hw);
    const auto times = category_times(selected, hw);
    const double total_time = sum(times);
    const double base_attn = estimate_time(baseline[OpCategory::attention], hw);
    const double flash_attn = estimate_time(flash[OpCategory::attention], hw);
    Table roof = metric_table("roofline");
    add_metric(roof, "mode", to_string(options.mode));
    add_metric(roof, "arithmetic_intensity", num(ai));
    add_metric(roof, "traffic_intensity", num(traffic_intensity(selected)));
    add_metric(roof, "ridge_point", num(hw.ridge_point()));
    add_metric(roof, "bound", to_string(point.bound));
    add_metric(roof, "attainable_flops", num(point.attainable_flops));
    add_metric(roof, "estimated_seconds", num(total_time));
    add_metric(roof, "modeled_flash_attention_speedup", flash_attn > 0 ? num(base_attn / flash_attn) : "");
    r.tables.push_back(std::move(roof));

    Table time{"time", {"category", "seconds", "fraction"}, {}};
    for (OpCategory c : kCategories) {
        const double t = times[static_cast<std::size_t>(c)];
        time.rows.push_back({to_string(c), num(t), num(total_time > 0 ? t / total_time : 0.0)});
    }
    r.tables.push_back(std::move(time));

    const double p = total_time > 0 ? times[static_cast<std::size_t>(OpCategory::attention)] / total_time : 0.0;
    Table proj{"amdahl", {"attention_fraction", "module_speedup", "end_to_end"}, {}};
    for (double s : {1.5, 2.0, 4.0, std::numeric_limits<double>::infinity()}) {
        proj.rows.push_back({num(p), num(s), num(amdahl(p, s).end_to_end)});
    }
    r.tables.push_back(std::move(proj));

    if (auto reported = reported_speedup_for(resolved.name); !reported.empty()) {
        const AmdahlAudit a = audit_end_to_end(p, std::stod(reported));
        Table audit = metric_table("reported");
        add_metric(audit, "reported_flash_end_to_end", reported);
        add_metric(audit, "amdahl_limit", num(a.limit));
        add_metric(audit, "required_module_speedup", num(a.required_module_speedup));
        add_metric(audit, "feasible", a.feasible ? "true" : "false");
        r.tables.push_back(std::move(audit));
    }
    return r;
}

Report seqlen_report(const ModelSpec& spec) {
    const SeqLenTrace trace = model_trace(spec);
    Report r;
    r.kind = "seqlen";
    r.model_name = spec.name;
    r.config = write_spec(spec);
    Table summary = metric_table("summary");
    Table hist{"histogram", {"q_len", "count"}, {}};
    if (trace.calls.empty()) {
        add_metric(summary, "attention_calls", "0");
    } else {
        const SeqLenSummary s = summarize(trace, spec.variant);
        add_metric(summary, "attention_calls", num(s.calls));
        add_metric(summary, "min_q_len", num(s.min_q_len));
        add_metric(summary, "max_q_len", num(s.max_q_len));
        add_metric(summary, "whole_trace_ratio", num(s.whole_trace_ratio));
        add_metric(summary, "per_stage_ratio", num(s.per_stage_ratio));
        for (const auto& [q, count] : seq_len_histogram(trace)) {
            hist.rows.push_back({num(q), num(count)});
        }
    }
    r.tables.push_back(std::move(summary));
    r.tables.push_back(std::move(hist));
    return r;
}

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "image-size") return SweepAxis::image_size;
    if (name == "frames") return SweepAxis::frames;
    if (name == "latent") return SweepAxis::latent;
    throw ValidationError("unknown sweep axis '" + std::string(name) + "' (expected image-size, frames or latent)");
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::image_size:
            return "image-size";
        case SweepAxis::frames:
            return "frames";
        case SweepAxis::latent:
            return "latent";
    }
    return {};
}

std::vector<Count> parse_range(std::string_view text) {
    std::vector<Count> points;
    if (text.find(':') != std::string_view::npos) {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        while (true) {
            auto colon = text.find(':', start);
            parts.push_back(text.substr(start, colon - start));
            if (colon == std::string_view::npos) break;
            start = colon + 1;
        }
        if (parts.size() < 2 || parts.size() > 3) {
            throw ValidationError("range must be 'lo:hi' or 'lo:hi:factor'");
        }
        const Count lo = parse_count(parts[0], "range start");
        const Count hi = parse_count(parts[1], "range end");
        const Count factor = parts.size() == 3 ? parse_count(parts[2], "range factor") : 2;
        if (lo == 0 || factor < 2) {
            throw ValidationError("range needs a positive start and a factor >= 2");
        }
        for (Count v = lo; v <= hi; v *= factor) {
            points.push_back(v);
            if (v > hi / factor) break;
        }
    } else {
        std::size_t start = 0;
        while (start <= text.size()) {
            auto comma = text.find(',', start);
            auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            points.push_back(parse_count(item, "range point"));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
    }
    if (points.size() < 2) {
        throw ValidationError("range must contain at least two points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i] == 0 || (i > 0 && points[i] <= points[i - 1])) {
            throw ValidationError("range points must be positive and strictly increasing");
        }
    }
    return points;
}

Report sweep(const ModelSpec& spec, const SweepOptions& options) {
    if (options.points.size() < 2) {
        throw ValidationError("range must contain at least two points");
    }
    ModelSpec base = resolve_config(spec, std::nullopt, options.steps);
    const std::string axis = to_string(options.axis);
    if (options.text_encode) {
        auto set_text = [&](Variant& v) {
            if (auto* d = std::get_if<DiffusionSpec>(&v)) d->text_encode = *options.text_encode;
            if (auto* vid = std::get_if<VideoSpec>(&v)) vid->base.text_encode = *options.text_encode;
        };
        set_text(base.variant);
        for (auto& c : base.pipeline) set_text(c.variant);
    }

    Report r;
    r.kind = "sweep";
    r.model_name = base.name;
    r.config = write_spec(base);
    Table points{"points", {"x", "category", "flops", "bytes_moved", "footprint"}, {}};
    Table summary = metric_table("summary");
    add_metric(summary, "axis", axis);
    add_metric(summary, "mode", to_string(options.mode));

    auto emit = [&](Count x, const CostBreakdown& cost) {
        for (OpCategory c : kCategories) {
            points.rows.push_back(
                {num(x), to_string(c), num(cost[c].flops), num(cost[c].bytes_moved), num(cost[c].footprint)});
        }
    };

    switch (options.axis) {
        case SweepAxis::image_size: {
            if (!nominal_image(base)) {
                throw ValidationError("sweep axis 'image-size' needs a model with a diffusion component");
            }
            for (Count x : options.points) {
                const ModelSpec m = resolve_config(base, ImageSize{x, x}, std::nullopt);
                emit(x, model_cost(m, std::nullopt, options.mode));
                Count max_q = 0;
                for (const auto& call : model_trace(m).calls) {
                    if (call.kind == AttentionKind::self || call.kind == AttentionKind::spatial) {
                        max_q = std::max(max_q, call.q_len);
                    }
                }
                add_metric(summary, "max_self_q_len@" + num(x), num(max_q));
            }
            break;
        }
        case SweepAxis::frames: {
            const auto* vid = std::get_if<VideoSpec>(&base.variant);
            if (vid == nullptr) {
                throw ValidationError("sweep axis 'frames' needs a video spec");
            }
            for (Count x : options.points) {
                VideoSpec v = *vid;
                v.num_frames = x;
                validate(v);
                emit(x, variant_cost(v, base.bytes_per_param, options.mode));
            }
            const auto rows = temporal_spatial_sweep(*vid, options.points);
            std::vector<double> f, spatial, temporal;
            for (const auto& row : rows) {
                f.push_back(static_cast<double>(row.frames));
                spatial.push_back(static_cast<double>(row.spatial_flops));
                temporal.push_back(static_cast<double>(row.temporal_flops));
            }
            add_metric(summary, "crossover_frames", num(crossover_frames(*vid)));
            add_metric(summary, "spatial_slope", num(loglog_slope(f, spatial)));
            if (std::all_of(temporal.begin(), temporal.end(), [](double t) { return t > 0; })) {
                add_metric(summary, "temporal_slope", num(loglog_slope(f, temporal)));
            }
            break;
        }
        case SweepAxis::latent: {
            DiffusionSpec& d = diffusion_of(base.variant, axis);
            for (Count x : options.points) {
                Variant v = base.variant;
                DiffusionSpec& dv = diffusion_of(v, axis);
                dv.latent_height = x;
                dv.latent_width = x;
                validate(dv);
                emit(x, variant_cost(v, base.bytes_per_param, options.mode));
                add_metric(summary, "cumulative_sim_memory@" + num(x),
                           num(cumulative_sim_memory(dv, base.bytes_per_param)));
            }
            add_metric(summary, "memory_exponent", format_fixed(memory_scaling_exponent(d, options.points), 3));
            break;
        }
    }
    r.tables.push_back(std::move(points));
    r.tables.push_back(std::move(summary));
    return r;
}

Report roofline_report(const std::vector<ModelSpec>& specs, const HardwareSpec& hw) {
    if (specs.empty()) {
        throw ValidationError("roofline needs at least one spec");
    }
    validate(hw);
    Report r;
    r.kind = "roofline";
    r.model_name = specs.size() == 1 ? specs.front().name : "multiple";
    r.hardware = write_hardware(hw);
    ordered_json config = ordered_json::array();
    Table points{"points", {"model", "arithmetic_intensity", "attainable_flops", "bound"}, {}};
    for (const auto& spec : specs) {
        validate(spec);
        config.push_back(ordered_json::parse(write_spec(spec)));
        const double ai = arithmetic_intensity(spec, std::nullopt);
        const RooflinePoint p = classify_bound(ai, hw);
        points.rows.push_back({spec.name, num(ai), num(p.attainable_flops), to_string(p.bound)});
    }
    r.config = config.dump(2);
    r.tables.push_back(std::move(points));
    Table summary = metric_table("summary");
    add_metric(summary, "ridge_point", num(hw.ridge_point()));
    add_metric(summary, "peak_flops", num(hw.peak_flops));
    add_metric(summary, "mem_bandwidth", num(hw.mem_bandwidth));
    r.tables.push_back(std::move(summary));
    return r;
}

Report trace_report(const OperatorBreakdown& baseline, const std::optional<OperatorBreakdown>& optimized) {
    Report r;
    r.kind = "trace";
    r.model_name = "trace";
    Table breakdown{"breakdown", {"category", "microseconds", "fraction"}, {}};
    for (OpCategory c : kCategories) {
        breakdown.rows.push_back({to_string(c), format_micros(baseline[c].time), num(baseline[c].fraction)});
    }
    r.tables.push_back(std::move(breakdown));
    Table counts = metric_table("counts");
    add_metric(counts, "kernels", num(static_cast<Count>(baseline.kernel_count)));
    add_metric(counts, "total_microseconds", format_micros(baseline.total_time));
    add_metric(counts, "wall_span_microseconds", format_micros(baseline.wall_span));
    add_metric(counts, "name_matched", num(static_cast<Count>(baseline.name_matched)));
    add_metric(counts, "unattributed", num(static_cast<Count>(baseline.unattributed)));
    r.tables.push_back(std::move(counts));
    if (optimized) {
        const TraceSpeedup s = attention_speedup_from_traces(baseline, *optimized);
        Table speedup = metric_table("speedup");
        add_metric(speedup, "attention_fraction", num(s.attention_fraction));
        add_metric(speedup, "module_speedup", num(s.module_speedup));
        add_metric(speedup, "end_to_end", num(s.end_to_end));
        add_metric(speedup, "amdahl_end_to_end", num(s.amdahl_end_to_end));
        add_metric(speedup, "amdahl_consistent", s.amdahl_consistent ? "true" : "false");
        r.tables.push_back(std::move(speedup));
    }
    return r;
}

Report compare_report(const OperatorBreakdown& measured, const ModelSpec& spec, const HardwareSpec& hw,
                      AttentionMode mode) {
    const CostBreakdown modeled = model_cost(spec, std::nullopt, mode);
    const BreakdownComparison cmp = compare_breakdown(measured, modeled, hw);
    Report r;
    r.kind = "compare";
    r.model_name = spec.name;
    r.config = write_spec(spec);
    r.hardware = write_hardware(hw);
    Table t{"comparison", {"category", "measured_fraction", "modeled_fraction", "delta", "relative_delta"}, {}};
    for (const auto& c : cmp.categories) {
        t.rows.push_back({to_string(c.category), num(c.measured_fraction), num(c.modeled_fraction), num(c.delta),
                          num(c.relative_delta)});
    }
    r.tables.push_back(std::move(t));
    Table s = metric_table("summary");
    add_metric(s, "mode", to_string(mode));
    add_metric(s, "rank_agreement", num(cmp.rank_agreement));
    add_metric(s, "measured_total_seconds", num(cmp.measured_total_seconds));
    add_metric(s, "modeled_total_seconds", num(cmp.modeled_total_seconds));
    add_metric(s, "kernels", num(static_cast<Count>(measured.kernel_count)));
    add_metric(s, "unattributed", num(static_cast<Count>(measured.unattributed)));
    r.tables.push_back(std::move(s));
    return r;
}

Report audit_report(double fraction, const std::vector<double>& speedups) {
    Report r;
    r.kind = "audit";
    r.model_name = "amdahl";
    Table t{"audit",
            {"model", "end_to_end", "attention_fraction", "amdahl_limit", "required_module_speedup", "feasible"},
            {}};
    auto add = [&](std::string model, double e) {
        const AmdahlAudit a = audit_end_to_end(fraction, e);
        t.rows.push_back({std::move(model), num(e), num(fraction), num(a.limit), num(a.required_module_speedup),
                          a.feasible ? "true" : "false"});
    };
    if (speedups.empty()) {
        for (const auto& rep : kReportedFlashSpeedups) {
            add(rep.model, rep.end_to_end);
        }
    } else {
        for (double e : speedups) {
            add("", e);
        }
    }
    r.tables.push_back(std::move(t));
    return r;
}

}  // namespace genperf
