#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "genperf/csv.hpp"
#include "genperf/error.hpp"
#include "genperf/report.hpp"
#include "genperf/seqprofile.hpp"
#include "genperf/spec_io.hpp"
#include "genperf/traceparse.hpp"

namespace genperf::cli {

namespace {

namespace fs = std::filesystem;

ImageSize parse_image(const std::string& text) {
    auto x = text.find_first_of("xX");
    try {
        std::size_t used = 0;
        if (x == std::string::npos) {
            Count side = std::stoull(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return {side, side};
        }
        Count h = std::stoull(text.substr(0, x), &used);
        if (used != x) throw std::invalid_argument(text);
        const std::string rest = text.substr(x + 1);
        Count w = std::stoull(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(text);
        return {h, w};
    } catch (const std::logic_error&) {
        throw ValidationError("invalid image size '" + text + "' (expected HxW)");
    }
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw Error("cannot write '" + path.string() + "'");
    }
    f << text;
    f.close();
    if (!f) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

// "<dir>/<stem>.<suffix>.csv" next to `out`.
fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p.replace_filename(out.stem().string() + "." + suffix + ".csv");
    return p;
}

std::string table_csv(const Table& t) {
    CsvWriter csv(t.header);
    for (const auto& row : t.rows) {
        csv.row(row);
    }
    return csv.str();
}

OperatorBreakdown load_breakdown(const std::string& trace_path, const CategoryRules& rules) {
    OperatorBreakdown b = link_kernels(parse_trace(trace_path), rules);
    if (b.kernel_count == 0) {
        throw ValidationError("no accelerator kernels found in '" + trace_path + "'");
    }
    return b;
}

struct Common {
    std::string spec;
    std::string hw = "default";
    std::string image;
    Count steps = 0;
    Count frames = 0;
    std::string mode = "baseline";
    std::string format = "table";
    std::string out;

    std::optional<ImageSize> image_size() const {
        return image.empty() ? std::nullopt : std::optional<ImageSize>(parse_image(image));
    }
    std::optional<Count> steps_opt() const { return steps == 0 ? std::nullopt : std::optional<Count>(steps); }
    std::optional<Count> frames_opt() const { return frames == 0 ? std::nullopt : std::optional<Count>(frames); }
};

void add_spec_flags(CLI::App* cmd, Common& c) {
    cmd->add_option("--spec", c.spec, "Spec file or preset:<name>")->required();
    cmd->add_option("--image-size", c.image, "Output image size HxW");
    cmd->add_option("--steps", c.steps, "Override denoising / parallel decoding steps")->check(CLI::PositiveNumber);
    cmd->add_option("--frames", c.frames, "Override video frame count")->check(CLI::PositiveNumber);
}

void add_mode_flag(CLI::App* cmd, Common& c) {
    cmd->add_option("--mode", c.mode, "Attention implementation")
        ->check(CLI::IsMember({"baseline", "flash"}));
}

void add_format_flag(CLI::App* cmd, Common& c) {
    cmd->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"table", "csv", "doc"}));
}

// Reports go to --out when given, otherwise to stdout.
void emit(const Report& r, const Common& c, std::ostream& out) {
    const std::string text = render(r, parse_report_format(c.format));
    if (c.out.empty()) {
        out << text;
    } else {
        write_file(c.out, text);
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"genperf: performance characterization of text-to-image and text-to-video models", "genperf"};
    app.set_version_flag("--version", std::string(toolkit_version()));
    app.require_subcommand(1);

    Common c;

    auto* presets_cmd = app.add_subcommand("presets", "List built-in presets or print one");
    std::string show;
    presets_cmd->add_option("--show", show, "Preset name to print");

    auto* seqlen_cmd = app.add_subcommand("seqlen", "Attention sequence-length trace and histogram");
    std::string hist_path;
    add_spec_flags(seqlen_cmd, c);
    add_format_flag(seqlen_cmd, c);
    seqlen_cmd->add_option("--out", c.out, "Trace CSV path")->required();
    seqlen_cmd->add_option("--hist", hist_path, "Histogram CSV path (default <out>.hist.csv)");

    auto* analyze_cmd = app.add_subcommand("analyze", "Cost breakdown, roofline point and speedup projections");
    add_spec_flags(analyze_cmd, c);
    add_mode_flag(analyze_cmd, c);
    add_format_flag(analyze_cmd, c);
    analyze_cmd->add_option("--hw", c.hw, "Hardware spec file (default: A100-like)");
    analyze_cmd->add_option("--out", c.out, "Report path");

    auto* sweep_cmd = app.add_subcommand("sweep", "Per-category costs over an image-size, frames or latent sweep");
    std::string axis, range_text;
    Count text_encode = 0;
    bool text_encode_set = false;
    add_mode_flag(sweep_cmd, c);
    add_format_flag(sweep_cmd, c);
    sweep_cmd->add_option("--spec", c.spec, "Spec file or preset:<name>")->required();
    sweep_cmd->add_option("--steps", c.steps, "Override denoising / parallel decoding steps")
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--axis", axis, "Sweep axis")
        ->required()
        ->check(CLI::IsMember({"image-size", "frames", "latent"}));
    sweep_cmd->add_option("--range", range_text, "Points: a,b,c or lo:hi[:factor]")->required();
    sweep_cmd->add_option("--text-encode", text_encode, "Override text_encode")
        ->each([&](const std::string&) { text_encode_set = true; });
    sweep_cmd->add_option("--out", c.out, "Points CSV path (summary goes to <out>.summary.csv)");

    auto* roofline_cmd = app.add_subcommand("roofline", "Roofline plot data for one or more models");
    std::vector<std::string> roofline_specs;
    add_format_flag(roofline_cmd, c);
    roofline_cmd->add_option("--spec", roofline_specs, "Spec file or preset:<name> (repeatable; default: all presets)");
    roofline_cmd->add_option("--hw", c.hw, "Hardware spec file (default: A100-like)");
    roofline_cmd->add_option("--out", c.out, "Plot-data CSV path");

    auto* trace_cmd = app.add_subcommand("trace", "Operator breakdown of a profiler trace");
    std::string trace_path, optimized_path, rules_path;
    add_format_flag(trace_cmd, c);
    trace_cmd->add_option("--trace", trace_path, "Chrome trace-event file")->required()->check(CLI::ExistingFile);
    trace_cmd->add_option("--optimized", optimized_path, "Trace of the optimized run for speedup figures")
        ->check(CLI::ExistingFile);
    trace_cmd->add_option("--rules", rules_path, "Category rules file")->check(CLI::ExistingFile);
    trace_cmd->add_option("--out", c.out, "Breakdown CSV path");

    auto* compare_cmd = app.add_subcommand("compare", "Measured trace breakdown against the cost model");
    add_spec_flags(compare_cmd, c);
    add_mode_flag(compare_cmd, c);
    add_format_flag(compare_cmd, c);
    compare_cmd->add_option("--trace", trace_path, "Chrome trace-event file")->required()->check(CLI::ExistingFile);
    compare_cmd->add_option("--rules", rules_path, "Category rules file")->check(CLI::ExistingFile);
    compare_cmd->add_option("--hw", c.hw, "Hardware spec file (default: A100-like)");
    compare_cmd->add_option("--out", c.out, "Report path");

    auto* audit_cmd = app.add_subcommand("audit", "Amdahl feasibility of end-to-end speedups");
    double fraction = 0.0;
    std::vector<double> speedups;
    add_format_flag(audit_cmd, c);
    audit_cmd->add_option("--fraction", fraction, "Attention fraction of execution time")
        ->required()
        ->check(CLI::Range(0.0, 1.0));
    audit_cmd->add_option("--speedup", speedups, "End-to-end speedup (repeatable; default: reported figures)");
    audit_cmd->add_option("--out", c.out, "Report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*presets_cmd) {
            if (show.empty()) {
                for (const auto& name : preset_names()) {
                    out << name << "\n";
                }
            } else {
                out << write_spec(preset(show));
            }
        } else if (*seqlen_cmd) {
            const ModelSpec spec =
                resolve_config(resolve_spec(c.spec), c.image_size(), c.steps_opt(), c.frames_opt());
            const SeqLenTrace trace = model_trace(spec);
            if (trace.calls.empty()) {
                throw ValidationError("model '" + spec.name + "' has no attention calls");
            }
            const fs::path trace_out = c.out;
            const fs::path hist_out = hist_path.empty() ? sibling(trace_out, "hist") : fs::path(hist_path);
            write_file(trace_out, trace_csv(trace));
            write_file(hist_out, histogram_csv(seq_len_histogram(trace)));
            out << render(seqlen_report(spec), parse_report_format(c.format));
        } else if (*analyze_cmd) {
            AnalyzeOptions opts;
            opts.image = c.image_size();
            opts.steps = c.steps_opt();
            opts.frames = c.frames_opt();
            opts.mode = parse_attention_mode(c.mode);
            emit(analyze(resolve_spec(c.spec), resolve_hardware(c.hw), opts), c, out);
        } else if (*sweep_cmd) {
            SweepOptions opts;
            opts.axis = parse_sweep_axis(axis);
            opts.points = parse_range(range_text);
            opts.mode = parse_attention_mode(c.mode);
            opts.steps = c.steps_opt();
            if (text_encode_set) {
                opts.text_encode = text_encode;
            }
            const Report r = sweep(resolve_spec(c.spec), opts);
            if (!c.out.empty()) {
                write_file(c.out, table_csv(*r.find("points")));
                Table summary = *r.find("summary");
                summary.rows.insert(summary.rows.begin(),
                                    {{"spec_version", std::to_string(kSpecVersion)},
                                     {"toolkit_version", std::string(toolkit_version())},
                                     {"model", r.model_name}});
                write_file(sibling(c.out, "summary"), table_csv(summary));
            }
            out << render(r, parse_report_format(c.format));
        } else if (*roofline_cmd) {
            std::vector<ModelSpec> specs;
            if (roofline_specs.empty()) {
                for (const auto& name : preset_names()) specs.push_back(preset(name));
            } else {
                for (const auto& ref : roofline_specs) specs.push_back(resolve_spec(ref));
            }
            const Report r = roofline_report(specs, resolve_hardware(c.hw));
            if (!c.out.empty()) {
                write_file(c.out, table_csv(*r.find("points")));
            }
            out << render(r, parse_report_format(c.format));
        } else if (*trace_cmd) {
            const CategoryRules rules = rules_path.empty() ? default_rules() : load_rules(rules_path);
            const OperatorBreakdown baseline = load_breakdown(trace_path, rules);
            std::optional<OperatorBreakdown> optimized;
            if (!optimized_path.empty()) {
                optimized = load_breakdown(optimized_path, rules);
            }
            if (!c.out.empty()) {
                write_file(c.out, breakdown_csv(baseline));
            }
            out << render(trace_report(baseline, optimized), parse_report_format(c.format));
        } else if (*compare_cmd) {
            const CategoryRules rules = rules_path.empty() ? default_rules() : load_rules(rules_path);
            const OperatorBreakdown measured = load_breakdown(trace_path, rules);
            const ModelSpec spec =
                resolve_config(resolve_spec(c.spec), c.image_size(), c.steps_opt(), c.frames_opt());
            emit(compare_report(measured, spec, resolve_hardware(c.hw), parse_attention_mode(c.mode)), c, out);
        } else if (*audit_cmd) {
            emit(audit_report(fraction, speedups), c, out);
        }
    } catch (const Error& e) {
        err << "genperf: error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "genperf: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("genperf");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace genperf::cli
