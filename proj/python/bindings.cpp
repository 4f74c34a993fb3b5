#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "genperf/archspec.hpp"
#include "genperf/costmodel.hpp"
#include "genperf/error.hpp"
#include "genperf/report.hpp"
#include "genperf/roofline.hpp"
#include "genperf/seqprofile.hpp"
#include "genperf/spec_io.hpp"
#include "genperf/traceparse.hpp"

namespace py = pybind11;
using namespace genperf;

namespace {

std::optional<ImageSize> to_image(const std::optional<std::pair<Count, Count>>& hw) {
    if (!hw) return std::nullopt;
    return ImageSize{hw->first, hw->second};
}

py::dict cost_dict(const CostBreakdown& cost) {
    py::dict out;
    for (OpCategory c : kCategories) {
        const OpCost& o = cost[c];
        py::dict d;
        d["flops"] = o.flops;
        d["bytes_moved"] = o.bytes_moved;
        d["footprint"] = o.footprint;
        d["param_bytes"] = o.param_bytes;
        out[py::str(to_string(c))] = d;
    }
    return out;
}

py::dict breakdown_dict(const OperatorBreakdown& b) {
    py::dict categories;
    for (OpCategory c : kCategories) {
        categories[py::str(to_string(c))] = py::make_tuple(b[c].time / 1000.0, b[c].fraction);
    }
    py::dict out;
    out["categories"] = categories;
    out["total_us"] = b.total_time / 1000.0;
    out["wall_span_us"] = b.wall_span / 1000.0;
    out["kernels"] = b.kernel_count;
    out["unattributed"] = b.unattributed;
    return out;
}

CategoryRules rules_from(const std::optional<std::string>& path) {
    return path ? load_rules(*path) : default_rules();
}

}  // namespace

PYBIND11_MODULE(_genperf, m) {
    m.doc() = "Analytical performance model for text-to-image and text-to-video inference";
    m.attr("__version__") = std::string(toolkit_version());

    py::register_exception<Error>(m, "GenperfError", PyExc_ValueError);

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_readonly("name", &ModelSpec::name)
        .def_readonly("total_params", &ModelSpec::total_params)
        .def_readonly("bytes_per_param", &ModelSpec::bytes_per_param)
        .def_property_readonly("assumed", [](const ModelSpec& s) { return std::vector<std::string>(s.assumed.begin(), s.assumed.end()); })
        .def_property_readonly("kind", [](const ModelSpec& s) {
            return s.is_diffusion() ? "diffusion" : s.is_video() ? "video" : "transformer";
        })
        .def("to_json", &write_spec)
        .def_static("from_json", &parse_spec)
        .def("__repr__", [](const ModelSpec& s) { return "<ModelSpec " + s.name + ">"; });

    py::class_<HardwareSpec>(m, "HardwareSpec")
        .def(py::init([](double peak, double bw, double cap, std::string name) {
                 HardwareSpec hw{std::move(name), peak, bw, cap, {}};
                 validate(hw);
                 return hw;
             }),
             py::arg("peak_flops"), py::arg("mem_bandwidth"), py::arg("mem_capacity") = 80e9,
             py::arg("name") = "custom")
        .def_readonly("name", &HardwareSpec::name)
        .def_readonly("peak_flops", &HardwareSpec::peak_flops)
        .def_readonly("mem_bandwidth", &HardwareSpec::mem_bandwidth)
        .def("ridge_point", &HardwareSpec::ridge_point);

    m.def("preset_names", &preset_names);
    m.def("load_spec", [](const std::string& ref) { return resolve_spec(ref); }, py::arg("ref"),
          "Spec file path or preset:<name>");
    m.def("default_hardware", &default_hardware);
    m.def("load_hardware", [](const std::string& ref) { return resolve_hardware(ref); });
    m.def("with_image_size", [](const ModelSpec& s, Count h, Count w) { return with_image_size(s, {h, w}); });
    m.def("with_steps", &with_steps);

    m.def(
        "seq_len_trace",
        [](const ModelSpec& s) {
            py::list rows;
            for (const auto& c : model_trace(s).calls) {
                py::dict d;
                d["kind"] = to_string(c.kind);
                d["q_len"] = c.q_len;
                d["kv_len"] = c.kv_len;
                d["batch"] = c.batch;
                d["stage"] = c.stage ? py::cast(*c.stage) : py::none();
                d["step"] = c.step;
                rows.append(d);
            }
            return rows;
        },
        py::arg("spec"));
    m.def("seq_len_histogram", [](const ModelSpec& s) { return seq_len_histogram(model_trace(s)); });

    m.def("sim_matrix_memory", &sim_matrix_memory, py::arg("latent_height"), py::arg("latent_width"),
          py::arg("text_encode"), py::arg("bytes_per_el") = 2);
    m.def(
        "cumulative_sim_memory",
        [](const ModelSpec& s, Count bpe, Count heads) {
            const DiffusionSpec* d = diffusion_part(s.variant);
            if (d == nullptr) throw ValidationError("spec has no diffusion part");
            return cumulative_sim_memory(*d, bpe, heads);
        },
        py::arg("spec"), py::arg("bytes_per_el") = 2, py::arg("heads") = 1);
    m.def(
        "model_cost",
        [](const ModelSpec& s, std::optional<std::pair<Count, Count>> image, const std::string& mode) {
            return cost_dict(model_cost(s, to_image(image), parse_attention_mode(mode)));
        },
        py::arg("spec"), py::arg("image") = py::none(), py::arg("mode") = "baseline");
    m.def(
        "arithmetic_intensity",
        [](const ModelSpec& s, std::optional<std::pair<Count, Count>> image) {
            return arithmetic_intensity(s, to_image(image));
        },
        py::arg("spec"), py::arg("image") = py::none());
    m.def(
        "classify_bound",
        [](double ai, std::optional<HardwareSpec> hw) {
            return to_string(classify_bound(ai, hw ? *hw : default_hardware()).bound);
        },
        py::arg("ai"), py::arg("hw") = py::none());
    m.def("amdahl", [](double p, double s) { return amdahl(p, s).end_to_end; }, py::arg("fraction"),
          py::arg("module_speedup"));
    m.def(
        "audit",
        [](double p, double e) {
            const AmdahlAudit a = audit_end_to_end(p, e);
            py::dict d;
            d["limit"] = a.limit;
            d["required_module_speedup"] = a.required_module_speedup;
            d["feasible"] = a.feasible;
            return d;
        },
        py::arg("fraction"), py::arg("end_to_end"));

    m.def(
        "analyze",
        [](const ModelSpec& s, std::optional<HardwareSpec> hw, std::optional<std::pair<Count, Count>> image,
           std::optional<Count> steps, const std::string& mode, const std::string& format) {
            AnalyzeOptions opts;
            opts.image = to_image(image);
            opts.steps = steps;
            opts.mode = parse_attention_mode(mode);
            return render(analyze(s, hw ? *hw : default_hardware(), opts), parse_report_format(format));
        },
        py::arg("spec"), py::arg("hw") = py::none(), py::arg("image") = py::none(), py::arg("steps") = py::none(),
        py::arg("mode") = "baseline", py::arg("format") = "doc");

    m.def(
        "trace_breakdown",
        [](const std::filesystem::path& path, std::optional<std::string> rules) {
            return breakdown_dict(link_kernels(parse_trace(path), rules_from(rules)));
        },
        py::arg("path"), py::arg("rules") = py::none());
    m.def(
        "attention_speedup",
        [](const std::filesystem::path& baseline, const std::filesystem::path& optimized,
           std::optional<std::string> rules) {
            const CategoryRules r = rules_from(rules);
            const TraceSpeedup s =
                attention_speedup_from_traces(link_kernels(parse_trace(baseline), r), link_kernels(parse_trace(optimized), r));
            return py::make_tuple(s.module_speedup, s.end_to_end);
        },
        py::arg("baseline"), py::arg("optimized"), py::arg("rules") = py::none());
}
