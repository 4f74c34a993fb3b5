#include "genperf/spec_io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "embedded.hpp"
#include "genperf/error.hpp"

namespace genperf {

using nlohmann::json;

namespace {

// Tracks which keys of an object were consumed so leftovers can be reported.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw ParseError(where() + " must be an object");
        }
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json& raw(const std::string& key) {
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            throw ParseError(where() + " is missing required key '" + key + "'");
        }
        seen_.insert(key);
        return *it;
    }

    Count count(const std::string& key) { return to_count(raw(key), key); }

    Count count_or(const std::string& key, Count fallback) {
        return has(key) ? count(key) : fallback;
    }

    double number(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) {
            throw ParseError(field(key) + " must be a number");
        }
        return v.get<double>();
    }

    std::string string(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) {
            throw ParseError(field(key) + " must be a string");
        }
        return v.get<std::string>();
    }

    std::set<unsigned> stages(const std::string& key) {
        std::set<unsigned> out;
        if (!has(key)) {
            return out;
        }
        const json& v = raw(key);
        if (!v.is_array()) {
            throw ParseError(field(key) + " must be an array");
        }
        for (const auto& e : v) {
            out.insert(static_cast<unsigned>(to_count(e, key)));
        }
        return out;
    }

    std::vector<Count> counts(const std::string& key) {
        std::vector<Count> out;
        if (!has(key)) {
            return out;
        }
        const json& v = raw(key);
        if (!v.is_array()) {
            throw ParseError(field(key) + " must be an array");
        }
        for (const auto& e : v) {
            out.push_back(to_count(e, key));
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) {
        std::vector<std::string> out;
        if (!has(key)) {
            return out;
        }
        const json& v = raw(key);
        if (!v.is_array()) {
            throw ParseError(field(key) + " must be an array");
        }
        for (const auto& e : v) {
            if (!e.is_string()) {
                throw ParseError(field(key) + " entries must be strings");
            }
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) {
                throw ParseError(where() + " has unknown key '" + key + "'");
            }
        }
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "document" : "'" + path_ + "'"; }

    Count to_count(const json& v, const std::string& key) const {
        if (v.is_number_unsigned()) {
            return v.get<Count>();
        }
        if (v.is_number_integer()) {
            auto i = v.get<std::int64_t>();
            if (i < 0) {
                throw ValidationError("invariant violated: " + field(key) + " >= 0");
            }
            return static_cast<Count>(i);
        }
        if (v.is_number_float()) {
            double d = v.get<double>();
            if (d < 0) {
                throw ValidationError("invariant violated: " + field(key) + " >= 0");
            }
            if (d != std::floor(d) || d >= 1.8e19) {
                throw ParseError(field(key) + " must be an integer");
            }
            return static_cast<Count>(d);
        }
        throw ParseError(field(key) + " must be a non-negative integer");
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

DiffusionSpace parse_space(const std::string& s, const std::string& field) {
    if (s == "pixel") return DiffusionSpace::pixel;
    if (s == "latent") return DiffusionSpace::latent;
    throw ParseError(field + " must be 'pixel' or 'latent'");
}

DecodeMode parse_mode(const std::string& s, const std::string& field) {
    if (s == "autoregressive") return DecodeMode::autoregressive;
    if (s == "parallel") return DecodeMode::parallel;
    throw ParseError(field + " must be 'autoregressive' or 'parallel'");
}

// Reads the diffusion keys from `r`; used both for a diffusion variant and a video base.
DiffusionSpec read_diffusion(ObjectReader& r) {
    DiffusionSpec d;
    d.latent_height = r.count("latent_height");
    d.latent_width = r.count("latent_width");
    d.downsample_factor = r.count("downsample_factor");
    d.unet_depth = static_cast<unsigned>(r.count("unet_depth"));
    d.text_encode = r.count("text_encode");
    d.denoising_steps = r.count("denoising_steps");
    d.self_attn_stages = r.stages("self_attn_stages");
    d.cross_attn_stages = r.stages("cross_attn_stages");
    d.blocks_per_stage = r.count_or("blocks_per_stage", 1);
    d.head_dim = r.count("head_dim");
    d.num_heads = r.count("num_heads");
    d.space = parse_space(r.string("space"), r.field("space"));
    d.latent_downsample = r.count_or("latent_downsample", 1);
    d.guidance_multiplier = r.count_or("guidance_multiplier", 1);
    d.base_channels = r.count_or("base_channels", 0);
    d.channel_mult = r.counts("channel_mult");
    d.res_blocks = r.count_or("res_blocks", 0);
    d.conv_kernel = r.count_or("conv_kernel", 3);
    d.text_embed_dim = r.count_or("text_embed_dim", 0);
    d.ff_mult = r.count_or("ff_mult", 4);
    d.other_flops_per_step = r.count_or("other_flops_per_step", 0);
    return d;
}

json stages_json(const std::set<unsigned>& s) {
    return json(std::vector<unsigned>(s.begin(), s.end()));
}

void write_diffusion(json& j, const DiffusionSpec& d) {
    j["latent_height"] = d.latent_height;
    j["latent_width"] = d.latent_width;
    j["downsample_factor"] = d.downsample_factor;
    j["unet_depth"] = d.unet_depth;
    j["text_encode"] = d.text_encode;
    j["denoising_steps"] = d.denoising_steps;
    j["self_attn_stages"] = stages_json(d.self_attn_stages);
    j["cross_attn_stages"] = stages_json(d.cross_attn_stages);
    j["blocks_per_stage"] = d.blocks_per_stage;
    j["head_dim"] = d.head_dim;
    j["num_heads"] = d.num_heads;
    j["space"] = to_string(d.space);
    j["latent_downsample"] = d.latent_downsample;
    j["guidance_multiplier"] = d.guidance_multiplier;
    j["base_channels"] = d.base_channels;
    j["channel_mult"] = d.channel_mult;
    j["res_blocks"] = d.res_blocks;
    j["conv_kernel"] = d.conv_kernel;
    j["text_embed_dim"] = d.text_embed_dim;
    j["ff_mult"] = d.ff_mult;
    j["other_flops_per_step"] = d.other_flops_per_step;
}

Variant read_variant(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    std::string type = r.string("type");
    Variant out;
    if (type == "diffusion") {
        out = read_diffusion(r);
    } else if (type == "video") {
        VideoSpec v;
        ObjectReader base(r.raw("base"), r.field("base"));
        v.base = read_diffusion(base);
        base.finish();
        v.num_frames = r.count("num_frames");
        v.temporal_attn_stages = r.stages("temporal_attn_stages");
        out = v;
    } else if (type == "transformer") {
        TransformerSpec t;
        t.num_layers = r.count("num_layers");
        t.model_dim = r.count("model_dim");
        t.num_heads = r.count("num_heads");
        t.prompt_len = r.count("prompt_len");
        t.gen_tokens = r.count("gen_tokens");
        t.decode_mode = parse_mode(r.string("decode_mode"), r.field("decode_mode"));
        t.parallel_steps = r.count_or("parallel_steps", 1);
        t.batch = r.count_or("batch", 1);
        t.ff_mult = r.count_or("ff_mult", 4);
        out = t;
    } else {
        throw ParseError(r.field("type") + " must be one of diffusion, transformer, video");
    }
    r.finish();
    return out;
}

json variant_json(const Variant& v) {
    json j = json::object();
    if (const auto* d = std::get_if<DiffusionSpec>(&v)) {
        j["type"] = "diffusion";
        write_diffusion(j, *d);
    } else if (const auto* vid = std::get_if<VideoSpec>(&v)) {
        j["type"] = "video";
        json base = json::object();
        write_diffusion(base, vid->base);
        j["base"] = base;
        j["num_frames"] = vid->num_frames;
        j["temporal_attn_stages"] = stages_json(vid->temporal_attn_stages);
    } else {
        const auto& t = std::get<TransformerSpec>(v);
        j["type"] = "transformer";
        j["num_layers"] = t.num_layers;
        j["model_dim"] = t.model_dim;
        j["num_heads"] = t.num_heads;
        j["prompt_len"] = t.prompt_len;
        j["gen_tokens"] = t.gen_tokens;
        j["decode_mode"] = to_string(t.decode_mode);
        j["parallel_steps"] = t.parallel_steps;
        j["batch"] = t.batch;
        j["ff_mult"] = t.ff_mult;
    }
    return j;
}

ModelSpec read_model(const json& j, const std::string& path, bool top_level) {
    ObjectReader r(j, path);
    if (top_level) {
        const json& version = r.raw("spec_version");
        if (!version.is_number_integer() || version.get<int>() != kSpecVersion) {
            throw ParseError("spec_version must be " + std::to_string(kSpecVersion));
        }
    }
    ModelSpec m;
    m.name = r.string("name");
    m.total_params = r.count("total_params");
    m.bytes_per_param = r.count_or("bytes_per_param", 2);
    m.variant = read_variant(r.raw("variant"), r.field("variant"));
    if (r.has("pipeline")) {
        const json& p = r.raw("pipeline");
        if (!p.is_array()) {
            throw ParseError(r.field("pipeline") + " must be an array");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            m.pipeline.push_back(read_model(p[i], r.field("pipeline") + "[" + std::to_string(i) + "]", false));
        }
    }
    for (auto& a : r.strings("assumed")) {
        m.assumed.insert(std::move(a));
    }
    m.notes = r.strings("notes");
    r.finish();
    return m;
}

json model_json(const ModelSpec& m, bool top_level) {
    json j = json::object();
    if (top_level) {
        j["spec_version"] = kSpecVersion;
    }
    j["name"] = m.name;
    j["total_params"] = m.total_params;
    j["bytes_per_param"] = m.bytes_per_param;
    j["variant"] = variant_json(m.variant);
    json pipeline = json::array();
    for (const auto& c : m.pipeline) {
        pipeline.push_back(model_json(c, false));
    }
    j["pipeline"] = pipeline;
    j["assumed"] = std::vector<std::string>(m.assumed.begin(), m.assumed.end());
    j["notes"] = m.notes;
    return j;
}

json parse_document(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError("malformed document at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ModelSpec parse_spec(std::string_view text) {
    ModelSpec m = read_model(parse_document(text), "", true);
    validate(m);
    return m;
}

ModelSpec load_spec(const std::filesystem::path& path) {
    return parse_spec(read_file(path));
}

std::string write_spec(const ModelSpec& spec) {
    return model_json(spec, true).dump(2) + "\n";
}

HardwareSpec parse_hardware(std::string_view text) {
    json j = parse_document(text);
    ObjectReader r(j, "");
    const json& version = r.raw("spec_version");
    if (!version.is_number_integer() || version.get<int>() != kSpecVersion) {
        throw ParseError("spec_version must be " + std::to_string(kSpecVersion));
    }
    HardwareSpec hw;
    hw.name = r.string("name");
    hw.peak_flops = r.number("peak_flops");
    hw.mem_bandwidth = r.number("mem_bandwidth");
    hw.mem_capacity = r.number("mem_capacity");
    for (auto& a : r.strings("assumed")) {
        hw.assumed.insert(std::move(a));
    }
    r.finish();
    validate(hw);
    return hw;
}

HardwareSpec load_hardware(const std::filesystem::path& path) {
    return parse_hardware(read_file(path));
}

std::string write_hardware(const HardwareSpec& hw) {
    json j = json::object();
    j["spec_version"] = kSpecVersion;
    j["name"] = hw.name;
    j["peak_flops"] = hw.peak_flops;
    j["mem_bandwidth"] = hw.mem_bandwidth;
    j["mem_capacity"] = hw.mem_capacity;
    j["assumed"] = std::vector<std::string>(hw.assumed.begin(), hw.assumed.end());
    return j.dump(2) + "\n";
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& f : detail::embedded_presets()) {
        out.emplace_back(f.name);
    }
    return out;
}

std::string preset_source(std::string_view name) {
    if (const char* dir = std::getenv("GENPERF_PRESET_DIR"); dir != nullptr && *dir != '\0') {
        std::filesystem::path candidate = std::filesystem::path(dir) / (std::string(name) + ".json");
        if (std::filesystem::exists(candidate)) {
            return read_file(candidate);
        }
    }
    for (const auto& f : detail::embedded_presets()) {
        if (f.name == name) {
            return std::string(f.text);
        }
    }
    throw ValidationError("unknown preset '" + std::string(name) + "'");
}

ModelSpec preset(std::string_view name) {
    return parse_spec(preset_source(name));
}

ModelSpec resolve_spec(std::string_view ref) {
    constexpr std::string_view prefix = "preset:";
    if (ref.starts_with(prefix)) {
        return preset(ref.substr(prefix.size()));
    }
    return load_spec(std::filesystem::path(ref));
}

HardwareSpec resolve_hardware(std::string_view ref) {
    if (ref.empty() || ref == "default" || ref == "preset:a100" || ref == "preset:a100-like") {
        return default_hardware();
    }
    return load_hardware(std::filesystem::path(ref));
}

}  // namespace genperf
