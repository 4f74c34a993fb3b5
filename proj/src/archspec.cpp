#include "genperf/archspec.hpp"

#include <algorithm>

#include "genperf/error.hpp"

namespace genperf {

namespace {

void require(bool ok, const std::string& invariant) {
    if (!ok) {
        throw ValidationError("invariant violated: " + invariant);
    }
}

void validate_stages(const std::set<unsigned>& stages, unsigned depth, const std::string& field) {
    for (unsigned s : stages) {
        require(s <= depth, field + " stage index <= unet_depth (got " + std::to_string(s) + ")");
    }
}

// h * num / den, exactly, or nullopt.
std::optional<Count> scale_exact(Count h, Count num, Count den) {
    Count prod = checked::mul(h, num, "rescaled size");
    if (prod % den != 0) {
        return std::nullopt;
    }
    return prod / den;
}

DiffusionSpec rescale(const DiffusionSpec& spec, const ImageSize& from, const ImageSize& to) {
    DiffusionSpec out = spec;
    auto h = scale_exact(spec.latent_height, to.height, from.height);
    auto w = scale_exact(spec.latent_width, to.width, from.width);
    if (!h || !w || *h == 0 || *w == 0) {
        throw ValidationError("image size " + std::to_string(to.height) + "x" + std::to_string(to.width) +
                              " does not map to an integral latent size");
    }
    out.latent_height = *h;
    out.latent_width = *w;
    validate(out);
    return out;
}

Variant rescale(const Variant& v, const ImageSize& from, const ImageSize& to) {
    if (const auto* d = std::get_if<DiffusionSpec>(&v)) {
        return rescale(*d, from, to);
    }
    if (const auto* vid = std::get_if<VideoSpec>(&v)) {
        VideoSpec out = *vid;
        out.base = rescale(vid->base, from, to);
        return out;
    }
    return v;
}

ModelSpec rescale(const ModelSpec& spec, const ImageSize& from, const ImageSize& to) {
    ModelSpec out = spec;
    out.variant = rescale(spec.variant, from, to);
    for (auto& component : out.pipeline) {
        component = rescale(component, from, to);
    }
    return out;
}

}  // namespace

Count DiffusionSpec::stage_height(unsigned n) const {
    return latent_height / checked::pow(downsample_factor, n);
}

Count DiffusionSpec::stage_width(unsigned n) const {
    return latent_width / checked::pow(downsample_factor, n);
}

Count DiffusionSpec::stage_channels(unsigned n) const {
    if (channel_mult.empty()) {
        return base_channels;
    }
    return base_channels * channel_mult[std::min<std::size_t>(n, channel_mult.size() - 1)];
}

std::vector<const ModelSpec*> ModelSpec::cost_components() const {
    std::vector<const ModelSpec*> out;
    if (pipeline.empty()) {
        out.push_back(this);
        return out;
    }
    for (const auto& component : pipeline) {
        for (const ModelSpec* leaf : component.cost_components()) {
            out.push_back(leaf);
        }
    }
    return out;
}

HardwareSpec default_hardware() {
    HardwareSpec hw;
    hw.assumed = {"peak_flops", "mem_bandwidth", "mem_capacity"};
    return hw;
}

void validate(const ImageSize& image) {
    require(image.height >= 1, "height >= 1");
    require(image.width >= 1, "width >= 1");
}

void validate(const DiffusionSpec& spec) {
    require(spec.downsample_factor >= 1, "downsample_factor >= 1");
    require(spec.latent_height >= 1, "latent_height >= 1");
    require(spec.latent_width >= 1, "latent_width >= 1");
    require(spec.denoising_steps >= 1, "denoising_steps >= 1");
    require(spec.blocks_per_stage >= 1, "blocks_per_stage >= 1");
    require(spec.head_dim >= 1, "head_dim >= 1");
    require(spec.num_heads >= 1, "num_heads >= 1");
    require(spec.latent_downsample >= 1, "latent_downsample >= 1");
    require(spec.guidance_multiplier >= 1, "guidance_multiplier >= 1");
    require(spec.conv_kernel >= 1, "conv_kernel >= 1");
    require(spec.unet_depth <= 62, "unet_depth <= 62");
    validate_stages(spec.self_attn_stages, spec.unet_depth, "self_attn_stages");
    validate_stages(spec.cross_attn_stages, spec.unet_depth, "cross_attn_stages");
    Count div = 0;
    try {
        div = checked::pow(spec.downsample_factor, spec.unet_depth);
    } catch (const OverflowError&) {
        throw ValidationError("invariant violated: downsample_factor^unet_depth fits in 64 bits");
    }
    require(spec.latent_height % div == 0, "latent_height divisible by downsample_factor^unet_depth");
    require(spec.latent_width % div == 0, "latent_width divisible by downsample_factor^unet_depth");
    require(spec.channel_mult.empty() || spec.channel_mult.size() == spec.unet_depth + 1,
            "channel_mult has unet_depth + 1 entries");
    if (spec.space == DiffusionSpace::pixel) {
        require(spec.latent_downsample == 1, "latent_downsample == 1 for pixel-space models");
    }
}

void validate(const TransformerSpec& spec) {
    require(spec.num_layers >= 1, "num_layers >= 1");
    require(spec.model_dim >= 1, "model_dim >= 1");
    require(spec.num_heads >= 1, "num_heads >= 1");
    require(spec.model_dim % spec.num_heads == 0, "model_dim divisible by num_heads");
    require(spec.prompt_len >= 1, "prompt_len >= 1");
    require(spec.gen_tokens >= 1, "gen_tokens >= 1");
    require(spec.parallel_steps >= 1, "parallel_steps >= 1");
    require(spec.batch >= 1, "batch >= 1");
}

void validate(const VideoSpec& spec) {
    validate(spec.base);
    require(spec.num_frames >= 1, "num_frames >= 1");
    validate_stages(spec.temporal_attn_stages, spec.base.unet_depth, "temporal_attn_stages");
}

void validate(const ModelSpec& spec) {
    require(!spec.name.empty(), "name is non-empty");
    require(spec.total_params >= 1, "total_params >= 1");
    require(spec.bytes_per_param == 1 || spec.bytes_per_param == 2 || spec.bytes_per_param == 4,
            "bytes_per_param in {1, 2, 4}");
    std::visit([](const auto& v) { validate(v); }, spec.variant);
    for (const auto& component : spec.pipeline) {
        validate(component);
    }
}

void validate(const HardwareSpec& hw) {
    require(hw.peak_flops > 0, "peak_flops > 0");
    require(hw.mem_bandwidth > 0, "mem_bandwidth > 0");
    require(hw.mem_capacity > 0, "mem_capacity > 0");
}

const DiffusionSpec* diffusion_part(const Variant& variant) {
    if (const auto* d = std::get_if<DiffusionSpec>(&variant)) {
        return d;
    }
    if (const auto* v = std::get_if<VideoSpec>(&variant)) {
        return &v->base;
    }
    return nullptr;
}

std::optional<ImageSize> nominal_image(const Variant& variant) {
    const DiffusionSpec* d = diffusion_part(variant);
    if (d == nullptr) {
        return std::nullopt;
    }
    return ImageSize{d->latent_height * d->latent_downsample, d->latent_width * d->latent_downsample};
}

std::optional<ImageSize> nominal_image(const ModelSpec& spec) {
    std::optional<ImageSize> best;
    auto consider = [&best](std::optional<ImageSize> candidate) {
        if (candidate && (!best || candidate->height * candidate->width > best->height * best->width)) {
            best = candidate;
        }
    };
    if (spec.pipeline.empty()) {
        return nominal_image(spec.variant);
    }
    for (const auto& component : spec.pipeline) {
        consider(nominal_image(component));
    }
    if (!best) {
        best = nominal_image(spec.variant);
    }
    return best;
}

ModelSpec with_image_size(const ModelSpec& spec, const ImageSize& image) {
    validate(image);
    auto from = nominal_image(spec);
    if (!from || *from == image) {
        return spec;
    }
    return rescale(spec, *from, image);
}

DiffusionSpec with_image_size(const DiffusionSpec& spec, const ImageSize& image) {
    validate(image);
    auto from = nominal_image(Variant{spec});
    return rescale(spec, *from, image);
}

ModelSpec with_steps(const ModelSpec& spec, Count steps) {
    ModelSpec out = spec;
    auto apply = [steps](Variant& v) {
        if (auto* d = std::get_if<DiffusionSpec>(&v)) {
            d->denoising_steps = steps;
        } else if (auto* vid = std::get_if<VideoSpec>(&v)) {
            vid->base.denoising_steps = steps;
        } else if (auto* t = std::get_if<TransformerSpec>(&v)) {
            if (t->decode_mode == DecodeMode::parallel) {
                t->parallel_steps = steps;
            }
        }
    };
    apply(out.variant);
    for (auto& component : out.pipeline) {
        component = with_steps(component, steps);
    }
    return out;
}

std::string to_string(DiffusionSpace space) {
    return space == DiffusionSpace::pixel ? "pixel" : "latent";
}

std::string to_string(DecodeMode mode) {
    return mode == DecodeMode::autoregressive ? "autoregressive" : "parallel";
}

}  // namespace genperf
