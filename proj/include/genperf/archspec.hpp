#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "genperf/checked.hpp"

namespace genperf {

/// Output image size in pixels.
struct ImageSize {
    Count height = 1;
    Count width = 1;

    bool operator==(const ImageSize&) const = default;
};

enum class DiffusionSpace { pixel, latent };

/// UNet diffusion network. Stage n = 0 is the full-resolution stage, n = unet_depth
/// the bottleneck; stage n runs at (latent_height / d^n) x (latent_width / d^n).
struct DiffusionSpec {
    Count latent_height = 64;
    Count latent_width = 64;
    Count downsample_factor = 2;
    unsigned unet_depth = 3;
    Count text_encode = 77;
    Count denoising_steps = 50;
    std::set<unsigned> self_attn_stages;
    std::set<unsigned> cross_attn_stages;
    Count blocks_per_stage = 1;
    Count head_dim = 64;
    Count num_heads = 8;
    DiffusionSpace space = DiffusionSpace::latent;
    Count latent_downsample = 1;
    // UNet evaluations per denoising step (2 for classifier-free guidance).
    Count guidance_multiplier = 1;

    // Convolution / linear modelling. Zero base_channels or res_blocks disables
    // the convolution category.
    Count base_channels = 0;
    std::vector<Count> channel_mult;
    Count res_blocks = 0;
    Count conv_kernel = 3;
    // 0 means "same width as the attention block".
    Count text_embed_dim = 0;
    Count ff_mult = 4;
    Count other_flops_per_step = 0;

    bool operator==(const DiffusionSpec&) const = default;

    /// Spatial side lengths of stage n.
    Count stage_height(unsigned n) const;
    Count stage_width(unsigned n) const;
    Count stage_tokens(unsigned n) const { return stage_height(n) * stage_width(n); }
    /// Channel width of stage n (base_channels * channel_mult[n]).
    Count stage_channels(unsigned n) const;
    Count attn_width() const { return head_dim * num_heads; }
    bool has_attention() const { return !self_attn_stages.empty() || !cross_attn_stages.empty(); }
};

enum class DecodeMode { autoregressive, parallel };

struct TransformerSpec {
    Count num_layers = 1;
    Count model_dim = 1;
    Count num_heads = 1;
    Count prompt_len = 1;
    Count gen_tokens = 1;
    DecodeMode decode_mode = DecodeMode::autoregressive;
    Count parallel_steps = 1;
    Count batch = 1;
    Count ff_mult = 4;

    bool operator==(const TransformerSpec&) const = default;

    Count head_dim() const { return model_dim / num_heads; }
};

struct VideoSpec {
    DiffusionSpec base;
    Count num_frames = 1;
    std::set<unsigned> temporal_attn_stages;

    bool operator==(const VideoSpec&) const = default;
};

using Variant = std::variant<DiffusionSpec, TransformerSpec, VideoSpec>;

struct ModelSpec {
    std::string name;
    Count total_params = 1;
    Count bytes_per_param = 2;
    Variant variant;
    /// Independently trained components run at inference time, in order. When
    /// non-empty, costs are summed over the pipeline; `variant` then names the
    /// headline network used for sequence-length profiling.
    std::vector<ModelSpec> pipeline;
    /// Dotted field paths whose values are assumptions rather than published numbers.
    std::set<std::string> assumed;
    std::vector<std::string> notes;

    bool operator==(const ModelSpec&) const = default;

    bool is_diffusion() const { return std::holds_alternative<DiffusionSpec>(variant); }
    bool is_transformer() const { return std::holds_alternative<TransformerSpec>(variant); }
    bool is_video() const { return std::holds_alternative<VideoSpec>(variant); }
    /// Components whose costs make up one inference.
    std::vector<const ModelSpec*> cost_components() const;
};

struct HardwareSpec {
    std::string name = "a100-like";
    double peak_flops = 312e12;
    double mem_bandwidth = 2.039e12;
    double mem_capacity = 80e9;
    std::set<std::string> assumed;

    bool operator==(const HardwareSpec&) const = default;

    double ridge_point() const { return peak_flops / mem_bandwidth; }
};

/// Default accelerator: A100-class rates. Every field is an assumption.
HardwareSpec default_hardware();

// Validation. Each throws ValidationError naming the violated invariant.
void validate(const ImageSize& image);
void validate(const DiffusionSpec& spec);
void validate(const TransformerSpec& spec);
void validate(const VideoSpec& spec);
void validate(const ModelSpec& spec);
void validate(const HardwareSpec& hw);

/// Output image size implied by a diffusion variant (latent size times latent_downsample),
/// or nullopt for transformers.
std::optional<ImageSize> nominal_image(const Variant& variant);

/// Output image size of the whole model: the largest diffusion output over the pipeline
/// (or the headline variant when the pipeline is empty).
std::optional<ImageSize> nominal_image(const ModelSpec& spec);

/// Rescales every diffusion component so that the model's final output becomes `image`.
/// Components keep their ratio to the final output; transformers are unchanged.
/// Throws ValidationError when the ratio does not yield integral, divisible latent sizes.
ModelSpec with_image_size(const ModelSpec& spec, const ImageSize& image);

/// Latent size for a single diffusion network producing `image`.
DiffusionSpec with_image_size(const DiffusionSpec& spec, const ImageSize& image);

/// Replaces denoising_steps (diffusion/video) or parallel_steps (parallel transformers)
/// throughout the model.
ModelSpec with_steps(const ModelSpec& spec, Count steps);

const DiffusionSpec* diffusion_part(const Variant& variant);

std::string to_string(DiffusionSpace space);
std::string to_string(DecodeMode mode);

}  // namespace genperf
