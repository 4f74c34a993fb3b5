#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genperf/archspec.hpp"
#include "genperf/seqprofile.hpp"

namespace genperf {

/// Cost of one operator or an aggregate of operators.
struct OpCost {
    Count flops = 0;
    // Main-memory reads + writes.
    Count bytes_moved = 0;
    // Peak intermediate allocation.
    Count footprint = 0;
    Count param_bytes = 0;

    bool operator==(const OpCost&) const = default;

    /// Adds traffic, work and parameters; footprint keeps the peak.
    void accumulate(const OpCost& other);
    /// Multiplies the repeated quantities (flops, bytes_moved) by `times`.
    OpCost repeated(Count times) const;
};

enum class OpCategory { attention, convolution, linear, groupnorm, other };
inline constexpr std::array<OpCategory, 5> kCategories = {OpCategory::attention, OpCategory::convolution,
                                                          OpCategory::linear, OpCategory::groupnorm,
                                                          OpCategory::other};

std::string to_string(OpCategory category);
std::optional<OpCategory> parse_category(std::string_view name);

struct CostBreakdown {
    std::array<OpCost, kCategories.size()> categories{};

    OpCost& operator[](OpCategory c) { return categories[static_cast<std::size_t>(c)]; }
    const OpCost& operator[](OpCategory c) const { return categories[static_cast<std::size_t>(c)]; }

    /// Component-wise sum over categories (footprints are summed too).
    OpCost totals() const;
    void accumulate(const CostBreakdown& other);

    bool operator==(const CostBreakdown&) const = default;
};

enum class AttentionMode { baseline, flash };
std::string to_string(AttentionMode mode);
AttentionMode parse_attention_mode(std::string_view name);

/// Main-memory traffic assumptions for attention.
struct TrafficModel {
    Count bytes_per_el = 2;
    // Round trips of the similarity matrix through main memory without tiling:
    // write scores, read them for the softmax, read probabilities for the PV matmul.
    Count sim_traversals = 3;
};

/// Similarity-matrix bytes of one self+cross attention pair at latent H_L x W_L:
/// bytes_per_el * H_L*W_L * (H_L*W_L + text_encode).
Count sim_matrix_memory(Count latent_height, Count latent_width, Count text_encode, Count bytes_per_el);

/// Similarity-matrix bytes summed over every attention call of one UNet traversal:
/// down and up visits of stages 0..depth-1 plus one bottleneck visit. Honors the stage
/// sets and blocks_per_stage; batch is omitted. `heads` multiplies the per-head matrices.
Count cumulative_sim_memory(const DiffusionSpec& spec, Count bytes_per_el = 2, Count heads = 1);

/// FLOPs of the QK^T and PV matmuls: 4 * batch * heads * q_len * kv_len * head_dim.
Count attn_flops(const AttentionCall& call);

/// Main-memory bytes of one attention call. Baseline: Q, K, V reads, O write and
/// sim_traversals passes over the q_len x kv_len matrix. Flash: Q, K, V, O only.
Count attn_bytes(const AttentionCall& call, AttentionMode mode, const TrafficModel& traffic = {});

/// Peak intermediate bytes: Q, K, V, O, plus the similarity matrix in baseline mode.
Count attn_footprint(const AttentionCall& call, AttentionMode mode, const TrafficModel& traffic = {});

OpCost attn_cost(const AttentionCall& call, AttentionMode mode, const TrafficModel& traffic = {});

/// Stride-1, same-padding convolution: 2 * in_h * in_w * k^2 * c_in * c_out.
Count conv_flops(Count in_h, Count in_w, Count kernel, Count c_in, Count c_out);

/// Dense projection of `tokens` rows from `in` to `out` features.
OpCost linear_cost(Count tokens, Count in, Count out, Count bytes_per_el);

/// Per-category cost of one full inference (all denoising steps / decode steps), summed
/// over pipeline components. `image` rescales diffusion components (see with_image_size).
CostBreakdown model_cost(const ModelSpec& spec, std::optional<ImageSize> image, AttentionMode mode);

/// Per-category cost of a single network.
CostBreakdown variant_cost(const Variant& variant, Count bytes_per_el, AttentionMode mode);

struct FrameSweepRow {
    Count frames = 0;
    Count spatial_flops = 0;
    Count temporal_flops = 0;
};

/// Spatial vs temporal attention FLOPs of a video model over a frame-count sweep.
std::vector<FrameSweepRow> temporal_spatial_sweep(const VideoSpec& spec, std::span<const Count> frames);

/// Frame count where temporal attention FLOPs equal spatial attention FLOPs. Spatial FLOPs
/// are linear and temporal FLOPs quadratic in F, so the crossover is spatial(1)/temporal(1).
double crossover_frames(const VideoSpec& spec);

/// Least-squares slope of log(cumulative_sim_memory) against log(L) with square latents
/// L x L. Throws DomainError with fewer than two distinct sizes.
double memory_scaling_exponent(const DiffusionSpec& spec, std::span<const Count> sizes);

}  // namespace genperf
