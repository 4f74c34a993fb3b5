#include "genperf/costmodel.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "genperf/error.hpp"
#include "genperf/fit.hpp"

namespace genperf {

namespace {

using checked::add;
using checked::mul;

void require_element_size(Count bytes_per_el) {
    if (bytes_per_el != 1 && bytes_per_el != 2 && bytes_per_el != 4) {
        throw DomainError("bytes_per_el must be 1, 2 or 4");
    }
}

// bytes_per_el * q * kv for each block of the stage's self and cross calls.
Count stage_sim_elements(const DiffusionSpec& spec, unsigned n) {
    const Count tokens = spec.stage_tokens(n);
    Count per_block = 0;
    if (spec.self_attn_stages.contains(n)) {
        per_block = add(per_block, mul(tokens, tokens, "similarity matrix"));
    }
    if (spec.cross_attn_stages.contains(n)) {
        per_block = add(per_block, mul(tokens, spec.text_encode, "similarity matrix"));
    }
    return mul(per_block, spec.blocks_per_stage);
}

// Costs of one UNet evaluation that are not attention matmuls.
void add_unet_layers(const DiffusionSpec& spec, Count batch, Count frames, const std::set<unsigned>& temporal,
                     Count bpe, CostBreakdown& out) {
    const bool conv_enabled = spec.base_channels > 0 && spec.res_blocks > 0;
    const Count width = spec.attn_width();
    const Count text_dim = spec.text_embed_dim == 0 ? width : spec.text_embed_dim;
    for (unsigned n : unet_traversal(spec.unet_depth)) {
        const Count h = spec.stage_height(n);
        const Count w = spec.stage_width(n);
        const Count tokens = mul(batch, h, w);
        if (conv_enabled) {
            const Count c = spec.stage_channels(n);
            const Count k = spec.conv_kernel;
            const Count weights = mul(k, k, c, c);
            for (Count r = 0; r < 2 * spec.res_blocks; ++r) {
                OpCost conv;
                conv.flops = mul(batch, conv_flops(h, w, k, c, c));
                conv.param_bytes = mul(weights, bpe);
                conv.bytes_moved = add(conv.param_bytes, mul(tokens, 2 * c, bpe));
                conv.footprint = mul(tokens, c, bpe);
                out[OpCategory::convolution].accumulate(conv);

                // One normalization ahead of each convolution: read + write the activation.
                OpCost norm;
                norm.bytes_moved = mul(tokens, c, 2 * bpe);
                norm.footprint = mul(tokens, c, bpe);
                out[OpCategory::groupnorm].accumulate(norm);
            }
        }
        const bool self = spec.self_attn_stages.contains(n);
        const bool cross = spec.cross_attn_stages.contains(n) && spec.text_encode > 0;
        const bool temp = temporal.contains(n);
        for (Count b = 0; b < spec.blocks_per_stage; ++b) {
            auto& linear = out[OpCategory::linear];
            if (self) {
                for (int p = 0; p < 4; ++p) {
                    linear.accumulate(linear_cost(tokens, width, width, bpe));
                }
            }
            if (temp) {
                for (int p = 0; p < 4; ++p) {
                    linear.accumulate(linear_cost(tokens, width, width, bpe));
                }
            }
            if (cross) {
                const Count text_tokens = mul(batch / frames, spec.text_encode, "text tokens");
                linear.accumulate(linear_cost(tokens, width, width, bpe));
                linear.accumulate(linear_cost(text_tokens, text_dim, width, bpe));
                linear.accumulate(linear_cost(text_tokens, text_dim, width, bpe));
                linear.accumulate(linear_cost(tokens, width, width, bpe));
            }
            if ((self || cross) && spec.ff_mult > 0) {
                const Count hidden = mul(spec.ff_mult, width);
                linear.accumulate(linear_cost(tokens, width, hidden, bpe));
                linear.accumulate(linear_cost(tokens, hidden, width, bpe));
            }
        }
    }
    if (spec.other_flops_per_step > 0) {
        OpCost other;
        other.flops = spec.other_flops_per_step;
        out[OpCategory::other].accumulate(other);
    }
}

void add_attention(const SeqLenTrace& trace, Count layers, AttentionMode mode, const TrafficModel& traffic,
                   CostBreakdown& out) {
    for (const auto& call : trace.calls) {
        OpCost c = attn_cost(call, mode, traffic);
        out[OpCategory::attention].accumulate(c.repeated(layers));
    }
}

CostBreakdown diffusion_cost(const DiffusionSpec& spec, Count frames, const std::set<unsigned>& temporal,
                             const SeqLenTrace& trace, Count bpe, AttentionMode mode) {
    const TrafficModel traffic{bpe, 3};
    CostBreakdown per_step;
    add_unet_layers(spec, mul(spec.guidance_multiplier, frames), frames, temporal, bpe, per_step);
    CostBreakdown out;
    for (OpCategory c : kCategories) {
        out[c] = per_step[c].repeated(spec.denoising_steps);
    }
    add_attention(trace, 1, mode, traffic, out);
    return out;
}

CostBreakdown transformer_cost(const TransformerSpec& spec, Count bpe, AttentionMode mode) {
    const TrafficModel traffic{bpe, 3};
    const SeqLenTrace trace = transformer_trace(spec);
    CostBreakdown out;
    add_attention(trace, spec.num_layers, mode, traffic, out);

    // Each forward pass streams every layer's weights once.
    const Count d = spec.model_dim;
    const Count hidden = mul(spec.ff_mult, d);
    for (const auto& call : trace.calls) {
        const Count tokens = mul(call.q_len, call.batch);
        OpCost layer;
        for (int p = 0; p < 4; ++p) {
            layer.accumulate(linear_cost(tokens, d, d, bpe));
        }
        layer.accumulate(linear_cost(tokens, d, hidden, bpe));
        layer.accumulate(linear_cost(tokens, hidden, d, bpe));
        OpCost pass = layer.repeated(spec.num_layers);
        pass.param_bytes = 0;
        out[OpCategory::linear].accumulate(pass);
    }
    out[OpCategory::linear].param_bytes = mul(spec.num_layers, mul(4 * d + 2 * hidden, d), bpe);
    return out;
}

}  // namespace

void OpCost::accumulate(const OpCost& other) {
    flops = add(flops, other.flops, "flops");
    bytes_moved = add(bytes_moved, other.bytes_moved, "bytes_moved");
    param_bytes = add(param_bytes, other.param_bytes, "param_bytes");
    footprint = std::max(footprint, other.footprint);
}

OpCost OpCost::repeated(Count times) const {
    OpCost out = *this;
    out.flops = mul(flops, times, "flops");
    out.bytes_moved = mul(bytes_moved, times, "bytes_moved");
    return out;
}

OpCost CostBreakdown::totals() const {
    OpCost t;
    for (const auto& c : categories) {
        t.flops = add(t.flops, c.flops, "flops");
        t.bytes_moved = add(t.bytes_moved, c.bytes_moved, "bytes_moved");
        t.footprint = add(t.footprint, c.footprint, "footprint");
        t.param_bytes = add(t.param_bytes, c.param_bytes, "param_bytes");
    }
    return t;
}

void CostBreakdown::accumulate(const CostBreakdown& other) {
    for (std::size_t i = 0; i < categories.size(); ++i) {
        categories[i].accumulate(other.categories[i]);
    }
}

std::string to_string(OpCategory category) {
    switch (category) {
        case OpCategory::attention: return "attention";
        case OpCategory::convolution: return "convolution";
        case OpCategory::linear: return "linear";
        case OpCategory::groupnorm: return "groupnorm";
        case OpCategory::other: return "other";
    }
    return "other";
}

std::optional<OpCategory> parse_category(std::string_view name) {
    for (OpCategory c : kCategories) {
        if (to_string(c) == name) {
            return c;
        }
    }
    return std::nullopt;
}

std::string to_string(AttentionMode mode) {
    return mode == AttentionMode::baseline ? "baseline" : "flash";
}

AttentionMode parse_attention_mode(std::string_view name) {
    if (name == "baseline") return AttentionMode::baseline;
    if (name == "flash") return AttentionMode::flash;
    throw ParseError("attention mode must be 'baseline' or 'flash'");
}

Count sim_matrix_memory(Count latent_height, Count latent_width, Count text_encode, Count bytes_per_el) {
    require_element_size(bytes_per_el);
    const Count tokens = mul(latent_height, latent_width, "latent tokens");
    return mul(bytes_per_el, tokens, add(tokens, text_encode));
}

Count cumulative_sim_memory(const DiffusionSpec& spec, Count bytes_per_el, Count heads) {
    require_element_size(bytes_per_el);
    validate(spec);
    Count mirrored = 0;
    for (unsigned n = 0; n < spec.unet_depth; ++n) {
        mirrored = add(mirrored, stage_sim_elements(spec, n));
    }
    const Count elements = add(mul(2, mirrored), stage_sim_elements(spec, spec.unet_depth));
    return mul(bytes_per_el, heads, elements);
}

Count attn_flops(const AttentionCall& call) {
    return mul(4, call.batch, call.num_heads, call.q_len, call.kv_len, call.head_dim);
}

Count attn_bytes(const AttentionCall& call, AttentionMode mode, const TrafficModel& traffic) {
    const Count qkvo = mul(add(mul(2, call.q_len), mul(2, call.kv_len)), call.head_dim);
    Count elements = qkvo;
    if (mode == AttentionMode::baseline) {
        elements = add(elements, mul(traffic.sim_traversals, call.q_len, call.kv_len));
    }
    return mul(traffic.bytes_per_el, call.batch, call.num_heads, elements);
}

Count attn_footprint(const AttentionCall& call, AttentionMode mode, const TrafficModel& traffic) {
    Count elements = mul(add(mul(2, call.q_len), mul(2, call.kv_len)), call.head_dim);
    if (mode == AttentionMode::baseline) {
        elements = add(elements, mul(call.q_len, call.kv_len));
    }
    return mul(traffic.bytes_per_el, call.batch, call.num_heads, elements);
}

OpCost attn_cost(const AttentionCall& call, AttentionMode mode, const TrafficModel& traffic) {
    OpCost c;
    c.flops = attn_flops(call);
    c.bytes_moved = attn_bytes(call, mode, traffic);
    c.footprint = attn_footprint(call, mode, traffic);
    return c;
}

Count conv_flops(Count in_h, Count in_w, Count kernel, Count c_in, Count c_out) {
    return mul(2, in_h, in_w, kernel, kernel, c_in, c_out);
}

OpCost linear_cost(Count tokens, Count in, Count out, Count bytes_per_el) {
    OpCost c;
    c.flops = mul(2, tokens, in, out);
    c.param_bytes = mul(in, out, bytes_per_el);
    c.bytes_moved = add(c.param_bytes, mul(tokens, add(in, out), bytes_per_el));
    c.footprint = mul(tokens, out, bytes_per_el);
    return c;
}

CostBreakdown variant_cost(const Variant& variant, Count bytes_per_el, AttentionMode mode) {
    require_element_size(bytes_per_el);
    if (const auto* d = std::get_if<DiffusionSpec>(&variant)) {
        return diffusion_cost(*d, 1, {}, diffusion_trace(*d, d->denoising_steps), bytes_per_el, mode);
    }
    if (const auto* v = std::get_if<VideoSpec>(&variant)) {
        return diffusion_cost(v->base, v->num_frames, v->temporal_attn_stages,
                              video_trace(*v, v->base.denoising_steps), bytes_per_el, mode);
    }
    return transformer_cost(std::get<TransformerSpec>(variant), bytes_per_el, mode);
}

CostBreakdown model_cost(const ModelSpec& spec, std::optional<ImageSize> image, AttentionMode mode) {
    validate(spec);
    const ModelSpec resolved = image ? with_image_size(spec, *image) : spec;
    CostBreakdown out;
    for (const ModelSpec* component : resolved.cost_components()) {
        out.accumulate(variant_cost(component->variant, component->bytes_per_param, mode));
    }
    return out;
}

std::vector<FrameSweepRow> temporal_spatial_sweep(const VideoSpec& spec, std::span<const Count> frames) {
    if (frames.empty()) {
        throw DomainError("frame sweep needs at least one frame count");
    }
    std::vector<FrameSweepRow> rows;
    rows.reserve(frames.size());
    for (Count f : frames) {
        if (f < 1) {
            throw DomainError("frame counts must be >= 1");
        }
        VideoSpec v = spec;
        v.num_frames = f;
        FrameSweepRow row{f, 0, 0};
        for (const auto& call : video_trace(v, v.base.denoising_steps).calls) {
            if (call.kind == AttentionKind::spatial) {
                row.spatial_flops = add(row.spatial_flops, attn_flops(call));
            } else if (call.kind == AttentionKind::temporal) {
                row.temporal_flops = add(row.temporal_flops, attn_flops(call));
            }
        }
        rows.push_back(row);
    }
    return rows;
}

double crossover_frames(const VideoSpec& spec) {
    const Count one = 1;
    const auto row = temporal_spatial_sweep(spec, std::span<const Count>(&one, 1)).front();
    if (row.temporal_flops == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(row.spatial_flops) / static_cast<double>(row.temporal_flops);
}

double memory_scaling_exponent(const DiffusionSpec& spec, std::span<const Count> sizes) {
    std::set<Count> distinct(sizes.begin(), sizes.end());
    if (distinct.size() < 2) {
        throw DomainError("degenerate fit: need at least 2 distinct latent sizes");
    }
    std::vector<double> x, y;
    for (Count l : sizes) {
        DiffusionSpec s = spec;
        s.latent_height = l;
        s.latent_width = l;
        x.push_back(static_cast<double>(l));
        y.push_back(static_cast<double>(cumulative_sim_memory(s)));
    }
    return loglog_slope(x, y);
}

}  // namespace genperf
