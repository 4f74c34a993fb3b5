#include "genperf/seqprofile.hpp"

#include <algorithm>

#include "genperf/csv.hpp"
#include "genperf/error.hpp"

namespace genperf {

namespace {

void emit_stage(const DiffusionSpec& spec, unsigned n, Count step, Count frames,
                const std::set<unsigned>* temporal, std::vector<AttentionCall>& out) {
    const bool video = temporal != nullptr;
    const bool self = spec.self_attn_stages.contains(n);
    // No prompt tokens means nothing to cross-attend to.
    const bool cross = spec.cross_attn_stages.contains(n) && spec.text_encode > 0;
    const bool temp = video && temporal->contains(n);
    if (!self && !cross && !temp) {
        return;
    }
    const Count tokens = spec.stage_tokens(n);
    const Count batch = checked::mul(spec.guidance_multiplier, frames, "batch");
    for (Count b = 0; b < spec.blocks_per_stage; ++b) {
        if (self) {
            out.push_back({video ? AttentionKind::spatial : AttentionKind::self, tokens, tokens,
                           spec.head_dim, spec.num_heads, batch, n, step});
        }
        if (temp) {
            out.push_back({AttentionKind::temporal, frames, frames, spec.head_dim, spec.num_heads,
                           checked::mul(spec.guidance_multiplier, tokens, "batch"), n, step});
        }
        if (cross) {
            out.push_back({AttentionKind::cross, tokens, spec.text_encode, spec.head_dim, spec.num_heads, batch, n,
                           step});
        }
    }
}

SeqLenTrace unet_trace(const DiffusionSpec& spec, Count steps, Count frames, const std::set<unsigned>* temporal) {
    if (steps < 1) {
        throw ValidationError("invariant violated: steps >= 1");
    }
    SeqLenTrace trace;
    const auto order = unet_traversal(spec.unet_depth);
    for (Count step = 0; step < steps; ++step) {
        for (unsigned n : order) {
            emit_stage(spec, n, step, frames, temporal, trace.calls);
        }
    }
    return trace;
}

}  // namespace

void validate(const AttentionCall& call) {
    if (call.q_len < 1) throw ValidationError("invariant violated: q_len >= 1");
    if (call.kv_len < 1) throw ValidationError("invariant violated: kv_len >= 1");
    if (call.batch < 1) throw ValidationError("invariant violated: batch >= 1");
    if (call.head_dim < 1) throw ValidationError("invariant violated: head_dim >= 1");
    if (call.num_heads < 1) throw ValidationError("invariant violated: num_heads >= 1");
}

std::vector<unsigned> unet_traversal(unsigned unet_depth) {
    std::vector<unsigned> order;
    order.reserve(2 * unet_depth + 1);
    for (unsigned n = 0; n < unet_depth; ++n) {
        order.push_back(n);
    }
    order.push_back(unet_depth);
    for (unsigned n = unet_depth; n-- > 0;) {
        order.push_back(n);
    }
    return order;
}

SeqLenTrace diffusion_trace(const DiffusionSpec& spec, Count steps) {
    validate(spec);
    return unet_trace(spec, steps, 1, nullptr);
}

SeqLenTrace video_trace(const VideoSpec& spec, Count steps) {
    validate(spec);
    return unet_trace(spec.base, steps, spec.num_frames, &spec.temporal_attn_stages);
}

SeqLenTrace transformer_trace(const TransformerSpec& spec) {
    validate(spec);
    SeqLenTrace trace;
    const Count hd = spec.head_dim();
    if (spec.decode_mode == DecodeMode::autoregressive) {
        trace.calls.reserve(spec.gen_tokens);
        trace.calls.push_back({AttentionKind::self, spec.prompt_len, spec.prompt_len, hd, spec.num_heads,
                               spec.batch, std::nullopt, 0});
        for (Count t = 1; t < spec.gen_tokens; ++t) {
            trace.calls.push_back({AttentionKind::self, 1, checked::add(spec.prompt_len, t), hd, spec.num_heads,
                                   spec.batch, std::nullopt, t});
        }
    } else {
        const Count len = checked::add(spec.prompt_len, spec.gen_tokens);
        for (Count s = 0; s < spec.parallel_steps; ++s) {
            trace.calls.push_back({AttentionKind::self, len, len, hd, spec.num_heads, spec.batch, std::nullopt, s});
        }
    }
    return trace;
}

SeqLenTrace model_trace(const ModelSpec& spec) {
    SeqLenTrace trace = std::visit(
        [](const auto& v) -> SeqLenTrace {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, DiffusionSpec>) {
                return diffusion_trace(v, v.denoising_steps);
            } else if constexpr (std::is_same_v<T, VideoSpec>) {
                return video_trace(v, v.base.denoising_steps);
            } else {
                return transformer_trace(v);
            }
        },
        spec.variant);
    trace.model_name = spec.name;
    return trace;
}

std::map<Count, Count> seq_len_histogram(const SeqLenTrace& trace) {
    if (trace.calls.empty()) {
        throw ValidationError("invariant violated: trace is non-empty (model has no attention stages)");
    }
    std::map<Count, Count> hist;
    for (const auto& call : trace.calls) {
        ++hist[call.q_len];
    }
    return hist;
}

SeqLenSummary summarize(const SeqLenTrace& trace, const Variant& variant) {
    SeqLenSummary s;
    s.calls = trace.calls.size();
    if (trace.calls.empty()) {
        return s;
    }
    auto [lo, hi] = std::minmax_element(trace.calls.begin(), trace.calls.end(),
                                        [](const auto& a, const auto& b) { return a.q_len < b.q_len; });
    s.min_q_len = lo->q_len;
    s.max_q_len = hi->q_len;
    s.whole_trace_ratio = static_cast<double>(s.max_q_len) / static_cast<double>(s.min_q_len);
    if (const DiffusionSpec* d = diffusion_part(variant); d != nullptr && d->unet_depth > 0) {
        s.per_stage_ratio = static_cast<double>(d->downsample_factor * d->downsample_factor);
    }
    return s;
}

std::string to_string(AttentionKind kind) {
    switch (kind) {
        case AttentionKind::self: return "self";
        case AttentionKind::cross: return "cross";
        case AttentionKind::spatial: return "spatial";
        case AttentionKind::temporal: return "temporal";
    }
    return "unknown";
}

std::string trace_csv(const SeqLenTrace& trace) {
    CsvWriter csv({"index", "step", "stage", "kind", "q_len", "kv_len", "batch", "heads", "head_dim"});
    for (std::size_t i = 0; i < trace.calls.size(); ++i) {
        const auto& c = trace.calls[i];
        csv.row({std::to_string(i), std::to_string(c.step), c.stage ? std::to_string(*c.stage) : std::string(),
                 to_string(c.kind), std::to_string(c.q_len), std::to_string(c.kv_len), std::to_string(c.batch),
                 std::to_string(c.num_heads), std::to_string(c.head_dim)});
    }
    return csv.str();
}

std::string histogram_csv(const std::map<Count, Count>& histogram) {
    CsvWriter csv({"q_len", "count"});
    for (const auto& [len, count] : histogram) {
        csv.row({std::to_string(len), std::to_string(count)});
    }
    return csv.str();
}

}  // namespace genperf
