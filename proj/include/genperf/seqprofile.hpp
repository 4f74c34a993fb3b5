#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genperf/archspec.hpp"

namespace genperf {

enum class AttentionKind { self, cross, spatial, temporal };

/// One attention invocation.
struct AttentionCall {
    AttentionKind kind = AttentionKind::self;
    Count q_len = 1;
    Count kv_len = 1;
    Count head_dim = 1;
    Count num_heads = 1;
    Count batch = 1;
    std::optional<unsigned> stage;
    Count step = 0;

    bool operator==(const AttentionCall&) const = default;
};

void validate(const AttentionCall& call);

/// Attention calls of one inference pass, in execution order.
struct SeqLenTrace {
    std::string model_name;
    std::vector<AttentionCall> calls;
};

/// Stage visit order of one UNet traversal: 0..depth-1, depth, depth-1..0.
std::vector<unsigned> unet_traversal(unsigned unet_depth);

/// Attention calls of `steps` denoising steps. Each stage visit emits, per attention
/// block, a self call then a cross call where the stage has them. CFG duplication
/// (guidance_multiplier) appears as batch.
SeqLenTrace diffusion_trace(const DiffusionSpec& spec, Count steps);

/// Autoregressive: prefill call then one single-query call per further token with a
/// growing context. Parallel: parallel_steps calls over the full sequence.
SeqLenTrace transformer_trace(const TransformerSpec& spec);

/// Diffusion traversal over a video: spatial calls batch the frames; temporal calls
/// (at temporal stages, right after the spatial call) batch the pixels.
SeqLenTrace video_trace(const VideoSpec& spec, Count steps);

/// Trace of the headline network of a model, using its configured step count.
SeqLenTrace model_trace(const ModelSpec& spec);

/// Occurrences of each distinct q_len. Throws ValidationError on an empty trace.
std::map<Count, Count> seq_len_histogram(const SeqLenTrace& trace);

/// Sequence-length variation of a trace.
struct SeqLenSummary {
    Count calls = 0;
    Count min_q_len = 0;
    Count max_q_len = 0;
    // max / min over the whole trace.
    double whole_trace_ratio = 0.0;
    // Token-count ratio between adjacent UNet stages (d^2); 0 when not a UNet.
    double per_stage_ratio = 0.0;
};

SeqLenSummary summarize(const SeqLenTrace& trace, const Variant& variant);

/// CSV with columns index,step,stage,kind,q_len,kv_len,batch,heads,head_dim.
std::string trace_csv(const SeqLenTrace& trace);

/// CSV with columns q_len,count.
std::string histogram_csv(const std::map<Count, Count>& histogram);

std::string to_string(AttentionKind kind);

}  // namespace genperf
