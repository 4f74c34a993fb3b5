#pragma once

#include <string>

#include "genperf/archspec.hpp"

namespace genperf::testing {

inline DiffusionSpec small_diffusion(Count latent, Count d, unsigned depth, Count text) {
    DiffusionSpec s;
    s.latent_height = latent;
    s.latent_width = latent;
    s.downsample_factor = d;
    s.unet_depth = depth;
    s.text_encode = text;
    s.denoising_steps = 1;
    for (unsigned n = 0; n <= depth; ++n) {
        s.self_attn_stages.insert(n);
        if (text > 0) {
            s.cross_attn_stages.insert(n);
        }
    }
    s.head_dim = 8;
    s.num_heads = 1;
    s.space = DiffusionSpace::latent;
    return s;
}

inline std::string fixture(const std::string& name) {
    return std::string(GENPERF_FIXTURE_DIR) + "/" + name;
}

}  // namespace genperf::testing
