"""Analytical performance model for text-to-image and text-to-video inference."""

from ._genperf import (
    GenperfError,
    HardwareSpec,
    ModelSpec,
    __version__,
    amdahl,
    analyze,
    arithmetic_intensity,
    attention_speedup,
    audit,
    classify_bound,
    cumulative_sim_memory,
    default_hardware,
    load_hardware,
    load_spec,
    model_cost,
    preset_names,
    seq_len_histogram,
    seq_len_trace,
    sim_matrix_memory,
    trace_breakdown,
    with_image_size,
    with_steps,
)

__all__ = [
    "GenperfError",
    "HardwareSpec",
    "ModelSpec",
    "__version__",
    "amdahl",
    "analyze",
    "arithmetic_intensity",
    "attention_speedup",
    "audit",
    "classify_bound",
    "cumulative_sim_memory",
    "default_hardware",
    "load_hardware",
    "load_spec",
    "model_cost",
    "preset_names",
    "seq_len_histogram",
    "seq_len_trace",
    "sim_matrix_memory",
    "trace_breakdown",
    "with_image_size",
    "with_steps",
]
