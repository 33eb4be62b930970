"""
蒙特卡洛 Pauli 帧采样器
"""

from auto_noise.sampler.events import LayerDraws, draw_layer
from auto_noise.sampler.frame import (
    SamplerConfig,
    sample,
    sample_streaming,
    simulate_block,
)
from auto_noise.sampler.rng import SHOT_BLOCK, block_generator, derive_seed

__all__ = [
    "LayerDraws",
    "draw_layer",
    "SamplerConfig",
    "sample",
    "sample_streaming",
    "simulate_block",
    "SHOT_BLOCK",
    "block_generator",
    "derive_seed",
]
