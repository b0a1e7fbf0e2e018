"""Simulation and verification tools for stochastic Bulgarian solitaire."""

__version__ = "0.1.0"

from .partitions import (  # noqa: E402
    Partition,
    StepFunction,
    WeakComposition,
    boundary,
    exponential,
    rescale,
    restricted_distance,
    sort_composition,
    step_reference,
    sup_distance,
    zero_reference,
)
from .engine import GameParams, Variant, play, play_streaming, triangular_start  # noqa: E402

__all__ = [
    "Partition",
    "WeakComposition",
    "StepFunction",
    "boundary",
    "rescale",
    "sort_composition",
    "sup_distance",
    "restricted_distance",
    "exponential",
    "zero_reference",
    "step_reference",
    "GameParams",
    "Variant",
    "play",
    "play_streaming",
    "triangular_start",
]
