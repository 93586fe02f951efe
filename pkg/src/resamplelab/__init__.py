"""Deterministic lab for maintaining random assignments under adaptive adversaries."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    Adversary,
    ConfigurationError,
    DistributionSpec,
    EmptySupportError,
    History,
    JointState,
    LoadFunction,
    RandomSource,
    SettingRuleError,
    World,
    derive_seed,
    evaluate_load,
    static_sample,
)
from .schedulers import (  # noqa: F401
    GreedyAggregationScheduler,
    LandmarkScheduler,
    ProactiveScheduler,
    gta_budget,
    landmark_next,
    landmark_sequence,
    landmarks,
    make_scheduler,
    trailing_zeros,
)
