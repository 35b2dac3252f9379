"""uqkit: uncertainty quantification toolkit.

Input modelling (distributions, copulas, estimation), propagation
(central tendency, min-max, failure probability), sensitivity analysis
and surrogate models, driven from Python or from the ``uq`` command.
"""
from .designs import DesignSpec, generate, make_rng, spawn_rng
from .distributions import JointDistribution
from .model import Model
from .propagation import (
    Event,
    directional_sampling_pf,
    form,
    importance_sampling_pf,
    mc_central_tendency,
    mc_pf,
    minmax_doe,
    minmax_optimize,
    subset_sampling_pf,
    taylor_moments,
)
from .sample import Sample
from .transforms import IsoProbabilisticTransform, make_transform

__version__ = "0.1.0"

__all__ = [
    "DesignSpec",
    "Event",
    "IsoProbabilisticTransform",
    "JointDistribution",
    "Model",
    "Sample",
    "directional_sampling_pf",
    "form",
    "generate",
    "importance_sampling_pf",
    "make_rng",
    "make_transform",
    "mc_central_tendency",
    "mc_pf",
    "minmax_doe",
    "minmax_optimize",
    "spawn_rng",
    "subset_sampling_pf",
    "taylor_moments",
]
