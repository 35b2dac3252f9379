"""The flood-dyke benchmark: inputs, height model and water level."""
from __future__ import annotations

from .distributions import (
    ComposedCopula,
    Gumbel,
    IndependentCopula,
    JointDistribution,
    Normal,
    NormalCopula,
    Triangular,
    Truncated,
)
from .model import Model

__all__ = ["NAMES", "LENGTH", "WIDTH", "THRESHOLD", "H_EXPRESSION", "LEVEL_EXPRESSION",
           "flood_joint", "flood_height", "flood_level", "MEAN_POINT"]

NAMES = ["Q", "Ks", "Zv", "Zm"]
LENGTH = 5000.0
WIDTH = 300.0
THRESHOLD = 58.0
H_EXPRESSION = f"(Q/(Ks*{WIDTH}*sqrt((Zm-Zv)/{LENGTH})))^0.6"
LEVEL_EXPRESSION = f"Zv+{H_EXPRESSION}"
MEAN_POINT = (1335.0, 30.0, 50.167, 55.033)


def flood_joint(correlation=0.7):
    """Q ~ Gumbel(1.8e-3, 1014) and Ks ~ N(30, 7.5), both truncated at 0;
    triangular Zv, Zm tied by a normal copula with the given correlation."""
    margins = [
        Truncated(Gumbel(1.8e-3, 1014.0), lower=0.0),
        Truncated(Normal(30.0, 7.5), lower=0.0),
        Triangular(47.6, 50.5, 52.4),
        Triangular(52.5, 54.9, 57.7),
    ]
    if correlation == 0:
        copula = IndependentCopula(4)
    else:
        copula = ComposedCopula([IndependentCopula(2), NormalCopula([[1.0, correlation], [correlation, 1.0]])])
    return JointDistribution(margins, copula, NAMES)


def flood_height():
    return Model.from_expressions(NAMES, [H_EXPRESSION], output_names=["H"])


def flood_level():
    """Water level Zc = Zv + H, the output of the benchmark studies."""
    return Model.from_expressions(NAMES, [LEVEL_EXPRESSION], output_names=["Zc"])
