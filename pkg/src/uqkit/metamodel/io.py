"""JSON form of fitted surrogates.

Chaos: {"kind": "chaos", "families": [{kind, ...}], "indices": [[...]],
"coefficients": [[...]] (K x p), "input_map": {"mode", "joint"},
"output_names": [...]}.  Kriging: {"kind": "kriging", "trend",
"covariance", "theta", "nugget", "X", "y"}; the factorisation is rebuilt
on load.  Floats are written with Python's shortest round-trip repr, so
reloading reproduces every number bit for bit.
"""
from __future__ import annotations

import json

import numpy as np

from ..distributions import JointDistribution
from .chaos import ChaosExpansion, InputMap
from .kriging import KrigingModel
from .polynomials import make_family

__all__ = ["metamodel_to_dict", "metamodel_from_dict", "save_metamodel", "load_metamodel"]


def metamodel_to_dict(obj):
    if isinstance(obj, KrigingModel):
        return obj.to_dict()
    if isinstance(obj, ChaosExpansion):
        return {
            "kind": "chaos",
            "families": [f.to_dict() for f in obj.families],
            "indices": [list(k) for k in obj.indices],
            "coefficients": obj.coefficients.tolist(),
            "input_map": obj.input_map.to_dict() if obj.input_map is not None else None,
            "output_names": list(obj.output_names),
        }
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def metamodel_from_dict(data):
    kind = data.get("kind")
    if kind == "kriging":
        return KrigingModel.from_dict(data)
    if kind == "chaos":
        imap = None
        if data.get("input_map"):
            imap = InputMap(JointDistribution.from_dict(data["input_map"]["joint"]), data["input_map"]["mode"])
        return ChaosExpansion(
            [make_family(dict(f)) for f in data["families"]],
            [tuple(k) for k in data["indices"]],
            np.array(data["coefficients"], dtype=float),
            imap,
            output_names=list(data["output_names"]),
        )
    raise ValueError(f"unknown metamodel kind {kind!r}")


def save_metamodel(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(metamodel_to_dict(obj), fh, indent=1)
        fh.write("\n")


def load_metamodel(path):
    with open(path, encoding="utf-8") as fh:
        return metamodel_from_dict(json.load(fh))
