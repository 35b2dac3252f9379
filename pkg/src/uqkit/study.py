"""Declarative studies: validate a JSON config, run its steps, write a report.

Config layout::

    {
      "study": "name",
      "seed": 42,                      # master seed, needed by stochastic steps
      "model": {"builtin": "flood"}
             | {"inputs": [...], "formulas": [...], "outputs": [...]}
             | {"wrapper": {"template": ..., "command": ..., "anchors": [...]}},
      "inputs": "flood" | {"names": [...], "margins": [...], "copula": {...}},
      "output": "out",                 # optional, overridden by --out
      "steps": [{"name": ..., "type": ..., "method": ..., ...}, ...]
    }

Step types and methods:

    central_tendency  taylor | monte_carlo (n)
    minmax            design (design: {kind, n | levels}) | optimize (direction, bounds?)
    reliability       form | monte_carlo | importance_sampling | directional_sampling
                      | subset_sampling  (threshold, comparison, budget)
    sensitivity       src | srrc | pearson | spearman (n) | sobol (n)
    metamodel         chaos (degree, n) | kriging (n)
    fit               family (input, family, n) | ks (input, family, n) | kernel (input, n)

A step without its own ``seed`` draws from stream ``i`` (its position) of
the master seed.  Reports hold no timings, so equal configs give
byte-identical reports.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import flood
from .designs import DesignSpec, make_rng, spawn_rng
from .distributions import (
    FAMILIES,
    DistributionError,
    IndependentCopula,
    JointDistribution,
)
from .estimation import fit_mle, kernel_smooth, ks_test, qq_plot_data
from .metamodel import chaos_fit, chaos_sobol, kriging_fit, metamodel_to_dict
from .model import Model
from .propagation import (
    Event,
    form,
    importance_sampling_pf,
    mc_central_tendency,
    mc_pf,
    minmax_doe,
    minmax_optimize,
    subset_sampling_pf,
    taylor_moments,
    directional_sampling_pf,
)
from .sample import Sample
from .sensitivity import cobweb_data, pearson, scatter_matrix_data, sobol_pickfreeze, spearman, src, srrc
from .wrapper import WrapperProtocol

__all__ = ["Diagnostic", "validate", "run_study", "load_config", "StudyError", "EXIT_OK", "EXIT_INVALID", "EXIT_RUNTIME"]

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

METHODS = {
    "central_tendency": ("taylor", "monte_carlo"),
    "minmax": ("design", "optimize"),
    "reliability": ("form", "monte_carlo", "importance_sampling", "directional_sampling", "subset_sampling"),
    "sensitivity": ("src", "srrc", "pearson", "spearman", "sobol"),
    "metamodel": ("chaos", "kriging"),
    "fit": ("family", "ks", "kernel"),
}
DETERMINISTIC = {("central_tendency", "taylor"), ("reliability", "form"), ("minmax", "optimize")}
TOP_KEYS = ("study", "seed", "model", "inputs", "output", "steps")


class StudyError(RuntimeError):
    pass


@dataclass
class Diagnostic:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"

    def to_dict(self):
        return {"path": self.path, "message": self.message}


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------- building blocks


def build_inputs(spec):
    if spec == "flood":
        return flood.flood_joint()
    if not isinstance(spec, dict):
        raise DistributionError("inputs must be \"flood\" or an object")
    return JointDistribution.from_dict(spec)


def build_model(spec, base_dir="."):
    if spec.get("builtin") is not None:
        if spec["builtin"] != "flood":
            raise ValueError(f"unknown builtin model {spec['builtin']!r}; supported: flood")
        return flood.flood_level()
    if "wrapper" in spec:
        w = dict(spec["wrapper"])
        template = Path(base_dir, w.pop("template"))
        protocol = WrapperProtocol(template, spec["inputs"], w.pop("command"), w.pop("anchors"), **w)
        return Model.from_wrapper(protocol, output_names=spec.get("outputs"))
    return Model.from_expressions(list(spec["inputs"]), list(spec["formulas"]), output_names=spec.get("outputs"))


# ---------------------------------------------------------------- validation


def _need(step, key, path, diags, kind=(int, float)):
    if key not in step:
        diags.append(Diagnostic(f"{path}.{key}", "missing required key"))
        return False
    if kind is not None and (not isinstance(step[key], kind) or isinstance(step[key], bool)):
        diags.append(Diagnostic(f"{path}.{key}", f"expected {getattr(kind, '__name__', 'a number')}"))
        return False
    return True


def validate(config, base_dir="."):
    """Static checks; returns a list of diagnostics (empty when valid)."""
    diags = []
    if not isinstance(config, dict):
        return [Diagnostic("$", "config must be an object")]
    for key in config:
        if key not in TOP_KEYS:
            diags.append(Diagnostic(f"$.{key}", f"unknown key; allowed: {', '.join(TOP_KEYS)}"))
    if not isinstance(config.get("study"), str):
        diags.append(Diagnostic("$.study", "missing or non-string study name"))
    seed = config.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        diags.append(Diagnostic("$.seed", "seed must be a non-negative integer"))

    names = None
    if "inputs" not in config:
        diags.append(Diagnostic("$.inputs", "missing required key"))
    else:
        try:
            names = build_inputs(config["inputs"]).names
        except (DistributionError, KeyError, TypeError, ValueError) as exc:
            diags.append(Diagnostic("$.inputs", _message(exc)))

    model_spec = config.get("model")
    if not isinstance(model_spec, dict):
        diags.append(Diagnostic("$.model", "missing model section"))
    else:
        try:
            model = build_model(model_spec, base_dir)
            if names is not None and list(model.input_names) != list(names):
                diags.append(Diagnostic("$.model.inputs", f"model inputs {model.input_names} differ from input names {list(names)}"))
        except (KeyError, TypeError, ValueError, SyntaxError) as exc:
            diags.append(Diagnostic("$.model", _message(exc)))

    steps = config.get("steps", [])
    if not isinstance(steps, list):
        diags.append(Diagnostic("$.steps", "steps must be a list"))
        steps = []
    seen = set()
    for i, step in enumerate(steps):
        path = f"$.steps[{i}]"
        if not isinstance(step, dict):
            diags.append(Diagnostic(path, "step must be an object"))
            continue
        name = step.get("name")
        if not isinstance(name, str) or not name:
            diags.append(Diagnostic(f"{path}.name", "missing step name"))
        elif name in seen:
            diags.append(Diagnostic(f"{path}.name", f"duplicate step name {name!r}"))
        seen.add(name)
        typ, method = step.get("type"), step.get("method")
        if typ not in METHODS:
            diags.append(Diagnostic(f"{path}.type", f"unknown step type {typ!r}; supported: {', '.join(METHODS)}"))
            continue
        if method not in METHODS[typ]:
            diags.append(Diagnostic(f"{path}.method", f"unknown {typ} method {method!r}; supported: {', '.join(METHODS[typ])}"))
            continue
        if (typ, method) not in DETERMINISTIC and step.get("seed") is None and seed is None:
            diags.append(Diagnostic(f"{path}.seed", "stochastic step needs a seed (here or at $.seed)"))
        _validate_step(step, typ, method, path, names, diags)
    return diags


def _validate_step(step, typ, method, path, names, diags):
    if typ == "central_tendency" and method == "monte_carlo":
        _need(step, "n", path, diags, int)
    elif typ == "minmax" and method == "design":
        d = step.get("design")
        if not isinstance(d, dict):
            diags.append(Diagnostic(f"{path}.design", "missing design object"))
        else:
            try:
                DesignSpec(d.get("kind", ""), len(names or [0]), d.get("n"), d.get("levels", []))
            except ValueError as exc:
                diags.append(Diagnostic(f"{path}.design.kind", _message(exc)))
    elif typ == "minmax" and step.get("direction", "min") not in ("min", "max"):
        diags.append(Diagnostic(f"{path}.direction", "direction is 'min' or 'max'"))
    elif typ == "reliability":
        _need(step, "threshold", path, diags)
        if step.get("comparison", ">") not in (">", ">=", "<", "<="):
            diags.append(Diagnostic(f"{path}.comparison", "comparison is one of >, >=, <, <="))
        if method != "form":
            _need(step, "budget", path, diags, int)
    elif typ == "sensitivity" or typ == "metamodel":
        _need(step, "n", path, diags, int)
        if typ == "metamodel" and method == "chaos":
            _need(step, "degree", path, diags, int)
    elif typ == "fit":
        _need(step, "n", path, diags, int)
        if names is not None and step.get("input") not in names:
            diags.append(Diagnostic(f"{path}.input", f"unknown input {step.get('input')!r}; inputs: {', '.join(names)}"))
        if method != "kernel":
            fam = str(step.get("family", "")).lower()
            if fam not in FAMILIES:
                diags.append(Diagnostic(f"{path}.family", f"unknown distribution family {step.get('family')!r}; supported: {', '.join(sorted(FAMILIES))}"))


def _message(exc):
    return str(exc.args[0]) if exc.args else type(exc).__name__


# ---------------------------------------------------------------- report helpers


def _num(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


def clean(obj):
    """JSON-safe copy: numpy to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _named(names, values):
    return {n: float(v) for n, v in zip(names, values)}


def dumps(report):
    return json.dumps(clean(report), indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------- steps


class _Context:
    def __init__(self, config, out_dir, threads, base_dir):
        self.config = config
        self.out = Path(out_dir)
        self.joint = build_inputs(config["inputs"])
        self.model = build_model(config["model"], base_dir)
        self.model.threads = max(1, int(threads))
        self.master_seed = config.get("seed")
        self.results = {}

    def rng(self, step, index):
        if step.get("seed") is not None:
            return make_rng(int(step["seed"])), {"seed": int(step["seed"])}
        return spawn_rng(self.master_seed, index), {"seed": self.master_seed, "stream": index}

    def artifact(self, step, suffix, sample: Sample):
        fname = f"{step['name']}_{suffix}.csv"
        sample.to_csv(self.out / fname)
        return fname

    def event(self, step):
        return Event(self.model, float(step["threshold"]), step.get("comparison", ">"), int(step.get("output", 0)))


def _sample_io(ctx, n, rng):
    X = ctx.joint.sample(int(n), rng)
    Y = ctx.model.evaluate(np.asarray(X))
    return X, Y


def _step_central(ctx, step, i):
    out = int(step.get("output", 0))
    if step["method"] == "taylor":
        r = taylor_moments(ctx.model, ctx.joint, out)
        return {"mean_first_order": r.mean_first_order, "mean_second_order": r.mean_second_order,
                "variance": r.variance, "stdev": r.stdev}, [], {}
    rng, seed = ctx.rng(step, i)
    r = mc_central_tendency(ctx.model, ctx.joint, int(step["n"]), rng, out)
    art = [ctx.artifact(step, "histogram", r.histogram_sample())]
    return {"mean": r.mean, "stdev": r.stdev, "n": int(step["n"])}, art, seed


def _step_minmax(ctx, step, i):
    out = int(step.get("output", 0))
    names = ctx.joint.names
    if step["method"] == "design":
        d = step["design"]
        spec = DesignSpec(d["kind"], ctx.joint.dimension, d.get("n"), d.get("levels", []), d.get("center"), d.get("scale"))
        rng, seed = ctx.rng(step, i) if spec.random else (None, {})
        r = minmax_doe(ctx.model, ctx.joint, spec, rng, out)
        return {"min": r.min, "argmin": _named(names, r.argmin), "max": r.max, "argmax": _named(names, r.argmax)}, [], seed
    if "bounds" in step:
        lo, hi = (np.asarray(b, dtype=float) for b in step["bounds"])
    else:
        p = float(step.get("bound_quantile", 0.01))
        lo = np.array([float(m.quantile(p)) for m in ctx.joint.margins])
        hi = np.array([float(m.quantile(1.0 - p)) for m in ctx.joint.margins])
    start = np.clip(ctx.joint.mean() if "start" not in step else np.asarray(step["start"], dtype=float), lo, hi)
    value, point = minmax_optimize(ctx.model, (lo, hi), start, step.get("direction", "min"), out)
    return {"direction": step.get("direction", "min"), "value": value, "point": _named(names, point),
            "lower": _named(names, lo), "upper": _named(names, hi)}, [], {}


def _form_results(ctx, r):
    names = ctx.joint.names
    return {"beta": r.beta, "pf": r.pf, "design_point_u": r.design_point_u.tolist(),
            "design_point_x": _named(names, r.design_point_x),
            "importance_factors": _named(names, r.importance_factors), "iterations": r.iterations}


def _pf_results(r):
    lo, hi = r.ci95
    res = {"pf": r.pf, "variance": r.variance, "ci95": [lo, hi], "cv": r.cv}
    if r.diagnostics:
        res["diagnostics"] = r.diagnostics
    return res


def _step_reliability(ctx, step, i):
    ev = ctx.event(step)
    method = step["method"]
    if method == "form":
        r = form(ev, ctx.joint)
        ctx.results[step["name"]] = r
        return _form_results(ctx, r), [], {}
    rng, seed = ctx.rng(step, i)
    budget = int(step["budget"])
    cv = step.get("cv_target")
    block = int(step.get("block_size", 1000))
    extra = {}
    if method == "monte_carlo":
        r = mc_pf(ev, ctx.joint, budget, rng, cv, block)
    elif method == "importance_sampling":
        ref = step.get("design_point_from")
        if ref is not None:
            if ref not in ctx.results:
                raise StudyError(f"step {ref!r} has no FORM result to reuse")
            u_star = ctx.results[ref].design_point_u
        else:
            fr = form(ev, ctx.joint)
            u_star = fr.design_point_u
        extra["design_point_u"] = np.asarray(u_star).tolist()
        r = importance_sampling_pf(ev, ctx.joint, u_star, budget, rng, cv, block)
    elif method == "directional_sampling":
        r = directional_sampling_pf(ev, ctx.joint, budget, rng, r_max=float(step.get("r_max", 8.0)),
                                    step=float(step.get("step", 0.25)))
    else:
        r = subset_sampling_pf(ev, ctx.joint, budget, rng, p0=float(step.get("p0", 0.1)),
                               proposal_range=float(step.get("proposal_range", 2.0)))
    art = [ctx.artifact(step, "convergence", _history_sample(r))]
    res = _pf_results(r)
    res.update(extra)
    return res, art, seed


def _history_sample(r):
    rows = [(n, p, max(p - hw, 0.0), min(p + hw, 1.0)) for n, p, hw in r.history]
    return Sample(np.array(rows, dtype=float).reshape(-1, 4), ["n", "estimate", "ci_low", "ci_high"])


def _step_sensitivity(ctx, step, i):
    rng, seed = ctx.rng(step, i)
    out = int(step.get("output", 0))
    method = step["method"]
    if method == "sobol":
        joint = ctx.joint
        if step.get("copula") == "independent":
            joint = JointDistribution(joint.margins, IndependentCopula(joint.dimension), joint.names)
        r = sobol_pickfreeze(ctx.model, joint, int(step["n"]), rng, int(step.get("bootstrap", 100)), output=out)
        return {"first_order": _named(r.names, r.first_order), "total_order": _named(r.names, r.total_order),
                "first_order_ci": {n: list(c) for n, c in zip(r.names, r.first_order_ci.tolist())},
                "total_order_ci": {n: list(c) for n, c in zip(r.names, r.total_order_ci.tolist())},
                "flags": r.flags, "copula": "independent" if joint is not ctx.joint else "as_inputs"}, [], seed
    X, Y = _sample_io(ctx, int(step["n"]), rng)
    y = Sample(np.asarray(Y)[:, out], [ctx.model.output_names[out]])
    fn = {"src": src, "srrc": srrc, "pearson": pearson, "spearman": spearman}[method]
    r = fn(X, y)
    res = {"values": r.as_dict(), "ranking": r.ranking()}
    for key in ("r2", "intercept", "coefficients", "squared"):
        if key in r.metadata:
            res[key] = r.metadata[key] if key != "squared" else _named(r.names, r.metadata[key])
    art = []
    if step.get("plots", True):
        art.append(ctx.artifact(step, "scatter", scatter_matrix_data(X, y).sample))
        band = step.get("band", [0.95, 1.0])
        art.append(ctx.artifact(step, "cobweb", cobweb_data(X, y, tuple(band))))
    return res, art, seed


def _step_metamodel(ctx, step, i):
    rng, seed = ctx.rng(step, i)
    out = int(step.get("output", 0))
    n = int(step["n"])
    fname = f"{step['name']}_metamodel.json"
    if step["method"] == "chaos":
        e = chaos_fit(ctx.model, ctx.joint, degree=int(step["degree"]), q=float(step.get("q", 1.0)), n=n, rng=rng,
                      mode=step.get("mode", "auto"), output=out)
        first, total = chaos_sobol(e)
        res = {"degree": int(step["degree"]), "basis_size": e.size, "mapping": e.input_map.mode,
               "mean": float(e.mean[0]), "variance": float(e.variance[0]),
               "relative_error": float(e.relative_error[0]),
               "first_order": _named(ctx.joint.names, first), "total_order": _named(ctx.joint.names, total)}
        obj = e
    else:
        X, Y = _sample_io(ctx, n, rng)
        k = kriging_fit(np.asarray(X), np.asarray(Y)[:, out], trend=step.get("trend", "constant"),
                        covariance=step.get("covariance", "squared_exponential"))
        Xv, Yv = _sample_io(ctx, int(step.get("n_validation", 1000)), rng)
        err = k(np.asarray(Xv)) - np.asarray(Yv)[:, out]
        res = {"theta": k.theta.tolist(), "sigma2": k.sigma2, "beta": k.beta.tolist(),
               "validation_rmse": float(np.sqrt(np.mean(err**2)))}
        obj = k
    with open(ctx.out / fname, "w", encoding="utf-8") as fh:
        json.dump(clean(metamodel_to_dict(obj)), fh, indent=1)
        fh.write("\n")
    return res, [fname], seed


def _step_fit(ctx, step, i):
    rng, seed = ctx.rng(step, i)
    j = ctx.joint.names.index(step["input"])
    x = np.asarray(ctx.joint.margins[j].sample(int(step["n"]), rng), dtype=float).ravel()
    method = step["method"]
    if method == "kernel":
        kd = kernel_smooth(x, step.get("bandwidth"), step.get("bounds"))
        grid = np.linspace(x.min(), x.max(), int(step.get("grid", 129)))
        art = [ctx.artifact(step, "density", Sample(np.column_stack([grid, kd.pdf(grid)]), ["x", "pdf"]))]
        return {"bandwidth": kd.bandwidth, "n": x.size}, art, seed
    fit = fit_mle(step["family"], x)
    ks = ks_test(x, fit.distribution)
    res = {"family": fit.distribution.family, "parameters": [float(np.asarray(p)) for p in fit.parameters],
           "log_likelihood": fit.log_likelihood,
           "ks": {"statistic": ks.statistic, "p_value": ks.p_value, "accepted": ks.accepted}}
    if method == "ks":
        res = {"family": res["family"], "statistic": ks.statistic, "p_value": ks.p_value, "accepted": ks.accepted}
    art = [ctx.artifact(step, "qq", qq_plot_data(x, fit.distribution))]
    return res, art, seed


_RUNNERS = {
    "central_tendency": _step_central,
    "minmax": _step_minmax,
    "reliability": _step_reliability,
    "sensitivity": _step_sensitivity,
    "metamodel": _step_metamodel,
    "fit": _step_fit,
}


def _inputs_summary(joint):
    return {"names": list(joint.names), "margins": [m.to_dict() for m in joint.margins],
            "copula": joint.copula.to_dict()}


def _write(out, report):
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(report), encoding="utf-8")


def run_study(config, out_dir=None, threads=1, base_dir="."):
    """Run every step in order and write ``report.json`` plus CSV artifacts.

    Returns (exit code, report dict).
    """
    out = Path(out_dir if out_dir is not None else config.get("output", "uq-out") if isinstance(config, dict) else "uq-out")
    report = {"study": config.get("study") if isinstance(config, dict) else None,
              "seed": config.get("seed") if isinstance(config, dict) else None, "steps": []}
    diags = validate(config, base_dir)
    if diags:
        report["error"] = {"kind": "validation", "diagnostics": [d.to_dict() for d in diags]}
        _write(out, report)
        return EXIT_INVALID, report
    ctx = _Context(config, out, threads, base_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = {"study": report["study"], "seed": report["seed"], "inputs": _inputs_summary(ctx.joint), "steps": []}
    for i, step in enumerate(config.get("steps", [])):
        before = ctx.model.calls
        try:
            results, artifacts, seed = _RUNNERS[step["type"]](ctx, step, i)
        except Exception as exc:  # any step failure ends the run with partial results kept
            report["error"] = {"kind": "runtime", "step": step["name"], "type": type(exc).__name__,
                               "message": _message(exc)}
            _write(out, report)
            return EXIT_RUNTIME, report
        entry = {"name": step["name"], "method": f"{step['type']}.{step['method']}", "results": results,
                 "n_evaluations": ctx.model.calls - before, "artifacts": artifacts}
        if seed:
            entry["seed"] = seed
        report["steps"].append(entry)
    _write(out, report)
    return EXIT_OK, report


def flood_config_path():
    from importlib import resources

    return resources.files("uqkit").joinpath("data/flood_study.json")


def flood_config(seed=None):
    cfg = json.loads(flood_config_path().read_text(encoding="utf-8"))
    if seed is not None:
        cfg["seed"] = int(seed)
    return cfg


def find_step(report, name):
    for s in report["steps"]:
        if s["name"] == name:
            return s
    raise KeyError(name)


def base_dir_of(path):
    return os.path.dirname(os.path.abspath(path))
