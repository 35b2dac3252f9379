"""Failure probability of ``Y op s``: FORM and four sampling estimators.

Every estimator works on the standard-space limit state g_U (failure is
g_U > 0) except crude Monte Carlo, which samples the physical joint law.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from ..distributions import JointDistribution
from ..model import Model
from ..transforms import make_transform, standard_event

__all__ = [
    "Event",
    "FormResult",
    "ReliabilityResult",
    "ConvergenceError",
    "StagnationWarning",
    "form",
    "mc_pf",
    "importance_sampling_pf",
    "directional_sampling_pf",
    "subset_sampling_pf",
]

Z95 = 1.959963984540054


class ConvergenceError(RuntimeError):
    pass


class StagnationWarning(UserWarning):
    pass


@dataclass
class Event:
    model: Model
    threshold: float
    comparison: str = ">"
    output: int = 0

    def __post_init__(self):
        if self.comparison not in (">", ">=", "<", "<="):
            raise ValueError(f"unknown comparison {self.comparison!r}")

    def occurs(self, y):
        y = np.asarray(y, dtype=float)
        s = self.threshold
        return {">": y > s, ">=": y >= s, "<": y < s, "<=": y <= s}[self.comparison]

    def standard(self, joint):
        return standard_event(self.model, make_transform(joint), self.threshold, self.comparison, self.output)


@dataclass
class FormResult:
    design_point_u: np.ndarray
    design_point_x: np.ndarray
    beta: float
    importance_factors: np.ndarray
    iterations: int
    n_evaluations: int
    names: list = field(default_factory=list)

    @property
    def pf(self):
        return float(special.ndtr(-self.beta))

    def importance(self):
        return dict(zip(self.names, map(float, self.importance_factors)))


@dataclass
class ReliabilityResult:
    pf: float
    variance: float
    n_evaluations: int
    method: str
    history: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def std(self):
        return math.sqrt(max(self.variance, 0.0))

    @property
    def ci95(self):
        hw = Z95 * self.std
        return (max(self.pf - hw, 0.0), min(self.pf + hw, 1.0))

    @property
    def cv(self):
        return self.std / self.pf if self.pf > 0 else math.inf

    def history_csv(self, path):
        """Columns n, estimate, ci_low, ci_high."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "estimate", "ci_low", "ci_high"])
            for n, p, hw in self.history:
                w.writerow([n, repr(float(p)), repr(max(p - hw, 0.0)), repr(min(p + hw, 1.0))])


# ---------------------------------------------------------------- FORM


def form(event: Event, joint: JointDistribution, start=None, max_iter=100, tol=1e-6):
    """Improved HLRF with the merit function m(u) = |u|^2/2 + c|g(u)|.

    The penalty c is refreshed each iteration above |u|/|grad g| (and the
    length of the full HLRF step over |grad g|, which keeps it positive at
    the origin); steps are halved until the Armijo condition holds.
    """
    transform = make_transform(joint)
    g = event.standard(joint)
    d = joint.dimension
    before = event.model.calls
    u = np.zeros(d) if start is None else np.asarray(transform.to_standard(start), dtype=float)[0]
    g_origin = float(g(np.zeros(d))[0])
    scale = max(abs(g_origin), 1.0)
    gu = float(g(u)[0])
    for it in range(1, max_iter + 1):
        grad = g.gradient(u)[0]
        gn = float(grad @ grad)
        if gn == 0.0:
            raise ConvergenceError(f"zero gradient of the limit state at iterate {it}")
        target = ((grad @ u - gu) / gn) * grad
        step = target - u
        c = 2.0 * max(np.linalg.norm(u), np.linalg.norm(target)) / math.sqrt(gn) + 1e-12
        merit = 0.5 * float(u @ u) + c * abs(gu)
        slope = float((u + c * math.copysign(1.0, gu) * grad) @ step) if gu != 0 else float(u @ step) - c * math.sqrt(gn) * np.linalg.norm(step)
        lam = 1.0
        while True:
            un = u + lam * step
            gun = float(g(un)[0])
            mn = 0.5 * float(un @ un) + c * abs(gun)
            if mn <= merit + 1e-4 * lam * min(slope, 0.0) or lam < 1e-10:
                break
            lam *= 0.5
        moved = np.linalg.norm(un - u)
        u, gu = un, gun
        if moved < tol and abs(gu) < tol * scale:
            break
    else:
        raise ConvergenceError(f"FORM did not converge in {max_iter} iterations (|g|={abs(gu):.3g})")
    grad = g.gradient(u)[0]
    alpha = -grad / np.linalg.norm(grad)
    beta = float(np.linalg.norm(u)) * (1.0 if g_origin < 0 else -1.0)
    return FormResult(
        u.copy(),
        transform.from_standard(u)[0],
        beta,
        alpha**2,
        it,
        event.model.calls - before,
        list(joint.names),
    )


# ---------------------------------------------------------------- crude MC


def _block_sizes(n_max, block_size):
    n_max, block_size = int(n_max), int(block_size)
    if n_max < 1 or block_size < 1:
        raise ValueError("sample sizes must be >= 1")
    done = 0
    while done < n_max:
        b = min(block_size, n_max - done)
        done += b
        yield b


def _bernoulli_var(p, n):
    return p * (1.0 - p) / n


def mc_pf(event: Event, joint: JointDistribution, n_max, rng, cv_target=None, block_size=1000):
    """Proportion of exceedances, stopping at n_max or once the c.o.v.
    of the estimator drops to ``cv_target``."""
    hits, n, history = 0, 0, []
    before = event.model.calls
    for b in _block_sizes(n_max, block_size):
        X = np.asarray(joint.sample(b, rng))
        y = np.asarray(event.model(X))[:, event.output]
        hits += int(np.count_nonzero(event.occurs(y)))
        n += b
        p = hits / n
        var = _bernoulli_var(p, n)
        history.append((n, p, Z95 * math.sqrt(var)))
        if cv_target is not None and p > 0 and math.sqrt(var) / p <= cv_target:
            break
    return ReliabilityResult(p, var, event.model.calls - before, "monte_carlo", history)


# ---------------------------------------------------------------- importance sampling


def _weighted_stats(total, total_sq, n):
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1) / n
    return mean, var


def importance_sampling_pf(event: Event, joint: JointDistribution, u_star, n_max, rng, cv_target=None,
                           block_size=1000):
    """Standard normal instrumental law shifted to u*.

    Weights phi(U)/phi(U - u*) = exp(|u*|^2/2 - U.u*).
    """
    u_star = np.asarray(u_star, dtype=float).ravel()
    if u_star.size != joint.dimension:
        raise ValueError(f"u* has dimension {u_star.size}, joint has {joint.dimension}")
    g = event.standard(joint)
    half = 0.5 * float(u_star @ u_star)
    s1 = s2 = 0.0
    n, history = 0, []
    before = event.model.calls
    for b in _block_sizes(n_max, block_size):
        U = u_star + rng.standard_normal((b, joint.dimension))
        fail = np.asarray(g(U))[:, 0] > 0
        w = np.where(fail, np.exp(half - U @ u_star), 0.0)
        s1 += float(w.sum())
        s2 += float((w * w).sum())
        n += b
        p, var = _weighted_stats(s1, s2, n)
        history.append((n, p, Z95 * math.sqrt(var)))
        if cv_target is not None and p > 0 and math.sqrt(var) / p <= cv_target:
            break
    return ReliabilityResult(min(p, 1.0), var, event.model.calls - before, "importance_sampling", history)


# ---------------------------------------------------------------- directional sampling


def _chi_mass(d, r1, r2):
    """P(r1 < chi_d <= r2); r2 may be inf."""
    return stats.chi2.sf(np.square(r1), d) - np.where(np.isinf(r2), 0.0, stats.chi2.sf(np.square(np.where(np.isinf(r2), 0.0, r2)), d))


def directional_sampling_pf(event: Event, joint: JointDistribution, n_directions, rng, r_max=8.0, step=0.25,
                            tol=1e-6, max_bisections=60, block_size=250):
    """Radial scan plus bisection along random directions.

    Along direction a the sign of g(r a) is read on the grid step, 2 step,
    ..., r_max (the origin is evaluated once); each sign change is refined
    by bisection to ``tol`` and the failure intervals get their chi_d mass.
    A failure region still open at r_max extends to infinity.
    """
    g = event.standard(joint)
    d = joint.dimension
    before = event.model.calls
    g0 = float(g(np.zeros((1, d)))[0, 0])
    radii = np.arange(1, int(round(r_max / step)) + 1) * step
    m = radii.size
    q_all = []
    flagged = 0
    history = []
    s1 = s2 = 0.0
    n = 0
    for b in _block_sizes(n_directions, block_size):
        A = rng.standard_normal((b, d))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        pts = (radii[None, :, None] * A[:, None, :]).reshape(-1, d)
        G = np.asarray(g(pts))[:, 0].reshape(b, m)
        G = np.column_stack([np.full(b, g0), G])
        R = np.concatenate([[0.0], radii])
        fail = G > 0
        change_dir, change_k = np.nonzero(fail[:, 1:] != fail[:, :-1])
        # bisection on every bracket at once
        lo, hi = R[change_k].copy(), R[change_k + 1].copy()
        lo_fail = fail[change_dir, change_k]
        for _ in range(max_bisections):
            open_ = hi - lo > tol
            if not open_.any():
                break
            idx = np.flatnonzero(open_)
            mid = 0.5 * (lo[idx] + hi[idx])
            gm = np.asarray(g(mid[:, None] * A[change_dir[idx]]))[:, 0] > 0
            same = gm == lo_fail[idx]
            lo[idx[same]] = mid[same]
            hi[idx[~same]] = mid[~same]
        flagged += int(np.count_nonzero(hi - lo > tol))
        roots = 0.5 * (lo + hi)
        q = np.zeros(b)
        for j in range(b):
            r_j = roots[change_dir == j]
            bounds = np.concatenate([[0.0], r_j, [np.inf]])
            state = g0 > 0
            for k in range(bounds.size - 1):
                if state:
                    q[j] += float(_chi_mass(d, bounds[k], bounds[k + 1]))
                state = not state
        q_all.append(q)
        s1 += float(q.sum())
        s2 += float((q * q).sum())
        n += b
        p, var = _weighted_stats(s1, s2, n)
        history.append((n, p, Z95 * math.sqrt(var)))
    diagnostics = {"unresolved_roots": flagged, "r_max": r_max, "step": step}
    return ReliabilityResult(min(p, 1.0), var, event.model.calls - before, "directional_sampling", history, diagnostics)


# ---------------------------------------------------------------- subset sampling


def _chain_correlation(indicators, p):
    """Au-Beck gamma factor from per-chain indicator sequences (chains x length)."""
    nc, length = indicators.shape
    if length < 2 or p <= 0 or p >= 1:
        return 0.0
    r0 = p * (1.0 - p)
    gamma = 0.0
    for k in range(1, length):
        rk = float(np.mean(indicators[:, : length - k] * indicators[:, k:])) - p * p
        gamma += 2.0 * (1.0 - k / length) * rk / r0
    return max(gamma, 0.0)


def subset_sampling_pf(event: Event, joint: JointDistribution, n_per_step, rng, p0=0.1, proposal_range=2.0,
                       max_steps=20):
    """Subset simulation with a component-wise uniform random walk.

    Each level keeps the n p0 largest g values as seeds; the threshold is
    the midpoint between the last kept and the first dropped value.  Seeds
    start chains of length 1/p0 whose states stay above the threshold.
    The c.o.v. combines per-level Bernoulli terms inflated by the chain
    correlation factor.
    """
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie in (0, 1)")
    n = int(n_per_step)
    n_seeds = int(round(n * p0))
    chain_len = int(round(1.0 / p0))
    if n_seeds < 1 or n_seeds * chain_len != n:
        raise ValueError("n_per_step * p0 must be an integer and n_per_step divisible by it")
    g = event.standard(joint)
    d = joint.dimension
    before = event.model.calls
    U = rng.standard_normal((n, d))
    G = np.asarray(g(U))[:, 0]
    delta2 = 0.0
    pf = 1.0
    history, steps = [], []
    level_ind = None
    for step_no in range(1, max_steps + 1):
        order = np.argsort(-G, kind="stable")
        y = 0.5 * (G[order[n_seeds - 1]] + G[order[n_seeds]])
        if y >= 0.0 or step_no == max_steps:
            fail = G > 0
            pk = float(np.mean(fail))
            gamma = 0.0 if level_ind is None else _chain_correlation(fail.reshape(level_ind), pk)
            delta2 += (1.0 - pk) / (n * pk) * (1.0 + gamma) if pk > 0 else 0.0
            pf *= pk
            steps.append({"threshold": 0.0, "probability": pk, "acceptance": None})
            history.append((event.model.calls - before, pf, Z95 * pf * math.sqrt(delta2)))
            break
        pk = n_seeds / n
        fail = G > y
        gamma = 0.0 if level_ind is None else _chain_correlation(fail.reshape(level_ind), pk)
        delta2 += (1.0 - pk) / (n * pk) * (1.0 + gamma)
        pf *= pk
        history.append((event.model.calls - before, pf, Z95 * pf * math.sqrt(delta2)))
        seeds = order[:n_seeds]
        cur_u, cur_g = U[seeds].copy(), G[seeds].copy()
        chains_u = [cur_u.copy()]
        chains_g = [cur_g.copy()]
        accepted = 0
        for _ in range(chain_len - 1):
            cand = cur_u + proposal_range * (rng.random((n_seeds, d)) - 0.5)
            ratio = np.exp(0.5 * (cur_u * cur_u - cand * cand))
            keep = rng.random((n_seeds, d)) < ratio
            cand = np.where(keep, cand, cur_u)
            moved = keep.any(axis=1)
            gc = np.asarray(g(cand))[:, 0]
            ok = moved & (gc > y)
            cur_u = np.where(ok[:, None], cand, cur_u)
            cur_g = np.where(ok, gc, cur_g)
            accepted += int(ok.sum())
            chains_u.append(cur_u.copy())
            chains_g.append(cur_g.copy())
        rate = accepted / (n_seeds * (chain_len - 1))
        steps.append({"threshold": float(y), "probability": pk, "acceptance": rate})
        if rate < 0.05:
            warnings.warn(f"subset step {step_no}: acceptance rate {rate:.3f} below 5%", StagnationWarning, stacklevel=2)
        # rows grouped chain by chain so reshape(n_seeds, chain_len) gives chains
        U = np.stack(chains_u, axis=1).reshape(n, d)
        G = np.stack(chains_g, axis=1).reshape(n)
        level_ind = (n_seeds, chain_len)
    var = (pf * pf) * delta2
    return ReliabilityResult(pf, var, event.model.calls - before, "subset_sampling", history,
                             {"steps": steps, "p0": p0, "n_per_step": n})
