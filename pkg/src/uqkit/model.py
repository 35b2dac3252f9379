"""The model function ``Y = G(X)`` and its derivatives.

Three backends share one interface: parsed formulas (with exact symbolic
derivatives), native Python callables and external codes driven by
:mod:`uqkit.wrapper`.  Batches may be split over a thread pool; rows always
come back in input order and every evaluated row is counted exactly once.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .expression import Expression, parse_expression
from .sample import Sample, as_array
from .wrapper import WrapperProtocol, run_wrapper

__all__ = ["Model", "ModelEvaluationError", "fd_gradient", "fd_hessian", "default_fd_step"]


class ModelEvaluationError(RuntimeError):
    """Raised when some rows of a batch cannot be evaluated.

    ``rows`` holds the failing row indices of the submitted batch.
    """

    def __init__(self, message, rows):
        shown = ", ".join(str(r) for r in rows[:10])
        more = "" if len(rows) <= 10 else f" (+{len(rows) - 10} more)"
        super().__init__(f"{message} at row(s) {shown}{more}")
        self.rows = list(rows)


def default_fd_step(x, relative=1e-5, floor=1e-7):
    x = np.asarray(x, dtype=float)
    return np.maximum(relative * np.abs(x), floor)


class Model:
    """Vector function R^d -> R^p.

    Use the ``from_*`` constructors rather than ``__init__``.
    ``gradient_policy`` is ``"symbolic"`` (formula backend only), ``"fd"``
    (centred finite differences with ``fd_step``) or ``"user"``.
    """

    def __init__(
        self,
        func,
        input_dim,
        output_dim,
        *,
        backend="native",
        input_names=None,
        output_names=None,
        vectorized=True,
        gradient=None,
        hessian=None,
        gradient_policy=None,
        fd_step=None,
        threads=1,
        expressions=None,
        protocol=None,
    ):
        if input_dim < 1 or output_dim < 1:
            raise ValueError("dimensions must be positive")
        self._func = func
        self.input_dim = int(input_dim)
        self.output_dim = int(output_dim)
        self.backend = backend
        self.input_names = list(input_names or [f"x{i}" for i in range(self.input_dim)])
        self.output_names = list(output_names or [f"y{i}" for i in range(self.output_dim)])
        self.vectorized = vectorized
        self._gradient = gradient
        self._hessian = hessian
        if gradient_policy is None:
            gradient_policy = "user" if gradient is not None else "fd"
        if gradient_policy == "symbolic" and backend != "expression":
            raise ValueError("symbolic derivatives need the expression backend")
        if gradient_policy == "user" and gradient is None:
            raise ValueError("user gradient policy without a gradient callable")
        self.gradient_policy = gradient_policy
        self.fd_step = None if fd_step is None else np.asarray(fd_step, dtype=float)
        self.threads = max(1, int(threads))
        self.expressions = expressions
        self.protocol = protocol
        self._count = 0
        self._lock = threading.Lock()
        self._grad_exprs = None
        self._hess_exprs = None

    # ------------------------------------------------------------ constructors

    @classmethod
    def from_expressions(cls, input_names, formulas, output_names=None, *, gradient="symbolic", **kw):
        if isinstance(formulas, str):
            formulas = [formulas]
        exprs = [f if isinstance(f, Expression) else parse_expression(f, input_names) for f in formulas]

        def func(X):
            return np.column_stack([e.evaluate(X) for e in exprs])

        return cls(
            func,
            len(input_names),
            len(exprs),
            backend="expression",
            input_names=input_names,
            output_names=output_names,
            gradient_policy=gradient,
            expressions=exprs,
            **kw,
        )

    @classmethod
    def from_function(cls, func, input_dim, output_dim=1, *, vectorized=False, **kw):
        """Wrap a Python callable.

        ``vectorized=True`` means ``func`` maps an (n, d) array to (n,) or (n, p).
        Otherwise it is called once per row with a 1-D array.
        """
        return cls(func, input_dim, output_dim, backend="native", vectorized=vectorized, **kw)

    @classmethod
    def from_wrapper(cls, protocol: WrapperProtocol, output_names=None, **kw):
        return cls(
            lambda x: run_wrapper(protocol, x),
            protocol.input_dim,
            protocol.output_dim,
            backend="wrapper",
            input_names=protocol.input_names,
            output_names=output_names,
            vectorized=False,
            protocol=protocol,
            **kw,
        )

    # ------------------------------------------------------------ bookkeeping

    @property
    def calls(self):
        """Number of rows evaluated so far."""
        return self._count

    def reset_counter(self):
        with self._lock:
            self._count = 0

    def _add_calls(self, n):
        with self._lock:
            self._count += n

    def __repr__(self):
        return (
            f"Model({self.backend}, {self.input_names} -> {self.output_names}, "
            f"gradient={self.gradient_policy})"
        )

    # ------------------------------------------------------------ evaluation

    def _eval_chunk(self, X, offset):
        if self.vectorized:
            try:
                Y = np.asarray(self._func(X), dtype=float)
            except (ArithmeticError, ValueError) as exc:
                raise ModelEvaluationError(f"evaluation failed: {exc}", list(range(offset, offset + len(X)))) from exc
            Y = Y.reshape(X.shape[0], self.output_dim)
        else:
            Y = np.empty((X.shape[0], self.output_dim))
            for i, x in enumerate(X):
                try:
                    Y[i] = np.asarray(self._func(x), dtype=float).reshape(self.output_dim)
                except Exception as exc:
                    raise ModelEvaluationError(f"evaluation failed: {exc}", [offset + i]) from exc
        self._add_calls(X.shape[0])
        return Y

    def _evaluate_array(self, X):
        X = as_array(X, self.input_dim)
        n = X.shape[0]
        if n == 0:
            return np.empty((0, self.output_dim))
        workers = min(self.threads, n)
        if workers == 1:
            Y = self._eval_chunk(X, 0)
        else:
            bounds = np.linspace(0, n, (workers if self.vectorized else n) + 1).astype(int)
            parts = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1) if bounds[i + 1] > bounds[i]]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda ab: self._eval_chunk(X[ab[0]:ab[1]], ab[0]), parts))
            Y = np.vstack(results)
        bad = ~np.isfinite(Y).all(axis=1) & np.isfinite(X).all(axis=1)
        if bad.any():
            raise ModelEvaluationError("non-finite output (domain error)", np.flatnonzero(bad).tolist())
        return Y

    def evaluate(self, points) -> Sample:
        """Evaluate every row; returns a labelled :class:`Sample`."""
        return Sample(self._evaluate_array(points), self.output_names)

    def __call__(self, x):
        """Array interface: a 1-D point gives shape (p,), a 2-D batch (n, p)."""
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 1 and arr.shape[0] == self.input_dim:
            return self._evaluate_array(arr[None, :])[0]
        return self._evaluate_array(arr)

    # ------------------------------------------------------------ derivatives

    def _symbolic_gradients(self):
        if self._grad_exprs is None:
            self._grad_exprs = [e.gradient() for e in self.expressions]
        return self._grad_exprs

    def gradient(self, x):
        """Jacobian at ``x``, shape (output_dim, input_dim)."""
        x = np.asarray(x, dtype=float).ravel()
        if self.gradient_policy == "symbolic":
            X = x[None, :]
            return np.array([[g.evaluate(X)[0] for g in row] for row in self._symbolic_gradients()])
        if self.gradient_policy == "user":
            return np.asarray(self._gradient(x), dtype=float).reshape(self.output_dim, self.input_dim)
        return fd_gradient(self, x, self.fd_step)

    def hessian(self, x):
        """Second derivatives, shape (output_dim, input_dim, input_dim)."""
        x = np.asarray(x, dtype=float).ravel()
        if self._hessian is not None:
            return np.asarray(self._hessian(x), dtype=float).reshape(
                self.output_dim, self.input_dim, self.input_dim
            )
        if self.gradient_policy == "symbolic":
            if self._hess_exprs is None:
                self._hess_exprs = [[g.gradient() for g in row] for row in self._symbolic_gradients()]
            X = x[None, :]
            H = np.array([[[h.evaluate(X)[0] for h in hrow] for hrow in out] for out in self._hess_exprs])
            return 0.5 * (H + np.transpose(H, (0, 2, 1)))
        return fd_hessian(self, x)


def fd_gradient(model, x, h=None):
    """Centred finite-difference Jacobian, shape (output_dim, input_dim).

    Default steps are ``max(1e-5 |x_i|, 1e-7)``.  All 2d stencil points are
    evaluated as a single batch.
    """
    x = np.asarray(x, dtype=float).ravel()
    d = x.shape[0]
    h = default_fd_step(x) if h is None else np.broadcast_to(np.asarray(h, dtype=float), (d,))
    if np.any(h <= 0):
        raise ValueError("finite-difference steps must be positive")
    E = np.diag(h)
    stencil = np.vstack([x + E, x - E])
    Y = np.asarray(model(stencil), dtype=float).reshape(2 * d, -1)
    return ((Y[:d] - Y[d:]) / (2.0 * h[:, None])).T


def fd_hessian(model, x, h=None):
    """Centred second-difference Hessian per output, symmetrised.

    Default steps ``max(1e-4 |x_i|, 1e-4)``: the second difference divides
    by h^2 so it needs larger steps than the gradient.
    """
    x = np.asarray(x, dtype=float).ravel()
    d = x.shape[0]
    h = default_fd_step(x, 1e-4, 1e-4) if h is None else np.broadcast_to(np.asarray(h, dtype=float), (d,))
    if np.any(h <= 0):
        raise ValueError("finite-difference steps must be positive")
    E = np.diag(h)
    pts = [x]
    for i in range(d):
        pts += [x + E[i], x - E[i]]
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    for i, j in pairs:
        pts += [x + E[i] + E[j], x + E[i] - E[j], x - E[i] + E[j], x - E[i] - E[j]]
    Y = np.asarray(model(np.array(pts)), dtype=float).reshape(len(pts), -1)
    p = Y.shape[1]
    H = np.zeros((p, d, d))
    f0 = Y[0]
    for i in range(d):
        H[:, i, i] = (Y[1 + 2 * i] - 2.0 * f0 + Y[2 + 2 * i]) / h[i] ** 2
    base = 1 + 2 * d
    for k, (i, j) in enumerate(pairs):
        a, b, c, e = Y[base + 4 * k: base + 4 * k + 4]
        H[:, i, j] = H[:, j, i] = (a - b - c + e) / (4.0 * h[i] * h[j])
    return 0.5 * (H + np.transpose(H, (0, 2, 1)))
