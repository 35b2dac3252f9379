"""Coupling with external codes through text files.

A run copies a template into a fresh directory with every ``@name@``
placeholder replaced by the 17-significant-digit rendering of the matching
input, executes the command there and reads the outputs back with
:class:`OutputAnchor` rules.
"""
from __future__ import annotations

import itertools
import re
import shutil
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["OutputAnchor", "WrapperProtocol", "WrapperError", "run_wrapper", "render_value"]


class WrapperError(RuntimeError):
    def __init__(self, message, workdir=None):
        super().__init__(message if workdir is None else f"{message} (kept in {workdir})")
        self.workdir = workdir


def render_value(x):
    """Round-trip-exact decimal rendering."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class OutputAnchor:
    """Where to find one output value.

    Either ``line`` (0-based index, negative counts from the end) or
    ``search`` (first line containing the string; tokens are taken from the
    text following it). ``column`` indexes the tokens obtained by splitting
    on ``separator`` (whitespace when None).
    """

    line: int | None = None
    search: str | None = None
    column: int = 0
    separator: str | None = None

    def extract(self, lines):
        if self.search is not None:
            for text in lines:
                pos = text.find(self.search)
                if pos >= 0:
                    rest = text[pos + len(self.search):]
                    break
            else:
                raise LookupError(f"anchor {self.search!r} not found")
        else:
            try:
                rest = lines[self.line if self.line is not None else 0]
            except IndexError:
                raise LookupError(f"line {self.line} not found") from None
        tokens = [t for t in rest.split(self.separator) if t.strip()]
        try:
            token = tokens[self.column].strip()
        except IndexError:
            raise LookupError(f"column {self.column} not found in {rest!r}") from None
        try:
            return float(token)
        except ValueError:
            raise ValueError(f"unparsable token {token!r}") from None


@dataclass
class WrapperProtocol:
    template_path: Path
    input_names: list
    command: object  # argv list, or a shell string
    output_anchors: list
    output_file: str = "output.txt"
    input_file: str | None = None
    work_root: Path | None = None
    delimiters: tuple = ("@", "@")
    keep_directories: bool = False
    timeout: float | None = None
    _counter: itertools.count = field(default_factory=itertools.count, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self.template_path = Path(self.template_path)
        self.input_names = list(self.input_names)
        self.output_anchors = [
            a if isinstance(a, OutputAnchor) else OutputAnchor(**a) for a in self.output_anchors
        ]
        if self.input_file is None:
            self.input_file = self.template_path.name
        if self.work_root is None:
            self.work_root = Path(tempfile.gettempdir()) / "uqkit-runs"
        self.work_root = Path(self.work_root)
        if self.template_path.exists():
            found = set(self.placeholders())
            missing = [n for n in self.input_names if n not in found]
            if missing:
                raise ValueError(f"template has no placeholder for {missing}")

    @property
    def input_dim(self):
        return len(self.input_names)

    @property
    def output_dim(self):
        return len(self.output_anchors)

    def placeholders(self):
        left, right = (re.escape(d) for d in self.delimiters)
        text = self.template_path.read_text(encoding="utf-8")
        return re.findall(f"{left}([A-Za-z_][A-Za-z_0-9]*){right}", text)

    def render(self, x):
        text = self.template_path.read_text(encoding="utf-8")
        left, right = self.delimiters
        for name, value in zip(self.input_names, x):
            text = text.replace(f"{left}{name}{right}", render_value(value))
        return text

    def next_index(self):
        with self._lock:
            return next(self._counter)


def run_wrapper(protocol: WrapperProtocol, x):
    """Evaluate the external code at one point; returns an array of outputs."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != protocol.input_dim:
        raise ValueError(f"expected {protocol.input_dim} inputs, got {x.shape[0]}")
    protocol.work_root.mkdir(parents=True, exist_ok=True)
    index = protocol.next_index()
    workdir = Path(tempfile.mkdtemp(prefix=f"run_{index:08d}_", dir=protocol.work_root))
    (workdir / protocol.input_file).write_text(protocol.render(x), encoding="utf-8")
    try:
        proc = subprocess.run(
            protocol.command,
            cwd=workdir,
            shell=isinstance(protocol.command, str),
            capture_output=True,
            text=True,
            timeout=protocol.timeout,
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise WrapperError(f"cannot run command: {exc}", workdir) from exc
    if proc.returncode != 0:
        raise WrapperError(
            f"command exited with status {proc.returncode}: {proc.stderr.strip()[:200]}", workdir
        )
    out_path = workdir / protocol.output_file
    if not out_path.exists():
        raise WrapperError(f"output file {protocol.output_file!r} missing", workdir)
    lines = out_path.read_text(encoding="utf-8").splitlines()
    try:
        y = np.array([a.extract(lines) for a in protocol.output_anchors])
    except (LookupError, ValueError) as exc:
        raise WrapperError(str(exc), workdir) from exc
    if not protocol.keep_directories:
        shutil.rmtree(workdir, ignore_errors=True)
    return y
