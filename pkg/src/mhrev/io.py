"""Kernel files and report serialisation.

A kernel file is either JSON ``{"states": [...], "matrix": [[...]], "kind": ...}``
with kind ``stochastic``, ``signed`` or ``generator``, or a bare CSV matrix read
as a stochastic kernel. Numbers are written with 17 significant digits so a
write/read cycle reproduces every float exactly.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .errors import InvalidKernel
from .kernels import RateGenerator, SignedKernel, StochasticKernel

FILE_TOL = 1e-9
KINDS = {"stochastic": StochasticKernel, "signed": SignedKernel, "generator": RateGenerator}


class KernelFileError(InvalidKernel):
    """Kernel file could not be parsed or fails validation."""


def fmt(x: float) -> str:
    return "%.17g" % x


def build_kernel(matrix, kind: str = "stochastic", tol: float = FILE_TOL):
    if kind not in KINDS:
        raise KernelFileError(f"unknown kernel kind {kind!r}")
    try:
        return KINDS[kind](matrix, tol=tol)
    except InvalidKernel as exc:
        raise KernelFileError(str(exc)) from exc


def parse_kernel(text: str, fmt_hint: str | None = None):
    """Parse kernel text; returns ``(kernel, states)``."""
    stripped = text.lstrip()
    if fmt_hint == "json" or (fmt_hint is None and stripped.startswith("{")):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise KernelFileError(f"invalid JSON: {exc}") from exc
        if not isinstance(doc, dict) or "matrix" not in doc:
            raise KernelFileError("JSON kernel needs a 'matrix' field")
        kind = doc.get("kind", "stochastic")
        try:
            matrix = np.array(doc["matrix"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise KernelFileError(f"matrix is not numeric: {exc}") from exc
        kernel = build_kernel(matrix, kind)
        states = doc.get("states") or [str(i) for i in range(kernel.n)]
        if len(states) != kernel.n:
            raise KernelFileError(f"{len(states)} state names for {kernel.n} states")
        return kernel, [str(s) for s in states]
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    try:
        matrix = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise KernelFileError(f"invalid CSV matrix: {exc}") from exc
    kernel = build_kernel(matrix, "stochastic")
    return kernel, [str(i) for i in range(kernel.n)]


def read_kernel(path):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise KernelFileError(f"cannot read {path}: {exc}") from exc
    hint = "json" if p.suffix.lower() == ".json" else ("csv" if p.suffix.lower() == ".csv" else None)
    return parse_kernel(text, hint)


def kernel_to_json(kernel, states=None) -> str:
    M = np.asarray(kernel)
    states = states or [str(i) for i in range(M.shape[0])]
    rows = ",\n    ".join("[" + ", ".join(fmt(v) for v in row) + "]" for row in M)
    names = ", ".join(json.dumps(s) for s in states)
    kind = getattr(kernel, "kind", "stochastic")
    return f'{{\n  "kind": "{kind}",\n  "states": [{names}],\n  "matrix": [\n    {rows}\n  ]\n}}\n'


def kernel_to_csv(kernel) -> str:
    return "".join(",".join(fmt(v) for v in row) + "\n" for row in np.asarray(kernel))


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def to_json(doc) -> str:
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj
