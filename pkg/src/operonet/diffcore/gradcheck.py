from __future__ import annotations

from typing import Callable

import numpy as np

from .tape import NumericError, Tape, Var


def grad_check(build: Callable[[Tape, Var], Var], point, h: float = 1e-6) -> float:
    """Compare tape gradients with central differences.

    ``build(tape, x)`` receives a fresh tape and a leaf ``x`` shaped like
    ``point`` and returns the output node. Non-scalar outputs are summed.
    Returns ``max_k |analytic_k - numeric_k| / (|numeric_k| + 1e-12)``.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    point = np.array(point, dtype=np.float64)
    tape = Tape()
    x = tape.leaf("x", point.shape)
    out = build(tape, x)
    if out.node.op != "sum" or out.node.attrs.get("axis") is not None:
        out = tape.sum(out)
    tape.set_output(out)

    f0 = tape.forward(x=point)
    if not np.all(np.isfinite(f0)):
        raise NumericError(f"non-finite output at the check point: {f0}")
    analytic = tape.backward(1.0)["x"]
    if not np.all(np.isfinite(analytic)):
        raise NumericError("non-finite analytic gradient")

    numeric = np.empty(point.size)
    flat = point.reshape(-1)
    for k in range(point.size):
        saved = flat[k]
        flat[k] = saved + h
        fp = float(tape.forward(x=point))
        flat[k] = saved - h
        fm = float(tape.forward(x=point))
        flat[k] = saved
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NumericError(f"non-finite value at coordinate {k}")
        numeric[k] = (fp - fm) / (2.0 * h)
    err = np.abs(analytic.reshape(-1) - numeric) / (np.abs(numeric) + 1e-12)
    return float(err.max()) if err.size else 0.0
