"""A replayable reverse-mode tape over dense float64 arrays.

A :class:`Tape` is built symbolically (leaves and primitive ops), then evaluated
with :meth:`Tape.forward` and differentiated with :meth:`Tape.backward`. The
leading axis of an array is usually a batch of rows; nothing in the tape treats
it specially.

Matrices are plain ``numpy.ndarray`` objects of dtype float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from . import activations as _act


class DimensionError(ValueError):
    """Array shapes do not fit an operation."""


class TapeStateError(RuntimeError):
    """Tape used out of order (e.g. backward before forward)."""


class NumericError(ArithmeticError):
    """A non-finite value appeared where finite values are required."""


@dataclass
class Node:
    op: str
    parents: tuple[int, ...] = ()
    attrs: dict = field(default_factory=dict)
    name: str | None = None


class Var:
    """Handle to a tape node. Supports ``+ - * @`` for readability."""

    __slots__ = ("tape", "index")

    def __init__(self, tape: "Tape", index: int):
        self.tape = tape
        self.index = index

    @property
    def node(self) -> Node:
        return self.tape.nodes[self.index]

    def __add__(self, other):
        return self.tape.add(self, other)

    def __sub__(self, other):
        return self.tape.add(self, self.tape.scale(other, -1.0))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.tape.scale(self, float(other))
        return self.tape.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.tape.scale(self, -1.0)

    def __matmul__(self, other):
        return self.tape.matmul(self, other)

    def __repr__(self):
        node = self.node
        label = f" {node.name!r}" if node.name else ""
        return f"<Var #{self.index} {node.op}{label}>"


def _shape_ok(declared, actual) -> bool:
    if declared is None:
        return True
    if len(declared) != len(actual):
        return False
    return all(d is None or d == a for d, a in zip(declared, actual))


class Tape:
    def __init__(self):
        self.nodes: list[Node] = []
        self.leaves: list[int] = []
        self._leaf_index: dict[str, int] = {}
        self.values: list[np.ndarray] | None = None
        self.output: int | None = None

    # -- construction -------------------------------------------------
    def _push(self, op, parents=(), name=None, **attrs) -> Var:
        for p in parents:
            if not 0 <= p < len(self.nodes):
                raise ValueError(f"parent #{p} does not exist")
        self.nodes.append(Node(op, tuple(parents), attrs, name))
        return Var(self, len(self.nodes) - 1)

    def leaf(self, name: str, shape=None) -> Var:
        """Declare a named input/parameter. ``None`` entries in shape are free."""
        if name in self._leaf_index:
            raise ValueError(f"duplicate leaf name {name!r}")
        v = self._push("leaf", (), name=name, shape=None if shape is None else tuple(shape))
        self.leaves.append(v.index)
        self._leaf_index[name] = v.index
        return v

    input = leaf
    param = leaf

    def const(self, value, name=None) -> Var:
        return self._push("const", (), name=name, value=np.asarray(value, dtype=np.float64))

    def matmul(self, a: Var, b: Var, name=None) -> Var:
        return self._push("matmul", (a.index, b.index), name)

    def add(self, a: Var, b: Var, name=None) -> Var:
        return self._push("add", (a.index, b.index), name)

    def add_bias(self, a: Var, b: Var, name=None) -> Var:
        """Broadcast-add a vector ``b`` of length n to every row of ``a`` (.., n)."""
        return self._push("add_bias", (a.index, b.index), name)

    def mul(self, a: Var, b: Var, name=None) -> Var:
        return self._push("mul", (a.index, b.index), name)

    def scale(self, a: Var, c: float, name=None) -> Var:
        return self._push("scale", (a.index,), name, c=float(c))

    def activation(self, a: Var, act: "_act.Activation | str", slope: Var | None = None, name=None) -> Var:
        kind = act if isinstance(act, str) else act.kind
        if kind == "prelu":
            if slope is None:
                raise ValueError("prelu needs a slope node")
            return self._push("act", (a.index, slope.index), name, kind=kind)
        return self._push("act", (a.index,), name, kind=kind)

    def concat(self, parts, axis: int = -1, name=None) -> Var:
        return self._push("concat", tuple(p.index for p in parts), name, axis=axis)

    def slice(self, a: Var, start: int, stop: int, name=None) -> Var:
        """``a[..., start:stop]``"""
        return self._push("slice", (a.index,), name, start=int(start), stop=int(stop))

    def reshape(self, a: Var, shape, name=None) -> Var:
        return self._push("reshape", (a.index,), name, shape=tuple(shape))

    def swapaxes(self, a: Var, ax1: int, ax2: int, name=None) -> Var:
        return self._push("swapaxes", (a.index,), name, axes=(ax1, ax2))

    def sum(self, a: Var, axis: int | None = None, name=None) -> Var:
        return self._push("sum", (a.index,), name, axis=axis)

    def vecmat(self, x: Var, w: Var, name=None) -> Var:
        """Row-wise vector-matrix product: ``out[b] = x[b] @ w[b]``."""
        return self._push("vecmat", (x.index, w.index), name)

    def tile(self, a: Var, reps: int, name=None) -> Var:
        """Stack ``reps`` copies of ``a`` along axis 0."""
        return self._push("tile", (a.index,), name, reps=int(reps))

    def repeat(self, a: Var, reps: int, name=None) -> Var:
        """Repeat each row of ``a`` ``reps`` times along axis 0."""
        return self._push("repeat", (a.index,), name, reps=int(reps))

    def repeat_rows(self, a: Var, like: Var, name=None) -> Var:
        """Repeat each row of ``a`` once per row of ``like`` (no gradient to ``like``)."""
        return self._push("repeat_rows", (a.index, like.index), name)

    def take_rows(self, a: Var, rows: Var, name=None) -> Var:
        """``a[rows]`` for an integer-valued index vector ``rows`` (no gradient to ``rows``)."""
        return self._push("take_rows", (a.index, rows.index), name)

    def set_output(self, v: Var):
        self.output = v.index
        return v

    # -- evaluation ---------------------------------------------------
    def _where(self, i: int) -> str:
        node = self.nodes[i]
        label = f" {node.name!r}" if node.name else ""
        return f"node #{i} ({node.op}{label})"

    def _bind(self, positional, named) -> dict[int, np.ndarray]:
        if len(positional) > len(self.leaves):
            raise DimensionError(f"{len(positional)} inputs given, tape declares {len(self.leaves)}")
        bound = {}
        for idx, value in zip(self.leaves, positional):
            bound[idx] = value
        for key, value in named.items():
            if key not in self._leaf_index:
                raise KeyError(f"tape has no leaf named {key!r}")
            bound[self._leaf_index[key]] = value
        missing = [self.nodes[i].name for i in self.leaves if i not in bound]
        if missing:
            raise TapeStateError(f"no value for leaves {missing}")
        return bound

    def forward(self, *inputs, **named) -> np.ndarray:
        """Evaluate the tape. Leaves are bound positionally in declaration order
        and/or by name. Returns the output node value (last node by default)."""
        bound = self._bind(inputs, named)
        vals: list[np.ndarray] = []
        for i, node in enumerate(self.nodes):
            vals.append(self._eval(i, node, vals, bound))
        self.values = vals
        return vals[self._out()]

    def _out(self) -> int:
        if not self.nodes:
            raise TapeStateError("empty tape")
        return self.output if self.output is not None else len(self.nodes) - 1

    def value(self, v: Var) -> np.ndarray:
        if self.values is None:
            raise TapeStateError("forward has not been run")
        return self.values[v.index]

    def _eval(self, i, node, vals, bound):
        op = node.op
        p = [vals[j] for j in node.parents]
        if op == "leaf":
            value = np.asarray(bound[i], dtype=np.float64)
            if not _shape_ok(node.attrs["shape"], value.shape):
                raise DimensionError(f"{self._where(i)}: expected shape {node.attrs['shape']}, got {value.shape}")
            return value
        if op == "const":
            return node.attrs["value"]
        if op == "matmul":
            a, b = p
            if a.ndim < 1 or b.ndim < 1 or a.shape[-1] != b.shape[0]:
                raise DimensionError(f"{self._where(i)}: cannot multiply {a.shape} by {b.shape}")
            return a @ b
        if op in ("add", "mul"):
            a, b = p
            if a.shape != b.shape:
                raise DimensionError(f"{self._where(i)}: operand shapes differ {a.shape} vs {b.shape}")
            return a + b if op == "add" else a * b
        if op == "add_bias":
            a, b = p
            if b.ndim != 1 or a.shape[-1:] != b.shape:
                raise DimensionError(f"{self._where(i)}: bias {b.shape} does not fit {a.shape}")
            return a + b
        if op == "scale":
            return node.attrs["c"] * p[0]
        if op == "act":
            slope = float(p[1].reshape(-1)[0]) if len(p) > 1 else None
            return _act.apply(node.attrs["kind"], p[0], slope)
        if op == "concat":
            try:
                return np.concatenate(p, axis=node.attrs["axis"])
            except ValueError as exc:
                raise DimensionError(f"{self._where(i)}: {exc}") from None
        if op == "slice":
            a = p[0]
            start, stop = node.attrs["start"], node.attrs["stop"]
            if a.ndim == 0 or not 0 <= start <= stop <= a.shape[-1]:
                raise DimensionError(f"{self._where(i)}: slice [{start}:{stop}] out of range for {a.shape}")
            return a[..., start:stop]
        if op == "reshape":
            try:
                return p[0].reshape(node.attrs["shape"])
            except ValueError as exc:
                raise DimensionError(f"{self._where(i)}: {exc}") from None
        if op == "swapaxes":
            return np.swapaxes(p[0], *node.attrs["axes"])
        if op == "sum":
            return np.sum(p[0], axis=node.attrs["axis"])
        if op == "vecmat":
            x, w = p
            if x.ndim != 2 or w.ndim != 3 or w.shape[:2] != x.shape:
                raise DimensionError(f"{self._where(i)}: vecmat of {x.shape} with {w.shape}")
            return _kernels.vecmat(x, w)
        if op == "tile":
            a = p[0]
            return np.tile(a, (node.attrs["reps"],) + (1,) * (a.ndim - 1))
        if op == "repeat":
            return np.repeat(p[0], node.attrs["reps"], axis=0)
        if op == "repeat_rows":
            return np.repeat(p[0], p[1].shape[0], axis=0)
        if op == "take_rows":
            a, rows = p
            idx = rows.astype(np.int64)
            if rows.ndim != 1 or np.any(idx != rows) or (idx.size and (idx.min() < 0 or idx.max() >= a.shape[0])):
                raise DimensionError(f"{self._where(i)}: row index must be integers in [0, {a.shape[0]})")
            return a[idx]
        raise ValueError(f"unknown op {op!r}")

    # -- differentiation ----------------------------------------------
    def backward(self, seed=1.0) -> dict[str, np.ndarray]:
        """Pull ``seed`` back through the tape.

        Returns d(seed . output)/d(leaf) for every leaf, keyed by leaf name.
        Contributions are accumulated in reverse node order, which is fixed.
        """
        if self.values is None:
            raise TapeStateError("backward called before forward")
        vals = self.values
        out = self._out()
        seed = np.asarray(seed, dtype=np.float64)
        if seed.shape != vals[out].shape:
            if seed.ndim == 0:
                seed = np.full(vals[out].shape, float(seed))
            else:
                raise DimensionError(f"seed shape {seed.shape} does not match output {vals[out].shape}")
        grads: dict[int, np.ndarray] = {out: seed}
        owned: set[int] = set()

        def acc(j, g):
            if j not in grads:
                grads[j] = g
            elif j in owned:
                grads[j] += g
            else:
                grads[j] = grads[j] + g
                owned.add(j)

        def acc_region(j, key, g):
            if j not in grads:
                buf = np.zeros(vals[j].shape)
                buf[key] = g
                grads[j] = buf
                owned.add(j)
            else:
                if j not in owned:
                    grads[j] = grads[j].copy()
                    owned.add(j)
                grads[j][key] += g

        for i in range(out, -1, -1):
            if i not in grads:
                continue
            node = self.nodes[i]
            if node.op in ("leaf", "const"):
                continue
            g = grads[i]
            par = node.parents
            pv = [vals[j] for j in par]
            op = node.op
            if op == "matmul":
                a, b = pv
                if b.ndim == 1:
                    acc(par[0], np.multiply.outer(g, b))
                    acc(par[1], np.tensordot(a, g, axes=(tuple(range(a.ndim - 1)), tuple(range(g.ndim)))))
                else:
                    acc(par[0], g @ b.T)
                    a2 = a.reshape(-1, a.shape[-1])
                    acc(par[1], a2.T @ g.reshape(-1, g.shape[-1]))
            elif op == "add":
                acc(par[0], g)
                acc(par[1], g)
            elif op == "add_bias":
                acc(par[0], g)
                acc(par[1], g.reshape(-1, g.shape[-1]).sum(axis=0))
            elif op == "mul":
                acc(par[0], g * pv[1])
                acc(par[1], g * pv[0])
            elif op == "scale":
                acc(par[0], node.attrs["c"] * g)
            elif op == "act":
                kind = node.attrs["kind"]
                x = pv[0]
                slope = float(pv[1].reshape(-1)[0]) if len(pv) > 1 else None
                acc(par[0], g * _act.derivative(kind, x, vals[i], slope))
                if kind == "prelu":
                    gs = np.sum(g * np.where(x > 0.0, 0.0, x))
                    acc(par[1], np.full(pv[1].shape, gs))
            elif op == "concat":
                axis = node.attrs["axis"]
                offset = 0
                for j, v in zip(par, pv):
                    width = v.shape[axis]
                    acc(j, np.take(g, np.arange(offset, offset + width), axis=axis))
                    offset += width
            elif op == "slice":
                acc_region(par[0], (Ellipsis, slice(node.attrs["start"], node.attrs["stop"])), g)
            elif op == "reshape":
                acc(par[0], g.reshape(pv[0].shape))
            elif op == "swapaxes":
                acc(par[0], np.swapaxes(g, *node.attrs["axes"]))
            elif op == "sum":
                axis = node.attrs["axis"]
                if axis is None:
                    acc(par[0], np.full(pv[0].shape, float(g)))
                else:
                    acc(par[0], np.broadcast_to(np.expand_dims(g, axis), pv[0].shape).copy())
            elif op == "vecmat":
                dx, dw = _kernels.vecmat_backward(pv[0], pv[1], g)
                acc(par[0], dx)
                acc(par[1], dw)
            elif op == "tile":
                reps = node.attrs["reps"]
                acc(par[0], g.reshape((reps,) + pv[0].shape).sum(axis=0))
            elif op == "repeat":
                reps = node.attrs["reps"]
                a = pv[0]
                acc(par[0], g.reshape((a.shape[0], reps) + a.shape[1:]).sum(axis=1))
            elif op == "repeat_rows":
                a = pv[0]
                reps = pv[1].shape[0]
                acc(par[0], g.reshape((a.shape[0], reps) + a.shape[1:]).sum(axis=1))
            elif op == "take_rows":
                full = np.zeros(pv[0].shape)
                np.add.at(full, pv[1].astype(np.int64), g)
                acc(par[0], full)
            else:
                raise ValueError(f"no backward rule for {op!r}")

        result = {}
        for idx in self.leaves:
            name = self.nodes[idx].name
            if idx in grads:
                result[name] = np.asarray(grads[idx], dtype=np.float64).reshape(vals[idx].shape)
            else:
                result[name] = np.zeros(vals[idx].shape)
        return result


def forward(tape: Tape, *inputs, **named) -> np.ndarray:
    return tape.forward(*inputs, **named)


def backward(tape: Tape, seed=1.0) -> dict[str, np.ndarray]:
    return tape.backward(seed)
