"""The six operator networks behind one interface.

Every model maps a batch of sensor vectors ``u`` (B, m) and query points ``y``
(B, d_y) to predictions (B,). Parameters live in named flat blocks
(``model.params``) in a fixed order; MLP blocks use the layout documented in
:mod:`operonet.models.mlp`.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from ..diffcore import Activation, DimensionError, Tape
from ..rng import Xoshiro256, derive_seed
from .mlp import MlpParams, MlpSpec, count_params, mlp_tape

KINDS = ("deeponet", "shift", "flex", "nomad", "hyper", "chunked_hyper")

# trainable sub-networks per kind, in parameter-block order
TRAINABLE_NETS = {
    "deeponet": ("branch", "trunk"),
    "shift": ("scale", "shift", "branch", "trunk"),
    "flex": ("pre", "branch", "trunk"),
    "nomad": ("branch", "target"),
    "hyper": ("hyper",),
    "chunked_hyper": ("hyper",),
}

HYPER_OUTPUT_DAMPING = 0.1


class ConstructionError(ValueError):
    """Sub-network widths are inconsistent for the requested architecture."""


@dataclass(frozen=True)
class ChunkConfig:
    chunk_size: int
    latent_dim: int = 8
    num_chunks: int | None = None

    def resolved(self, n_theta: int) -> "ChunkConfig":
        n_c = self.num_chunks if self.num_chunks is not None else math.ceil(n_theta / self.chunk_size)
        if self.chunk_size < 1 or self.latent_dim < 1:
            raise ConstructionError(f"chunk_size and latent_dim must be positive: {self}")
        if n_c * self.chunk_size < n_theta:
            raise ConstructionError(
                f"{n_c} chunks of {self.chunk_size} cannot cover {n_theta} target parameters"
            )
        return ChunkConfig(self.chunk_size, self.latent_dim, n_c)

    def generated(self) -> int:
        return self.chunk_size * self.num_chunks


@dataclass
class OperatorModel:
    kind: str
    m: int
    d_y: int
    nets: dict[str, MlpSpec]
    params: dict[str, np.ndarray] = field(default_factory=dict)
    chunk: ChunkConfig | None = None

    @property
    def target_spec(self) -> MlpSpec | None:
        return self.nets.get("target")

    def block_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        for net in TRAINABLE_NETS[self.kind]:
            spec = self.nets[net]
            shapes[net] = (count_params(spec),)
            if spec.activation.kind == "prelu" and spec.n_hidden:
                shapes[f"{net}.prelu"] = (spec.n_hidden,)
        if self.kind in ("hyper", "chunked_hyper"):
            target = self.nets["target"]
            if target.activation.kind == "prelu" and target.n_hidden:
                shapes["target.prelu"] = (target.n_hidden,)
        if self.kind == "deeponet":
            shapes["tau0"] = (1,)
        if self.kind == "chunked_hyper":
            shapes["latents"] = (self.chunk.num_chunks * self.chunk.latent_dim,)
        return shapes

    def n_params(self) -> int:
        return sum(int(np.prod(s)) for s in self.block_shapes().values())

    def get_flat(self) -> np.ndarray:
        return np.concatenate([self.params[k].reshape(-1) for k in self.block_shapes()])

    def set_flat(self, flat) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        offset = 0
        for name, shape in self.block_shapes().items():
            n = int(np.prod(shape))
            self.params[name] = flat[offset:offset + n].reshape(shape).copy()
            offset += n
        if offset != flat.size:
            raise DimensionError(f"flat vector has {flat.size} entries, model needs {offset}")

    def net_params(self, net: str) -> MlpParams:
        return MlpParams(self.params[net], self.nets[net])

    def copy(self) -> "OperatorModel":
        return copy.deepcopy(self)

    def describe(self) -> str:
        parts = [f"{k}={v}" for k, v in self.nets.items()]
        if self.chunk:
            parts.append(f"chunk=C{self.chunk.chunk_size}/dz{self.chunk.latent_dim}/Nc{self.chunk.num_chunks}")
        return f"{self.kind}(m={self.m}, d_y={self.d_y}, " + ", ".join(parts) + ")"


def _zero_params(model: OperatorModel) -> OperatorModel:
    for name, shape in model.block_shapes().items():
        model.params[name] = np.zeros(shape)
    for name in model.params:
        if name.endswith(".prelu"):
            net = name.split(".")[0]
            model.params[name][:] = model.nets[net].activation.prelu_slope
    return model


def _need(cond: bool, msg: str):
    if not cond:
        raise ConstructionError(msg)


def make_deeponet(m: int, branch: MlpSpec, trunk: MlpSpec) -> OperatorModel:
    _need(branch.n_in == m, f"branch input width {branch.n_in} != m={m}")
    _need(branch.n_out == trunk.n_out, f"branch output {branch.n_out} != trunk output {trunk.n_out}")
    return _zero_params(OperatorModel("deeponet", m, trunk.n_in, {"branch": branch, "trunk": trunk}))


def make_shift_deeponet(m: int, scale: MlpSpec, shift: MlpSpec, branch: MlpSpec, trunk: MlpSpec, d_y: int = 1) -> OperatorModel:
    w = trunk.n_in
    _need(all(s.n_in == m for s in (scale, shift, branch)), "scale/shift/branch nets must read m sensors")
    _need(scale.n_out == w * d_y, f"scale-net output {scale.n_out} != w*d_y = {w}*{d_y}")
    _need(shift.n_out == w, f"shift-net output {shift.n_out} != trunk input width {w}")
    _need(branch.n_out == trunk.n_out, f"branch output {branch.n_out} != trunk output {trunk.n_out}")
    nets = {"scale": scale, "shift": shift, "branch": branch, "trunk": trunk}
    return _zero_params(OperatorModel("shift", m, d_y, nets))


def make_flex_deeponet(m: int, pre: MlpSpec, branch: MlpSpec, trunk: MlpSpec) -> OperatorModel:
    _need(trunk.n_layers >= 1, "trunk needs a first layer")
    w = trunk.layer_widths[1]
    _need(pre.n_in == m and branch.n_in == m, "pre-net and branch must read m sensors")
    _need(pre.n_out == w, f"pre-net output {pre.n_out} != trunk first hidden width {w}")
    _need(branch.n_out == trunk.n_out + 1, f"branch output {branch.n_out} != p+1 = {trunk.n_out + 1}")
    return _zero_params(OperatorModel("flex", m, trunk.n_in, {"pre": pre, "branch": branch, "trunk": trunk}))


def make_nomad(m: int, branch: MlpSpec, target: MlpSpec, d_y: int = 1) -> OperatorModel:
    _need(branch.n_in == m, f"branch input width {branch.n_in} != m={m}")
    _need(target.n_in == branch.n_out + d_y, f"target input {target.n_in} != p + d_y = {branch.n_out + d_y}")
    _need(target.n_out == 1, "target must have one output")
    return _zero_params(OperatorModel("nomad", m, d_y, {"branch": branch, "target": target}))


def make_hyper_deeponet(m: int, hyper: MlpSpec, target: MlpSpec) -> OperatorModel:
    n_theta = count_params(target)
    _need(hyper.n_in == m, f"hypernetwork input width {hyper.n_in} != m={m}")
    _need(hyper.n_out == n_theta, f"hypernetwork output {hyper.n_out} != N_theta({target}) = {n_theta}")
    _need(target.n_out == 1, "target must have one output")
    return _zero_params(OperatorModel("hyper", m, target.n_in, {"hyper": hyper, "target": target}))


def make_chunked_hyper(m: int, hyper: MlpSpec, target: MlpSpec, chunk: ChunkConfig) -> OperatorModel:
    chunk = chunk.resolved(count_params(target))
    _need(hyper.n_in == m + chunk.latent_dim, f"hypernetwork input {hyper.n_in} != m + d_z = {m + chunk.latent_dim}")
    _need(hyper.n_out == chunk.chunk_size, f"hypernetwork output {hyper.n_out} != chunk size {chunk.chunk_size}")
    _need(target.n_out == 1, "target must have one output")
    model = OperatorModel("chunked_hyper", m, target.n_in, {"hyper": hyper, "target": target}, chunk=chunk)
    return _zero_params(model)


def phi_map(X, y) -> np.ndarray:
    """Row-wise product of a w x d_y matrix with a query vector."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != y.shape[-1]:
        raise DimensionError(f"phi_map: X {X.shape} does not fit y {y.shape}")
    return X @ y


# -- graph construction --------------------------------------------------

def build_graph(model: OperatorModel, tape: Tape | None = None):
    """Record ``model`` on a tape. Returns ``(tape, output)``.

    Leaves: ``sensors`` (F, m) holds distinct input functions, ``rows`` (B,)
    says which function each query row belongs to, ``y`` (B, d_y) holds the
    queries, plus one leaf per parameter block. Networks that only see the
    input function run once per function and are then gathered to rows.
    """
    tape = tape or Tape()
    u = tape.leaf("sensors", (None, model.m))
    rows = tape.leaf("rows", (None,))
    y = tape.leaf("y", (None, model.d_y))
    p = {name: tape.leaf(name, shape) for name, shape in model.block_shapes().items()}
    nets = model.nets

    def net(name, x, **kw):
        return mlp_tape(tape, nets[name], p[name], x, p.get(f"{name}.prelu"), name=name, **kw)

    def per_row(name):
        return tape.take_rows(net(name, u), rows, name=f"{name}.rows")

    kind = model.kind
    if kind == "deeponet":
        beta = per_row("branch")
        tau = net("trunk", y)
        inner = tape.reshape(tape.sum(tape.mul(beta, tau), axis=1), (-1, 1))
        out = tape.add_bias(inner, p["tau0"])
    elif kind == "shift":
        w = nets["trunk"].n_in
        X = tape.reshape(per_row("scale"), (-1, w, model.d_y), name="phi.X")
        moved = tape.vecmat(y, tape.swapaxes(X, 1, 2), name="phi")
        moved = tape.add(moved, per_row("shift"), name="phi+shift")
        out = tape.sum(tape.mul(per_row("branch"), net("trunk", moved)), axis=1)
    elif kind == "flex":
        beta = per_row("branch")
        p_out = nets["trunk"].n_out
        tau = net("trunk", y, first_preact_shift=per_row("pre"))
        coeff = tape.slice(beta, 1, p_out + 1)
        inner = tape.sum(tape.mul(coeff, tau), axis=1)
        out = tape.add(tape.reshape(tape.slice(beta, 0, 1), (-1,)), inner)
    elif kind == "nomad":
        out = net("target", tape.concat([per_row("branch"), y], axis=1))
    elif kind == "hyper":
        theta = per_row("hyper")
        out = mlp_tape(tape, nets["target"], theta, y, p.get("target.prelu"), rowwise=True, name="target")
    elif kind == "chunked_hyper":
        ch = model.chunk
        n_theta = count_params(nets["target"])
        z = tape.reshape(p["latents"], (ch.num_chunks, ch.latent_dim), name="latents")
        # row r = j * F + f holds (u_f, z_j)
        uu = tape.tile(u, ch.num_chunks, name="u.tiled")
        zz = tape.repeat_rows(z, u, name="z.repeated")
        chunks = net("hyper", tape.concat([uu, zz], axis=1))
        chunks = tape.reshape(chunks, (ch.num_chunks, -1, ch.chunk_size))
        theta = tape.reshape(tape.swapaxes(chunks, 0, 1), (-1, ch.num_chunks * ch.chunk_size))
        theta = tape.slice(theta, 0, n_theta, name="theta")
        theta = tape.take_rows(theta, rows, name="theta.rows")
        out = mlp_tape(tape, nets["target"], theta, y, p.get("target.prelu"), rowwise=True, name="target")
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    out = tape.reshape(out, (-1,), name="output")
    tape.set_output(out)
    return tape, out


def _feed(model: OperatorModel, sensors, ys, rows) -> dict:
    feed = {"sensors": sensors, "y": ys, "rows": rows}
    feed.update(model.params)
    return feed


def _as_rows(model, sensors, ys, rows=None):
    sensors = np.asarray(sensors, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if sensors.ndim == 1:
        sensors = sensors[None, :]
    if ys.ndim == 1:
        ys = ys[:, None] if model.d_y == 1 else ys.reshape(1, -1)
    if sensors.shape[1] != model.m:
        raise DimensionError(f"expected {model.m} sensor values, got {sensors.shape[1]}")
    if ys.shape[1] != model.d_y:
        raise DimensionError(f"expected queries of dimension {model.d_y}, got {ys.shape[1]}")
    if rows is None:
        if sensors.shape[0] != ys.shape[0]:
            raise DimensionError(f"{sensors.shape[0]} sensor rows vs {ys.shape[0]} query rows")
        rows = np.arange(ys.shape[0])
    rows = np.asarray(rows, dtype=np.int64).reshape(-1)
    if rows.size != ys.shape[0]:
        raise DimensionError(f"{rows.size} row indices vs {ys.shape[0]} query rows")
    return sensors, ys, rows


def rows_per_chunk(model: OperatorModel, budget: int = 1 << 22, cap: int = 8192) -> int:
    """Largest row chunk whose per-row generated parameters fit in ``budget`` floats."""
    target = model.nets.get("target")
    if model.kind in ("hyper", "chunked_hyper"):
        width = count_params(target)
    else:
        width = max(max(spec.layer_widths) for spec in model.nets.values())
    return max(1, min(cap, budget // max(width, 1)))


def compact_rows(rows):
    """Distinct function indices and, per row, the position of its function among them."""
    return np.unique(np.asarray(rows, dtype=np.int64), return_inverse=True)


def model_forward(model: OperatorModel, sensors, y) -> float:
    """G_theta(u)(y) for one input function and one query point."""
    sensors = np.asarray(sensors, dtype=np.float64).reshape(1, -1)
    y = np.asarray(y, dtype=np.float64).reshape(1, -1)
    return float(predict(model, sensors, y)[0])


def predict(model: OperatorModel, sensors, ys, max_rows: int = 8192, rows=None, tape=None) -> np.ndarray:
    """Batched forward.

    Without ``rows``, ``sensors`` (B, m) and ``ys`` (B, d_y) are aligned row by
    row. With ``rows``, query ``k`` is paired with ``sensors[rows[k]]``.
    """
    sensors, ys, rows = _as_rows(model, sensors, ys, rows)
    if tape is None:
        tape, _ = build_graph(model)
    out = np.empty(ys.shape[0])
    for start in range(0, ys.shape[0], max_rows):
        stop = min(start + max_rows, ys.shape[0])
        funcs, local = compact_rows(rows[start:stop])
        out[start:stop] = tape.forward(**_feed(model, sensors[funcs], ys[start:stop], local))
    return out


def value_and_grad(model: OperatorModel, sensors, ys, seed_fn, rows=None, tape=None):
    """Forward a batch, then backward with ``seed_fn(pred) -> (value, seed)``.

    Returns ``(value, pred, grads)`` where grads maps parameter block names to
    arrays shaped like the blocks.
    """
    sensors, ys, rows = _as_rows(model, sensors, ys, rows)
    if tape is None:
        tape, _ = build_graph(model)
    funcs, local = compact_rows(rows)
    pred = tape.forward(**_feed(model, sensors[funcs], ys, local))
    value, seed = seed_fn(pred)
    grads = tape.backward(seed)
    return value, pred, {k: grads[k] for k in model.block_shapes()}


# -- initialization --------------------------------------------------------

def _glorot(rng: Xoshiro256, spec: MlpSpec, final_scale: float = 1.0) -> np.ndarray:
    flat = np.zeros(count_params(spec))
    last = spec.n_layers - 1
    for k, (fi, fo, ws, bs, _end) in enumerate(spec.layer_slices()):
        bound = math.sqrt(6.0 / (fi + fo))
        W = rng.uniform(-bound, bound, fi * fo)
        if k == last:
            W *= final_scale
        flat[ws:bs] = W
    return flat


def init_params(model: OperatorModel, seed: int) -> OperatorModel:
    """Glorot-uniform weights, zero biases; hypernetwork output layer damped by
    0.1; tau0 and chunk latents from U[-0.1, 0.1]; prelu slopes at their
    initial value. Fully determined by ``seed``. Modifies ``model`` in place."""
    rng = Xoshiro256(derive_seed(seed, "init", model.kind))
    for name, shape in model.block_shapes().items():
        if name.endswith(".prelu"):
            net = name.split(".")[0]
            model.params[name] = np.full(shape, model.nets[net].activation.prelu_slope)
        elif name in ("tau0", "latents"):
            model.params[name] = rng.uniform(-0.1, 0.1, int(np.prod(shape)))
        else:
            damp = HYPER_OUTPUT_DAMPING if name == "hyper" else 1.0
            model.params[name] = _glorot(rng, model.nets[name], damp)
    return model


# -- DeepONet inside HyperDeepONet -------------------------------------------

def embed_deeponet_as_hyper(d: OperatorModel) -> OperatorModel:
    """Exact HyperDeepONet equivalent of a DeepONet.

    The target network is the trunk with its last layer replaced by a scalar
    output layer. The hypernetwork is the branch with its last affine layer
    composed with a fixed affine map that emits the trunk's hidden weights as
    constants, ``W_L @ beta`` as the output weights and ``b_L . beta + tau0``
    as the output bias.
    """
    if d.kind != "deeponet":
        raise ValueError(f"expected a deeponet, got {d.kind}")
    branch, trunk = d.nets["branch"], d.nets["trunk"]
    target = MlpSpec(trunk.layer_widths[:-1] + (1,), trunk.activation)
    n_theta = count_params(target)
    p = branch.n_out

    trunk_layers = list(MlpParams(d.params["trunk"], trunk).layers())
    W_L, b_L = trunk_layers[-1]  # (t_last, p), (p,)
    M = np.zeros((p, n_theta))
    c = np.zeros(n_theta)
    slices = list(target.layer_slices())
    for (W, b), (_fi, _fo, ws, bs, end) in zip(trunk_layers[:-1], slices[:-1]):
        c[ws:bs] = W.reshape(-1)
        c[bs:end] = b
    _fi, _fo, ws, bs, end = slices[-1]
    M[:, ws:bs] = W_L.T  # output weight r = sum_k W_L[r, k] beta_k
    M[:, bs] = b_L
    c[bs] = d.params["tau0"][0]

    branch_layers = list(MlpParams(d.params["branch"], branch).layers())
    Wb, bb = branch_layers[-1]
    hyper = branch.with_output(n_theta)
    flat = np.zeros(count_params(hyper))
    hs = list(hyper.layer_slices())
    for (W, b), (_fi, _fo, ws_, bs_, end_) in zip(branch_layers[:-1], hs[:-1]):
        flat[ws_:bs_] = W.reshape(-1)
        flat[bs_:end_] = b
    _fi, _fo, ws_, bs_, end_ = hs[-1]
    flat[ws_:bs_] = (Wb @ M).reshape(-1)
    flat[bs_:end_] = bb @ M + c

    model = make_hyper_deeponet(d.m, hyper, target)
    model.params["hyper"] = flat
    if "branch.prelu" in d.params:
        model.params["hyper.prelu"] = d.params["branch.prelu"].copy()
    if "trunk.prelu" in d.params and target.n_hidden:
        model.params["target.prelu"] = d.params["trunk.prelu"][: target.n_hidden].copy()
    return model


def total_params(model: OperatorModel) -> int:
    return model.n_params()


__all__ = [
    "KINDS",
    "Activation",
    "ChunkConfig",
    "ConstructionError",
    "OperatorModel",
    "make_deeponet",
    "make_shift_deeponet",
    "make_flex_deeponet",
    "make_nomad",
    "make_hyper_deeponet",
    "make_chunked_hyper",
    "phi_map",
    "build_graph",
    "model_forward",
    "predict",
    "value_and_grad",
    "init_params",
    "embed_deeponet_as_hyper",
]
