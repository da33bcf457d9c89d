"""OPNW parameter checkpoints.

Layout (little-endian)::

    b"OPNW" | version u32 | kind tag u8 | blocks...
    block := name_len u32 | name utf-8 | count u64 | count x float64

Architecture is stored as blocks too (``arch.*``, ``spec.<net>``,
``act.<net>``) so a checkpoint alone rebuilds the model. Parameter blocks are
named ``param.<block>``. Round trips are bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..diffcore import Activation
from ..diffcore.activations import KINDS as ACT_KINDS
from .architectures import KINDS, ChunkConfig, OperatorModel
from .mlp import MlpSpec

MAGIC = b"OPNW"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _blocks(model: OperatorModel):
    yield "arch.m", [model.m]
    yield "arch.d_y", [model.d_y]
    if model.chunk is not None:
        c = model.chunk
        yield "arch.chunk", [c.chunk_size, c.latent_dim, c.num_chunks]
    for net, spec in model.nets.items():
        yield f"spec.{net}", list(spec.layer_widths)
        act = spec.activation
        yield f"act.{net}", [ACT_KINDS.index(act.kind), act.prelu_slope or 0.0]
    for name in model.block_shapes():
        yield f"param.{name}", model.params[name]


def save_checkpoint(model: OperatorModel, path) -> None:
    out = bytearray(MAGIC)
    out += struct.pack("<IB", VERSION, KINDS.index(model.kind))
    for name, values in _blocks(model):
        raw = name.encode("utf-8")
        arr = np.ascontiguousarray(values, dtype="<f8").reshape(-1)
        out += struct.pack("<I", len(raw)) + raw + struct.pack("<Q", arr.size) + arr.tobytes()
    Path(path).write_bytes(bytes(out))


def load_checkpoint(path) -> OperatorModel:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic at offset 0")
    if len(data) < 9:
        raise CheckpointError(f"{path}: truncated header")
    version, tag = struct.unpack_from("<IB", data, 4)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version} at offset 4")
    if tag >= len(KINDS):
        raise CheckpointError(f"{path}: unknown kind tag {tag} at offset 8")
    pos = 9
    blocks: dict[str, np.ndarray] = {}
    while pos < len(data):
        start = pos
        if pos + 4 > len(data):
            raise CheckpointError(f"{path}: truncated block header at offset {start}")
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if pos + n + 8 > len(data):
            raise CheckpointError(f"{path}: truncated block header at offset {start}")
        name = data[pos:pos + n].decode("utf-8")
        pos += n
        (count,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        if pos + 8 * count > len(data):
            raise CheckpointError(f"{path}: block {name!r} truncated at offset {pos}")
        blocks[name] = np.frombuffer(data, dtype="<f8", count=count, offset=pos).astype(np.float64)
        pos += 8 * count

    try:
        kind = KINDS[tag]
        nets = {}
        for key, widths in blocks.items():
            if key.startswith("spec."):
                net = key[5:]
                code, slope = blocks[f"act.{net}"]
                act_kind = ACT_KINDS[int(code)]
                act = Activation(act_kind, float(slope) if act_kind == "prelu" else None)
                nets[net] = MlpSpec(tuple(int(w) for w in widths), act)
        chunk = None
        if "arch.chunk" in blocks:
            c, dz, nc = (int(v) for v in blocks["arch.chunk"])
            chunk = ChunkConfig(c, dz, nc)
        model = OperatorModel(kind, int(blocks["arch.m"][0]), int(blocks["arch.d_y"][0]), nets, chunk=chunk)
        for name, shape in model.block_shapes().items():
            arr = blocks[f"param.{name}"]
            if arr.size != int(np.prod(shape)):
                raise CheckpointError(f"{path}: block {name!r} has {arr.size} values, expected {shape}")
            model.params[name] = arr.reshape(shape)
    except KeyError as exc:
        raise CheckpointError(f"{path}: missing block {exc}") from None
    return model
