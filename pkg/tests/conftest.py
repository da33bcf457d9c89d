import json
import struct

import numpy as np
import pytest

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def hand_built_shallow_water() -> bytes:
    """Two samples on a 2x2 sensor grid with (t, x1, x2) queries at three
    snapshot times, packed field by field without the library writer."""
    g = [0.25, 0.75]
    sensors = [(a, b) for a in g for b in g]
    queries = [(t, a, b) for t in (0.25, 0.5, 0.75) for a, b in sensors]
    inputs = [[1.0, 1.1, 0.9, 1.2], [0.8, 1.0, 1.05, 0.95]]
    targets = [[v * (1 - 0.1 * k) for k in range(3) for v in row] for row in inputs]
    meta = json.dumps({"name": "shallow-water", "source": "hand-built"}).encode()
    out = b"ODNB" + struct.pack("<I", 1) + struct.pack("<5Q", 4, 2, 3, 2, 12)
    for block in (sensors, queries, inputs, targets):
        for row in block:
            out += struct.pack(f"<{len(row)}d", *row)
    return out + struct.pack("<Q", len(meta)) + meta


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
