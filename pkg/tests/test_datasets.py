import math
import struct

import numpy as np
import pytest

from operonet.datasets import (
    BurgersInstabilityError,
    ChebCoeffs,
    DatasetError,
    FormatError,
    OperatorDataset,
    burgers_solve,
    cheb_antiderivative,
    cheb_eval,
    dataset_bytes,
    gen_advection,
    gen_burgers,
    gen_differentiation,
    gen_identity,
    generate,
    grf_eigenvalues,
    grf_inputs,
    grf_sample,
    parse_dataset,
    read_dataset,
    realize,
    write_dataset,
)
from operonet.datasets.grf import GRID, K_MAX

from conftest import hand_built_shallow_water

# -- Chebyshev ---------------------------------------------------------------

def test_cheb_eval_examples():
    c = np.zeros(20)
    c[0] = 1.0
    for x in (-1.0, -0.2, 0.7, 1.0):
        assert cheb_eval(c, x) == 1.0
    c = np.zeros(20)
    c[2] = 1.0
    assert cheb_eval(c, 0.0) == -1.0


def test_cheb_eval_matches_trigonometric_definition():
    rng = np.random.default_rng(0)
    for _ in range(20):
        c = rng.uniform(-0.25, 0.25, 20)
        x = 0.3
        direct = sum(cl * np.cos(l * np.arccos(x)) for l, cl in enumerate(c))
        assert abs(cheb_eval(c, x) - direct) < 1e-12
    xs = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(cheb_eval(c, xs), np.polynomial.chebyshev.chebval(xs, c), rtol=0, atol=1e-13)


def test_cheb_domain_and_coefficient_bounds():
    with pytest.raises(ValueError):
        cheb_eval(np.ones(3), 1.0000001)
    with pytest.raises(ValueError):
        ChebCoeffs(np.full(20, 0.26))
    assert ChebCoeffs(np.full(20, 0.25)).c.shape == (20,)


def test_antiderivative_rules():
    # s = T_1 -> u = (x^2 - 1) / 2
    c = np.zeros(20)
    c[1] = 1.0
    x = np.linspace(-1, 1, 100)
    np.testing.assert_allclose(cheb_eval(cheb_antiderivative(c), x), (x * x - 1) / 2, rtol=0, atol=1e-15)
    rng = np.random.default_rng(1)
    c = rng.uniform(-0.25, 0.25, 20)
    ref = np.polynomial.chebyshev.chebint(c, lbnd=-1)
    np.testing.assert_allclose(cheb_antiderivative(c), ref, rtol=0, atol=1e-15)


# -- generators --------------------------------------------------------------

def test_identity_dataset():
    ds = gen_identity(30, seed=4)
    assert (ds.m, ds.q, ds.d_y, ds.n) == (50, 50, 1, 30)
    assert np.array_equal(ds.targets, ds.inputs)
    assert np.array_equal(ds.sensor_locations[:, 0], np.linspace(-1, 1, 50))
    assert np.abs(ds.inputs).max() <= 5.0
    assert dataset_bytes(ds) == dataset_bytes(gen_identity(30, seed=4))
    assert not np.array_equal(ds.inputs, gen_identity(30, seed=5).inputs)


def test_prefix_stability():
    big = gen_identity(20, seed=8)
    assert np.array_equal(big.inputs[:7], gen_identity(7, seed=8).inputs)


def test_differentiation_dataset_structure():
    ds = gen_differentiation(50, seed=2)
    assert (ds.m, ds.q) == (100, 100)
    x = ds.sensor_locations[:, 0]
    assert x[0] == -1.0 and x[-1] == 1.0
    assert np.abs(ds.inputs[:, 0]).max() < 1e-15  # u(-1) = 0
    assert np.abs(ds.targets).max() <= 5.0
    assert dataset_bytes(ds) == dataset_bytes(gen_differentiation(50, seed=2))


def test_differentiation_fine_step_derivative():
    """d/dx of the stored antiderivative, taken with a fine step off the grid,
    reproduces the stored targets."""
    ds = gen_differentiation(20, seed=3)
    x = ds.sensor_locations[1:-1, 0]
    h = 1e-5
    from operonet.datasets.generators import _stream, sample_cheb_coeffs
    for i in range(ds.n):
        c = sample_cheb_coeffs(_stream(3, "differentiation", i))
        a = cheb_antiderivative(c)
        assert np.array_equal(cheb_eval(a, ds.sensor_locations[:, 0]), ds.inputs[i])
        fd = (cheb_eval(a, x + h) - cheb_eval(a, x - h)) / (2 * h)
        assert np.abs(fd - ds.targets[i, 1:-1]).max() < 1e-6


def test_advection_dataset():
    ds = gen_advection(25, seed=6)
    assert (ds.m, ds.q) == (40, 40)
    assert np.array_equal(ds.targets, np.roll(ds.inputs, 20, axis=1))
    # exactly rounded sums, independent of summation order
    assert [math.fsum(r) for r in ds.targets] == [math.fsum(r) for r in ds.inputs]
    assert ds.inputs.min() == 1.0 and ds.inputs.max() <= 2.5
    other = gen_advection(25, seed=7)
    assert not np.array_equal(ds.inputs, other.inputs)
    assert ds.meta["rectangle_ranges"] == {"a": [0.1, 0.4], "omega": [0.2, 0.4], "h": [0.5, 1.5]}


def test_advection_target_matches_shifted_profile():
    """w(0.5, x) = w0((x - 0.5) mod 1), evaluated pointwise."""
    from operonet.datasets.generators import ADVECTION_RANGES, _stream, rectangle
    ds = gen_advection(5, seed=1)
    x = ds.sensor_locations[:, 0]
    for i in range(ds.n):
        rng = _stream(1, "advection", i)
        a, w, h = (rng.uniform(*ADVECTION_RANGES[k], 1)[0] for k in ("a", "omega", "h"))
        assert np.array_equal(ds.targets[i], rectangle((x - 0.5) % 1.0, a, w, h))


def test_generate_dispatch():
    assert generate("identity", 3, 1).name == "identity"
    with pytest.raises(ValueError, match="unknown dataset"):
        generate("heat", 3, 1)


# -- Gaussian random fields ----------------------------------------------------

def test_grf_eigenvalues():
    assert grf_eigenvalues(0) == 1.0
    lam = grf_eigenvalues(np.arange(0, K_MAX + 1))
    assert np.all(np.diff(lam) < 0)
    assert np.array_equal(grf_eigenvalues(-np.arange(5)), grf_eigenvalues(np.arange(5)))


def test_grf_sample_structure():
    s = grf_sample(11)
    c = s.fourier_coefficients
    assert c.shape == (2 * K_MAX + 1,) and s.realization.shape == (GRID,)
    np.testing.assert_array_equal(c[::-1], np.conj(c))
    x = np.arange(GRID) / GRID
    k = s.frequencies
    direct = (c[None, :] * np.exp(2j * np.pi * k[None, :] * x[:, None])).sum(axis=1)
    # the +-K_MAX pair both land on the Nyquist grid mode and sum to a real cosine
    np.testing.assert_allclose(s.realization, direct.real, rtol=0, atol=1e-12)
    assert np.abs(direct.imag).max() < 1e-12
    assert np.array_equal(grf_sample(11).realization, s.realization)


def test_grf_pointwise_variance_matches_trace():
    w = grf_inputs(10_000, seed=7, name="variance-check")
    expected = grf_eigenvalues(np.arange(-K_MAX, K_MAX + 1)).sum()
    assert abs((w * w).mean() / expected - 1) < 0.05


# -- Burgers -----------------------------------------------------------------

def test_burgers_constant_state():
    for c in (0.0, 0.7, -2.5):
        out = burgers_solve(np.full(GRID, c), 0.1, 1.0)
        assert np.abs(out - c).max() <= 1e-14


def test_burgers_heat_limit():
    x = np.arange(GRID) / GRID
    w0 = 1e-3 * np.sin(2 * np.pi * x)
    t = 0.01
    out = burgers_solve(w0, 1.0, t)
    exact = np.exp(-4 * np.pi**2 * t) * w0
    assert np.abs(out - exact).max() < 1e-3 * 1e-3


def test_burgers_grid_refinement():
    s = grf_sample(3)
    coarse = burgers_solve(s.realization, 0.1, 1.0)
    fine = burgers_solve(realize(s.fourier_coefficients, 512), 0.1, 1.0)[::4]
    assert np.abs(coarse - fine).max() / np.abs(fine).max() < 1e-4


def test_burgers_first_order_in_time():
    w0 = grf_sample(5).realization
    ref = burgers_solve(w0, 0.1, 1.0, dt_scale=1 / 16)
    errs = [np.abs(burgers_solve(w0, 0.1, 1.0, dt_scale=s) - ref).max() for s in (1.0, 0.5, 0.25)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 0.9)


def test_burgers_batch_matches_rows():
    w0 = grf_inputs(3, seed=2)
    batch = burgers_solve(w0, 0.1, 0.3)
    for i in range(3):
        assert np.array_equal(batch[i], burgers_solve(w0[i], 0.1, 0.3))


def test_burgers_errors():
    with pytest.raises(ValueError):
        burgers_solve(np.zeros(GRID), 0.0, 1.0)
    w = np.zeros(GRID)
    w[3] = np.nan
    with pytest.raises(BurgersInstabilityError) as exc:
        burgers_solve(w, 0.1, 1.0)
    assert exc.value.step == 0
    x = np.arange(GRID) / GRID
    with pytest.raises(BurgersInstabilityError) as exc:
        w0 = np.sin(2 * np.pi * x) + 0.3 * np.sin(6 * np.pi * x)
        burgers_solve(w0, 1e-3, 1.0, dt_scale=20.0)
    assert exc.value.step > 0


def test_burgers_dataset():
    ds = gen_burgers(4, seed=9)
    assert (ds.m, ds.q, ds.n) == (128, 128, 4)
    assert np.all((ds.targets**2).sum(axis=1) <= (ds.inputs**2).sum(axis=1))
    assert np.abs(ds.targets.mean(axis=1) - ds.inputs.mean(axis=1)).max() < 1e-8
    assert dataset_bytes(ds) == dataset_bytes(gen_burgers(4, seed=9))


# -- containers and ODNB -------------------------------------------------------

def test_dataset_validation():
    x = np.linspace(0, 1, 4)
    with pytest.raises(DatasetError):
        OperatorDataset(x, x, np.zeros((2, 3)), np.zeros((2, 4)))
    with pytest.raises(DatasetError):
        OperatorDataset(x, x, np.zeros((2, 4)), np.zeros((2, 3)))
    with pytest.raises(DatasetError):
        OperatorDataset(x[::-1], x, np.zeros((2, 4)), np.zeros((2, 4)))
    bad = np.zeros((2, 4))
    bad[1, 1] = np.inf
    with pytest.raises(DatasetError):
        OperatorDataset(x, x, bad, np.zeros((2, 4)))


def test_split_and_triplets():
    ds = gen_identity(5, seed=1)
    a, b = ds.split(3)
    assert (a.n, b.n) == (3, 2) and np.array_equal(b.inputs, ds.inputs[3:])
    fi, qi, t = ds.triplets()
    assert fi.size == 250 and fi[:51].tolist() == [0] * 50 + [1] and qi[50] == 0
    assert t[50 * 2 + 7] == ds.targets[2, 7]


@pytest.mark.parametrize("name", ["identity", "differentiation", "advection"])
def test_odnb_round_trip(name, tmp_path):
    ds = generate(name, 6, 3)
    path = tmp_path / "d.odnb"
    write_dataset(ds, path)
    back = read_dataset(path)
    assert back.equals(ds)
    for k in ("sensor_locations", "query_points", "inputs", "targets"):
        assert getattr(back, k).tobytes() == getattr(ds, k).tobytes()
    assert dataset_bytes(back) == path.read_bytes()


def test_odnb_errors(tmp_path):
    raw = dataset_bytes(gen_identity(2, seed=1))
    with pytest.raises(FormatError) as exc:
        parse_dataset(b"XDNB" + raw[4:])
    assert exc.value.offset == 0
    with pytest.raises(FormatError) as exc:
        parse_dataset(raw[:4] + struct.pack("<I", 2) + raw[8:])
    assert exc.value.offset == 4
    for cut in (10, 44, 500, len(raw) - 3):
        with pytest.raises(FormatError):
            parse_dataset(raw[:cut])
    with pytest.raises(FormatError, match="trailing"):
        parse_dataset(raw + b"\0")
    path = tmp_path / "t.odnb"
    path.write_bytes(raw[:300])
    with pytest.raises(FormatError):
        read_dataset(path)


def test_ingests_hand_built_three_input_file(tmp_path):
    path = tmp_path / "sw.odnb"
    raw = hand_built_shallow_water()
    path.write_bytes(raw)
    ds = read_dataset(path)
    assert (ds.m, ds.d_x, ds.d_y, ds.n, ds.q) == (4, 2, 3, 2, 12)
    assert ds.query_points[5].tolist() == [0.5, 0.25, 0.75]
    assert ds.targets[1, 4] == 0.8 * 0.9
    assert dataset_bytes(ds) == raw
