"""State sampling, reductions, and the checkpoint format."""

import struct

import numpy as np
import pytest

from qwork.errors import CapacityError, ConfigError, DimensionError
from qwork.statevec import (CHECKPOINT_MAGIC, StateVector, basis_state,
                            check_capacity, expectation_sz_total,
                            haar_random, inner, load_checkpoint,
                            save_checkpoint, wrap_state)


def test_haar_normalized_and_deterministic():
    a = haar_random(6, seed=42)
    b = haar_random(6, seed=42)
    c = haar_random(6, seed=43)
    assert a.norm() == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)
    assert a.seed == 42


def test_haar_matches_pinned_generator():
    # re-derive the amplitudes from the raw Philox stream
    dim = 32
    raw = np.random.Philox(key=9).random_raw(2 * dim)
    u1 = ((raw[:dim] >> np.uint64(11)) + np.uint64(1)) * 2.0**-53
    u2 = (raw[dim:] >> np.uint64(11)) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u1))
    z = r * np.cos(2 * np.pi * u2) + 1j * r * np.sin(2 * np.pi * u2)
    z /= np.linalg.norm(z)
    got = haar_random(5, seed=9)
    assert np.max(np.abs(got.data - z)) < 1e-15


def test_haar_amplitude_statistics():
    psi = haar_random(12, seed=0)
    dim = psi.dim
    # each quadrature carries 1/(2 dim) of the unit norm on average
    var_re = np.var(psi.data.real)
    var_im = np.var(psi.data.imag)
    assert var_re == pytest.approx(0.5 / dim, rel=0.1)
    assert var_im == pytest.approx(0.5 / dim, rel=0.1)
    assert abs(np.mean(psi.data.real)) < 4.0 / np.sqrt(dim) * np.sqrt(var_re)


def test_haar_seed_validation():
    with pytest.raises(ConfigError):
        haar_random(3, seed=-1)
    with pytest.raises(ConfigError):
        haar_random(3, seed=2**64 - 1)
    with pytest.raises(ConfigError):
        haar_random(0, seed=1)


def test_state_is_read_only():
    psi = haar_random(4, seed=1)
    with pytest.raises(ValueError):
        psi.data[0] = 1.0
    copy = psi.writable_copy()
    copy[0] = 1.0
    assert psi.data[0] != 1.0 or copy[0] == psi.data[0]


def test_state_validation():
    with pytest.raises(DimensionError):
        StateVector(data=np.zeros(3, np.complex128), n_spins=2)
    with pytest.raises(DimensionError):
        StateVector(data=np.zeros(4, np.float64), n_spins=2)


def test_basis_state_and_inner():
    e0 = basis_state(3, 0)
    e5 = basis_state(3, 5)
    assert inner(e0, e5) == 0
    assert inner(e5, e5) == pytest.approx(1.0)
    with pytest.raises(DimensionError):
        basis_state(2, 4)
    with pytest.raises(DimensionError):
        inner(e0, basis_state(2, 0))


def test_inner_matches_vdot():
    a = haar_random(8, seed=11)
    b = haar_random(8, seed=12)
    assert inner(a, b) == pytest.approx(np.vdot(a.data, b.data), abs=1e-14)


def test_sz_leg_expectations():
    # all up: each leg carries +L/2
    up = basis_state(6, 0b111111)
    s1, s2 = expectation_sz_total(up)
    assert (s1, s2) == (1.5, 1.5)
    # leg 1 up (even bits), leg 2 down
    mixed = basis_state(6, 0b010101)
    s1, s2 = expectation_sz_total(mixed)
    assert (s1, s2) == (1.5, -1.5)


def test_checkpoint_roundtrip(tmp_path):
    psi = haar_random(5, seed=77)
    path = tmp_path / "state.qwrk"
    save_checkpoint(psi, path)
    back = load_checkpoint(path)
    assert back.n_spins == 5
    assert back.seed == 77
    assert np.array_equal(back.data, psi.data)  # bit-exact


def test_checkpoint_header_layout(tmp_path):
    psi = haar_random(3, seed=5)
    path = tmp_path / "state.qwrk"
    save_checkpoint(psi, path)
    blob = path.read_bytes()
    magic, version, n, seed = struct.unpack("<4sIIQ", blob[:20])
    assert magic == CHECKPOINT_MAGIC
    assert (version, n, seed) == (1, 3, 5)
    assert len(blob) == 20 + 16 * 8


def test_checkpoint_derived_seed(tmp_path):
    psi = wrap_state(basis_state(3, 1).data, 3)
    path = tmp_path / "state.qwrk"
    save_checkpoint(psi, path)
    assert load_checkpoint(path).seed == "derived"


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.qwrk"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(ConfigError):
        load_checkpoint(path)
    path.write_bytes(b"QW")
    with pytest.raises(ConfigError):
        load_checkpoint(path)
    # right header, short payload
    good = struct.pack("<4sIIQ", CHECKPOINT_MAGIC, 1, 4, 0) + b"\x00" * 10
    path.write_bytes(good)
    with pytest.raises(ConfigError):
        load_checkpoint(path)


def test_capacity_refusal():
    with pytest.raises(CapacityError) as err:
        check_capacity(30, memory_budget=2**20)
    assert "2^30" in str(err.value)
    assert err.value.required_bytes > err.value.budget_bytes
    check_capacity(10, memory_budget=2**20)  # fits, no raise
