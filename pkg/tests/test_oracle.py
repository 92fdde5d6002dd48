"""Dense reference implementation: internal consistency checks.

The single-rung eigenvalues are frozen from the 4-dimensional bond
matrix worked out by hand for coupling 0.2 and anisotropy 0.6: the
polarized states sit at J*D/4 = 0.03 (twice), the symmetric and
antisymmetric flips at -J*D/4 +- J/2, i.e. 0.07 and -0.13.
"""

import numpy as np
import pytest

from qwork.errors import CapacityError
from qwork.evolve import IntegratorConfig
from qwork.lattice import FieldProtocol, LadderSpec, leg_difference
from qwork.oracle import (MAX_DENSE_SPINS, MAX_WORKDIST_SPINS,
                          dense_hamiltonian, diagonalize, exact_filter,
                          exact_propagate, exact_work_distribution)
from qwork.statevec import haar_random, inner, wrap_state

RUNG_LEVELS = np.array([-0.13, 0.03, 0.03, 0.07])


def test_dense_hermitian_real_symmetric():
    spec = LadderSpec(length=2)
    for c in (0.0, 0.41):
        h = dense_hamiltonian(spec, c)
        assert np.allclose(h, h.T, atol=1e-15)
        assert np.isrealobj(h)


def test_dense_commutes_with_total_magnetization():
    spec = LadderSpec(length=2)
    # total S^z is diagonal: half the (ups - downs) per basis state
    states = np.arange(spec.dim)
    ups = np.array([bin(s).count("1") for s in states])
    sz = np.diag(ups - spec.n_spins / 2.0)
    for c in (0.0, 0.37):
        h = dense_hamiltonian(spec, c)
        assert np.max(np.abs(h @ sz - sz @ h)) < 1e-13


def test_field_term_couples_to_leg_difference():
    spec = LadderSpec(length=2)
    h0 = dense_hamiltonian(spec, 0.0)
    h1 = dense_hamiltonian(spec, 0.8)
    diff = np.diag(h1 - h0)
    # -c * (Sz_leg1 - Sz_leg2) = -c/2 * (leg bit difference)
    expected = -0.8 * 0.5 * leg_difference(spec.n_spins)
    assert np.allclose(diff, expected, atol=1e-14)
    assert np.max(np.abs((h1 - h0) - np.diag(diff))) == 0.0


def test_single_rung_frozen_spectrum():
    spectrum = diagonalize(LadderSpec(length=1))
    assert np.max(np.abs(spectrum.eigenvalues
                         - np.sort(RUNG_LEVELS))) < 1e-12


def test_eigenvectors_orthonormal():
    spectrum = diagonalize(LadderSpec(length=2), field_factor=0.2)
    v = spectrum.eigenvectors
    assert np.max(np.abs(v.T @ v - np.eye(spectrum.dim))) < 1e-12


def test_exact_propagate_unitary_and_composes():
    spec = LadderSpec(length=2)
    spectrum = diagonalize(spec)
    psi = haar_random(spec.n_spins, seed=12)
    a = exact_propagate(spectrum, 0.7, psi)
    assert a.norm() == pytest.approx(1.0, abs=1e-13)
    b = exact_propagate(spectrum, 0.3, a)
    c = exact_propagate(spectrum, 1.0, psi)
    assert np.max(np.abs(b.data - c.data)) < 1e-13


def test_exact_filter_projects_on_ground_state():
    spec = LadderSpec(length=2)
    spectrum = diagonalize(spec)
    gap = spectrum.eigenvalues[1] - spectrum.eigenvalues[0]
    sharpness = 60.0 / gap ** 2
    psi = haar_random(spec.n_spins, seed=6)
    filtered = exact_filter(spectrum, sharpness,
                            float(spectrum.eigenvalues[0]), psi)
    gs = wrap_state(spectrum.eigenvectors[:, 0].astype(complex),
                    spec.n_spins)
    assert abs(inner(gs, filtered)) ** 2 > 1.0 - 1e-8


def test_transition_matrix_doubly_stochastic():
    spec = LadderSpec(length=2)
    cfg = IntegratorConfig(dt=0.02)
    protocol = FieldProtocol(strength=0.5, tau=2.0)
    psi = haar_random(spec.n_spins, seed=9)
    dist = exact_work_distribution(spec, protocol, cfg, psi)
    assert np.max(np.abs(dist.transition.sum(axis=0) - 1.0)) < 1e-10
    assert np.max(np.abs(dist.transition.sum(axis=1) - 1.0)) < 1e-10
    assert np.min(dist.transition) > -1e-14
    assert np.sum(dist.initial_weights) == pytest.approx(1.0, abs=1e-12)


def test_undriven_protocol_has_no_transitions():
    # without the drive the step unitary commutes with H, so the
    # two-measurement matrix must stay diagonal
    spec = LadderSpec(length=2)
    cfg = IntegratorConfig(dt=1e-3)
    protocol = FieldProtocol(strength=0.0, tau=0.2)
    psi = haar_random(spec.n_spins, seed=3)
    dist = exact_work_distribution(spec, protocol, cfg, psi)
    assert dist.max_offdiagonal() < 1e-10
    assert dist.exp_work(1.3) == pytest.approx(1.0, abs=1e-10)
    assert dist.mean_work() == pytest.approx(0.0, abs=1e-12)


def test_distribution_merges_degenerate_work_values():
    spec = LadderSpec(length=1)
    cfg = IntegratorConfig(dt=0.01)
    protocol = FieldProtocol(strength=0.5, tau=0.5)
    psi = haar_random(spec.n_spins, seed=4)
    dist = exact_work_distribution(spec, protocol, cfg, psi)
    values, probs = dist.distribution(tol=1e-9)
    assert np.sum(probs) == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(values) > 1e-9)
    # expectation values agree with the matrix forms
    beta = 0.9
    assert float(probs @ np.exp(-beta * values)) == pytest.approx(
        dist.exp_work(beta), abs=1e-12)
    assert float(probs @ values) == pytest.approx(dist.mean_work(),
                                                  abs=1e-12)


def test_capacity_caps():
    too_big_dense = LadderSpec(length=MAX_DENSE_SPINS // 2 + 1)
    with pytest.raises(CapacityError):
        dense_hamiltonian(too_big_dense)
    too_big_work = LadderSpec(length=MAX_WORKDIST_SPINS // 2 + 1)
    with pytest.raises(CapacityError):
        exact_work_distribution(too_big_work,
                                FieldProtocol(strength=0.5, tau=1.0),
                                IntegratorConfig(dt=0.02),
                                haar_random(too_big_work.n_spins, 1))
