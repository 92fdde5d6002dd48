"""Chebyshev coefficients, the spectral bound, and the Gaussian filter."""

import numpy as np
import pytest
from scipy.integrate import quad

from qwork.chebyshev import (FilterParams,
                             chebyshev_coefficients, gaussian_coefficients,
                             gaussian_filter, make_filter_params,
                             spectral_bound)
from qwork.errors import NumericalError, ResolutionError
from qwork.lattice import LadderSpec
from qwork.oracle import diagonalize, exact_filter
from qwork.statevec import haar_random, inner


def test_spectral_bound_single_rung_is_tight():
    # one bond, no field: bound = 0.2 * 2.6 / 4 = 0.13 = true spectral radius
    spec = LadderSpec(length=1)
    assert spectral_bound(spec) == pytest.approx(0.13, abs=1e-15)
    vals = diagonalize(spec).eigenvalues
    assert spectral_bound(spec) == pytest.approx(np.max(np.abs(vals)))


@pytest.mark.parametrize("length", [2, 3, 4])
def test_spectral_bound_dominates_spectrum(length):
    spec = LadderSpec(length=length)
    vals = diagonalize(spec).eigenvalues
    assert spectral_bound(spec) >= np.max(np.abs(vals))
    assert spectral_bound(spec, h_max=0.5) >= \
        np.max(np.abs(diagonalize(spec, 0.5).eigenvalues))


def test_coefficients_against_quadrature():
    # c_k = (2/pi) int f(cos t) cos(k t) dt, independent route
    a, e0 = 40.0, 0.3

    def f(x):
        return np.exp(-0.25 * a * (x - e0) ** 2)

    cheb = gaussian_coefficients(a, e0)
    for k in (0, 1, 2, 7, 20):
        ref = (2.0 / np.pi) * quad(
            lambda t: f(np.cos(t)) * np.cos(k * t), 0.0, np.pi,
            epsabs=1e-14, epsrel=1e-13)[0]
        assert cheb.values[k] == pytest.approx(ref, abs=1e-12)


def test_evaluate_reproduces_function():
    a, e0 = 100.0, -0.2
    cheb = gaussian_coefficients(a, e0)
    x = np.linspace(-1, 1, 501)
    ref = np.exp(-0.25 * a * (x - e0) ** 2)
    assert np.max(np.abs(cheb.evaluate(x) - ref)) < 1e-12


def test_constant_function_coefficients():
    cheb = chebyshev_coefficients(lambda x: np.ones_like(x), 64)
    assert cheb.values[0] == pytest.approx(2.0)  # expansion uses c0/2
    assert np.all(np.abs(cheb.values[1:]) < 1e-15)


def test_truncation_error_raised_on_tiny_grid():
    with pytest.raises(ResolutionError):
        gaussian_coefficients(1e4, 0.0, n_fft=64)
    with pytest.raises(ResolutionError):
        chebyshev_coefficients(lambda x: np.ones_like(x), 4)


def test_auto_grid_doubles_until_resolved():
    cheb = gaussian_coefficients(5e4, 0.1)
    assert np.abs(cheb.values[-1]) < 1e-14
    assert cheb.order < cheb.n_fft // 2


@pytest.mark.parametrize("length,sharpness", [(1, 10.0), (2, 100.0),
                                              (2, 1000.0)])
def test_filter_fidelity_vs_oracle(length, sharpness):
    spec = LadderSpec(length=length)
    phi = haar_random(spec.n_spins, seed=3)
    target = -0.42 * (length - 1)
    psi = gaussian_filter(spec, make_filter_params(spec, sharpness, target),
                          phi)
    ref = exact_filter(diagonalize(spec), sharpness, target, phi)
    assert abs(inner(psi, ref)) >= 1.0 - 1e-12
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)


def test_filter_weights_in_eigenbasis():
    # amplitude ratios must follow the Gaussian envelope exactly
    spec = LadderSpec(length=2)
    spectrum = diagonalize(spec)
    phi = haar_random(spec.n_spins, seed=8)
    a = 100.0
    target = -0.3
    psi = gaussian_filter(spec, make_filter_params(spec, a, target), phi)
    before = spectrum.project(phi)
    after = spectrum.project(psi)
    envelope = np.exp(-0.25 * a * (spectrum.eigenvalues - target) ** 2)
    expect = before * envelope
    expect /= np.linalg.norm(expect)
    assert np.max(np.abs(np.abs(after) - np.abs(expect))) < 1e-12


def test_filter_annihilation_raises():
    # target far beyond the bound: every Gaussian sample underflows to 0
    spec = LadderSpec(length=1)
    phi = haar_random(spec.n_spins, seed=1)
    with pytest.raises(NumericalError):
        gaussian_filter(spec, make_filter_params(spec, 1e4, 5.0), phi)


def test_filter_params_validation():
    with pytest.raises(NumericalError):
        FilterParams(sharpness=-1.0, target=0.0, bound=1.0)
    with pytest.raises(NumericalError):
        FilterParams(sharpness=1.0, target=0.0, bound=0.0)
