"""Gaussian energy filter via a Chebyshev expansion of exp(-a (H-E)^2 / 4).

The Hamiltonian is rescaled by a rigorous norm bound so its spectrum
fits [-1, 1]; on that interval the target Gaussian is expanded in
Chebyshev polynomials whose coefficients come from one FFT.  Applying
the series needs only repeated Hamiltonian applications through the
stable two-term recursion T_{k+1} = 2 H~ T_k - T_{k-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericalError, ResolutionError
from .lattice import (LadderSpec, bond_arrays, leg_difference, zz_diagonal,
                      _check_state)
from .statevec import StateVector, wrap_state

COEFF_CUTOFF = 1e-16
_MAX_FFT = 1 << 24


def spectral_bound(spec: LadderSpec, h_max: float = 0.0) -> float:
    """Rigorous upper bound on |eigenvalues| of H plus a field of
    strength up to h_max: every bond contributes |J| (2 + |Delta|) / 4
    by the triangle inequality, each full leg S^z at most length / 2."""
    _, _, jw = bond_arrays(spec)
    bond_part = float(np.sum(np.abs(jw))) * (2.0 + abs(spec.anisotropy)) / 4.0
    return bond_part + abs(h_max) * spec.length


@dataclass(frozen=True)
class FilterParams:
    """Gaussian filter exp(-sharpness (H - target)^2 / 4) parameters.

    `bound` must dominate the spectral radius of H; use
    make_filter_params to fill it from the rigorous bound.
    """

    sharpness: float
    target: float
    bound: float

    def __post_init__(self):
        if self.sharpness <= 0:
            raise NumericalError("filter sharpness must be positive")
        if self.bound <= 0:
            raise NumericalError("spectral bound must be positive")


def make_filter_params(spec: LadderSpec, sharpness: float,
                       target: float) -> FilterParams:
    return FilterParams(sharpness=float(sharpness), target=float(target),
                        bound=spectral_bound(spec))


@dataclass(frozen=True)
class ChebCoefficients:
    """Truncated expansion f(x) ~ c_0/2 + sum_{k>=1} c_k T_k(x)."""

    values: np.ndarray
    n_fft: int

    @property
    def order(self) -> int:
        return len(self.values)

    def evaluate(self, x):
        """Series value(s) at x in [-1, 1] (Clenshaw recurrence)."""
        c = self.values.copy()
        c[0] *= 0.5
        return np.polynomial.chebyshev.chebval(x, c)


def chebyshev_coefficients(f, n_fft: int) -> ChebCoefficients:
    """Expansion coefficients c_k = Re[(2/N) sum_n f(cos 2 pi n / N)
    e^{2 pi i n k / N}] evaluated with one length-N FFT.

    The series is truncated at the first pair of consecutive
    coefficients below 1e-16 in magnitude; if the decay point is not
    reached below N/2 the grid cannot resolve f and a ResolutionError
    is raised.
    """
    if n_fft < 8:
        raise ResolutionError("FFT grid too small")
    n = np.arange(n_fft)
    samples = np.asarray(f(np.cos(2.0 * np.pi * n / n_fft)), np.float64)
    coeffs = 2.0 * np.real(np.fft.ifft(samples))
    half = n_fft // 2
    below = np.abs(coeffs[:half]) < COEFF_CUTOFF
    stop = None
    for k in range(1, half - 1):
        if below[k] and below[k + 1]:
            stop = k
            break
    if stop is None:
        raise ResolutionError(
            f"coefficients not decayed below {COEFF_CUTOFF} within "
            f"{half} terms; enlarge the FFT grid")
    values = coeffs[:stop].copy()
    values.setflags(write=False)
    return ChebCoefficients(values=values, n_fft=n_fft)


def gaussian_coefficients(a_scaled: float, target_scaled: float,
                          n_fft: int | None = None) -> ChebCoefficients:
    """Coefficients of exp(-a_scaled (x - target_scaled)^2 / 4) on [-1, 1].

    With n_fft omitted the grid is sized from the expected decay order
    ~ sqrt(37 a_scaled) and doubled until the tail criterion is met.
    """
    def f(x):
        return np.exp(-0.25 * a_scaled * (x - target_scaled) ** 2)

    if n_fft is not None:
        return chebyshev_coefficients(f, n_fft)
    est = 6.1 * np.sqrt(max(a_scaled, 1.0)) + 64
    size = 1 << max(8, int(np.ceil(np.log2(4.0 * est))))
    while True:
        try:
            return chebyshev_coefficients(f, size)
        except ResolutionError:
            size *= 2
            if size > _MAX_FFT:
                raise


def gaussian_filter(spec: LadderSpec, params: FilterParams,
                    phi: StateVector) -> StateVector:
    """Normalized exp(-sharpness (H - target)^2 / 4) |phi>.

    The field is off (the filter targets the undriven Hamiltonian).
    Output is normalized to unit norm; a vanishing norm means the filter
    annihilated all spectral weight of phi and raises NumericalError.
    """
    _check_state(spec, phi)
    bound = params.bound
    a_scaled = params.sharpness * bound * bound
    coeffs = gaussian_coefficients(a_scaled, params.target / bound)
    c = coeffs.values

    ba, bb, jw = bond_arrays(spec)
    flip_w = np.ascontiguousarray(0.5 * jw)
    zz = zz_diagonal(spec)
    ld = leg_difference(spec.n_spins)
    inv_bound = 1.0 / bound

    def h_scaled(vec, out):
        _kernels.apply_h(out, vec, ba, bb, flip_w, zz, ld, 0.0)
        out *= inv_bound
        return out

    t_prev = phi.writable_copy()
    acc = (0.5 * c[0]) * t_prev
    if len(c) > 1:
        t_cur = h_scaled(t_prev, np.empty_like(t_prev))
        acc += c[1] * t_cur
        work = np.empty_like(t_prev)
        for k in range(2, len(c)):
            h_scaled(t_cur, work)
            work *= 2.0
            work -= t_prev
            acc += c[k] * work
            t_prev, t_cur, work = t_cur, work, t_prev
    nrm = np.sqrt(_kernels.pairwise_dot(acc, acc).real)
    if not np.isfinite(nrm) or nrm < 1e-290:
        raise NumericalError(
            "filter annihilated the input state (norm underflow); "
            "check target energy against the spectrum")
    acc /= nrm
    return wrap_state(acc, spec.n_spins)
