"""Spectral densities from time series of survival amplitudes.

The density of states is estimated from <Phi| e^{-i H t} |Phi> with a
Haar-random |Phi>: the random-state average of the survival amplitude
equals the normalized trace of the propagator with statistical error
shrinking like the inverse square root of the Hilbert dimension.  The
local density of states of a specific state uses the same inversion
without any averaging argument.

Sampling runs up to Theta = n_steps * dt and uses conjugate symmetry
for negative times, so one forward propagation suffices.  The Fourier
inversion is a single zero-padded FFT; truncation is rectangular (no
window) by default, which fixes the energy resolution at pi / Theta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AliasingError, DimensionError, NumericalError
from .evolve import IntegratorConfig, propagator
from .lattice import LadderSpec, _check_state
from .chebyshev import spectral_bound
from .statevec import StateVector

# fraction of |density| mass tolerated at the frequency-window edges
ALIAS_EDGE_FRACTION = 1e-3


@dataclass(frozen=True)
class AutocorrSeries:
    """Survival amplitudes <psi(0)|psi(j dt)> for j = 0..n_steps."""

    samples: np.ndarray
    dt: float

    def __post_init__(self):
        if self.samples.ndim != 1 or len(self.samples) < 2:
            raise DimensionError("need at least two autocorrelation samples")
        if abs(self.samples[0] - 1.0) > 1e-9:
            raise NumericalError(
                "first autocorrelation sample must be 1 (normalized state)")

    @property
    def n_steps(self) -> int:
        return len(self.samples) - 1

    @property
    def theta(self) -> float:
        """Half-width of the sampled time window."""
        return self.n_steps * self.dt

    @property
    def resolution(self) -> float:
        return np.pi / self.theta


def autocorrelation(spec: LadderSpec, psi: StateVector,
                    cfg: IntegratorConfig, n_steps: int) -> AutocorrSeries:
    """Field-free survival amplitudes of psi over n_steps steps."""
    _check_state(spec, psi)
    if abs(psi.norm() - 1.0) > 1e-9:
        raise NumericalError("autocorrelation input must be normalized")
    prop = propagator(spec, cfg.dt)
    psi0 = psi.writable_copy()
    work = psi.writable_copy()
    samples = _kernels.autocorr_loop(
        psi0, work, int(n_steps), prop.bond_a, prop.bond_b, prop.cos_half,
        prop.sin_half, prop.zphase)
    return AutocorrSeries(samples=samples, dt=cfg.dt)


def average_series(series_list) -> AutocorrSeries:
    """Average several survival-amplitude series (same dt and length)."""
    first = series_list[0]
    for s in series_list[1:]:
        if s.dt != first.dt or len(s.samples) != len(first.samples):
            raise DimensionError("series shapes differ; cannot average")
    mean = np.mean([s.samples for s in series_list], axis=0)
    return AutocorrSeries(samples=mean, dt=first.dt)


@dataclass(frozen=True)
class SpectralDensity:
    """Density sampled on a uniform energy grid.

    kind is "dos" (normalized to the Hilbert dimension) or "ldos"
    (normalized to 1).  resolution = pi / Theta is the intrinsic width
    of the reconstruction kernel; raw_integral keeps the trapezoid
    integral found before normalization.
    """

    grid: np.ndarray
    values: np.ndarray
    resolution: float
    kind: str
    theta: float
    raw_integral: float = 1.0

    def __post_init__(self):
        if self.grid.shape != self.values.shape:
            raise DimensionError("grid and values must match")

    @property
    def grid_spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid))


def invert_series(series: AutocorrSeries, pad_factor: int = 4,
                  gauss_sigma: float | None = None):
    """Raw Fourier inversion (1 / 2 pi) * dt * sum_j e^{i E t_j} g(t_j)
    over the symmetric window t in [-Theta, Theta].

    Negative times use conjugate symmetry.  Returns (grid, values) on
    the full frequency window E in [-pi/dt, pi/dt); the rectangle sum
    of values times the grid spacing equals g(0) exactly.  gauss_sigma
    applies a Gaussian window (kernel width sigma in energy) instead of
    the rectangular truncation; diagnostics only.
    """
    g = np.array(series.samples, np.complex128)
    k = series.n_steps
    if gauss_sigma is not None:
        t = series.dt * np.arange(k + 1)
        g *= np.exp(-0.5 * (gauss_sigma * t) ** 2)
    m = 1 << int(np.ceil(np.log2(max(pad_factor * (k + 1), 2 * k + 2))))
    arr = np.zeros(m, np.complex128)
    arr[:k + 1] = g
    arr[m - k:] = np.conj(g[1:][::-1])
    vals = np.fft.ifft(arr) * (m * series.dt / (2.0 * np.pi))
    grid = 2.0 * np.pi * np.fft.fftfreq(m, d=series.dt)
    order = np.fft.fftshift(np.arange(m))
    return grid[order], np.real(vals[order])


def _check_aliasing(grid, vals):
    # signed strip mass: truncation ringing alternates sign and cancels
    # here, whereas a peak wrapped past +-pi/dt deposits its full weight
    m = len(grid)
    edge = max(2, m // 128)
    total = float(abs(np.sum(vals)))
    if total == 0.0:
        raise NumericalError("empty spectrum")
    frac = (abs(float(np.sum(vals[:edge]))) +
            abs(float(np.sum(vals[-edge:])))) / total
    if frac > ALIAS_EDGE_FRACTION:
        raise AliasingError(
            f"{frac:.2e} of the spectral weight sits at the frequency "
            "window edges; the time step is too coarse for this spectrum")


def _trim(grid, vals, e_max, resolution):
    if e_max is None:
        strong = np.abs(vals) >= 1e-4 * np.max(np.abs(vals))
        idx = np.nonzero(strong)[0]
        lo = grid[idx[0]] - 32 * resolution
        hi = grid[idx[-1]] + 32 * resolution
    else:
        lo, hi = -abs(e_max), abs(e_max)
    keep = (grid >= lo) & (grid <= hi)
    if np.count_nonzero(keep) < 8:
        raise NumericalError("trim window keeps too few grid points")
    return grid[keep], vals[keep]


def _build_density(series, kind, norm_target, pad_factor, gauss_sigma,
                   e_max):
    grid, vals = invert_series(series, pad_factor=pad_factor,
                               gauss_sigma=gauss_sigma)
    _check_aliasing(grid, vals)
    grid, vals = _trim(grid, vals, e_max, series.resolution)
    raw = float(np.trapezoid(vals, grid))
    if not np.isfinite(raw) or raw <= 0:
        raise NumericalError("non-positive spectral integral")
    vals = vals * (norm_target / raw)
    vals.setflags(write=False)
    grid = np.ascontiguousarray(grid)
    grid.setflags(write=False)
    return SpectralDensity(grid=grid, values=vals,
                           resolution=series.resolution, kind=kind,
                           theta=series.theta, raw_integral=raw)


def dos_estimate(series: AutocorrSeries, n_spins: int,
                 pad_factor: int = 4, gauss_sigma: float | None = None,
                 e_max: float | None = None) -> SpectralDensity:
    """Density of states from a Haar-state survival series, normalized
    to the sum rule (integral equals the Hilbert dimension 2**n_spins).

    raw_integral keeps the trapezoid integral before normalization; on
    a survival series it is 1 up to endpoint ringing, so the sum rule
    fixes the overall scale rather than measuring it.
    """
    dim = float(1 << n_spins)
    return _build_density(series, "dos", dim, pad_factor, gauss_sigma,
                          e_max)


def ldos(spec: LadderSpec, psi: StateVector, cfg: IntegratorConfig,
         n_steps: int, pad_factor: int = 4,
         gauss_sigma: float | None = None,
         e_max: float | None = None) -> SpectralDensity:
    """Local density of states of psi with respect to the undriven
    Hamiltonian, normalized to unit integral.

    The grid is clipped to the rigorous spectral bound plus margin;
    everything outside is truncation ringing, not signal.
    """
    if e_max is None:
        e_max = spectral_bound(spec) + max(1.0, 32 * np.pi /
                                           (n_steps * cfg.dt))
    series = autocorrelation(spec, psi, cfg, n_steps)
    return _build_density(series, "ldos", 1.0, pad_factor, gauss_sigma,
                          e_max)


def moments(density: SpectralDensity) -> tuple[float, float]:
    """(mean, standard deviation) of a normalized distribution."""
    if density.kind != "ldos":
        raise NumericalError("moments expects a normalized distribution")
    total = density.integral()
    if abs(total - 1.0) > 1e-3:
        raise NumericalError(
            f"moments expects unit integral, got {total:.6f}")
    mean = float(np.trapezoid(density.grid * density.values, density.grid))
    var = float(np.trapezoid((density.grid - mean) ** 2 * density.values,
                             density.grid))
    return mean, float(np.sqrt(max(var, 0.0)))


def find_peaks(density: SpectralDensity, min_frac: float = 0.05) -> np.ndarray:
    """Positions of local maxima above min_frac of the global maximum."""
    v = density.values
    top = np.max(v)
    idx = [i for i in range(1, len(v) - 1)
           if v[i] > v[i - 1] and v[i] >= v[i + 1] and v[i] >= min_frac * top]
    return density.grid[idx]
