"""Work statistics from initial and final energy distributions.

For an initial state sharply filtered around E_ini, an effective inverse
temperature beta comes from the slope of ln n(E) around E_ini.  The
exponential work average is then the ratio

    <e^{-beta W}> = int P_fin(E) e^{-beta E} dE / int P_ini(E) e^{-beta E} dE

and deviations from 1 are summarized by the energy offset
delta = -ln<e^{-beta W}> / beta: shifting the final distribution by
delta restores the ratio to 1 exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FitError, NumericalError
from .spectral import SpectralDensity, moments

# relative floor below which density values are treated as ringing noise
CLAMP_FLOOR = 1e-12
DEFAULT_EPSILONS = (0.25, 0.375, 0.5)


@dataclass(frozen=True)
class BetaFit:
    """Least-squares slope of ln n(E) around the target energy."""

    beta: float
    epsilon: float
    stderr: float
    window: tuple[float, float]
    sweep: dict[float, float] = field(default_factory=dict)


def _slope_ln(density: SpectralDensity, center: float, epsilon: float):
    lo, hi = center - epsilon, center + epsilon
    # boundary slack: a grid point sitting on the window edge must land
    # inside on both sides, or the lost endpoint biases the slope
    tiny = 1e-9 * epsilon
    i0 = int(np.searchsorted(density.grid, lo - tiny, side="left"))
    i1 = int(np.searchsorted(density.grid, hi + tiny, side="right"))
    e = density.grid[i0:i1]
    v = density.values[i0:i1]
    if len(e) < 10:
        raise FitError(
            f"only {len(e)} grid points inside |E - {center}| <= {epsilon}; "
            "resolution too coarse for a slope fit")
    floor = CLAMP_FLOOR * float(np.max(density.values))
    usable = v > floor
    if np.count_nonzero(~usable) > 0.10 * len(v):
        raise FitError(
            "more than 10% of the fit window is at the ringing floor; "
            "ln n(E) slope unreliable there")
    e = e[usable]
    v = v[usable]
    if len(e) < 10:
        raise FitError("fewer than 10 usable points after clamping")
    slope, intercept = np.polyfit(e, np.log(v), 1)
    resid = np.log(v) - (slope * e + intercept)
    dof = max(len(e) - 2, 1)
    se = math.sqrt(float(resid @ resid) / dof /
                   float(np.sum((e - e.mean()) ** 2)))
    return float(slope), se, (lo, hi)


def fit_beta(density: SpectralDensity, center: float,
             epsilon: float = 0.5,
             sweep=DEFAULT_EPSILONS) -> BetaFit:
    """beta = d ln n / dE at `center` with a window-size sensitivity sweep.

    The reported value uses half-width `epsilon`; the uncertainty is the
    larger of the ordinary slope standard error and the spread over the
    sweep of window sizes.
    """
    widths = sorted(set(tuple(sweep) + (epsilon,)))
    results = {}
    for eps in widths:
        slope, se, window = _slope_ln(density, center, eps)
        results[eps] = (slope, se, window)
    beta, se, window = results[epsilon]
    spread = max(abs(results[eps][0] - beta) for eps in widths)
    return BetaFit(beta=beta, epsilon=epsilon,
                   stderr=max(se, spread), window=window,
                   sweep={eps: results[eps][0] for eps in widths})


def support_window(densities, frac: float = 1e-4,
                   pad_resolutions: float = 8.0) -> tuple[float, float]:
    """Smallest interval containing every point where any density
    exceeds `frac` of its own maximum, padded by a few resolutions.

    Restricting the exponential-average integrals to this window keeps
    truncation ringing in the empty tails from being amplified by
    e^{-beta E}.
    """
    lo = math.inf
    hi = -math.inf
    for d in densities:
        strong = np.nonzero(np.abs(d.values) >= frac * np.max(np.abs(d.values)))[0]
        pad = pad_resolutions * d.resolution
        lo = min(lo, float(d.grid[strong[0]]) - pad)
        hi = max(hi, float(d.grid[strong[-1]]) + pad)
    return lo, hi


def _own_window(density: SpectralDensity, frac: float = 1e-4,
                pad_resolutions: float = 8.0) -> tuple[int, int]:
    """Index range of the density's own support, padded.

    Computed from the values array alone so a grid translation moves
    the window along with the distribution; this keeps the shifted
    identity exact to rounding.
    """
    v = np.abs(density.values)
    strong = np.nonzero(v >= frac * float(np.max(v)))[0]
    # slack keeps the ceiling stable when a grid translation perturbs
    # the measured spacing by an ulp
    pad = int(math.ceil(pad_resolutions * density.resolution /
                        density.grid_spacing - 1e-9))
    return (max(0, int(strong[0]) - pad),
            min(len(v), int(strong[-1]) + pad + 1))


def _window_integral(density: SpectralDensity, lo, hi, weight):
    i0 = int(np.searchsorted(density.grid, lo, side="left"))
    i1 = int(np.searchsorted(density.grid, hi, side="right"))
    if i1 - i0 < 4:
        raise NumericalError("integration window keeps too few points")
    e = density.grid[i0:i1]
    with np.errstate(over="ignore"):
        return float(np.trapezoid(density.values[i0:i1] * weight(e), e))


def _weighted_support_integral(density, beta, e0):
    i0, i1 = _own_window(density)
    if i1 - i0 < 4:
        raise NumericalError("integration window keeps too few points")
    e = density.grid[i0:i1]
    # overflow is caught by the finiteness guard in the caller
    with np.errstate(over="ignore"):
        return float(np.trapezoid(density.values[i0:i1] *
                                  np.exp(-beta * (e - e0)), e))


def excluded_mass(density: SpectralDensity, lo, hi) -> float:
    """Fraction of |density| mass left outside [lo, hi] (diagnostic)."""
    inside = (density.grid >= lo) & (density.grid <= hi)
    total = float(np.trapezoid(np.abs(density.values), density.grid))
    kept = float(np.trapezoid(np.abs(density.values[inside]),
                              density.grid[inside]))
    return 0.0 if total == 0 else max(0.0, 1.0 - kept / total)


def exp_work_average(p_fin: SpectralDensity, p_ini: SpectralDensity,
                     beta: float, window=None) -> float:
    """Ratio of exponentially weighted integrals of the two
    distributions.

    Energies are recentered at the mean of p_ini before weighting so
    both integrands stay within floating-point range.  Each integral
    runs over its distribution's own support window so the empty far
    tails, which carry only truncation ringing, never meet the growing
    exponential weight.  Passing `window` = (lo, hi) forces a common
    interval for both instead.
    """
    e0 = float(np.trapezoid(p_ini.grid * p_ini.values, p_ini.grid))
    if window is None:
        num = _weighted_support_integral(p_fin, beta, e0)
        den = _weighted_support_integral(p_ini, beta, e0)
    else:
        lo, hi = window

        def w(e):
            return np.exp(-beta * (e - e0))

        num = _window_integral(p_fin, lo, hi, w)
        den = _window_integral(p_ini, lo, hi, w)
    if not (np.isfinite(num) and np.isfinite(den)) or den <= 0 or num <= 0:
        raise NumericalError(
            f"ill-conditioned exponential averages (num={num}, den={den}); "
            "check beta and the integration window")
    return num / den


def mean_work(p_fin: SpectralDensity, p_ini: SpectralDensity) -> float:
    """Difference of self-normalized first moments <E_fin> - <E_ini>."""
    def mean(d):
        total = float(np.trapezoid(d.values, d.grid))
        return float(np.trapezoid(d.grid * d.values, d.grid)) / total

    return mean(p_fin) - mean(p_ini)


def delta_shift(exp_avg: float, beta: float) -> float:
    """Energy offset delta = -ln<e^{-beta W}> / beta."""
    if not (exp_avg > 0 and np.isfinite(exp_avg)):
        raise NumericalError(f"exponential average {exp_avg} not positive")
    if beta == 0:
        raise NumericalError("beta must be nonzero for the shift")
    return -math.log(exp_avg) / beta


def shifted_distribution(density: SpectralDensity,
                         shift: float) -> SpectralDensity:
    """The distribution P(E + shift), realized as an exact grid
    translation: values are untouched, the grid moves by -shift.

    Central moments are preserved exactly and re-running
    exp_work_average after shifting by delta_shift(...) returns 1 to
    rounding accuracy.  The shifted support must stay inside the
    original grid extent.
    """
    strong = np.nonzero(np.abs(density.values) >=
                        1e-6 * np.max(np.abs(density.values)))[0]
    lo_margin = float(density.grid[strong[0]] - density.grid[0])
    hi_margin = float(density.grid[-1] - density.grid[strong[-1]])
    if shift > lo_margin or -shift > hi_margin:
        raise NumericalError(
            f"shift {shift} exceeds the grid margin "
            f"({lo_margin:.3g} down, {hi_margin:.3g} up)")
    grid = np.ascontiguousarray(density.grid - shift)
    grid.setflags(write=False)
    return SpectralDensity(grid=grid, values=density.values,
                           resolution=density.resolution,
                           kind=density.kind, theta=density.theta,
                           raw_integral=density.raw_integral)


@dataclass(frozen=True)
class WorkReport:
    """Everything the analysis extracts for one (size, rate) pair."""

    length: int
    gamma: float
    gamma_over_gamma0: float
    beta: float
    beta_err: float
    exp_avg: float            # <e^{-beta W}>
    exp_mean: float           # e^{-beta <W>}
    mean_w: float
    delta_e: float
    delta_e_err: float
    big_delta_e: float        # std of the final distribution
    std_ini: float
    tail_ini: float = 0.0     # |mass| outside the integration window
    tail_fin: float = 0.0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "length", "gamma", "gamma_over_gamma0", "beta", "beta_err",
            "exp_avg", "exp_mean", "mean_w", "delta_e", "delta_e_err",
            "big_delta_e", "std_ini", "tail_ini", "tail_fin")}


def make_work_report(p_ini: SpectralDensity, p_fin: SpectralDensity,
                     beta: float, beta_err: float, gamma: float,
                     gamma0: float, length: int) -> WorkReport:
    exp_avg = exp_work_average(p_fin, p_ini, beta)
    mw = mean_work(p_fin, p_ini)
    delta = delta_shift(exp_avg, beta)
    # propagate the beta uncertainty by re-evaluating at beta +- err
    deviations = [abs(delta_shift(exp_work_average(p_fin, p_ini, b), b)
                      - delta)
                  for b in (beta - beta_err, beta + beta_err) if b > 0]
    mean_ini, std_ini = moments(p_ini)
    mean_fin, std_fin = moments(p_fin)

    def tail(d):
        i0, i1 = _own_window(d)
        return excluded_mass(d, float(d.grid[i0]), float(d.grid[i1 - 1]))

    return WorkReport(
        length=length, gamma=gamma, gamma_over_gamma0=gamma / gamma0,
        beta=beta, beta_err=beta_err, exp_avg=exp_avg,
        exp_mean=math.exp(-beta * mw), mean_w=mw, delta_e=delta,
        delta_e_err=max(deviations) if deviations else 0.0,
        big_delta_e=std_fin, std_ini=std_ini,
        tail_ini=tail(p_ini), tail_fin=tail(p_fin))


@dataclass(frozen=True)
class ScalingReport:
    """Size dependence of the offset delta and the width Delta.

    Both a sqrt(L) and a linear-in-L law are fitted to delta(L); the
    data decide, the report does not.  The disconnected-copies baseline
    scales the smallest size by copies = L / L_min: delta grows like
    the number of copies, the width like its square root.
    """

    lengths: tuple[int, ...]
    delta: tuple[float, ...]
    width: tuple[float, ...]
    ratio: tuple[float, ...]
    width_sqrt_coeff: float
    width_sqrt_r2: float
    delta_sqrt_coeff: float
    delta_sqrt_r2: float
    delta_linear_coeff: float
    delta_linear_r2: float
    baseline_delta: tuple[float, ...]
    baseline_width: tuple[float, ...]

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v
                for k, v in self.__dict__.items()}


def _fit_through_origin(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    coeff = float(x @ y) / float(x @ x)
    resid = y - coeff * x
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return coeff, r2


def finite_size_scan(reports: dict[int, WorkReport]) -> ScalingReport:
    """Fit size laws to delta(L) and Delta(L) from per-size reports."""
    if len(reports) < 3:
        raise ConfigError("finite-size scan needs at least three sizes")
    lengths = tuple(sorted(reports))
    delta = tuple(reports[l].delta_e for l in lengths)
    width = tuple(reports[l].big_delta_e for l in lengths)
    ls = np.array(lengths, float)
    w_coeff, w_r2 = _fit_through_origin(np.sqrt(ls), width)
    d_sqrt, d_sqrt_r2 = _fit_through_origin(np.sqrt(ls), delta)
    d_lin, d_lin_r2 = _fit_through_origin(ls, delta)
    l0 = lengths[0]
    copies = ls / l0
    return ScalingReport(
        lengths=lengths, delta=delta, width=width,
        ratio=tuple(d / w for d, w in zip(delta, width)),
        width_sqrt_coeff=w_coeff, width_sqrt_r2=w_r2,
        delta_sqrt_coeff=d_sqrt, delta_sqrt_r2=d_sqrt_r2,
        delta_linear_coeff=d_lin, delta_linear_r2=d_lin_r2,
        baseline_delta=tuple(copies * reports[l0].delta_e),
        baseline_width=tuple(np.sqrt(copies) * reports[l0].big_delta_e))
