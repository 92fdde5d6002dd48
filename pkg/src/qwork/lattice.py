"""Two-leg spin-1/2 ladder with XXZ couplings and a leg-antisymmetric field.

Geometry and encoding
---------------------
Rungs are indexed i = 0..L-1, legs k = 0 (leg 1) and k = 1 (leg 2).
Site (i, k) is stored in bit 2*i + k of the basis-state integer; bit
value 1 means spin up (S^z = +1/2).  Leg bonds couple (i, k)-(i+1, k)
with open ends, rung bonds couple (i, 0)-(i, 1) within the same rung.
Every bond carries S^x S^x + S^y S^y + anisotropy * S^z S^z times its
coupling (j_leg along the legs, j_rung across).

The drive couples antisymmetrically to the legs through the operator
-(S^z_leg1 - S^z_leg2), scaled by a triangular ramp h * f(t) that rises
linearly to h at t = tau and returns to zero at 2*tau, so initial and
final Hamiltonians coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ConfigError, DimensionError
from .statevec import StateVector, leg_sums, wrap_state


@dataclass(frozen=True)
class LadderSpec:
    """Couplings and size of the ladder. Energies in units of j_leg."""

    length: int
    j_leg: float = 1.0
    j_rung: float = 0.2
    anisotropy: float = 0.6

    def __post_init__(self):
        if self.length < 1:
            raise ConfigError("ladder needs at least one rung")

    @property
    def n_spins(self) -> int:
        return 2 * self.length

    @property
    def dim(self) -> int:
        return 1 << self.n_spins


@dataclass(frozen=True)
class FieldProtocol:
    """Triangular ramp of the leg-antisymmetric field.

    f(t) = t/tau on (0, tau], 2 - t/tau on (tau, 2*tau], and 0 outside;
    the sweep rate is gamma = 1/(2*tau).
    """

    strength: float = 0.5
    tau: float = 1.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigError("ramp time tau must be positive")
        if self.strength < 0:
            raise ConfigError("field strength must be non-negative")

    @classmethod
    def from_rate(cls, gamma: float, strength: float = 0.5) -> "FieldProtocol":
        if gamma <= 0:
            raise ConfigError("sweep rate must be positive")
        return cls(strength=strength, tau=1.0 / (2.0 * gamma))

    @property
    def sweep_rate(self) -> float:
        return 1.0 / (2.0 * self.tau)

    @property
    def duration(self) -> float:
        return 2.0 * self.tau

    def ramp(self, t: float) -> float:
        """Dimensionless ramp profile f(t)."""
        if t <= 0.0 or t > 2.0 * self.tau:
            return 0.0
        if t <= self.tau:
            return t / self.tau
        return 2.0 - t / self.tau

    def field_factor(self, t: float) -> float:
        """Instantaneous prefactor h * f(t) of the field operator."""
        return self.strength * self.ramp(t)


def site_bit(rung: int, leg: int) -> int:
    """Bit position of site (rung, leg), leg in {0, 1}."""
    if leg not in (0, 1):
        raise DimensionError("leg index must be 0 or 1")
    return 2 * rung + leg


def bonds(spec: LadderSpec) -> list[tuple[int, int, float]]:
    """All bonds as (bit_a, bit_b, coupling), legs first, then rungs.

    The order is fixed; kernels rely on it for reproducible rounding.
    """
    out = []
    for leg in (0, 1):
        for i in range(spec.length - 1):
            out.append((site_bit(i, leg), site_bit(i + 1, leg), spec.j_leg))
    for i in range(spec.length):
        out.append((site_bit(i, 0), site_bit(i, 1), spec.j_rung))
    return out


@dataclass(frozen=True)
class TermGroups:
    """Bond terms split by spin axis; terms within a group commute.

    x and y entries carry weight J, z entries J * anisotropy.  The field
    operator is diagonal and is applied together with the z group.
    """

    x: tuple[tuple[int, int, float], ...]
    y: tuple[tuple[int, int, float], ...]
    z: tuple[tuple[int, int, float], ...]


def term_groups(spec: LadderSpec) -> TermGroups:
    bl = bonds(spec)
    return TermGroups(
        x=tuple((a, b, j) for a, b, j in bl),
        y=tuple((a, b, j) for a, b, j in bl),
        z=tuple((a, b, j * spec.anisotropy) for a, b, j in bl),
    )


@lru_cache(maxsize=8)
def bond_arrays(spec: LadderSpec):
    """(bit_a, bit_b, coupling) as arrays in the canonical bond order."""
    bl = bonds(spec)
    ba = np.array([a for a, _, _ in bl], np.int64)
    bb = np.array([b for _, b, _ in bl], np.int64)
    jw = np.array([j for _, _, j in bl], np.float64)
    for arr in (ba, bb, jw):
        arr.setflags(write=False)
    return ba, bb, jw


@lru_cache(maxsize=8)
def zz_diagonal(spec: LadderSpec) -> np.ndarray:
    """Diagonal of the summed anisotropic S^z S^z bond terms."""
    ba, bb, jw = bond_arrays(spec)
    diag = _kernels.build_zz_diag(spec.n_spins, ba, bb,
                                  np.ascontiguousarray(jw * spec.anisotropy))
    diag.setflags(write=False)
    return diag


@lru_cache(maxsize=8)
def leg_difference(n_spins: int) -> np.ndarray:
    """Per-state doubled magnetization difference m_leg1 - m_leg2."""
    m1, m2 = leg_sums(n_spins)
    diff = (m1.astype(np.int16) - m2.astype(np.int16)).astype(np.int8)
    diff.setflags(write=False)
    return diff


def _check_state(spec: LadderSpec, psi: StateVector) -> None:
    if psi.n_spins != spec.n_spins:
        raise DimensionError(
            f"state has {psi.n_spins} spins, ladder has {spec.n_spins}")


def apply_hamiltonian(spec: LadderSpec, field_factor: float,
                      psi: StateVector) -> StateVector:
    """(H + field_factor * field_operator) |psi>, without building a matrix.

    field_factor is the instantaneous h * f(t); the field operator is
    -(S^z_leg1 - S^z_leg2).  The input state is left untouched.
    """
    _check_state(spec, psi)
    ba, bb, jw = bond_arrays(spec)
    out = np.empty(spec.dim, np.complex128)
    _kernels.apply_h(out, psi.data, ba, bb,
                     np.ascontiguousarray(0.5 * jw), zz_diagonal(spec),
                     leg_difference(spec.n_spins), float(field_factor))
    return wrap_state(out, spec.n_spins)


def energy_expectation(spec: LadderSpec, field_factor: float,
                       psi: StateVector) -> float:
    """Re <psi| H + field_factor * field_operator |psi>."""
    hpsi = apply_hamiltonian(spec, field_factor, psi)
    return float(_kernels.pairwise_dot(psi.data, hpsi.data).real)


def apply_axis_term(axis: str, a: int, b: int, weight: float,
                    psi: StateVector) -> StateVector:
    """weight * S^axis_a S^axis_b |psi> for one bond; test support path.

    Kept independent of the compiled kernels so the two routes can be
    compared against each other.
    """
    if a == b:
        raise DimensionError("bond needs two distinct sites")
    dim = psi.dim
    idx = np.arange(dim, dtype=np.int64)
    za = 2.0 * ((idx >> a) & 1) - 1.0
    zb = 2.0 * ((idx >> b) & 1) - 1.0
    if axis == "z":
        out = (0.25 * weight) * za * zb * psi.data
    elif axis == "x":
        out = (0.25 * weight) * psi.data[idx ^ ((1 << a) | (1 << b))]
    elif axis == "y":
        # sigma^y sigma^y maps |s> to -(za*zb)|s ^ mask>
        out = (-0.25 * weight) * za * zb * psi.data[idx ^ ((1 << a) | (1 << b))]
    else:
        raise ConfigError(f"unknown axis {axis!r}")
    return wrap_state(out, psi.n_spins)
