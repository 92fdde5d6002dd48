"""Pure-state vectors: sampling, inner products, observables, checkpoints.

Random states are drawn from the Haar measure by normalizing a vector of
independent standard complex Gaussians.  The generator is pinned for
portability: a Philox4x64-10 counter-based bit generator keyed directly
with the user seed, turned into open-interval uniforms and then Gaussian
pairs via Box-Muller.  The same (n_spins, seed) gives the same amplitudes
on every platform.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import psutil

from . import _kernels
from .errors import CapacityError, ConfigError, DimensionError

CHECKPOINT_MAGIC = b"QWRK"
CHECKPOINT_VERSION = 1
_DERIVED_SEED = 2**64 - 1  # sentinel stored for states not drawn directly

# rough per-amplitude footprint (bytes) of drawing plus evolving a state
_BYTES_PER_AMP = 64


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex state on n_spins spins (2**n_spins amplitudes).

    The amplitude array is a single contiguous complex128 buffer, i.e.
    interleaved (re, im) double pairs, and is marked read-only.  Mutating
    operations always work on private copies.
    """

    data: np.ndarray
    n_spins: int
    seed: int | str = "derived"

    def __post_init__(self):
        if self.data.dtype != np.complex128 or self.data.ndim != 1:
            raise DimensionError("state must be a 1-d complex128 array")
        if self.data.shape[0] != 1 << self.n_spins:
            raise DimensionError(
                f"state has {self.data.shape[0]} amplitudes, expected "
                f"2^{self.n_spins}")

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    def norm(self) -> float:
        return float(np.sqrt(_kernels.pairwise_dot(self.data, self.data).real))

    def writable_copy(self) -> np.ndarray:
        return np.array(self.data, dtype=np.complex128, copy=True)


def wrap_state(data: np.ndarray, n_spins: int, seed="derived") -> StateVector:
    """Take ownership of `data` as an immutable StateVector."""
    data = np.ascontiguousarray(data, dtype=np.complex128)
    data.setflags(write=False)
    return StateVector(data=data, n_spins=n_spins, seed=seed)


def check_capacity(n_spins: int, memory_budget=None, n_vectors: int = 1) -> None:
    """Refuse up front if the state would not fit in the budget."""
    if memory_budget is None:
        memory_budget = psutil.virtual_memory().available
    required = n_vectors * _BYTES_PER_AMP * (1 << n_spins)
    if required > memory_budget:
        raise CapacityError(
            f"a state of 2^{n_spins} amplitudes needs about {required} bytes "
            f"({required / 2**30:.1f} GiB) including work buffers; "
            f"budget is {memory_budget} bytes",
            required_bytes=required, budget_bytes=memory_budget)


def haar_random(n_spins: int, seed: int, memory_budget=None) -> StateVector:
    """Haar-random state, deterministic in (n_spins, seed).

    Uniform draws come straight from the raw Philox stream: u1 in (0, 1]
    and u2 in [0, 1), so Box-Muller never sees log(0).
    """
    if n_spins < 1:
        raise ConfigError("n_spins must be >= 1")
    if not (0 <= int(seed) < 2**64 - 1):
        raise ConfigError("seed must fit an unsigned 64-bit integer")
    check_capacity(n_spins, memory_budget)
    dim = 1 << n_spins
    raw = np.random.Philox(key=int(seed)).random_raw(2 * dim)
    u1 = ((raw[:dim] >> np.uint64(11)) + np.uint64(1)) * 2.0**-53
    u2 = (raw[dim:] >> np.uint64(11)) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u1))
    data = r * np.cos(2.0 * np.pi * u2) + 1j * r * np.sin(2.0 * np.pi * u2)
    data /= np.sqrt(_kernels.pairwise_dot(data, data).real)
    return wrap_state(data, n_spins, seed=int(seed))


def basis_state(n_spins: int, index: int) -> StateVector:
    """Computational basis state |index> (bit b = spin at site b, 1 = up)."""
    if not (0 <= index < 1 << n_spins):
        raise DimensionError(f"basis index {index} out of range")
    data = np.zeros(1 << n_spins, np.complex128)
    data[index] = 1.0
    return wrap_state(data, n_spins)


def inner(phi: StateVector, psi: StateVector) -> complex:
    """<phi|psi> with a fixed-tree pairwise reduction (reproducible bits)."""
    if phi.n_spins != psi.n_spins:
        raise DimensionError("states live on different spin counts")
    return complex(_kernels.pairwise_dot(phi.data, psi.data))


@lru_cache(maxsize=8)
def leg_sums(n_spins: int):
    """Cached per-state doubled leg magnetizations (m_leg1, m_leg2)."""
    m1, m2 = _kernels.build_leg_sums(n_spins)
    m1.setflags(write=False)
    m2.setflags(write=False)
    return m1, m2


def expectation_sz_total(psi: StateVector) -> tuple[float, float]:
    """(<S^z_leg1>, <S^z_leg2>), legs being even/odd bit sites."""
    m1, m2 = leg_sums(psi.n_spins)
    s1, s2 = _kernels.sz_leg_expectations(psi.data, m1, m2)
    return float(s1), float(s2)


def save_checkpoint(psi: StateVector, path) -> None:
    """Binary dump: header {magic 'QWRK', version u32, N u32, seed u64},
    then 2^N little-endian (f64 re, f64 im) amplitude pairs."""
    seed = _DERIVED_SEED if psi.seed == "derived" else int(psi.seed)
    header = struct.pack("<4sIIQ", CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
                         psi.n_spins, seed)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(psi.data, dtype="<c16").tobytes())


def load_checkpoint(path) -> StateVector:
    """Inverse of save_checkpoint; round-trips bit-exactly."""
    with open(path, "rb") as fh:
        header = fh.read(struct.calcsize("<4sIIQ"))
        if len(header) < struct.calcsize("<4sIIQ"):
            raise ConfigError(f"{path}: truncated checkpoint header")
        magic, version, n_spins, seed = struct.unpack("<4sIIQ", header)
        if magic != CHECKPOINT_MAGIC:
            raise ConfigError(f"{path}: not a qwork checkpoint")
        if version != CHECKPOINT_VERSION:
            raise ConfigError(f"{path}: unsupported checkpoint version {version}")
        payload = fh.read()
    expected = 16 * (1 << n_spins)
    if len(payload) != expected:
        raise ConfigError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    tag = "derived" if seed == _DERIVED_SEED else int(seed)
    return wrap_state(data, int(n_spins), seed=tag)
