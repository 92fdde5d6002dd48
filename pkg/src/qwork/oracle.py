"""Dense exact-diagonalization reference for small ladders.

Everything here is built independently of the compiled kernels: the
Hamiltonian matrix comes from explicit Kronecker products of single-site
spin matrices, so agreement with the matrix-free path is a genuine
cross-check rather than a tautology.  Sizes are capped (the matrix is
dense), use the bitwise path beyond that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DimensionError, NumericalError
from .evolve import IntegratorConfig, run_protocol
from .lattice import FieldProtocol, LadderSpec, bonds, site_bit
from .statevec import StateVector, wrap_state

MAX_DENSE_SPINS = 12
MAX_WORKDIST_SPINS = 10

# single-site operators in the (down, up) basis; G = sigma_y / i
_SX = np.array([[0.0, 0.5], [0.5, 0.0]])
_SZ = np.array([[-0.5, 0.0], [0.0, 0.5]])
_G = np.array([[0.0, -1.0], [1.0, 0.0]])
_ID = np.eye(2)


def _chain(n_spins: int, placed: dict[int, np.ndarray]) -> np.ndarray:
    """Kronecker chain with `placed[bit]` on the given sites.

    Highest bit first so that the row index reads as the basis integer.
    """
    out = np.array([[1.0]])
    for bit in range(n_spins - 1, -1, -1):
        out = np.kron(out, placed.get(bit, _ID))
    return out


def dense_hamiltonian(spec: LadderSpec, field_factor: float = 0.0) -> np.ndarray:
    """Full real symmetric Hamiltonian matrix including the field term."""
    if spec.n_spins > MAX_DENSE_SPINS:
        raise CapacityError(
            f"dense matrix for 2^{spec.n_spins} states refused "
            f"(cap {MAX_DENSE_SPINS} spins)")
    n = spec.n_spins
    h = np.zeros((1 << n, 1 << n))
    for a, b, j in bonds(spec):
        h += j * _chain(n, {a: _SX, b: _SX})
        # S^y S^y = -(G_a G_b) / 4 with real G = sigma_y / i
        h += j * (-0.25) * _chain(n, {a: _G, b: _G})
        h += j * spec.anisotropy * _chain(n, {a: _SZ, b: _SZ})
    if field_factor != 0.0:
        for i in range(spec.length):
            h -= field_factor * _chain(n, {site_bit(i, 0): _SZ})
            h += field_factor * _chain(n, {site_bit(i, 1): _SZ})
    return h


@dataclass(frozen=True)
class DenseSpectrum:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_spins: int

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def project(self, psi: StateVector) -> np.ndarray:
        """Amplitudes of psi in the eigenbasis."""
        if psi.n_spins != self.n_spins:
            raise DimensionError("state and spectrum sizes differ")
        return self.eigenvectors.T @ psi.data


def diagonalize(spec: LadderSpec, field_factor: float = 0.0) -> DenseSpectrum:
    """Dense symmetric eigensolve of the full Hamiltonian."""
    h = dense_hamiltonian(spec, field_factor)
    vals, vecs = np.linalg.eigh(h)
    return DenseSpectrum(eigenvalues=vals, eigenvectors=vecs,
                         n_spins=spec.n_spins)


def exact_filter(spectrum: DenseSpectrum, sharpness: float, target: float,
                 phi: StateVector) -> StateVector:
    """Normalized Gaussian filter applied exactly in the eigenbasis."""
    coeff = spectrum.project(phi)
    coeff = coeff * np.exp(-0.25 * sharpness *
                           (spectrum.eigenvalues - target) ** 2)
    nrm = np.linalg.norm(coeff)
    if nrm < 1e-290:
        raise NumericalError("exact filter annihilated the state")
    return wrap_state(spectrum.eigenvectors @ (coeff / nrm),
                      spectrum.n_spins)


def exact_propagate(spectrum: DenseSpectrum, t: float,
                    psi: StateVector) -> StateVector:
    """e^{-i H t} |psi> evaluated exactly in the eigenbasis."""
    coeff = spectrum.project(psi)
    coeff = coeff * np.exp(-1j * spectrum.eigenvalues * t)
    return wrap_state(spectrum.eigenvectors @ coeff, spectrum.n_spins)


@dataclass(frozen=True)
class TwoMeasurementDistribution:
    """Exact two-point-measurement work statistics.

    energies: eigenvalues of the (identical) initial and final
    Hamiltonian.  initial_weights[n] is the probability of measuring
    E_n first; transition[m, n] the probability of ending in E_m after
    the drive.
    """

    energies: np.ndarray
    initial_weights: np.ndarray
    transition: np.ndarray

    def exp_work(self, beta: float) -> float:
        w = self.energies[:, None] - self.energies[None, :]
        return float(np.sum(self.transition * self.initial_weights[None, :]
                            * np.exp(-beta * w)))

    def mean_work(self) -> float:
        w = self.energies[:, None] - self.energies[None, :]
        return float(np.sum(self.transition * self.initial_weights[None, :]
                            * w))

    def max_offdiagonal(self) -> float:
        t = self.transition.copy()
        np.fill_diagonal(t, 0.0)
        return float(np.max(np.abs(t)))

    def distribution(self, tol: float = 1e-9):
        """(work values, probabilities) with nearby values merged."""
        w = (self.energies[:, None] - self.energies[None, :]).ravel()
        p = (self.transition * self.initial_weights[None, :]).ravel()
        order = np.argsort(w)
        w = w[order]
        p = p[order]
        values = [w[0]]
        probs = [p[0]]
        for wk, pk in zip(w[1:], p[1:]):
            if wk - values[-1] <= tol:
                probs[-1] += pk
            else:
                values.append(wk)
                probs.append(pk)
        return np.array(values), np.array(probs)


def exact_work_distribution(spec: LadderSpec, protocol: FieldProtocol,
                            cfg: IntegratorConfig,
                            psi0: StateVector) -> TwoMeasurementDistribution:
    """Project psi0 on the initial eigenbasis, drive every eigenstate
    through the protocol, and project on the final eigenbasis.

    Initial and final Hamiltonians coincide (the ramp closes), so one
    diagonalization serves both measurements.
    """
    if spec.n_spins > MAX_WORKDIST_SPINS:
        raise CapacityError(
            f"exact work distribution needs 2^{spec.n_spins} protocol "
            f"runs; refused beyond {MAX_WORKDIST_SPINS} spins")
    spectrum = diagonalize(spec, 0.0)
    weights = np.abs(spectrum.project(psi0)) ** 2
    dim = spectrum.dim
    transition = np.empty((dim, dim))
    for n in range(dim):
        state = wrap_state(spectrum.eigenvectors[:, n].astype(np.complex128),
                           spec.n_spins)
        res = run_protocol(spec, protocol, cfg, state,
                           stride=max(1, 10**9))
        final = spectrum.eigenvectors.T @ res.psi_final.data
        transition[:, n] = np.abs(final) ** 2
    return TwoMeasurementDistribution(energies=spectrum.eigenvalues,
                                      initial_weights=weights,
                                      transition=transition)
