"""Compiled kernels for state-vector updates on the spin ladder.

All kernels are serial and use a fixed accumulation order, so results
are bit-identical regardless of how many worker threads numba is given.
Basis states are integers: bit b holds the spin at site b, bit value 1
meaning spin up (S^z = +1/2).
"""

import numpy as np
from numba import njit

# Leaf size of the fixed-tree reduction used for inner products.
_LEAF = 128


@njit(cache=True)
def pairwise_dot(phi, psi):
    """<phi|psi> by a bottom-up fixed-tree pairwise reduction.

    The tree shape depends only on the array length, never on worker
    count, so the rounding pattern is reproducible.
    """
    n = phi.shape[0]
    nblk = (n + _LEAF - 1) // _LEAF
    blocks = np.empty(nblk, np.complex128)
    for b in range(nblk):
        lo = b * _LEAF
        hi = min(lo + _LEAF, n)
        acc = 0.0 + 0.0j
        for j in range(lo, hi):
            acc += np.conj(phi[j]) * psi[j]
        blocks[b] = acc
    # combine adjacent partial sums level by level
    m = nblk
    while m > 1:
        half = m // 2
        for b in range(half):
            blocks[b] = blocks[2 * b] + blocks[2 * b + 1]
        if m % 2 == 1:
            blocks[half] = blocks[m - 1]
            m = half + 1
        else:
            m = half
    return blocks[0]


@njit(cache=True)
def gate_xy(psi, bond_a, bond_b, cos_t, sin_t, reverse):
    """exp(-i s J (S^x S^x + S^y S^y)) for every bond, exactly.

    The planar exchange only mixes the two anti-aligned states of a
    bond, so the gate is a single rotation on those pairs and leaves
    every total-magnetization sector invariant by construction.  Gates
    on overlapping bonds do not commute: the loop runs in ascending
    bond order, or descending when `reverse` is set (the symmetric
    second wing of a split step).
    """
    nb = bond_a.shape[0]
    n = psi.shape[0]
    for idx in range(nb):
        k = nb - 1 - idx if reverse else idx
        a = bond_a[k]
        b = bond_b[k]
        c = cos_t[k]
        s = sin_t[k]
        abit = np.int64(1) << a
        bbit = np.int64(1) << b
        mask = abit | bbit
        for st in range(n):
            if st & abit == 0 and st & bbit != 0:
                p = st ^ mask
                za = psi[st]
                zb = psi[p]
                psi[st] = c * za - 1j * s * zb
                psi[p] = c * zb - 1j * s * za
    return psi


@njit(cache=True)
def diag_mul(psi, phase):
    for st in range(psi.shape[0]):
        psi[st] = psi[st] * phase[st]
    return psi


@njit(cache=True)
def diag_mul_field(psi, phase, leg_diff, field_tab, offset):
    """Diagonal half of one step with the ramp on: the static part comes
    as a phase table, the field part as a small table indexed by the leg
    magnetization difference."""
    for st in range(psi.shape[0]):
        psi[st] = psi[st] * phase[st] * field_tab[leg_diff[st] + offset]
    return psi


@njit(cache=True)
def pf2_step(psi, bond_a, bond_b, cos_t, sin_t, zphase, leg_diff,
             field_tab, offset):
    """One second-order split step: planar half-wing in bond order, the
    diagonal factor (with the field), then the mirrored half-wing."""
    gate_xy(psi, bond_a, bond_b, cos_t, sin_t, False)
    diag_mul_field(psi, zphase, leg_diff, field_tab, offset)
    gate_xy(psi, bond_a, bond_b, cos_t, sin_t, True)
    return psi


@njit(cache=True)
def autocorr_loop(psi0, psi, n_steps, bond_a, bond_b, cos_t, sin_t,
                  zphase):
    """<psi0|psi(t)> at every step of field-free evolution.

    Runs the whole loop compiled; per-step Python dispatch would dominate
    for small Hilbert spaces.
    """
    samples = np.empty(n_steps + 1, np.complex128)
    samples[0] = pairwise_dot(psi0, psi)
    for j in range(n_steps):
        gate_xy(psi, bond_a, bond_b, cos_t, sin_t, False)
        diag_mul(psi, zphase)
        gate_xy(psi, bond_a, bond_b, cos_t, sin_t, True)
        samples[j + 1] = pairwise_dot(psi0, psi)
    return samples


@njit(cache=True)
def apply_h(out, psi, bond_a, bond_b, flip_w, zz_diag, leg_diff,
            field_coef):
    """out = (H + field_coef * field_operator) psi, matrix free.

    zz_diag carries every S^z S^z bond; the spin-flip part contributes
    flip_w = J/2 between basis states whose bond spins differ.  The field
    operator is -(S^z_leg1 - S^z_leg2), diagonal with value -leg_diff/2.
    Accumulation order per output amplitude is fixed.
    """
    nb = bond_a.shape[0]
    n = psi.shape[0]
    for st in range(n):
        acc = (zz_diag[st] - 0.5 * field_coef * leg_diff[st]) * psi[st]
        for k in range(nb):
            a = bond_a[k]
            b = bond_b[k]
            if ((st >> a) & 1) != ((st >> b) & 1):
                acc += flip_w[k] * psi[st ^ ((np.int64(1) << a) | (np.int64(1) << b))]
        out[st] = acc
    return out


@njit(cache=True)
def build_zz_diag(n_spins, bond_a, bond_b, weight):
    """Diagonal of the summed S^z S^z bond terms, one entry per basis state."""
    dim = np.int64(1) << n_spins
    out = np.zeros(dim, np.float64)
    for st in range(dim):
        acc = 0.0
        for k in range(bond_a.shape[0]):
            za = 2.0 * ((st >> bond_a[k]) & 1) - 1.0
            zb = 2.0 * ((st >> bond_b[k]) & 1) - 1.0
            acc += weight[k] * 0.25 * za * zb
        out[st] = acc
    return out


@njit(cache=True)
def build_leg_sums(n_spins):
    """Per-state doubled leg magnetizations (sum of 2 S^z = +-1 per site).

    Sites with even bit index form leg 1, odd bit index leg 2.
    """
    dim = np.int64(1) << n_spins
    m1 = np.zeros(dim, np.int8)
    m2 = np.zeros(dim, np.int8)
    for st in range(dim):
        a = 0
        b = 0
        for bit in range(0, n_spins, 2):
            a += 2 * ((st >> bit) & 1) - 1
        for bit in range(1, n_spins, 2):
            b += 2 * ((st >> bit) & 1) - 1
        m1[st] = a
        m2[st] = b
    return m1, m2


@njit(cache=True)
def sz_leg_expectations(psi, m1, m2):
    """(<S^z_leg1>, <S^z_leg2>) for a normalized state."""
    s1 = 0.0
    s2 = 0.0
    for st in range(psi.shape[0]):
        w = psi[st].real * psi[st].real + psi[st].imag * psi[st].imag
        s1 += w * m1[st]
        s2 += w * m2[st]
    return 0.5 * s1, 0.5 * s2
