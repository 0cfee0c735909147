"""Closed-form entanglement generation rate and energy statistics.

The instantaneous rate of a state with Schmidt coefficients C under a
Hamiltonian H depends only on the imaginary part of the Schmidt-diagonal
block M_ij = <ii|H|jj>; everything here is expressed in that block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    HERM_TOL,
    PureState,
    SchmidtState,
    ValidationError,
    schmidt_decompose,
)

__all__ = [
    "SchmidtBlock",
    "EnergyStats",
    "schmidt_block",
    "gamma_rate",
    "gamma_rate_k",
    "mean_energy",
    "energy_stats",
    "schmidt_rotation",
]


@dataclass(frozen=True)
class SchmidtBlock:
    """The d x d block M_ij = <ii|H|jj> in a state's Schmidt bases.

    Hermiticity of H makes M Hermitian, so the real part is symmetric
    and the imaginary part antisymmetric; only the latter feeds the rate.
    """

    m: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"block must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise ValidationError("block must be Hermitian")
        object.__setattr__(self, "m", m)

    @property
    def m_r(self) -> np.ndarray:
        return self.m.real

    @property
    def m_i(self) -> np.ndarray:
        return self.m.imag

    @property
    def dim(self) -> int:
        return int(self.m.shape[0])

    @classmethod
    def from_imag(cls, m_i: np.ndarray) -> "SchmidtBlock":
        """Block with zero real part from a real antisymmetric matrix."""
        m_i = np.asarray(m_i, dtype=float)
        return cls(m=1j * m_i)


@dataclass(frozen=True)
class EnergyStats:
    """Mean energy and the variance split into real/imaginary parts."""

    mean: float
    variance: float
    variance_real_part: float
    variance_imag_part: float

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "variance_real_part": self.variance_real_part,
            "variance_imag_part": self.variance_imag_part,
        }


def schmidt_rotation(state: SchmidtState) -> np.ndarray:
    """Unitary basis_a (x) basis_b mapping Schmidt products to the computational basis."""
    return np.kron(state.basis_a, state.basis_b)


def _diag_indices(state: SchmidtState) -> np.ndarray:
    d = state.rank_dim
    return np.arange(d) * state.d_b + np.arange(d)


def schmidt_block(h: np.ndarray, state: SchmidtState) -> SchmidtBlock:
    """Extract M_ij = <ii|H|jj> after rotating H into the Schmidt bases."""
    h = np.asarray(h, dtype=complex)
    n = state.d_a * state.d_b
    if h.shape != (n, n):
        raise ValidationError(f"expected a {n}x{n} Hamiltonian, got {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > HERM_TOL:
        raise ValidationError("Hamiltonian must be Hermitian")
    w = schmidt_rotation(state)
    h_tilde = w.conj().T @ h @ w
    idx = _diag_indices(state)
    return SchmidtBlock(m=h_tilde[np.ix_(idx, idx)])


def gamma_rate(state: SchmidtState, block: SchmidtBlock) -> float:
    """Rate 4 sum_{i>j} C_i C_j log(C_i/C_j) M_I[j, i] in natural-log units.

    Terms with a vanishing coefficient or with C_i == C_j are exact
    zeros and are skipped rather than evaluated.
    """
    c = state.coefficients
    if block.dim != c.size:
        raise ValidationError("block dimension does not match the state")
    m_i = block.m_i
    total = 0.0
    for i in range(c.size):
        for j in range(i):
            if c[i] == 0.0 or c[j] == 0.0 or c[i] == c[j]:
                continue
            total += 4.0 * c[i] * c[j] * np.log(c[i] / c[j]) * m_i[j, i]
    return float(total)


def gamma_rate_k(state: SchmidtState, k: np.ndarray) -> float:
    """Equivalent rate expression -4 sum_i k_i C_i log C_i.

    Agrees with :func:`gamma_rate` when k = M_I C.
    """
    c = state.coefficients
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.size != c.size:
        raise ValidationError(f"expected k of length {c.size}, got {k.size}")
    mask = c > 0
    cm = c[mask]
    return float(-4.0 * np.sum(k[mask] * cm * np.log(cm)))


def mean_energy(state: SchmidtState, block: SchmidtBlock) -> float:
    """Mean energy sum_ij C_i C_j M_R[i, j]."""
    c = state.coefficients
    if block.dim != c.size:
        raise ValidationError("block dimension does not match the state")
    return float(c @ block.m_r @ c)


def energy_stats(psi: PureState, h: np.ndarray) -> EnergyStats:
    """Energy mean and variance, split along the Schmidt-basis real/imag parts.

    H is rotated into the full Schmidt product basis of psi, where the
    state vector is real; the variance then decomposes exactly into the
    real-part variance plus <psi|H_I H_I^T|psi>.
    """
    h = np.asarray(h, dtype=complex)
    n = psi.d_a * psi.d_b
    if h.shape != (n, n):
        raise ValidationError(f"expected a {n}x{n} Hamiltonian, got {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > HERM_TOL:
        raise ValidationError("Hamiltonian must be Hermitian")
    state = schmidt_decompose(psi)
    w = schmidt_rotation(state)
    h_tilde = w.conj().T @ h @ w
    h_r = h_tilde.real
    h_i = h_tilde.imag

    # In this basis the state is exactly sum_i C_i e_{ii}, a real vector.
    vec = np.zeros(n)
    vec[_diag_indices(state)] = state.coefficients

    mean = float(vec @ h_r @ vec)
    dev = h_tilde @ vec - mean * vec
    real_dev = h_r @ vec - mean * vec
    imag_vec = h_i.T @ vec
    return EnergyStats(
        mean=mean,
        variance=float(np.real(dev.conj() @ dev)),
        variance_real_part=float(real_dev @ real_dev),
        variance_imag_part=float(imag_vec @ imag_vec),
    )
