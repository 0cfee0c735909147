"""Finite-difference ground truth for entanglement rates and energy moments.

Nothing here touches the closed-form rate expressions: entanglement is
evolved exactly through the eigendecomposition of H and differentiated
numerically, so agreement with the analytic modules is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (
    HERM_TOL,
    PureState,
    ValidationError,
    von_neumann_entropy,
)

__all__ = ["FDConfig", "fd_rate", "direct_stats"]

_SCHEMES = ("central", "richardson")


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference settings.

    ``central`` uses the two-point stencil with O(step^2) truncation
    error; ``richardson`` extrapolates a four-point stencil to O(step^4)
    and is preferred near degenerate spectra.
    """

    step: float = 1e-5
    scheme: str = "central"
    entropy_log_base: float | None = None

    def __post_init__(self) -> None:
        if not 1e-8 <= self.step <= 1e-2:
            raise ValidationError(f"step {self.step!r} outside [1e-8, 1e-2]")
        if self.scheme not in _SCHEMES:
            raise ValidationError(f"scheme must be one of {_SCHEMES}")


def fd_rate(psi: PureState, h: np.ndarray, cfg: FDConfig = FDConfig()) -> float:
    """Numerical d/dt at t=0 of the reduced-state entropy under exp(-iHt)."""
    h = np.asarray(h, dtype=complex)
    n = psi.d_a * psi.d_b
    if h.shape != (n, n):
        raise ValidationError(f"expected a {n}x{n} Hamiltonian, got {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > HERM_TOL:
        raise ValidationError("Hamiltonian must be Hermitian")

    evals, evecs = np.linalg.eigh(h)
    coeff = evecs.conj().T @ psi.amplitudes

    def entropy_at(t: float) -> float:
        phi = evecs @ (np.exp(-1j * evals * t) * coeff)
        m = phi.reshape(psi.d_a, psi.d_b)
        rho_a = m @ m.conj().T
        return von_neumann_entropy(rho_a, log_base=cfg.entropy_log_base)

    s = cfg.step
    if cfg.scheme == "central":
        return (entropy_at(s) - entropy_at(-s)) / (2 * s)
    return (
        8 * (entropy_at(s) - entropy_at(-s))
        - (entropy_at(2 * s) - entropy_at(-2 * s))
    ) / (12 * s)


def direct_stats(psi: PureState, h: np.ndarray) -> tuple[float, float]:
    """Mean and variance of H in psi by dense products."""
    h = np.asarray(h, dtype=complex)
    n = psi.d_a * psi.d_b
    if h.shape != (n, n):
        raise ValidationError(f"expected a {n}x{n} Hamiltonian, got {h.shape}")
    hpsi = h @ psi.amplitudes
    mean = float(np.real(psi.amplitudes.conj() @ hpsi))
    variance = float(np.real(hpsi.conj() @ hpsi)) - mean**2
    return mean, variance
