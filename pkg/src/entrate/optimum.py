"""Closed-form optimal rates without ancillas.

Covers the constrained maximization of the rate over unit-variance
Hamiltonians at a fixed state (a Lagrange system with an explicit
solution), the surprisal-variance formula for the maximum, the optimal
one-parameter state family, and the 1-D search over that parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np

from .qcore import SchmidtState, ValidationError
from .rate import gamma_rate_k, schmidt_rotation

__all__ = [
    "LagrangeSolution",
    "OptimalDesign",
    "GammaOptimum",
    "surprisal_variance",
    "lagrange_solve",
    "max_rate",
    "build_optimal_state",
    "build_optimal_hamiltonian",
    "gamma_curve",
    "optimal_gamma",
    "optimal_design",
    "brute_force_max_k",
    "antisymmetric_from_k",
    "achieving_hamiltonian",
]

GRID_POINTS = 10_000
# Uniform coefficient vectors make the multiplier lambda1 vanish; below
# this threshold on its square the system is reported as degenerate.
DEGENERACY_TOL = 1e-24


@dataclass(frozen=True)
class LagrangeSolution:
    """Stationary point of the rate under unit imaginary-part variance.

    ``k`` is the unit vector orthogonal to the coefficients that attains
    the maximum; ``lambda1`` carries the negative root, which is the
    branch whose stationary ``k`` maximizes (rather than minimizes) the
    rate.  ``degenerate`` flags uniform coefficients, where every
    feasible k gives rate zero.
    """

    k: np.ndarray
    lambda1: float
    lambda2: float
    max_rate: float
    degenerate: bool = False


class GammaOptimum(NamedTuple):
    gamma: float
    rate: float


@dataclass(frozen=True)
class OptimalDesign:
    """Optimal state/Hamiltonian pair for a given local dimension."""

    gamma: float
    d: int
    state: SchmidtState
    hamiltonian: np.ndarray
    rate: float

    def __post_init__(self) -> None:
        h = np.asarray(self.hamiltonian, dtype=complex)
        if np.max(np.abs(h - h.conj().T)) > 1e-10:
            raise ValidationError("optimal Hamiltonian must be Hermitian")
        if abs(np.trace(h)) > 1e-10:
            raise ValidationError("optimal Hamiltonian must be traceless")
        object.__setattr__(self, "hamiltonian", h)


def surprisal_variance(p: np.ndarray) -> float:
    """Variance of -log p_i under p: sum p log^2 p - (sum p log p)^2.

    Evaluated in the centered form sum p (log p - mean)^2, which agrees
    with the raw moment difference to 1e-12 but does not cancel
    catastrophically for near-uniform p (the raw form leaves an O(eps)
    residue whose square root would pollute max-rate values).
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if np.any(p < -1e-12):
        raise ValidationError("probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-10:
        raise ValidationError(f"probabilities sum to {p.sum()!r}, not 1")
    pos = p[p > 0]
    logs = np.log(pos)
    mean = float(pos @ logs)
    f = float(pos @ (logs - mean) ** 2)
    return max(f, 0.0)


def lagrange_solve(state: SchmidtState) -> LagrangeSolution:
    """Solve the stationarity system for the rate-maximizing k.

    With lambda2 the coefficient-weighted mean of log C, the residuals
    C_i log C_i - 2 lambda1 k_i - lambda2 C_i vanish identically for
    k_i = C_i (log C_i - lambda2) / (2 lambda1), and the negative root
    for lambda1 normalizes k to the unit sphere while making the rate a
    maximum, 2 sqrt(f), instead of its negative.
    """
    c = state.coefficients
    mask = c > 0
    cm = c[mask]
    logs = np.log(cm)
    lambda2 = float((cm**2) @ logs)
    spread = float((cm**2) @ (logs - lambda2) ** 2)
    if spread <= DEGENERACY_TOL:
        return LagrangeSolution(
            k=np.zeros_like(c),
            lambda1=0.0,
            lambda2=lambda2,
            max_rate=0.0,
            degenerate=True,
        )
    lambda1 = -0.5 * math.sqrt(spread)
    k = np.zeros_like(c)
    k[mask] = cm * (logs - lambda2) / (2 * lambda1)
    return LagrangeSolution(
        k=k,
        lambda1=lambda1,
        lambda2=lambda2,
        max_rate=gamma_rate_k(state, k),
    )


def max_rate(state: SchmidtState) -> float:
    """Largest achievable rate at unit energy variance: 2 sqrt(f(C^2))."""
    return 2.0 * math.sqrt(surprisal_variance(state.coefficients**2))


def build_optimal_state(gamma: float, d: int) -> SchmidtState:
    """State with coefficients (sqrt(gamma), sqrt((1-gamma)/(d-1)) x (d-1)).

    Coefficients are stored in canonical nonincreasing order, so for
    gamma < 1/d the distinguished entry appears last.
    """
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma!r}")
    if d < 2:
        raise ValidationError("dimension must be >= 2")
    rest = math.sqrt((1.0 - gamma) / (d - 1))
    c = np.sort(np.array([math.sqrt(gamma)] + [rest] * (d - 1)))[::-1]
    eye = np.eye(d, dtype=complex)
    return SchmidtState(coefficients=c, d_a=d, d_b=d, basis_a=eye, basis_b=eye)


def build_optimal_hamiltonian(d_a: int, d_b: int) -> np.ndarray:
    """Rate-optimal Hamiltonian i(|phi><00| - |00><phi|) at unit variance.

    phi is the uniform superposition of |ii> for i >= 1; the sign is
    chosen so entropy grows (rather than shrinks) at the paired optimal
    state.  The matrix is rescaled so its energy variance equals 1 at
    that state; the family is built so the variance is already 1 there,
    which makes the rescaling a numerical no-op kept for exactness.
    """
    if d_a != d_b:
        raise ValidationError("optimal construction requires d_a == d_b")
    d = d_a
    if d < 2:
        raise ValidationError("dimension must be >= 2")
    n = d * d
    phi = np.zeros(n, dtype=complex)
    for i in range(1, d):
        phi[i * d + i] = 1.0 / math.sqrt(d - 1)
    e00 = np.zeros(n, dtype=complex)
    e00[0] = 1.0
    h = 1j * (np.outer(phi, e00.conj()) - np.outer(e00, phi.conj()))

    gamma_star = optimal_gamma(d).gamma
    paired = np.zeros(n, dtype=complex)
    paired[0] = math.sqrt(gamma_star)
    for i in range(1, d):
        paired[i * d + i] = math.sqrt((1.0 - gamma_star) / (d - 1))
    hp = h @ paired
    mean = float(np.real(paired.conj() @ hp))
    variance = float(np.real(hp.conj() @ hp)) - mean**2
    return h / math.sqrt(variance)


def gamma_curve(gamma: np.ndarray, d: int) -> np.ndarray:
    """Signed rate 2 sqrt(g(1-g)) log(g(d-1)/(1-g)) of the optimal family.

    Negative below the balance point g = 1/d, where the distinguished
    coefficient is the small one and the fixed Hamiltonian family drains
    entropy instead of generating it.
    """
    gamma = np.asarray(gamma, dtype=float)
    return 2.0 * np.sqrt(gamma * (1.0 - gamma)) * np.log(
        gamma * (d - 1) / (1.0 - gamma)
    )


def optimal_gamma(d: int) -> GammaOptimum:
    """Maximize 2 sqrt(g(1-g)) log(g(d-1)/(1-g)) over g in (0, 1).

    A 10^4-point grid locates the basin and golden-section iterations
    refine the bracket well below the reporting precision.
    """
    if d < 2:
        raise ValidationError("dimension must be >= 2")
    grid = np.linspace(0.0, 1.0, GRID_POINTS + 2)[1:-1]
    values = gamma_curve(grid, d)
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1 = float(gamma_curve(np.array([c1]), d)[0])
    f2 = float(gamma_curve(np.array([c2]), d)[0])
    for _ in range(100):
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = float(gamma_curve(np.array([c2]), d)[0])
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = float(gamma_curve(np.array([c1]), d)[0])
    gamma = (a + b) / 2.0
    return GammaOptimum(gamma=gamma, rate=float(gamma_curve(np.array([gamma]), d)[0]))


def optimal_design(d: int) -> OptimalDesign:
    """Bundle the optimal gamma, state, and Hamiltonian for dimension d."""
    gamma, rate = optimal_gamma(d)
    return OptimalDesign(
        gamma=gamma,
        d=d,
        state=build_optimal_state(gamma, d),
        hamiltonian=build_optimal_hamiltonian(d, d),
        rate=rate,
    )


def brute_force_max_k(state: SchmidtState, trials: int, seed: Any) -> float:
    """Maximize the k-form rate on {|k| = 1, C.k = 0} by projected ascent.

    Independent check on the closed form: ascends the linear objective
    from ``trials`` random starts with tangent projection and
    renormalization each step, deterministic per (seed, start).
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    c = state.coefficients
    a = np.zeros_like(c)
    mask = c > 0
    a[mask] = -4.0 * c[mask] * np.log(c[mask])

    def project(k: np.ndarray) -> np.ndarray | None:
        k = k - (c @ k) * c
        norm = np.linalg.norm(k)
        return k / norm if norm > 1e-300 else None

    best = -math.inf
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        k = project(rng.normal(size=c.size))
        if k is None:
            continue
        value = float(a @ k)
        for _ in range(200):
            k2 = project(k + 0.5 * a)
            if k2 is None:
                break
            v2 = float(a @ k2)
            if v2 <= value + 1e-15 * max(abs(value), 1.0):
                break
            k, value = k2, v2
        value = gamma_rate_k(state, k)
        if value > best:
            best = value
    return 0.0 if best == -math.inf else best


def antisymmetric_from_k(c: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Minimal-Frobenius-norm antisymmetric solution M of M c = k.

    Requires |c| = 1 and c.k = 0; then k c^T - c k^T solves the system,
    and any other antisymmetric solution differs by a matrix orthogonal
    to it, so this one has minimal norm.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.size != c.size:
        raise ValidationError("c and k must have equal length")
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise ValidationError("c must be a unit vector")
    if abs(c @ k) > 1e-8:
        raise ValidationError("k must be orthogonal to c")
    return np.outer(k, c) - np.outer(c, k)


def achieving_hamiltonian(
    state: SchmidtState, solution: LagrangeSolution | None = None
) -> np.ndarray:
    """Hamiltonian attaining the maximal rate at unit imaginary variance.

    Embeds i times the minimal-norm antisymmetric block built from the
    Lagrange k on the Schmidt-diagonal subspace, then rotates back to
    the computational basis of the state.
    """
    if solution is None:
        solution = lagrange_solve(state)
    d = state.rank_dim
    m_i = (
        np.zeros((d, d))
        if solution.degenerate
        else antisymmetric_from_k(state.coefficients, solution.k)
    )
    n = state.d_a * state.d_b
    h_tilde = np.zeros((n, n), dtype=complex)
    idx = np.arange(d) * state.d_b + np.arange(d)
    h_tilde[np.ix_(idx, idx)] = 1j * m_i
    w = schmidt_rotation(state)
    return w @ h_tilde @ w.conj().T
