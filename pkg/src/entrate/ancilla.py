"""Ancilla-assisted rate optimization in coefficient/block matrices.

A state shared with local ancillas is described by a nonnegative
coefficient matrix C (rows index the ancilla label) and the Hamiltonian
enters only through a real antisymmetric block G.  The rate objective
and the variance constraint are low-dimensional matrix expressions in
(C, G, K) with K = C log C, which this module evaluates, maximizes over
G in closed form, maximizes over C numerically, and arbitrates against
the finite-difference oracle on the assembled global system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .optimum import optimal_gamma
from .oracle import FDConfig, fd_rate
from .qcore import PureState, ValidationError, hermiticity_defect

__all__ = [
    "AncillaCoeffs",
    "GBlock",
    "AncillaOptimum",
    "SingularityError",
    "ConvergenceError",
    "DimensionCapError",
    "build_structured_hamiltonian",
    "structure_defect",
    "ancilla_objective",
    "variance_constraint",
    "lambda_sq",
    "recover_g",
    "inner_opt_over_g",
    "sup_search",
    "assemble_and_arbitrate",
]

DEFAULT_DIM_CAP = 4096
# (regularization, entry floor) pairs applied in order during sup_search.
ANNEAL_SCHEDULE = ((1e-4, 1e-4), (1e-7, 1e-6), (1e-10, 1e-8))
FD_GRAD_STEP = 1e-6
SINGULARITY_COND_LIMIT = 1e12


class SingularityError(ValidationError):
    """Unregularized evaluation hit a numerically singular C^T C."""


class ConvergenceError(RuntimeError):
    """No optimizer start converged."""


class DimensionCapError(ValidationError):
    """Assembled system exceeds the configured dimension cap."""


def _xlogx(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    mask = c > 0
    out[mask] = c[mask] * np.log(c[mask])
    return out


@dataclass(frozen=True)
class AncillaCoeffs:
    """Nonnegative coefficient matrix C with unit Frobenius norm.

    ``k`` is the derived entrywise matrix C log C, zero where C is zero.
    """

    c: np.ndarray
    k: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 2:
            raise ValidationError("coefficient matrix must be 2-D")
        if c.min() < 0:
            raise ValidationError("coefficient entries must be nonnegative")
        if abs(float(np.linalg.norm(c)) - 1.0) > 1e-12:
            raise ValidationError("coefficient matrix must have unit Frobenius norm")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "k", _xlogx(c))

    @property
    def d_ancilla(self) -> int:
        return int(self.c.shape[0])

    @property
    def d_a(self) -> int:
        return int(self.c.shape[1])

    @classmethod
    def normalized(cls, raw: np.ndarray) -> "AncillaCoeffs":
        raw = np.asarray(raw, dtype=float)
        norm = float(np.linalg.norm(raw))
        if norm == 0.0:
            raise ValidationError("coefficient matrix must be nonzero")
        return cls(c=raw / norm)


@dataclass(frozen=True)
class GBlock:
    """Real antisymmetric block stored by its strict upper triangle."""

    upper: np.ndarray
    d: int

    def __post_init__(self) -> None:
        upper = np.asarray(self.upper, dtype=float).reshape(-1)
        expected = self.d * (self.d - 1) // 2
        if upper.size != expected:
            raise ValidationError(
                f"expected {expected} upper-triangle entries, got {upper.size}"
            )
        object.__setattr__(self, "upper", upper)

    @property
    def g(self) -> np.ndarray:
        m = np.zeros((self.d, self.d))
        m[np.triu_indices(self.d, 1)] = self.upper
        return m - m.T

    @classmethod
    def from_matrix(cls, m: np.ndarray, tol: float = 1e-10) -> "GBlock":
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("block must be a square matrix")
        if m.size and np.max(np.abs(m + m.T)) > tol:
            raise ValidationError("block must be antisymmetric")
        sym = (m - m.T) / 2.0
        return cls(upper=sym[np.triu_indices(m.shape[0], 1)], d=m.shape[0])

    @classmethod
    def zeros(cls, d: int) -> "GBlock":
        return cls(upper=np.zeros(d * (d - 1) // 2), d=d)


@dataclass(frozen=True)
class AncillaOptimum:
    """Best ancilla-assisted rate found by the supremum search."""

    value: float
    lambda1: float
    c_star: AncillaCoeffs
    g_star: GBlock
    starts: int
    converged_fraction: float
    regularization: float
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "value_nat": self.value,
            "value_bits": self.value / math.log(2.0),
            "lambda1": self.lambda1,
            "c_star": [[float(x) for x in row] for row in self.c_star.c],
            "g_star_upper": [float(x) for x in self.g_star.upper],
            "starts": self.starts,
            "converged_fraction": self.converged_fraction,
            "regularization": self.regularization,
            "diagnostics": self.diagnostics,
        }


# --- structured Hamiltonians ----------------------------------------------


def build_structured_hamiltonian(
    h_ab: np.ndarray, d_ancilla_a: int, d_ancilla_b: int
) -> np.ndarray:
    """Extend H on A x B to I (x) H (x) I on (A' A) x (B B')."""
    h_ab = np.asarray(h_ab, dtype=complex)
    if hermiticity_defect(h_ab) > 1e-10:
        raise ValidationError("H_AB must be Hermitian")
    if d_ancilla_a < 1 or d_ancilla_b < 1:
        raise ValidationError("ancilla dimensions must be >= 1")
    h = np.kron(np.eye(d_ancilla_a), np.kron(h_ab, np.eye(d_ancilla_b)))
    # Construction guarantees the block pattern; the check is cheap and
    # keeps the constructor honest about its own output.
    n_a = h_ab.shape[0]
    defect = structure_defect(h, d_ancilla_a, n_a, 1, d_ancilla_b)
    if defect > 1e-12:
        raise AssertionError(f"structured build violated its pattern ({defect:.3e})")
    return h


def structure_defect(
    h: np.ndarray, d_ancilla_a: int, d_a: int, d_b: int, d_ancilla_b: int
) -> float:
    """Largest matrix element connecting different ancilla labels.

    Zero exactly when H acts as identity on both ancilla factors of the
    ordering A' x A x B x B'.
    """
    h = np.asarray(h, dtype=complex)
    n = d_ancilla_a * d_a * d_b * d_ancilla_b
    if h.shape != (n, n):
        raise ValidationError(f"expected a {n}x{n} matrix, got {h.shape}")
    t = h.reshape(
        d_ancilla_a, d_a * d_b, d_ancilla_b, d_ancilla_a, d_a * d_b, d_ancilla_b
    ).copy()
    for a_p in range(d_ancilla_a):
        for b_p in range(d_ancilla_b):
            t[a_p, :, b_p, a_p, :, b_p] = 0.0
    return float(np.max(np.abs(t)))


# --- objective, constraint, and the fixed-C inner maximum ------------------


def ancilla_objective(coeffs: AncillaCoeffs, g: GBlock) -> float:
    """Rate of the (C, G) pair: 2 tr((K^T C - C^T K) G).

    Equals the double sum
    2 sum_a sum_{b,d} C_ab C_ad log(C_ab / C_ad) G_db identically, and
    the finite-difference rate of the assembled system arbitrates the
    convention (see :func:`assemble_and_arbitrate`).
    """
    if g.d != coeffs.d_a:
        raise ValidationError("block dimension does not match the coefficients")
    c, k = coeffs.c, coeffs.k
    return float(2.0 * np.trace((k.T @ c - c.T @ k) @ g.g))


def variance_constraint(coeffs: AncillaCoeffs, g: GBlock) -> float:
    """Squared Frobenius norm |C G|_F^2 (the unit-variance constraint)."""
    if g.d != coeffs.d_a:
        raise ValidationError("block dimension does not match the coefficients")
    return float(np.linalg.norm(coeffs.c @ g.g, "fro") ** 2)


def _pair_data(c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues b of C^T C, eigenvectors O, and A rotated into them."""
    k = _xlogx(c)
    a = c.T @ k - k.T @ c
    b = c.T @ c
    evals, evecs = np.linalg.eigh(b)
    return evals, evecs, evecs.T @ a @ evecs


def _lambda_sq_raw(c: np.ndarray, regularization: float) -> float:
    evals, _, a_rot = _pair_data(c)
    d = evals.size
    total = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            den = evals[i] + evals[j] + 2.0 * regularization
            if den > 1e-300:
                total += 4.0 * a_rot[i, j] ** 2 / den
    return total


def lambda_sq(coeffs: AncillaCoeffs, regularization: float) -> float:
    """Exact fixed-C maximum of (objective/2)^2 over antisymmetric G.

    The maximization of the objective under the regularized constraint
    |CG|_F^2 + eps |G|_F^2 = 1 decouples into independent coordinate
    pairs in the eigenbasis of B = C^T C, giving

        sum_{i<j} 4 A'_ij^2 / (b_i + b_j + 2 eps)

    with A = C^T K - K^T C rotated into that eigenbasis.  A vanishes on
    null-space pairs of B, so the value stays finite for eps > 0 even
    when B is singular; eps = 0 requires a well-conditioned B.
    """
    if regularization < 0:
        raise ValidationError("regularization must be >= 0")
    c = coeffs.c
    if regularization == 0.0:
        evals = np.linalg.eigvalsh(c.T @ c)
        smallest = float(evals.min())
        if smallest <= 0 or float(evals.max()) / smallest > SINGULARITY_COND_LIMIT:
            raise SingularityError(
                "C^T C is numerically singular; pass a positive regularization"
            )
    return _lambda_sq_raw(c, regularization)


def recover_g(
    coeffs: AncillaCoeffs,
    lambda1: float,
    regularization: float,
    return_defect: bool = False,
) -> GBlock | tuple[GBlock, float]:
    """Maximizer G reconstructed from C and the multiplier lambda1.

    Solves the pairwise stationarity conditions in the eigenbasis of
    C^T C: G'_ij = 2 A'_ij / ((b_i + b_j + 2 eps) lambda1), rotated
    back.  The result is antisymmetrized exactly; with
    ``return_defect`` the pre-projection antisymmetry defect is
    reported alongside.
    """
    if lambda1 <= 0:
        raise ValidationError("lambda1 must be positive")
    if regularization < 0:
        raise ValidationError("regularization must be >= 0")
    evals, evecs, a_rot = _pair_data(coeffs.c)
    d = evals.size
    g_rot = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            den = evals[i] + evals[j] + 2.0 * regularization
            if den > 1e-300:
                g_rot[i, j] = 2.0 * a_rot[i, j] / (den * lambda1)
    raw = evecs @ g_rot @ evecs.T
    defect = float(np.max(np.abs(raw + raw.T))) if raw.size else 0.0
    block = GBlock.from_matrix((raw - raw.T) / 2.0)
    return (block, defect) if return_defect else block


def inner_opt_over_g(
    coeffs: AncillaCoeffs,
    starts: int = 8,
    seed: Any = 0,
    max_iter: int = 2000,
) -> tuple[float, GBlock]:
    """Maximize the objective over antisymmetric G at |CG|_F = 1 by ascent.

    Independent of the closed form: parameterizes G by its strict upper
    triangle and ascends the scale-invariant ratio objective/|CG|_F with
    tangent-projected gradients and exact line searches, from ``starts``
    random seeds.  Deterministic per (seed, start); ties go to the
    lowest start index.
    """
    if starts < 1:
        raise ValidationError("starts must be >= 1")
    c = coeffs.c
    d = coeffs.d_a
    iu = np.triu_indices(d, 1)
    a_full = c.T @ coeffs.k - coeffs.k.T @ c
    b_full = c.T @ c
    obj_vec = 4.0 * a_full[iu]

    def quad_map(g_vec: np.ndarray) -> np.ndarray:
        # Represents the constraint quadratic form: q(g) = g . quad_map(g).
        m = np.zeros((d, d))
        m[iu] = g_vec
        m = m - m.T
        bm = b_full @ m
        return (bm - bm.T)[iu]

    def block_of(g_vec: np.ndarray) -> np.ndarray:
        m = np.zeros((d, d))
        m[iu] = g_vec
        return m - m.T

    best = -math.inf
    best_g: np.ndarray | None = None
    converged = 0
    for start in range(starts):
        rng = np.random.default_rng((seed, start))
        g_vec = None
        for _ in range(20):
            cand = rng.normal(size=iu[0].size)
            q = float(cand @ quad_map(cand))
            if q > 1e-280:
                g_vec = cand / math.sqrt(q)
                break
        if g_vec is None:
            continue
        if float(obj_vec @ g_vec) < 0:
            g_vec = -g_vec
        ok = False
        for _ in range(max_iter):
            mg = quad_map(g_vec)
            q = float(g_vec @ mg)
            value = float(obj_vec @ g_vec) / math.sqrt(q)
            denom = float(mg @ mg)
            u = obj_vec - (float(obj_vec @ mg) / denom) * mg if denom > 0 else obj_vec
            if np.linalg.norm(u) < 1e-14 * max(np.linalg.norm(obj_vec), 1.0):
                ok = True
                break
            # Along g + t u the ratio has a single stationary t; also try
            # the asymptotic direction, which wins when that root is the
            # one-dimensional minimum.
            alpha = float(obj_vec @ g_vec)
            beta = float(obj_vec @ u)
            cross = float(u @ mg)
            curv = float(u @ quad_map(u))
            candidates = []
            den_t = beta * cross - alpha * curv
            if abs(den_t) > 1e-300:
                t = (alpha * cross - beta * q) / den_t
                candidates.append(g_vec + t * u)
            if curv > 0 and beta != 0:
                candidates.append(math.copysign(1.0, beta) * u)
            improved = False
            for cand in candidates:
                qc = float(cand @ quad_map(cand))
                if qc <= 1e-280:
                    continue
                cand = cand / math.sqrt(qc)
                if float(obj_vec @ cand) < 0:
                    cand = -cand
                if float(obj_vec @ cand) > value + 1e-14 * max(abs(value), 1.0):
                    g_vec = cand
                    improved = True
                    break
            if not improved:
                ok = True
                break
        converged += ok
        g_mat = block_of(g_vec)
        norm = float(np.linalg.norm(c @ g_mat, "fro"))
        if norm <= 0:
            continue
        g_mat = g_mat / norm
        value = float(2.0 * np.trace((coeffs.k.T @ c - c.T @ coeffs.k) @ g_mat))
        if value > best:
            best = value
            best_g = g_mat
    if best_g is None or converged == 0:
        raise ConvergenceError(
            f"no start converged (starts={starts}, max_iter={max_iter})"
        )
    return best, GBlock.from_matrix(best_g)


# --- supremum over coefficient matrices ------------------------------------


def _embedding_seed(d_a: int, d_ancilla: int, fill: float) -> np.ndarray:
    """No-ancilla optimal coefficients in row 0, floor elsewhere."""
    gamma = optimal_gamma(d_a).gamma
    row = [math.sqrt(gamma)] + [math.sqrt((1.0 - gamma) / (d_a - 1))] * (d_a - 1)
    c = np.full((d_ancilla, d_a), fill)
    c[0, :] = row
    return c


def sup_search(
    d_a: int,
    d_ancilla: int,
    starts: int = 8,
    seed: Any = 0,
    max_iter: int = 300,
) -> AncillaOptimum:
    """Search sup over C of the ancilla-assisted rate 2 sqrt(lambda_sq).

    Multi-start projected gradient ascent over nonnegative C with unit
    Frobenius norm; entries are floored at delta and the regularization
    is annealed toward zero across refinement rounds.  Start 0 embeds
    the no-ancilla optimum, so the result never falls below it (up to
    solver tolerance).  Gradients are central finite differences.
    """
    if d_a < 2:
        raise ValidationError("d_a must be >= 2")
    if d_ancilla < 1:
        raise ValidationError("d_ancilla must be >= 1")
    if starts < 1:
        raise ValidationError("starts must be >= 1")

    shape = (d_ancilla, d_a)
    n = d_a * d_ancilla

    def value_at(flat: np.ndarray, eps: float) -> float:
        return 2.0 * math.sqrt(max(_lambda_sq_raw(flat.reshape(shape), eps), 0.0))

    best_value = -math.inf
    best_c: np.ndarray | None = None
    converged = 0
    total_iterations = 0
    final_eps = ANNEAL_SCHEDULE[-1][0]

    for start in range(starts):
        if start == 0:
            c = _embedding_seed(d_a, d_ancilla, ANNEAL_SCHEDULE[0][1])
        else:
            rng = np.random.default_rng((seed, start))
            c = np.abs(rng.normal(size=shape)) + 0.01
        flat = c.reshape(-1) / np.linalg.norm(c)
        step = 0.05
        ok = False
        for eps, delta in ANNEAL_SCHEDULE:
            flat = np.clip(flat, delta, None)
            flat = flat / np.linalg.norm(flat)
            value = value_at(flat, eps)
            for _ in range(max_iter):
                total_iterations += 1
                grad = np.zeros(n)
                for i in range(n):
                    probe = np.zeros(n)
                    probe[i] = FD_GRAD_STEP
                    up = value_at(np.clip(flat + probe, delta, None), eps)
                    down = value_at(np.clip(flat - probe, delta, None), eps)
                    grad[i] = (up - down) / (2.0 * FD_GRAD_STEP)
                norm = float(np.linalg.norm(grad))
                if norm < 1e-12:
                    ok = True
                    break
                trial = np.clip(flat + step * grad / norm, delta, None)
                trial = trial / np.linalg.norm(trial)
                trial_value = value_at(trial, eps)
                if trial_value > value:
                    flat, value = trial, trial_value
                    step = min(step * 1.05, 0.25)
                else:
                    step *= 0.5
                    if step < 1e-10:
                        ok = True
                        break
        converged += ok
        final_value = value_at(flat, final_eps)
        if final_value > best_value:
            best_value = final_value
            best_c = flat.reshape(shape).copy()

    assert best_c is not None
    coeffs = AncillaCoeffs.normalized(best_c)
    lambda1 = best_value / 2.0
    if lambda1 > 0:
        g_star = recover_g(coeffs, lambda1, final_eps)
    else:
        g_star = GBlock.zeros(d_a)
    return AncillaOptimum(
        value=best_value,
        lambda1=lambda1,
        c_star=coeffs,
        g_star=g_star,
        starts=starts,
        converged_fraction=converged / starts,
        regularization=final_eps,
        diagnostics={
            "iterations": total_iterations,
            "anneal_schedule": [list(pair) for pair in ANNEAL_SCHEDULE],
            "fd_grad_step": FD_GRAD_STEP,
        },
    )


# --- oracle arbitration -----------------------------------------------------


def assemble_and_arbitrate(
    coeffs: AncillaCoeffs,
    g: GBlock,
    dim_cap: int = DEFAULT_DIM_CAP,
    fd: FDConfig = FDConfig(scheme="richardson"),
) -> float:
    """Finite-difference rate of the fully assembled ancilla system.

    Builds the global pure state sum_ab C_ab |ab>(A'A) |ab>(BB') on the
    ordering A' x A x B x B' with mirrored dimensions, extends the
    Schmidt-diagonal block Hamiltonian with identity ancilla factors,
    and differentiates the evolved entanglement numerically.  The result
    arbitrates every sign and factor convention of the matrix forms.
    """
    if g.d != coeffs.d_a:
        raise ValidationError("block dimension does not match the coefficients")
    d_ancilla, d_a = coeffs.c.shape
    d_b, d_ancilla_b = d_a, d_ancilla
    total = d_ancilla * d_a * d_b * d_ancilla_b
    if total > dim_cap:
        raise DimensionCapError(
            f"assembled dimension {total} exceeds the cap {dim_cap}"
        )

    amplitudes = np.zeros(total, dtype=complex)
    for alpha in range(d_ancilla):
        for beta in range(d_a):
            idx = ((alpha * d_a + beta) * d_b + beta) * d_ancilla_b + alpha
            amplitudes[idx] = coeffs.c[alpha, beta]
    psi = PureState(
        d_a=d_ancilla * d_a, d_b=d_b * d_ancilla_b, amplitudes=amplitudes
    )

    g_mat = g.g
    h_ab = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for i in range(d_a):
        for j in range(d_a):
            h_ab[i * d_b + i, j * d_b + j] = 1j * g_mat[i, j]
    h = build_structured_hamiltonian(h_ab, d_ancilla, d_ancilla_b)
    return fd_rate(psi, h, fd)
