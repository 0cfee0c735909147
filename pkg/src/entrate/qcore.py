"""Dense complex linear algebra for bipartite pure states.

Conventions used throughout the package:

* A pure state on A x B is a complex vector of length d_A * d_B in
  row-major (Kronecker) order, so the amplitude of |a>|b> sits at index
  a * d_B + b.
* Schmidt coefficients are kept nonnegative and sorted nonincreasing.
* All internal logarithms are natural; base conversion happens only at
  output boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

__all__ = [
    "ValidationError",
    "PureState",
    "SchmidtState",
    "schmidt_decompose",
    "assemble_state",
    "partial_trace_b",
    "von_neumann_entropy",
    "herm_expm",
    "random_state",
    "random_hermitian",
    "matrix_to_json",
    "matrix_from_json",
    "state_to_json",
    "state_from_json",
    "hermiticity_defect",
]

# Tolerances shared by the validators below.
NORM_TOL = 1e-12
HERM_TOL = 1e-10
UNITARY_TOL = 1e-10

# Eigenvalues below this floor contribute nothing to entropies (the
# x log x -> 0 limit); values below NEG_EIGENVALUE_LIMIT are rejected.
ENTROPY_EIGEN_FLOOR = 1e-12
NEG_EIGENVALUE_LIMIT = -1e-8


class ValidationError(ValueError):
    """An input violated a documented precondition."""


def hermiticity_defect(m: np.ndarray) -> float:
    """Max-norm distance of a square matrix from its conjugate transpose."""
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _require_hermitian(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > HERM_TOL:
        raise ValidationError(f"{name} is not Hermitian (defect {defect:.3e})")
    return m


@dataclass(frozen=True)
class PureState:
    """Normalized pure state of a d_a x d_b bipartite system."""

    d_a: int
    d_b: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.d_a < 1 or self.d_b < 1:
            raise ValidationError("subsystem dimensions must be >= 1")
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.d_a * self.d_b:
            raise ValidationError(
                f"expected {self.d_a * self.d_b} amplitudes, got {amp.size}"
            )
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {norm!r} is not 1 within {NORM_TOL}")
        object.__setattr__(self, "amplitudes", amp)

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to d_a x d_b (rows index subsystem A)."""
        return self.amplitudes.reshape(self.d_a, self.d_b)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class SchmidtState:
    """Schmidt form of a pure state.

    ``coefficients`` holds the nonincreasing Schmidt coefficients C_i
    (their squares sum to one) and ``basis_a`` / ``basis_b`` are the
    unitaries whose columns are the Schmidt vectors, so the state is
    sum_i C_i basis_a[:, i] (x) basis_b[:, i].
    """

    coefficients: np.ndarray
    d_a: int
    d_b: int
    basis_a: np.ndarray
    basis_b: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=float).reshape(-1)
        d = min(self.d_a, self.d_b)
        if c.size != d:
            raise ValidationError(f"expected {d} coefficients, got {c.size}")
        if np.any(c < 0):
            raise ValidationError("Schmidt coefficients must be nonnegative")
        if abs(float(c @ c) - 1.0) > NORM_TOL:
            raise ValidationError("squared Schmidt coefficients must sum to 1")
        if np.any(np.diff(c) > 1e-14):
            raise ValidationError("Schmidt coefficients must be sorted nonincreasing")
        for name, u, dim in (("basis_a", self.basis_a, self.d_a),
                             ("basis_b", self.basis_b, self.d_b)):
            u = np.asarray(u, dtype=complex)
            if u.shape != (dim, dim):
                raise ValidationError(f"{name} must be {dim}x{dim}")
            if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > UNITARY_TOL:
                raise ValidationError(f"{name} is not unitary")
            object.__setattr__(self, name, u)
        object.__setattr__(self, "coefficients", c)

    @property
    def rank_dim(self) -> int:
        return int(self.coefficients.size)


def schmidt_decompose(psi: PureState) -> SchmidtState:
    """Schmidt decomposition via singular value decomposition.

    The amplitude matrix is factored as U diag(C) V^H; singular values
    (already sorted nonincreasing) become the coefficients, and the
    columns of U and conj-transpose rows of V^H become the local bases.
    """
    u, s, vh = np.linalg.svd(psi.as_matrix())
    # Columns of vh.T (not its conjugate) are the B-side Schmidt vectors:
    # with that choice sum_i C_i u[:, i] (x) vh.T[:, i] equals U diag(C) V^H.
    return SchmidtState(
        coefficients=s,
        d_a=psi.d_a,
        d_b=psi.d_b,
        basis_a=u,
        basis_b=vh.T,
    )


def assemble_state(state: SchmidtState) -> PureState:
    """Rebuild the pure state sum_i C_i |i>_A |i>_B in the stored bases."""
    m = (state.basis_a[:, :state.rank_dim] * state.coefficients) @ \
        state.basis_b[:, :state.rank_dim].T
    return PureState(d_a=state.d_a, d_b=state.d_b, amplitudes=m.reshape(-1))


def partial_trace_b(rho: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Trace out subsystem B of a density matrix on A x B."""
    rho = np.asarray(rho, dtype=complex)
    n = d_a * d_b
    if rho.shape != (n, n):
        raise ValidationError(f"expected a {n}x{n} matrix, got shape {rho.shape}")
    _require_hermitian(rho, "density matrix")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValidationError("density matrix must have unit trace")
    return np.einsum("abcb->ac", rho.reshape(d_a, d_b, d_a, d_b))


def von_neumann_entropy(rho: np.ndarray, log_base: float | None = None) -> float:
    """Entropy -sum lambda log lambda of a density matrix.

    Eigenvalues at or below the floor are clamped to zero; anything
    below -1e-8 is rejected as non-positive-semidefinite.  ``log_base``
    of None means natural log.
    """
    rho = _require_hermitian(np.asarray(rho, dtype=complex), "density matrix")
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise ValidationError("density matrix must have unit trace")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < NEG_EIGENVALUE_LIMIT:
        raise ValidationError(
            f"eigenvalue {evals.min():.3e} below {NEG_EIGENVALUE_LIMIT:.0e}"
        )
    p = evals[evals > ENTROPY_EIGEN_FLOOR]
    s = float(-(p * np.log(p)).sum())
    if log_base is not None:
        s /= math.log(log_base)
    return s


def herm_expm(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary exp(-i H t) for Hermitian H via eigendecomposition."""
    h = _require_hermitian(np.asarray(h, dtype=complex), "Hamiltonian")
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def random_state(d_a: int, d_b: int, seed: Any) -> PureState:
    """Haar-like random pure state from a normalized complex Gaussian."""
    if d_a < 1 or d_b < 1:
        raise ValidationError("subsystem dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.normal(size=d_a * d_b) + 1j * rng.normal(size=d_a * d_b)
    return PureState(d_a=d_a, d_b=d_b, amplitudes=z / np.linalg.norm(z))


def random_hermitian(n: int, seed: Any) -> np.ndarray:
    """Random n x n Hermitian matrix (A + A^H)/2 of a complex Gaussian A."""
    if n < 1:
        raise ValidationError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


# --- JSON codec -----------------------------------------------------------
#
# Matrices travel as {"rows": n, "cols": m, "re_im": [[re, im], ...]} with
# entries in row-major order; states use the same entry layout keyed by
# their subsystem dimensions.


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValidationError("only 2-D matrices serialize")
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re_im": [[float(z.real), float(z.imag)] for z in flat],
    }


def _entries_from_json(obj: dict, key: str, expected: int) -> np.ndarray:
    pairs = obj.get(key)
    if not isinstance(pairs, list) or len(pairs) != expected:
        raise ValidationError(f"'{key}' must be a list of {expected} [re, im] pairs")
    out = np.empty(expected, dtype=complex)
    for i, pair in enumerate(pairs):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValidationError(f"entry {i} of '{key}' is not an [re, im] pair")
        out[i] = complex(float(pair[0]), float(pair[1]))
    return out


def matrix_from_json(obj: dict) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ValidationError("matrix JSON must be an object")
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("matrix JSON needs integer 'rows' and 'cols'") from exc
    if rows < 1 or cols < 1:
        raise ValidationError("matrix dimensions must be >= 1")
    return _entries_from_json(obj, "re_im", rows * cols).reshape(rows, cols)


def state_to_json(psi: PureState) -> dict:
    return {
        "d_a": psi.d_a,
        "d_b": psi.d_b,
        "re_im": [[float(z.real), float(z.imag)] for z in psi.amplitudes],
    }


def state_from_json(obj: dict) -> PureState:
    if not isinstance(obj, dict):
        raise ValidationError("state JSON must be an object")
    try:
        d_a, d_b = int(obj["d_a"]), int(obj["d_b"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("state JSON needs integer 'd_a' and 'd_b'") from exc
    amp = _entries_from_json(obj, "re_im", d_a * d_b)
    return PureState(d_a=d_a, d_b=d_b, amplitudes=amp)
