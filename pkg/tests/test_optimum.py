"""No-ancilla optimizers: Lagrange closed form, gamma family, oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from entrate.oracle import FDConfig, fd_rate
from entrate.qcore import (
    SchmidtState,
    ValidationError,
    assemble_state,
    random_state,
    schmidt_decompose,
)
from entrate.optimum import (
    LagrangeSolution,
    achieving_hamiltonian,
    antisymmetric_from_k,
    brute_force_max_k,
    build_optimal_hamiltonian,
    build_optimal_state,
    lagrange_solve,
    max_rate,
    optimal_design,
    optimal_gamma,
    surprisal_variance,
)
from entrate.rate import energy_stats, gamma_rate, schmidt_block

seeds = st.integers(min_value=0, max_value=2**32 - 1)
RICH = FDConfig(step=1e-5, scheme="richardson")

WORKED_RATE = 1.3183347464017314
GAMMA2 = (0.9167782781338101, 1.3254868386983631)


def identity_schmidt(c) -> SchmidtState:
    c = np.asarray(c, dtype=float)
    eye = np.eye(c.size, dtype=complex)
    return SchmidtState(coefficients=c, d_a=c.size, d_b=c.size,
                        basis_a=eye, basis_b=eye)


class TestSurprisalVariance:
    def test_uniform(self):
        assert surprisal_variance(np.full(5, 0.2)) == pytest.approx(0.0, abs=1e-15)

    def test_degenerate(self):
        assert surprisal_variance(np.array([1.0, 0.0, 0.0])) == 0.0

    def test_two_level_value(self):
        assert surprisal_variance(np.array([0.9, 0.1])) == pytest.approx(
            0.4345016258925294, abs=1e-14
        )

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            surprisal_variance(np.array([1.1, -0.1]))

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            surprisal_variance(np.array([0.5, 0.4]))

    @given(seed=seeds)
    @settings(max_examples=40, deadline=None)
    def test_two_variance_expressions_agree(self, seed):
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.ones(5))
        logs = np.log(np.clip(p, 1e-300, None))
        raw = float(p @ logs**2) - float(p @ logs) ** 2
        assert surprisal_variance(p) == pytest.approx(raw, abs=1e-12)


class TestLagrangeSolve:
    def test_uniform_is_degenerate(self):
        sol = lagrange_solve(identity_schmidt([0.5] * 4))
        assert sol.degenerate
        assert sol.max_rate == 0.0
        assert np.array_equal(sol.k, np.zeros(4))

    def test_worked_value(self):
        sol = lagrange_solve(identity_schmidt([math.sqrt(0.9), math.sqrt(0.1)]))
        assert sol.max_rate == pytest.approx(WORKED_RATE, abs=1e-12)

    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_constraints_and_stationarity(self, seed):
        state = schmidt_decompose(random_state(4, 4, seed))
        sol = lagrange_solve(state)
        c = state.coefficients
        assert float(sol.k @ sol.k) == pytest.approx(1.0, abs=1e-10)
        assert abs(float(c @ sol.k)) < 1e-10
        # stationarity: C_i log C_i - 2 l1 k_i - l2 C_i = 0 on the support
        mask = c > 0
        resid = (
            c[mask] * np.log(c[mask])
            - 2.0 * sol.lambda1 * sol.k[mask]
            - sol.lambda2 * c[mask]
        )
        assert np.max(np.abs(resid)) < 1e-9

    def test_matches_surprisal_form(self):
        state = schmidt_decompose(random_state(5, 5, 12))
        sol = lagrange_solve(state)
        assert sol.max_rate == pytest.approx(max_rate(state), abs=1e-10)


class TestMaxRate:
    def test_maximally_entangled(self):
        assert max_rate(identity_schmidt([1 / math.sqrt(2)] * 2)) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_product_state(self):
        assert max_rate(identity_schmidt([1.0, 0.0])) == pytest.approx(0.0, abs=1e-12)

    def test_worked_value(self):
        state = identity_schmidt([math.sqrt(0.9), math.sqrt(0.1)])
        assert max_rate(state) == pytest.approx(WORKED_RATE, abs=1e-13)


class TestOptimalFamily:
    def test_uniform_at_gamma_one_over_d(self):
        state = build_optimal_state(1 / 3, 3)
        assert state.coefficients == pytest.approx([1 / math.sqrt(3)] * 3, abs=1e-12)

    def test_direct_construction(self):
        state = build_optimal_state(0.9, 2)
        assert state.coefficients == pytest.approx(
            [math.sqrt(0.9), math.sqrt(0.1)], abs=1e-14
        )

    def test_normalization(self):
        c = build_optimal_state(0.37, 5).coefficients
        assert float(c @ c) == pytest.approx(1.0, abs=1e-12)

    def test_gamma_range_enforced(self):
        with pytest.raises(ValidationError):
            build_optimal_state(1.0, 2)
        with pytest.raises(ValidationError):
            build_optimal_state(0.0, 2)

    def test_hamiltonian_structure_d2(self):
        h = build_optimal_hamiltonian(2, 2)
        expected = np.zeros((4, 4), dtype=complex)
        expected[3, 0] = 1j
        expected[0, 3] = -1j
        assert h == pytest.approx(expected, abs=1e-12)

    def test_hamiltonian_hermitian_traceless(self):
        for d in (2, 3, 4):
            h = build_optimal_hamiltonian(d, d)
            assert np.max(np.abs(h - h.conj().T)) < 1e-14
            assert abs(np.trace(h)) < 1e-14

    def test_unit_variance_at_paired_state(self):
        for d in (2, 3, 4):
            gamma = optimal_gamma(d).gamma
            psi = assemble_state(build_optimal_state(gamma, d))
            stats = energy_stats(psi, build_optimal_hamiltonian(d, d))
            assert stats.variance == pytest.approx(1.0, abs=1e-10)

    def test_block_sign_convention(self):
        # first column of M_I positive so the rate at the paired state is +
        h = build_optimal_hamiltonian(3, 3)
        state = build_optimal_state(optimal_gamma(3).gamma, 3)
        m_i = schmidt_block(h, state).m_i
        assert m_i[1, 0] == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert m_i[0, 1] == pytest.approx(-1 / math.sqrt(2), abs=1e-12)


class TestOptimalGamma:
    def test_d2_values(self):
        gamma, rate = optimal_gamma(2)
        assert gamma == pytest.approx(GAMMA2[0], abs=1e-9)
        assert rate == pytest.approx(GAMMA2[1], abs=1e-12)

    def test_symmetric_point_is_zero(self):
        assert max_rate(build_optimal_state(0.5, 2)) == pytest.approx(0.0, abs=1e-12)

    def test_monotone_in_dimension(self):
        rates = [optimal_gamma(d).rate for d in range(2, 9)]
        assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))

    def test_consistent_with_state_family(self):
        for d in (2, 3, 5):
            gamma, rate = optimal_gamma(d)
            assert rate == pytest.approx(
                max_rate(build_optimal_state(gamma, d)), abs=1e-8
            )

    def test_global_over_simplex(self):
        # random-restart ascent over all rank-<=d spectra must not beat
        # the one-parameter family
        for d in (2, 3, 4):
            reference = optimal_gamma(d).rate
            best = -np.inf
            for trial in range(10):
                rng = np.random.default_rng((d, trial))

                def neg(x):
                    w = np.exp(x - x.max())
                    return -2.0 * math.sqrt(surprisal_variance(w / w.sum()))

                res = minimize(
                    neg,
                    rng.normal(size=d),
                    method="Nelder-Mead",
                    options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000,
                             "maxfev": 40000},
                )
                best = max(best, -res.fun)
            assert best == pytest.approx(reference, abs=1e-6)


class TestBruteForce:
    def test_uniform_stays_zero(self):
        state = identity_schmidt([0.5] * 4)
        assert brute_force_max_k(state, 5, 0) == pytest.approx(0.0, abs=1e-8)

    def test_worked_value(self):
        state = identity_schmidt([math.sqrt(0.9), math.sqrt(0.1)])
        assert brute_force_max_k(state, 10, 0) == pytest.approx(WORKED_RATE, abs=1e-6)

    def test_matches_closed_form_d5(self):
        state = schmidt_decompose(random_state(5, 5, 44))
        assert brute_force_max_k(state, 12, 1) == pytest.approx(
            max_rate(state), abs=1e-6
        )

    def test_deterministic(self):
        state = schmidt_decompose(random_state(4, 4, 9))
        assert brute_force_max_k(state, 6, 3) == brute_force_max_k(state, 6, 3)


class TestAchievingHamiltonian:
    def test_antisymmetric_solve_properties(self):
        state = schmidt_decompose(random_state(4, 4, 21))
        sol = lagrange_solve(state)
        m = antisymmetric_from_k(state.coefficients, sol.k)
        assert np.max(np.abs(m + m.T)) < 1e-14
        assert m @ state.coefficients == pytest.approx(sol.k, abs=1e-12)

    def test_antisymmetric_solve_is_minimal_norm(self):
        # compare against the explicit least-squares solution over the
        # strict-upper-triangle parameterization
        state = schmidt_decompose(random_state(4, 4, 22))
        sol = lagrange_solve(state)
        c, k, d = state.coefficients, sol.k, 4
        iu = np.triu_indices(d, 1)
        n_par = len(iu[0])
        a_lin = np.zeros((d, n_par))
        for col, (i, j) in enumerate(zip(*iu)):
            a_lin[i, col] = c[j]
            a_lin[j, col] = -c[i]
        x, *_ = np.linalg.lstsq(a_lin, k, rcond=None)
        m_ls = np.zeros((d, d))
        m_ls[iu] = x
        m_ls = m_ls - m_ls.T
        assert antisymmetric_from_k(c, k) == pytest.approx(m_ls, abs=1e-10)

    def test_requires_orthogonality(self):
        with pytest.raises(ValidationError):
            antisymmetric_from_k(np.array([1.0, 0.0]), np.array([1.0, 0.0]))

    def test_attains_max_rate_with_unit_imag_variance(self):
        psi = random_state(3, 3, 23)
        state = schmidt_decompose(psi)
        h = achieving_hamiltonian(state)
        assert fd_rate(psi, h, RICH) == pytest.approx(max_rate(state), abs=1e-8)
        stats = energy_stats(psi, h)
        assert stats.variance_imag_part == pytest.approx(1.0, abs=1e-8)

    def test_degenerate_state_gets_zero_hamiltonian(self):
        state = identity_schmidt([0.5] * 4)
        h = achieving_hamiltonian(state)
        assert np.max(np.abs(h)) == 0.0


class TestOptimalDesign:
    def test_bundle_consistency(self):
        design = optimal_design(3)
        assert design.rate == pytest.approx(optimal_gamma(3).rate, abs=1e-12)
        assert design.state.coefficients[0] == pytest.approx(
            math.sqrt(design.gamma), abs=1e-12
        )

    def test_design_rate_is_attained(self):
        design = optimal_design(2)
        psi = assemble_state(design.state)
        state = schmidt_decompose(psi)
        got = gamma_rate(state, schmidt_block(design.hamiltonian, state))
        assert got == pytest.approx(design.rate, abs=1e-10)
