"""Finite-difference ground truth: the oracle the rest of the suite leans on."""

import math

import numpy as np
import pytest

from entrate.oracle import FDConfig, direct_stats, fd_rate
from entrate.qcore import (
    PureState,
    ValidationError,
    random_hermitian,
    random_state,
    schmidt_decompose,
)
from entrate.rate import gamma_rate, schmidt_block

WORKED_RATE = 1.3183347464017314


def worked_pair():
    amp = np.zeros(4, dtype=complex)
    amp[0], amp[3] = math.sqrt(0.9), math.sqrt(0.1)
    psi = PureState(2, 2, amp)
    h = np.zeros((4, 4), dtype=complex)
    # i(|11><00| - |00><11|): M_I = [[0, -1], [1, 0]] in the identity bases
    h[3, 0] = 1j
    h[0, 3] = -1j
    return psi, h


class TestFDConfig:
    def test_step_window(self):
        with pytest.raises(ValidationError):
            FDConfig(step=1e-9)
        with pytest.raises(ValidationError):
            FDConfig(step=0.1)

    def test_scheme_names(self):
        with pytest.raises(ValidationError):
            FDConfig(scheme="forward")


class TestFDRate:
    def test_worked_example_two_steps(self):
        psi, h = worked_pair()
        for step in (1e-5, 2e-5):
            got = fd_rate(psi, h, FDConfig(step=step, scheme="central"))
            assert got == pytest.approx(WORKED_RATE, abs=1e-6)

    def test_real_hamiltonian_in_schmidt_basis(self):
        psi, _ = worked_pair()
        h = random_hermitian(4, 2).real.astype(complex)
        assert fd_rate(psi, h) == pytest.approx(0.0, abs=1e-6)

    def test_maximally_entangled_is_stationary(self):
        amp = np.zeros(4, dtype=complex)
        amp[0] = amp[3] = 1 / math.sqrt(2)
        psi = PureState(2, 2, amp)
        h = random_hermitian(4, 7)
        assert fd_rate(psi, h) == pytest.approx(0.0, abs=1e-6)

    def test_step_halving_is_second_order(self):
        psi, h = worked_pair()
        err = [
            abs(fd_rate(psi, h, FDConfig(step=s, scheme="central")) - WORKED_RATE)
            for s in (2e-3, 1e-3)
        ]
        ratio = err[0] / err[1]
        assert 3.0 < ratio < 5.0  # O(h^2) truncation

    def test_sign_symmetry(self):
        psi = random_state(2, 3, 8)
        h = random_hermitian(6, 9)
        assert fd_rate(psi, h) == pytest.approx(-fd_rate(psi, -h), abs=2e-6)

    def test_richardson_beats_central_on_worked_example(self):
        psi, h = worked_pair()
        central = abs(fd_rate(psi, h, FDConfig(step=1e-4, scheme="central")) - WORKED_RATE)
        rich = abs(fd_rate(psi, h, FDConfig(step=1e-4, scheme="richardson")) - WORKED_RATE)
        assert rich < central

    def test_near_degenerate_coefficients_relaxed_tolerance(self):
        # two Schmidt coefficients 1e-8 apart flatten the entropy curve;
        # agreement degrades to the documented 1e-5
        c0 = math.sqrt(0.5 + 5e-9)
        c1 = math.sqrt(0.5 - 5e-9)
        amp = np.zeros(4, dtype=complex)
        amp[0], amp[3] = c0, c1
        psi = PureState(2, 2, amp)
        h = random_hermitian(4, 77)
        state = schmidt_decompose(psi)
        closed = gamma_rate(state, schmidt_block(h, state))
        got = fd_rate(psi, h, FDConfig(step=1e-5, scheme="richardson"))
        assert got == pytest.approx(closed, abs=1e-5)

    def test_rejects_non_hermitian(self):
        psi, _ = worked_pair()
        with pytest.raises(ValidationError):
            fd_rate(psi, np.triu(np.ones((4, 4))).astype(complex))


class TestDirectStats:
    def test_identity_hamiltonian(self):
        psi = random_state(2, 2, 1)
        mean, var = direct_stats(psi, np.eye(4, dtype=complex))
        assert mean == pytest.approx(1.0, abs=1e-12)
        assert var == pytest.approx(0.0, abs=1e-12)

    def test_eigenstate_has_zero_variance(self):
        h = random_hermitian(4, 3)
        _, evecs = np.linalg.eigh(h)
        psi = PureState(2, 2, evecs[:, 0])
        _, var = direct_stats(psi, h)
        assert var == pytest.approx(0.0, abs=1e-12)
