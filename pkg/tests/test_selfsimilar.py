import numpy as np
import pytest

from nlscollapse.field import ValidationError
from nlscollapse.selfsimilar import (qprofile_from_csv, qprofile_to_csv,
                                     solve_Q_profile)


def test_rejects_critical_case():
    with pytest.raises(ValidationError):
        solve_Q_profile(5.0)
    with pytest.raises(ValidationError):
        solve_Q_profile(3.0)
    with pytest.raises(ValidationError):
        solve_Q_profile(7.0, tol=0.0)


def test_q7_residuals(q7):
    assert abs(q7.hamiltonian_residual) < 1e-6
    assert q7.ode_residual_max < 1e-6
    assert q7.oscillation_residual < 1e-6


def test_q7_monotone_modulus(q7):
    mod = np.abs(q7.Q_values)
    assert np.all(np.diff(mod) <= 1e-10 * mod[0])


def test_q7_gauge_and_eigenvalue(q7):
    assert q7.Q_values[0].imag == pytest.approx(0.0, abs=1e-12)
    assert q7.Q0 > 0
    assert q7.kappa_Q > 0
    # the ground-state comparison is recorded, not asserted against a value
    assert "Q0_above_ground_state" in q7.extras
    assert q7.extras["R0_1d"] == pytest.approx(4.0 ** (1 / 6), rel=1e-12)


def test_q7_stable_under_tol_halving(q7):
    # restart the polish near the found root at half the tolerance
    refined = solve_Q_profile(
        7.0, tol=q7.tol / 2.0,
        scan_Q0=(q7.Q0 - 0.02, q7.Q0 + 0.02, 5),
        scan_kappa=(q7.kappa_Q - 0.05, q7.kappa_Q + 0.05, 5))
    assert refined.Q0 == pytest.approx(q7.Q0, abs=1e-7)
    assert refined.kappa_Q == pytest.approx(q7.kappa_Q, abs=1e-7)


def test_q7_modulus_extension(q7):
    # beyond the table the modulus continues with the rho^{-2/(p-1)} decay
    inside = q7.modulus(np.array([q7.rho_max * 0.999]))[0]
    outside = q7.modulus(np.array([q7.rho_max * 2.0]))[0]
    assert 0 < outside < inside
    assert outside == pytest.approx(inside * 2.0 ** (-1.0 / 3.0), rel=1e-2)


def test_qprofile_csv_roundtrip(tmp_path, q7):
    path = qprofile_to_csv(q7, tmp_path / "q.csv")
    back = qprofile_from_csv(path)
    assert back.p == q7.p
    assert back.kappa_Q == pytest.approx(q7.kappa_Q, rel=1e-15)
    assert np.allclose(back.Q_values, q7.Q_values, rtol=0, atol=1e-15)
