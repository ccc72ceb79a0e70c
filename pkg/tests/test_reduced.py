import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlscollapse.airy import kappa_critical
from nlscollapse.field import ValidationError
from nlscollapse.profiles import compute_cq, surface_area
from nlscollapse.reduced import (KappaResult, ReducedParams, ReducedState,
                                 integrate_reduced, kappa_of_q, nu,
                                 params_from_profile, write_reduced_csv)


def _params(gs, q, delta):
    return params_from_profile(gs, q, delta)


def test_nu_branches(gs5):
    c = gs5.c_nu
    assert nu(-1.0, c) == 0.0
    assert nu(0.0, c) == 0.0
    assert nu(math.pi ** 2, c) == pytest.approx(c / math.e, rel=1e-12)


@given(beta=st.floats(-5.0, 0.0))
@settings(max_examples=100, deadline=None)
def test_nu_vanishes_nonpositive(beta):
    assert nu(beta, 33.0) == 0.0


@given(beta=st.floats(1e-6, 10.0))
@settings(max_examples=100, deadline=None)
def test_nu_positive_monotone(beta):
    c = 33.0
    assert 0.0 < nu(beta, c) < c
    assert nu(beta, c) <= nu(beta * 1.5, c) + 1e-30


def test_nu_flat_at_zero():
    # essential singularity: approaching zero from above kills all derivatives
    vals = [nu(b, 33.0) for b in (1e-2, 1e-3, 1e-4)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-100


def test_undamped_explicit_branch_is_linear(gs5):
    params = ReducedParams(d=1, q=5.0, delta=0.0, M=gs5.M,
                           c_q=compute_cq(gs5, 5.0) / 2.0, c_nu=gs5.c_nu)
    ic = ReducedState(t=0.0, L=0.5, L_t=-1.0, beta=0.0)
    traj = integrate_reduced(params, ic, t_end=1.0, L_floor=1e-6)
    assert traj.hit_floor and not traj.arrested
    # beta identically zero: L stays exactly linear
    assert np.abs(traj.beta).max() == 0.0
    assert np.abs(traj.L - (0.5 - traj.t)).max() < 1e-9


def test_beta_strictly_decreasing_with_damping(gs5):
    params = _params(gs5, 7.0, 1e-4)
    traj = integrate_reduced(params, ReducedState(t=0.0, L=0.5, L_t=-1.0,
                                                  beta=0.0), t_end=0.7)
    assert traj.arrested
    assert np.all(np.diff(traj.beta) < 0.0)


def test_minimum_event_and_slopes(gs5):
    params = _params(gs5, 5.0, 1e-5)
    traj = integrate_reduced(params, ReducedState(t=0.0, L=1.0, L_t=-1.0,
                                                  beta=0.0), t_end=2.5)
    assert traj.arrested
    assert 0.9 < traj.t_min < 1.1
    assert traj.L_min < 0.02
    assert traj.pre_slope == pytest.approx(-1.0, abs=0.01)
    assert traj.post_slope > 1.0


def test_invalid_inputs(gs5):
    with pytest.raises(ValidationError):
        ReducedParams(d=1, q=5.0, delta=1e-5, M=-1.0, c_q=1.0, c_nu=1.0)
    params = _params(gs5, 5.0, 1e-5)
    with pytest.raises(ValidationError):
        integrate_reduced(params, ReducedState(t=0, L=-1.0, L_t=0, beta=0),
                          t_end=1.0)
    with pytest.raises(ValidationError):
        kappa_of_q(5.0, 1, [1e-5], M=1.0, c_q=1.0, c_nu=1.0)


def test_kappa_of_q_matches_airy(gs5):
    res = kappa_of_q(5.0, 1, [1e-5, 3e-6, 1e-6, 3e-7, 1e-7], M=gs5.M,
                     c_q=compute_cq(gs5, 5.0) / surface_area(1), c_nu=gs5.c_nu)
    assert isinstance(res, KappaResult)
    assert abs(res.kappa / kappa_critical() - 1.0) < 0.02


def test_kappa_q1_is_unity(gs5):
    res = kappa_of_q(1.0, 1, [1e-5, 3e-6, 1e-6, 3e-7, 1e-7], M=gs5.M,
                     c_q=compute_cq(gs5, 1.0) / surface_area(1), c_nu=gs5.c_nu)
    assert res.kappa == pytest.approx(1.0, rel=0.01)


def test_limit_trajectory_piecewise_linear(gs5):
    # |beta| = |L_tt| L^3 away from the bounce shrinks with delta
    maxbeta = []
    for delta in (1e-4, 1e-5, 1e-6):
        params = _params(gs5, 5.0, delta)
        traj = integrate_reduced(params, ReducedState(t=0.0, L=1.0, L_t=-1.0,
                                                      beta=0.0), t_end=1.3)
        assert traj.arrested
        away = np.abs(traj.t - traj.t_min) > 0.1
        maxbeta.append(np.abs(traj.beta[away]).max())
    assert maxbeta[0] > maxbeta[1] > maxbeta[2]
    assert maxbeta[2] < 1e-4


def test_loglog_branch_arrests_for_every_delta(gs5):
    # generic-collapse analogue: positive beta turns the loglog feedback on;
    # arrest happens for each damping value and the post-arrest slope grows
    # without bound as the damping vanishes
    slopes = []
    for delta in (1e-3, 1e-4, 1e-5):
        params = _params(gs5, 7.0, delta)
        ic = ReducedState(t=0.0, L=1.0, L_t=0.0, beta=0.1)
        traj = integrate_reduced(params, ic, t_end=40.0, L_stop=0.9)
        assert traj.arrested, f"no arrest at delta={delta}"
        assert traj.post_slope is not None
        slopes.append(traj.post_slope)
    assert slopes[0] < slopes[1] < slopes[2]


def test_reduced_csv_roundtrip(tmp_path, gs5):
    params = _params(gs5, 5.0, 1e-5)
    traj = integrate_reduced(params, ReducedState(t=0.0, L=1.0, L_t=-1.0,
                                                  beta=0.0), t_end=1.2)
    path = write_reduced_csv(tmp_path / "traj.csv", traj)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[1] == 4
    assert np.allclose(data[:, 1], traj.L)
