import numpy as np
import pytest

from nlscollapse.field import (NumericalFailure, RadialField, ValidationError,
                               symmetric_grid)
from nlscollapse.profiles import closed_form_R1d, explicit_blowup
from nlscollapse.solver import (SolverConfig, linear_multiplier,
                                linear_substep, local_phase_damping_step,
                                make_initial_condition, refine_spectral, run,
                                step)


def _cfg(**kw):
    base = dict(p=5.0, q=5.0, delta=0.0,
                initial_condition={"kind": "gaussian", "amplitude": 1.0},
                domain_half_width=20.0, n_points=1024, dt0=1e-3, t_end=1.0)
    base.update(kw)
    return SolverConfig(**base)


def test_config_validation():
    with pytest.raises(ValidationError):
        _cfg(delta=-1.0).validate()
    with pytest.raises(ValidationError):
        _cfg(n_points=1000).validate()
    with pytest.raises(ValidationError):
        _cfg(focus_stop=0.5).validate()
    with pytest.raises(ValidationError):
        _cfg(initial_condition={"kind": "bogus"}).validate()
    with pytest.raises(ValidationError):
        _cfg(scheme="rk4").validate()
    _cfg().validate()


def test_initial_conditions(gs5):
    x = symmetric_grid(16.0, 2048)
    g = make_initial_condition({"kind": "gaussian", "amplitude": 1.3}, x)
    assert abs(g.psi[1024]) == pytest.approx(1.3, rel=1e-14)

    s = make_initial_condition({"kind": "scaled_ground_state", "factor": 1.05},
                               x, gs5)
    # power of c R is c^2 P_cr
    assert s.meta["power"] == pytest.approx(1.05 ** 2 * gs5.P_cr, rel=1e-6)
    assert s.meta["power_ratio_to_Pcr"] == pytest.approx(1.05 ** 2, rel=1e-6)

    e = make_initial_condition({"kind": "explicit", "T_c": 0.5}, x, gs5)
    assert abs(e.on_axis()) == pytest.approx(0.5 ** -0.5 * gs5.R0, rel=1e-8)

    with pytest.raises(ValidationError):
        make_initial_condition({"kind": "unknown"}, x)
    with pytest.raises(ValidationError):
        make_initial_condition({"kind": "scaled_ground_state", "factor": 1.0},
                               symmetric_grid(2.0, 64), gs5)


def test_local_step_is_exact_damping_flow():
    # with the Laplacian and focusing absent: d|u|/dt = -delta |u|^q
    psi = np.array([1.0 + 0j, 0.5 + 0.5j, 2.0j, 0.0j])
    dt, delta = 0.37, 1.0
    out = local_phase_damping_step(psi, dt, p=1.0 + 1e-12, q=3.0, delta=delta)
    A0 = np.abs(psi)
    exact = A0 / np.sqrt(1.0 + 2.0 * delta * A0 ** 2 * dt)
    assert np.abs(np.abs(out) - exact).max() < 1e-14


def test_local_step_linear_damping_exact():
    psi = np.array([1.2 + 0.3j, 0.1j])
    out = local_phase_damping_step(psi, 0.25, p=5.0, q=1.0, delta=0.8)
    assert np.abs(np.abs(out) - np.abs(psi) * np.exp(-0.8 * 0.25)).max() < 1e-15


def test_local_step_equal_exponents_branch():
    psi = np.array([0.9 + 0.1j])
    out = local_phase_damping_step(psi, 0.1, p=5.0, q=5.0, delta=0.3)
    A0 = abs(psi[0])
    exact = A0 * (1.0 + 0.3 * 4.0 * A0 ** 4 * 0.1) ** -0.25
    assert abs(abs(out[0]) - exact) < 1e-15


def test_linear_substep_unitary():
    x = symmetric_grid(10.0, 512)
    psi = np.exp(-x ** 2) * np.exp(1j * x)
    mult = linear_multiplier(512, x[1] - x[0], 0.01)
    out = linear_substep(psi, mult)
    assert np.sum(np.abs(out) ** 2) == pytest.approx(np.sum(np.abs(psi) ** 2),
                                                     rel=1e-14)


def test_solitary_wave_oracle():
    # exact solitary wave e^{it} R_p: sup norm constant to 1e-6 over 1000 steps
    x = symmetric_grid(20.0, 1024)
    cfg = _cfg()
    f = RadialField(t=0.0, x_grid=x, psi=closed_form_R1d(5.0, x).astype(complex))
    sup0 = f.sup_norm()
    power0 = f.power()
    for _ in range(1000):
        f = step(f, 2e-4, cfg)
    assert abs(f.sup_norm() - sup0) < 1e-6
    assert abs(f.power() - power0) / power0 < 1e-12


def test_step_is_second_order():
    x = symmetric_grid(20.0, 1024)
    cfg = _cfg()
    drifts = []
    for dt in (1e-3, 5e-4):
        f = RadialField(t=0.0, x_grid=x,
                        psi=closed_form_R1d(5.0, x).astype(complex))
        sup0 = f.sup_norm()
        for _ in range(int(round(0.5 / dt))):
            f = step(f, dt, cfg)
        drifts.append(abs(f.sup_norm() - sup0))
    assert 3.0 < drifts[0] / drifts[1] < 5.0


def test_step_rejects_bad_dt():
    x = symmetric_grid(10.0, 256)
    f = RadialField(t=0.0, x_grid=x, psi=np.exp(-x ** 2) + 0j)
    with pytest.raises(ValidationError):
        step(f, 0.0, _cfg())


def test_refine_spectral_roundtrip():
    x = symmetric_grid(10.0, 512)
    psi = np.exp(-x ** 2) * np.exp(0.5j * x ** 2)
    fine = refine_spectral(psi)
    assert fine.size == 1024
    assert np.abs(fine[::2] - psi).max() < 1e-12
    # band-limited interpolation conserves the discrete power
    assert np.sum(np.abs(fine) ** 2) * 0.5 == pytest.approx(
        np.sum(np.abs(psi) ** 2), rel=1e-13)


def test_explicit_ic_tracks_width_law(gs5):
    # undamped minimal-power collapse: L(t) = T_c - t to 1% until the
    # focusing cap
    T_c = 0.3
    cfg = SolverConfig(p=5.0, q=5.0, delta=0.0,
                       initial_condition={"kind": "explicit", "T_c": T_c},
                       domain_half_width=8.0, n_points=1024, dt0=1e-3,
                       t_end=0.29, focus_stop=25.0, sample_stride=8)
    diag, _ = run(cfg, gs5)
    expect = (T_c - diag.t) / T_c
    rel = np.abs(diag.L - expect) / expect
    assert rel.max() < 0.01


def test_power_conservation_undamped(gs5):
    cfg = SolverConfig(p=5.0, q=5.0, delta=0.0,
                       initial_condition={"kind": "gaussian", "amplitude": 1.6},
                       domain_half_width=8.0, n_points=1024, dt0=1e-3,
                       t_end=0.5, focus_stop=30.0, sample_stride=4)
    diag, _ = run(cfg, gs5)
    assert diag.status == "focus_stop"
    drift = np.abs(diag.power / diag.power[0] - 1.0).max()
    assert drift < 1e-10


def test_damped_power_monotone_and_balanced(gs5):
    cfg = SolverConfig(p=5.0, q=7.0, delta=5e-3,
                       initial_condition={"kind": "gaussian", "amplitude": 1.6},
                       domain_half_width=8.0, n_points=1024, dt0=5e-4,
                       t_end=0.5, focus_stop=50.0, sample_stride=4)
    diag, _ = run(cfg, gs5)
    assert np.all(np.diff(diag.power) <= 1e-12 * diag.power[0])
    # centered dP/dt against -2 delta int |psi|^{q+1}
    t, P, D = diag.t, diag.power, diag.damping_integral
    dP = (P[2:] - P[:-2]) / (t[2:] - t[:-2])
    model = -2.0 * 5e-3 * D[1:-1]
    sel = np.abs(model) > 1e-7
    assert np.abs(dP[sel] / model[sel] - 1.0).max() < 0.01


def test_boundary_contamination_halts(gs5):
    cfg = SolverConfig(p=5.0, q=5.0, delta=0.0,
                       initial_condition={"kind": "gaussian", "amplitude": 0.4},
                       domain_half_width=6.0, n_points=256, dt0=1e-3,
                       t_end=40.0, sample_stride=2, auto_expand=False)
    diag, _ = run(cfg, gs5)
    assert diag.status == "contaminated"
    assert diag.flags.get("boundary_contamination")


def test_auto_expand_keeps_running(gs5):
    cfg = SolverConfig(p=5.0, q=5.0, delta=0.0,
                       initial_condition={"kind": "gaussian", "amplitude": 0.4},
                       domain_half_width=6.0, n_points=256, dt0=1e-3,
                       t_end=3.0, sample_stride=2, auto_expand=True)
    diag, _ = run(cfg, gs5)
    assert diag.status == "completed"
    assert diag.flags.get("expanded_to", 0) >= 12.0


def test_run_determinism(gs5):
    cfg = SolverConfig(p=5.0, q=7.0, delta=1e-3,
                       initial_condition={"kind": "gaussian", "amplitude": 1.6},
                       domain_half_width=8.0, n_points=512, dt0=1e-3,
                       t_end=0.2, sample_stride=4)
    d1, _ = run(cfg, gs5)
    d2, _ = run(cfg, gs5)
    assert np.array_equal(d1.L, d2.L)
    assert np.array_equal(d1.phase0, d2.phase0)


def test_snapshot_milestones(gs5):
    cfg = SolverConfig(p=5.0, q=7.0, delta=1e-3,
                       initial_condition={"kind": "gaussian", "amplitude": 1.6},
                       domain_half_width=8.0, n_points=1024, dt0=1e-3,
                       t_end=0.4, focus_stop=1e3, sample_stride=4,
                       snapshot_pre_L=(0.5, 0.25), snapshot_at_peak=True)
    diag, snaps = run(cfg, gs5)
    labels = [s.meta["label"] for s in snaps]
    assert labels.count("pre") == 2
    assert "peak" in labels
    pre = [s for s in snaps if s.meta["label"] == "pre"]
    assert pre[0].meta["L"] <= 0.5 and pre[1].meta["L"] <= 0.25
