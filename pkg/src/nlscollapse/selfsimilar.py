"""Supercritical self-similar collapse profile Q(rho).

Q solves  Q'' - (1 + i (p-5)/(4(p-1)) kappa^2 - kappa^4 rho^2 / 16) Q
          + |Q|^{p-1} Q = 0,   Q'(0) = 0,

and the branch of interest has monotonically decreasing |Q| and zero
Hamiltonian.  Numerically everything runs in the phase-unwound variable
W = Q exp(-i kappa^2 rho^2 / 8), which satisfies

    W'' - W + i (kappa^2/2) (rho W' + 2 W / (p-1)) + |W|^{p-1} W = 0

and is smooth (non-oscillatory) exactly on the admissible branch; any
inadmissible far-field component shows up as a decaying beat oscillation
of |W| with known phase, whose two quadrature amplitudes give the two
shooting residuals for the unknowns (Q(0), kappa).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import root

from .field import FLOAT_FMT, ValidationError


class BranchError(RuntimeError):
    """Shooting failed to isolate exactly one admissible monotone branch."""


@dataclass
class QProfile:
    p: float
    rho_grid: np.ndarray
    Q_values: np.ndarray
    Q0: float
    kappa_Q: float
    hamiltonian_residual: float
    ode_residual_max: float
    oscillation_residual: float
    tol: float
    extras: dict = dc_field(default_factory=dict)

    kind = "Q"

    def __post_init__(self):
        self._mod_spline = CubicSpline(self.rho_grid, np.abs(self.Q_values),
                                       bc_type=((1, 0.0), "not-a-knot"))

    @property
    def rho_max(self) -> float:
        return float(self.rho_grid[-1])

    def modulus(self, rho) -> np.ndarray:
        """|Q|(|rho|), continued beyond the table by the rho^{-2/(p-1)} decay."""
        rho = np.abs(np.asarray(rho, dtype=float))
        out = np.empty_like(rho)
        inside = rho <= self.rho_max
        out[inside] = np.clip(self._mod_spline(rho[inside]), 0.0, None)
        sigma = 2.0 / (self.p - 1.0)
        edge = float(self._mod_spline(self.rho_max))
        out[~inside] = edge * (rho[~inside] / self.rho_max) ** (-sigma)
        return out


def _w_rhs(p: float, kappa: float):
    sigma = 2.0 / (p - 1.0)
    half_k2 = 0.5 * kappa ** 2
    pm1 = p - 1.0

    def rhs(rho, y):
        W, Wp = y
        absW2 = W.real ** 2 + W.imag ** 2
        return [Wp, W - 1j * half_k2 * (rho * Wp + sigma * W)
                - absW2 ** (pm1 / 2.0) * W]
    return rhs


def _integrate_W(p: float, kappa: float, Q0: float, rho_f: float,
                 rtol: float, blowup_guard: float = 9.0):
    def blow(rho, y):
        return (y[0].real ** 2 + y[0].imag ** 2) - blowup_guard * Q0 ** 2
    blow.terminal = True
    blow.direction = 1.0
    sol = solve_ivp(_w_rhs(p, kappa), (0.0, rho_f),
                    np.array([Q0 + 0j, 0.0 + 0j]), method="DOP853",
                    rtol=rtol, atol=rtol * 1e-3, dense_output=True,
                    events=[blow], max_step=0.5)
    return sol


def _beat_residual(p: float, kappa: float, sol, rho_f: float,
                   window: float = 10.0) -> tuple[float, float, float]:
    """Amplitudes of the inadmissible far-field beat in |W| rho^sigma over
    the outer fit window, normalized by the smooth envelope level.

    Valid only beyond the turning radius 4 / kappa^2, where the two linear
    far-field behaviors are oscillatory with the known beat phase
    kappa^2 rho^2 / 4 - (4 / kappa^2) ln rho.
    """
    sigma = 2.0 / (p - 1.0)
    mu = 2.0 / kappa ** 2
    dB = -0.5 + (9.0 - p) / (2.0 * (p - 1.0))  # beat amplitude decay
    rho = np.linspace(rho_f - window, rho_f, 600)
    W = sol.sol(rho)[0]
    m = np.abs(W) * rho ** sigma
    phi = 0.25 * kappa ** 2 * rho ** 2 - 2.0 * mu * np.log(rho)
    wgt = rho ** (dB + sigma)
    A = np.column_stack([np.ones_like(rho), rho ** -2.0,
                         wgt * np.cos(phi), wgt * np.sin(phi)])
    coef, *_ = np.linalg.lstsq(A, m, rcond=None)
    c0 = coef[0]
    return float(coef[2] / c0), float(coef[3] / c0), float(c0)


def _fit_radius(kappa: float) -> float:
    """End of the beat-measurement window, safely past the turning radius."""
    return max(25.0, 4.0 / kappa ** 2 + 16.0)


def _shoot(p: float, rtol: float, rho_f: float | None = None):
    def residual(x):
        Q0, kappa = x
        if Q0 <= 0 or kappa <= 0:
            return [10.0, 10.0]
        rf = rho_f if rho_f is not None else _fit_radius(kappa)
        sol = _integrate_W(p, kappa, Q0, rf, rtol)
        if sol.t[-1] < rf:   # blew up or stalled: inadmissible
            return [10.0, 10.0]
        a, b, _ = _beat_residual(p, kappa, sol, rf)
        return [a, b]
    return residual


def _hamiltonian_with_tail(p: float, kappa: float, sol, rho_f: float,
                           c_env: float) -> float:
    """H[Q] = int |Q' - i (kappa^2/4) rho Q|^2 - 2/(p+1) |Q|^{p+1} d rho,
    evaluated on [0, rho_f] plus the analytic power-law tail.

    In the W variable the gradient term is plainly |W'|^2.  The tail uses
    W ~ c rho^{-gamma} (1 + w1 rho^{-2}) with gamma = sigma + 2i/kappa^2
    and w1 fixed by the equation itself.
    """
    sigma = 2.0 / (p - 1.0)
    gamma = sigma + 2j / kappa ** 2
    c_abs = abs(c_env)
    w1 = (gamma * (gamma + 1.0) + c_abs ** (p - 1.0)) / (1j * kappa ** 2)

    rho = np.linspace(0.0, rho_f, 60001)
    W, Wp = sol.sol(rho)
    dens = (Wp.real ** 2 + Wp.imag ** 2
            - 2.0 / (p + 1.0) * np.abs(W) ** (p + 1.0))
    head = float(simpson(dens, x=rho))

    P = rho_f
    g2 = abs(gamma) ** 2
    cross = 2.0 * np.real(np.conj(gamma) * (gamma + 2.0) * w1)
    t_grad = c_abs ** 2 * (g2 * P ** (-(2 * sigma + 1)) / (2 * sigma + 1)
                           + cross * P ** (-(2 * sigma + 3)) / (2 * sigma + 3))
    spow = sigma * (p + 1.0)
    t_pot = (2.0 / (p + 1.0)) * c_abs ** (p + 1.0) * (
        P ** (1.0 - spow) / (spow - 1.0)
        + (p + 1.0) * np.real(w1) * P ** (-1.0 - spow) / (spow + 1.0))
    return head + t_grad - t_pot


def _ode_residual_W(p: float, kappa: float, sol, rho_f: float) -> float:
    """Max pointwise residual of the profile equation (computed in the
    smooth W form; |residual| is identical in the Q form)."""
    sigma = 2.0 / (p - 1.0)
    rho = np.linspace(0.05, rho_f - 0.05, 4000)
    h = 1e-3
    Wm2, Wm1, W0, Wp1, Wp2 = (sol.sol(rho + k * h)[0]
                              for k in (-2, -1, 0, 1, 2))
    d2 = (-Wm2 + 16 * Wm1 - 30 * W0 + 16 * Wp1 - Wp2) / (12 * h ** 2)
    d1 = (Wm2 - 8 * Wm1 + 8 * Wp1 - Wp2) / (12 * h)
    res = (d2 - W0 + 1j * 0.5 * kappa ** 2 * (rho * d1 + sigma * W0)
           + np.abs(W0) ** (p - 1.0) * W0)
    return float(np.abs(res).max())


def solve_Q_profile(p: float, tol: float = 1e-9,
                    scan_Q0=(1.02, 1.34, 17), scan_kappa=(0.9, 2.3, 15),
                    rho_table: float = 40.0,
                    rho_final: float = 60.0) -> QProfile:
    """Two-parameter shooting over (Q(0), kappa) for the zero-Hamiltonian,
    monotone-modulus self-similar profile.

    A coarse scan of the beat amplitude locates candidate basins; each is
    polished by a derivative-free two-dimensional root solve on the two
    beat quadratures.  Finding no admissible root, or more than one
    distinct monotone root, raises BranchError with the candidate list
    rather than guessing.  The zero-Hamiltonian property is not imposed:
    it emerges on the admissible branch and is reported as a residual.
    """
    if p <= 5.0:
        raise ValidationError(
            f"self-similar profile needs p > 5 in one dimension, got p={p}")
    if tol <= 0:
        raise ValidationError("tol must be positive")

    resid_scan = _shoot(p, max(tol * 100.0, 1e-9))
    q0s = np.linspace(*scan_Q0)
    kappas = np.linspace(*scan_kappa)
    amp = np.full((q0s.size, kappas.size), np.inf)
    for i, q0 in enumerate(q0s):
        for j, kp in enumerate(kappas):
            a, b = resid_scan([q0, kp])
            amp[i, j] = np.hypot(a, b)

    # local minima of the beat amplitude as root candidates
    candidates = []
    for i in range(1, q0s.size - 1):
        for j in range(1, kappas.size - 1):
            w = amp[i - 1: i + 2, j - 1: j + 2]
            if amp[i, j] == w.min() and amp[i, j] < 0.25:
                candidates.append((q0s[i], kappas[j], amp[i, j]))
    candidates.sort(key=lambda c: c[2])
    if not candidates:
        raise BranchError(f"no admissible basin found for p={p} in scan range")

    resid_fine = _shoot(p, max(tol * 1e-2, 1e-12))
    roots = []
    for q0, kp, _ in candidates[:6]:
        out = root(resid_fine, x0=[q0, kp], method="hybr",
                   options={"xtol": max(tol * 1e-3, 1e-13)})
        if not out.success or np.hypot(*out.fun) > 1e-7:
            continue
        if any(abs(out.x[0] - r[0]) < 1e-3 and abs(out.x[1] - r[1]) < 1e-3
               for r in roots):
            continue
        roots.append(tuple(out.x))

    # keep only monotone-|Q| roots
    admissible = []
    for q0, kp in roots:
        rf = _fit_radius(kp)
        sol = _integrate_W(p, kp, q0, rf, rtol=1e-11)
        if sol.t[-1] < rf:
            continue
        rr = np.linspace(0, rf, 4000)
        mod = np.abs(sol.sol(rr)[0])
        if np.all(np.diff(mod) <= 1e-10 * mod[0]):
            admissible.append((q0, kp))
    if not admissible:
        raise BranchError(
            f"no monotone admissible root; converged roots: {roots}")
    if len(admissible) > 1:
        raise BranchError(
            f"ambiguous admissible branches, refusing to pick: {admissible}")

    Q0, kappa = admissible[0]
    sol = _integrate_W(p, kappa, Q0, rho_final, rtol=max(tol * 1e-3, 1e-12))
    if sol.t[-1] < rho_final:
        raise BranchError("final integration left the admissible regime")
    a, b, c_env = _beat_residual(p, kappa, sol, rho_final)
    h_resid = _hamiltonian_with_tail(p, kappa, sol, rho_final, c_env)
    ode_resid = _ode_residual_W(p, kappa, sol, rho_table)

    rho_grid = np.arange(0.0, rho_table + 1e-9, 0.01)
    W_tab = sol.sol(rho_grid)[0]
    Q_tab = W_tab * np.exp(1j * kappa ** 2 * rho_grid ** 2 / 8.0)

    ground0 = (0.5 * (p + 1.0)) ** (1.0 / (p - 1.0))
    return QProfile(p=p, rho_grid=rho_grid, Q_values=Q_tab, Q0=float(Q0),
                    kappa_Q=float(kappa),
                    hamiltonian_residual=float(h_resid),
                    ode_residual_max=float(ode_resid),
                    oscillation_residual=float(np.hypot(a, b)), tol=tol,
                    extras={"c_envelope": c_env,
                            "R0_1d": ground0,
                            "Q0_above_ground_state": bool(Q0 > ground0),
                            "candidates": [list(map(float, c[:2]))
                                           for c in candidates[:6]]})


def qprofile_to_csv(profile: QProfile, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("rho,re_q,im_q\n")
        fmt = ",".join([FLOAT_FMT] * 3) + "\n"
        for r, qv in zip(profile.rho_grid, profile.Q_values):
            fh.write(fmt % (r, qv.real, qv.imag))
    meta = {"p": profile.p, "Q0": profile.Q0, "kappa_Q": profile.kappa_Q,
            "hamiltonian_residual": profile.hamiltonian_residual,
            "ode_residual_max": profile.ode_residual_max,
            "oscillation_residual": profile.oscillation_residual,
            "tol": profile.tol}
    path.with_suffix(".meta.json").write_text(
        json.dumps(meta, sort_keys=True, indent=1) + "\n")
    return path


def qprofile_from_csv(path: str | Path) -> QProfile:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    meta = json.loads(path.with_suffix(".meta.json").read_text())
    return QProfile(p=meta["p"], rho_grid=data[:, 0],
                    Q_values=data[:, 1] + 1j * data[:, 2], Q0=meta["Q0"],
                    kappa_Q=meta["kappa_Q"],
                    hamiltonian_residual=meta["hamiltonian_residual"],
                    ode_residual_max=meta["ode_residual_max"],
                    oscillation_residual=meta["oscillation_residual"],
                    tol=meta["tol"])
