"""Modulation-theory reduced equations for the damped critical NLS and the
post-collapse slope kappa(q) extracted from them in the vanishing-damping
limit.

State is (L, L_t, beta) with

    L_tt   = -beta / L^3
    beta_t = -nu(beta) / L^2 - (2 c_q delta / M) L^{-(q-1) d / 2}

and nu(beta) = c_nu exp(-pi / sqrt(beta)) for beta > 0, zero otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .field import FLOAT_FMT, ValidationError


@dataclass(frozen=True)
class ReducedParams:
    d: int
    q: float
    delta: float
    M: float
    c_q: float
    c_nu: float

    def __post_init__(self):
        if min(self.M, self.c_q, self.c_nu) <= 0:
            raise ValidationError("profile constants M, c_q, c_nu must be positive")
        if self.delta < 0:
            raise ValidationError("delta must be nonnegative")
        if self.q < 1:
            raise ValidationError("damping exponent q must be >= 1")

    @property
    def drive(self) -> float:
        return 2.0 * self.c_q * self.delta / self.M

    @property
    def gamma(self) -> float:
        return 0.5 * (self.q - 1.0) * self.d


@dataclass
class ReducedState:
    t: float
    L: float
    L_t: float
    beta: float


def nu(beta, c_nu: float):
    """Loglog-law feedback term; identically zero for beta <= 0 and flat at 0+."""
    beta = np.asarray(beta, dtype=float)
    out = np.zeros_like(beta)
    pos = beta > 0
    out[pos] = c_nu * np.exp(-np.pi / np.sqrt(beta[pos]))
    return out if out.ndim else float(out)


@dataclass
class ReducedTrajectory:
    params: ReducedParams
    t: np.ndarray
    L: np.ndarray
    L_t: np.ndarray
    beta: np.ndarray
    arrested: bool
    t_min: float | None = None
    L_min: float | None = None
    pre_slope: float | None = None
    post_slope: float | None = None
    hit_floor: bool = False
    extras: dict = dc_field(default_factory=dict)
    _sol: object = None

    def sample(self, ts: np.ndarray) -> np.ndarray:
        """Dense (L, L_t, beta) rows at the requested times."""
        return self._sol(ts).T


def _rhs(params: ReducedParams):
    drive, gamma, c_nu = params.drive, params.gamma, params.c_nu

    def rhs(t, y):
        L, L_t, beta = y
        nu_b = c_nu * np.exp(-np.pi / np.sqrt(beta)) if beta > 0 else 0.0
        return [L_t, -beta / L ** 3, -nu_b / L ** 2 - drive * L ** (-gamma)]
    return rhs


def integrate_reduced(params: ReducedParams, ic: ReducedState, t_end: float,
                      tol: float = 1e-11, L_floor: float = 1e-8,
                      L_stop: float | None = None) -> ReducedTrajectory:
    """Adaptive integration with minimum-of-L event capture.

    Hitting L_floor (collapse not arrested in the reduced model) terminates
    the integration and is reported on the trajectory, not raised.
    """
    if ic.L <= 0:
        raise ValidationError("initial width must be positive")

    def ev_min(t, y):
        return y[1]
    ev_min.direction = 1.0
    ev_min.terminal = False

    def ev_floor(t, y):
        return y[0] - L_floor
    ev_floor.direction = -1.0
    ev_floor.terminal = True

    events = [ev_min, ev_floor]
    if L_stop is not None:
        def ev_stop(t, y):
            return y[0] - L_stop
        ev_stop.direction = 1.0
        ev_stop.terminal = True
        events.append(ev_stop)

    sol = solve_ivp(_rhs(params), (ic.t, t_end), [ic.L, ic.L_t, ic.beta],
                    method="DOP853", rtol=tol, atol=1e-14,
                    events=events, dense_output=True)
    if not sol.success:
        raise RuntimeError(f"reduced integration failed: {sol.message}")

    traj = ReducedTrajectory(params=params, t=sol.t, L=sol.y[0],
                             L_t=sol.y[1], beta=sol.y[2],
                             arrested=sol.t_events[0].size > 0,
                             hit_floor=sol.t_events[1].size > 0,
                             _sol=sol.sol)
    if traj.arrested:
        t_min = float(sol.t_events[0][0])
        traj.t_min = t_min
        traj.L_min = float(sol.sol(t_min)[0])
        traj.pre_slope, traj.post_slope = _bounce_slopes(traj)
    return traj


def _time_at_width(traj: ReducedTrajectory, target: float, t_a: float,
                   t_b: float) -> float | None:
    """Crossing time of L(t) = target inside [t_a, t_b], if any."""
    from scipy.optimize import brentq
    f = lambda t: traj._sol(t)[0] - target
    fa, fb = f(t_a), f(t_b)
    if fa * fb > 0:
        return None
    return float(brentq(f, t_a, t_b, xtol=1e-14))


def _bounce_slopes(traj: ReducedTrajectory, lo_mult: float = 10.0,
                   hi_mult: float = 100.0) -> tuple[float | None, float | None]:
    """Linear L(t) slopes over the windows where L is in [10, 100] L_min on
    each side of the bounce; far enough out to be in the linear regime, early
    enough to dodge end-of-data effects."""
    t_min, L_min = traj.t_min, traj.L_min
    t0, t1 = float(traj.t[0]), float(traj.t[-1])

    def window_slope(t_a, t_b):
        lo = _time_at_width(traj, lo_mult * L_min, t_a, t_b)
        hi = _time_at_width(traj, hi_mult * L_min, t_a, t_b)
        if lo is None or hi is None:
            return None
        ts = np.linspace(min(lo, hi), max(lo, hi), 200)
        Ls = traj._sol(ts)[0]
        return float(np.polyfit(ts, Ls, 1)[0])

    pre = window_slope(t0, t_min)
    post = window_slope(t_min, t1)
    return pre, post


def params_from_profile(profile, q: float, delta: float) -> ReducedParams:
    """Reduced-equation constants from a critical ground-state profile.

    c_q enters in the radial normalization (no sphere-area factor): the
    width equation follows from the exact power balance
    P_t = -2 delta ||psi||_{q+1}^{q+1} together with dP/dbeta = S_{d-1} M
    (the latter checked against the linearized profile equation to eight
    digits), so the full-space (q+1)-norm must be divided by S_{d-1} for
    the drive -2 c_q delta / M to carry the correct magnitude.
    """
    from .profiles import compute_cq, surface_area
    if not profile.is_critical():
        raise ValidationError("reduced equations need the critical-case profile")
    return ReducedParams(d=profile.d, q=q, delta=delta, M=profile.M,
                         c_q=compute_cq(profile, q) / surface_area(profile.d),
                         c_nu=profile.c_nu)


@dataclass
class KappaResult:
    q: float
    d: int
    kappa: float
    chosen_rate: float
    fits: dict            # rate exponent -> (kappa, rms residual)
    deltas: np.ndarray
    slopes: np.ndarray
    trajectories: list


def kappa_of_q(q: float, d: int, delta_list, M: float, c_q: float,
               c_nu: float, tol: float = 1e-11, T_c: float = 1.0) -> KappaResult:
    """Post-collapse slope of L in the delta -> 0 limit.

    Each damped run starts on the explicit-solution trajectory (L = T_c - t,
    L_t = -1, beta = 0 at t = 0, regularizing the singular nominal initial
    condition at the collapse point), the asymptotic post-minimum slope is
    measured, and the ladder is extrapolated to zero damping.
    """
    deltas = np.asarray(sorted(delta_list, reverse=True), dtype=float)
    if deltas.size < 2:
        raise ValidationError("need at least two delta values to extrapolate")
    if np.any(deltas <= 0):
        raise ValidationError("delta ladder must be positive")

    slopes = []
    trajs = []
    for delta in deltas:
        params = ReducedParams(d=d, q=q, delta=delta, M=M, c_q=c_q, c_nu=c_nu)
        ic = ReducedState(t=0.0, L=T_c, L_t=-1.0, beta=0.0)
        # phase 1: find the bounce
        probe = integrate_reduced(params, ic, t_end=3.0 * T_c, tol=tol)
        if not probe.arrested or probe.L_min is None:
            raise RuntimeError(f"no arrest in reduced model at delta={delta}")
        # phase 2: rerun long enough for the [10, 100] L_min slope window
        t_end = probe.t_min + 500.0 * probe.L_min
        traj = integrate_reduced(params, ic, t_end=t_end, tol=tol,
                                 L_stop=150.0 * probe.L_min)
        if traj.post_slope is None:
            raise RuntimeError(f"slope window not reached at delta={delta}")
        slopes.append(traj.post_slope)
        trajs.append(traj)
    slopes = np.asarray(slopes)

    fits = {}
    for rate in (1.0, 0.5):
        A = np.column_stack([np.ones_like(deltas), deltas ** rate])
        coef, *_ = np.linalg.lstsq(A, slopes, rcond=None)
        resid = float(np.sqrt(np.mean((A @ coef - slopes) ** 2)))
        fits[rate] = (float(coef[0]), resid)
    chosen = min(fits, key=lambda r: fits[r][1])
    return KappaResult(q=q, d=d, kappa=fits[chosen][0], chosen_rate=chosen,
                       fits=fits, deltas=deltas, slopes=slopes,
                       trajectories=trajs)


def write_reduced_csv(path: str | Path, traj: ReducedTrajectory) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("t,L,L_t,beta\n")
        fmt = ",".join([FLOAT_FMT] * 4) + "\n"
        for row in zip(traj.t, traj.L, traj.L_t, traj.beta):
            fh.write(fmt % row)
    meta = {"d": traj.params.d, "q": traj.params.q, "delta": traj.params.delta,
            "M": traj.params.M, "c_q": traj.params.c_q, "c_nu": traj.params.c_nu,
            "arrested": traj.arrested, "t_min": traj.t_min, "L_min": traj.L_min,
            "pre_slope": traj.pre_slope, "post_slope": traj.post_slope,
            "hit_floor": traj.hit_floor}
    path.with_suffix(".meta.json").write_text(
        json.dumps(meta, sort_keys=True, indent=1) + "\n")
    return path
