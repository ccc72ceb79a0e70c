"""Ground-state profiles R(r), their derived constants, and the explicit
minimal-power collapsing solution built on the critical ground state.

The ground state solves  R'' + (d-1)/r R' - R + R^p = 0,  R'(0) = 0,
R(inf) = 0, and is the positive nodeless branch.  Shooting on R(0) is
monotone for this branch, so plain bisection is robust.  The far tail is
attached analytically (modified-Bessel decay) because double-precision
shooting loses the stable manifold around r ~ 15.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.special import kv as bessel_kv

from .field import FLOAT_FMT, RadialField, ValidationError


class ShootingError(RuntimeError):
    """Bisection failed to bracket or converge on the nodeless branch."""


class QuadratureError(RuntimeError):
    """Independent quadrature rules disagree beyond tolerance."""


def surface_area(d: int) -> float:
    """Area of the unit sphere S^{d-1} (2 for d=1: two half-lines)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def closed_form_R1d(p: float, x) -> np.ndarray | float:
    """One-dimensional ground state ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1)x/2)."""
    if p <= 1:
        raise ValidationError(f"nonlinearity exponent must exceed 1, got p={p}")
    x = np.asarray(x, dtype=float)
    y = np.abs(0.5 * (p - 1.0) * x)
    # sech(y)^a via exponentials; stable for large y
    sech = 2.0 * np.exp(-y) / (1.0 + np.exp(-2.0 * y))
    out = (0.5 * (p + 1.0)) ** (1.0 / (p - 1.0)) * sech ** (2.0 / (p - 1.0))
    return out if out.ndim else float(out)


@dataclass
class GroundStateProfile:
    """Tabulated nodeless profile with the constants the reduced equations use."""

    d: int
    p: float
    r_grid: np.ndarray
    R_values: np.ndarray
    R0: float
    A_R: float
    P_cr: float
    M: float
    c_nu: float
    tol: float
    A_R_fluctuation: float
    shoot_r_end: float
    extras: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self._spline = CubicSpline(self.r_grid, self.R_values,
                                   bc_type=((1, 0.0), "not-a-knot"))

    @property
    def r_max(self) -> float:
        return float(self.r_grid[-1])

    def evaluate(self, r) -> np.ndarray:
        """R(|r|), zero beyond the tabulated range."""
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        inside = r <= self.r_max
        out[inside] = np.clip(self._spline(r[inside]), 0.0, None)
        return out

    def is_critical(self) -> bool:
        return abs((self.p - 1.0) * self.d - 4.0) < 1e-12


def _rhs(d: int, p: float):
    def rhs(r, y):
        R, dR = y
        return [dR, R - np.sign(R) * np.abs(R) ** p - (d - 1) / r * dR]
    return rhs


def _events(R0: float):
    def cross(r, y):
        return y[0]
    cross.terminal = True
    cross.direction = -1.0

    def turn(r, y):
        return y[1]
    turn.terminal = True
    turn.direction = 1.0

    def blow(r, y):
        return y[0] - 2.0 * R0
    blow.terminal = True
    blow.direction = 1.0
    return [cross, turn, blow]


def _integrate(d: int, p: float, R0: float, r_end: float = 50.0, dense=False):
    r0 = 1e-3
    c2 = (R0 - R0 ** p) / (2.0 * d)
    c4 = (1.0 - p * R0 ** (p - 1.0)) * c2 / (4.0 * (d + 2.0))
    y0 = [R0 + c2 * r0 ** 2 + c4 * r0 ** 4,
          2.0 * c2 * r0 + 4.0 * c4 * r0 ** 3]
    # max_step keeps the dense-output interpolant tight, not just the nodes
    return solve_ivp(_rhs(d, p), (r0, r_end), y0, method="DOP853",
                     rtol=1e-13, atol=1e-16, events=_events(R0),
                     dense_output=dense, max_step=0.02 if dense else np.inf)


def _classify(sol) -> int:
    """+1 overshoot (crossed zero), -1 undershoot (turned back up), 0 neither."""
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size or sol.t_events[2].size:
        return -1
    return 0


def solve_ground_state(d: int, p: float, tol: float = 1e-10,
                       dr: float = 1.0 / 256, r_max: float | None = None,
                       tail_switch: float = 1e-4) -> GroundStateProfile:
    """Shoot for the nodeless minimal-power profile and tabulate it.

    The table runs on a uniform grid out to where R < 1e-12; beyond the
    shooting segment the exact linearized tail A_R sqrt(2/pi) r^{-(d-2)/2}
    K_{(d-2)/2}(r) is attached (pure A_R e^{-r} when d = 1).
    """
    if d < 1 or int(d) != d:
        raise ValidationError(f"dimension must be a positive integer, got {d}")
    if p <= 1:
        raise ValidationError(f"nonlinearity exponent must exceed 1, got p={p}")
    if d >= 3 and p >= (d + 2) / (d - 2):
        raise ValidationError(f"no decaying ground state for d={d}, p={p}")
    if tol <= 0:
        raise ValidationError("tol must be positive")

    # bracket: small R0 undershoots, large R0 overshoots
    lo = hi = None
    for R0 in np.geomspace(1.02, 16.0, 25):
        k = _classify(_integrate(d, p, R0))
        if k <= 0:
            lo = R0
        else:
            hi = R0
            break
    if lo is None or hi is None:
        raise ShootingError(f"could not bracket R(0) for d={d}, p={p}")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _classify(_integrate(d, p, mid)) == 1:
            hi = mid
        else:
            lo = mid
    else:
        raise ShootingError("bisection did not converge within depth limit")

    R0 = 0.5 * (lo + hi)
    sol = _integrate(d, p, R0, dense=True)
    r_dense = np.linspace(sol.t[0], sol.t[-1], 20000)
    R_dense = sol.sol(r_dense)[0]

    # switch to the analytic tail once R has dropped by tail_switch
    below = np.nonzero(R_dense <= tail_switch * R0)[0]
    if below.size == 0:
        raise ShootingError("trajectory too short for tail extraction; "
                            "grid too short for A_R extraction")
    r_sw = r_dense[below[0]]

    # A_R from the decay-compensated product over the last 20% of the
    # shooting segment; the median sidesteps endpoint noise
    win = (r_dense >= 0.8 * r_sw) & (r_dense <= r_sw)
    rw, Rw = r_dense[win], R_dense[win]
    prod = np.exp(rw) * rw ** ((d - 1) / 2.0) * Rw
    if d == 1:
        A_R = float(np.median(prod))
        fluct = float((prod.max() - prod.min()) / A_R)
    else:
        # algebraic Bessel corrections ~ 1/(8r) remain in the window; fit
        # them out rather than pretending the product is already flat
        coef, *_ = np.linalg.lstsq(
            np.column_stack([np.ones_like(rw), 1.0 / rw]), prod, rcond=None)
        A_R = float(coef[0])
        fit = coef[0] + coef[1] / rw
        fluct = float(np.max(np.abs(prod - fit)) / abs(A_R))

    nu = (d - 2) / 2.0

    def tail(r):
        r = np.asarray(r, dtype=float)
        return A_R * np.sqrt(2.0 / np.pi) * r ** (-(d - 2) / 2.0) * bessel_kv(nu, r)

    if r_max is None:
        # extend until the tail is below 1e-12 (absolute)
        r_max = r_sw
        while float(tail(r_max)) > 1e-12:
            r_max += 1.0

    n = int(np.ceil(r_max / dr)) + 1
    r_grid = dr * np.arange(n)
    k_sw = int(np.searchsorted(r_grid, r_sw))
    R_values = np.empty(n)
    head = sol.sol(r_grid[1:k_sw])[0]
    R_values[0] = R0
    R_values[1:k_sw] = head
    # rescale the tail to join the shooting segment continuously
    scale = float(sol.sol(r_grid[k_sw])[0] / tail(r_grid[k_sw]))
    R_values[k_sw:] = scale * tail(r_grid[k_sw:])

    spline = CubicSpline(r_grid, R_values, bc_type=((1, 0.0), "not-a-knot"))
    meas = r_grid ** (d - 1)
    sd = surface_area(d)
    P_cr = sd * _dual_quadrature(spline, r_grid, R_values ** 2 * meas,
                                 lambda R, r: R ** 2 * r ** (d - 1))
    M = 0.25 * _simpson(r_grid, r_grid ** 2 * R_values ** 2 * meas)
    c_nu = 2.0 * A_R ** 2 / M

    return GroundStateProfile(
        d=d, p=p, r_grid=r_grid, R_values=R_values, R0=float(R0), A_R=A_R,
        P_cr=P_cr, M=M, c_nu=c_nu, tol=tol, A_R_fluctuation=fluct,
        shoot_r_end=float(r_sw),
        extras={"bracket": (float(lo), float(hi)), "tail_scale": scale})


def _simpson(x: np.ndarray, y: np.ndarray) -> float:
    from scipy.integrate import simpson
    return float(simpson(y, x=x))


def _gauss(fn, a: float, b: float, nodes: int = 400) -> float:
    z, w = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * (b - a) * z + 0.5 * (b + a)
    return float(0.5 * (b - a) * np.sum(w * fn(r)))


def _dual_quadrature(spline, r_grid, integrand_values, integrand_fn,
                     rel_tol: float = 1e-6) -> float:
    """Composite Simpson on the solver grid cross-checked by Gauss-Legendre."""
    simp = _simpson(r_grid, integrand_values)
    gl = _gauss(lambda r: integrand_fn(np.clip(spline(r), 0.0, None), r),
                r_grid[0], r_grid[-1])
    if abs(simp - gl) > rel_tol * max(abs(simp), 1e-300):
        raise QuadratureError(
            f"quadrature mismatch: simpson={simp!r} gauss={gl!r}")
    return simp


def compute_cq(profile: GroundStateProfile, q: float,
               method: str = "simpson") -> float:
    """(q+1)-power norm ||R||_{q+1}^{q+1} of the profile over R^d."""
    if q < 1:
        raise ValidationError(f"damping exponent must be >= 1, got q={q}")
    r, R = profile.r_grid, profile.R_values
    meas = r ** (profile.d - 1)
    sd = surface_area(profile.d)
    if method == "simpson":
        val = sd * _dual_quadrature(
            profile._spline, r, R ** (q + 1.0) * meas,
            lambda Rv, rv: Rv ** (q + 1.0) * rv ** (profile.d - 1))
    elif method == "trapezoid":
        val = sd * float(np.trapezoid(R ** (q + 1.0) * meas, r))
    elif method == "gauss":
        val = sd * _gauss(
            lambda rv: np.clip(profile._spline(rv), 0.0, None) ** (q + 1.0)
            * rv ** (profile.d - 1), r[0], r[-1])
    else:
        raise ValidationError(f"unknown quadrature method {method!r}")
    return val


def ode_residual(profile: GroundStateProfile) -> np.ndarray:
    """Pointwise residual of the profile ODE on interior grid points (4th-order FD)."""
    r, R, d, p = profile.r_grid, profile.R_values, profile.d, profile.p
    h = r[1] - r[0]
    i = np.arange(2, r.size - 2)
    d1 = (R[i - 2] - 8 * R[i - 1] + 8 * R[i + 1] - R[i + 2]) / (12 * h)
    d2 = (-R[i - 2] + 16 * R[i - 1] - 30 * R[i] + 16 * R[i + 1] - R[i + 2]) / (12 * h ** 2)
    return d2 + (d - 1) / r[i] * d1 - R[i] + R[i] ** p


def explicit_blowup(alpha: float, T_c: float, t: float, r_grid: np.ndarray,
                    profile: GroundStateProfile) -> RadialField:
    """Exact minimal-power blowup solution of the undamped critical NLS.

    psi = L^{-d/2} R(r/L) exp(i tau + i L_t r^2 / (4 L)) with L = alpha (T_c - t)
    and tau = (1/alpha^2) (1/(T_c - t) - 1/T_c), so tau(0) = 0 matches the
    running integral of 1/L^2 from time zero.
    """
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    if t >= T_c:
        raise ValidationError(f"explicit solution only exists for t < T_c={T_c}")
    if not profile.is_critical():
        raise ValidationError(
            f"explicit blowup needs the critical profile, got d={profile.d}, p={profile.p}")
    L = alpha * (T_c - t)
    L_t = -alpha
    tau = (1.0 / alpha ** 2) * (1.0 / (T_c - t) - 1.0 / T_c)
    r = np.asarray(r_grid, dtype=float)
    amp = L ** (-profile.d / 2.0) * profile.evaluate(r / L)
    phase = tau + (L_t / L) * r ** 2 / 4.0
    return RadialField(t=t, x_grid=r, psi=amp * np.exp(1j * phase),
                       meta={"kind": "explicit", "alpha": alpha, "T_c": T_c})


def profile_to_csv(profile: GroundStateProfile, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("r,R\n")
        for r, R in zip(profile.r_grid, profile.R_values):
            fh.write((FLOAT_FMT + "," + FLOAT_FMT + "\n") % (r, R))
    meta = {"d": profile.d, "p": profile.p, "R0": profile.R0,
            "A_R": profile.A_R, "P_cr": profile.P_cr, "M": profile.M,
            "c_nu": profile.c_nu, "tol": profile.tol,
            "A_R_fluctuation": profile.A_R_fluctuation,
            "shoot_r_end": profile.shoot_r_end}
    path.with_suffix(".meta.json").write_text(
        json.dumps(meta, sort_keys=True, indent=1) + "\n")
    return path


def profile_from_csv(path: str | Path) -> GroundStateProfile:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    meta = json.loads(path.with_suffix(".meta.json").read_text())
    return GroundStateProfile(
        d=int(meta["d"]), p=meta["p"], r_grid=data[:, 0], R_values=data[:, 1],
        R0=meta["R0"], A_R=meta["A_R"], P_cr=meta["P_cr"], M=meta["M"],
        c_nu=meta["c_nu"], tol=meta["tol"],
        A_R_fluctuation=meta["A_R_fluctuation"],
        shoot_r_end=meta["shoot_r_end"])
