"""Post-processing of solver output: width extraction, arrest detection,
profile fitting against the ground-state and self-similar references,
blowup-rate fits, and asymmetry/phase diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .field import DiagnosticsSeries, RadialField, ValidationError


class UnderResolvedError(ValidationError):
    """Snapshot core has too few grid points across the fitted width."""


@dataclass
class WidthSeries:
    t: np.ndarray
    L: np.ndarray
    valid: np.ndarray


def width_series(diag: DiagnosticsSeries, p: float) -> WidthSeries:
    """L(t) = |psi(0,0)/psi(t,0)|^{(p-1)/2} from the on-axis amplitude."""
    a = diag.axis_amp
    if a.size == 0 or a[0] == 0:
        raise ValidationError("on-axis amplitude at t=0 is zero")
    valid = a > 0
    L = np.full_like(a, np.nan)
    L[valid] = (a[0] / a[valid]) ** ((p - 1.0) / 2.0)
    return WidthSeries(t=diag.t.copy(), L=L, valid=valid)


@dataclass
class TmaxResult:
    time: float
    index: int
    sup: float
    boundary_flagged: bool


def detect_Tmax(diag: DiagnosticsSeries) -> TmaxResult:
    """Time of maximal focusing: argmax of the sup-norm with three-point
    parabolic refinement; flagged if the maximum sits on the window edge."""
    s = diag.sup_norm
    i = int(np.argmax(s))
    if i == 0 or i == s.size - 1:
        return TmaxResult(time=float(diag.t[i]), index=i, sup=float(s[i]),
                          boundary_flagged=True)
    t3 = diag.t[i - 1: i + 2]
    s3 = s[i - 1: i + 2]
    a, b, _ = np.polyfit(t3 - t3[1], s3, 2)
    t_ref = float(t3[1] - b / (2.0 * a)) if a < 0 else float(t3[1])
    return TmaxResult(time=t_ref, index=i, sup=float(s[i]),
                      boundary_flagged=False)


@dataclass
class ProfileFit:
    t: float
    profile_kind: str
    L_fit: float
    rel_distance: float
    window_width: float


def _profile_reference(profile):
    kind = getattr(profile, "kind", None)
    if kind is None:
        kind = "Q" if hasattr(profile, "kappa_Q") else "R"
    if kind == "Q":
        return "Q", abs(profile.Q0), profile.modulus
    return "R", profile.R0, profile.evaluate


def fit_profile(snapshot: RadialField, profile, p: float,
                w: float = 3.0) -> ProfileFit:
    """Rescaled-profile fit by the on-axis amplitude ratio.

    L_fit = |ref(0)/psi(t,0)|^{(p-1)/2}; the reported distance is the
    relative L2 gap between |psi| and the rescaled reference modulus over
    the core window |x| <= w L_fit.
    """
    amp0 = abs(snapshot.on_axis())
    if amp0 == 0:
        raise ValidationError("snapshot has zero on-axis amplitude")
    kind, ref0, modulus = _profile_reference(profile)
    L_fit = (ref0 / amp0) ** ((p - 1.0) / 2.0)
    if 8.0 * snapshot.dx > L_fit:
        raise UnderResolvedError(
            f"core width {L_fit:.3e} under-resolved: dx={snapshot.dx:.3e}")
    x = snapshot.x_grid
    sel = np.abs(x) <= w * L_fit
    target = np.abs(snapshot.psi[sel])
    fitted = L_fit ** (-2.0 / (p - 1.0)) * modulus(np.abs(x[sel]) / L_fit)
    rel = float(np.linalg.norm(target - fitted) / np.linalg.norm(target))
    return ProfileFit(t=snapshot.t, profile_kind=kind, L_fit=float(L_fit),
                      rel_distance=rel, window_width=w)


@dataclass
class RateFit:
    model_kind: str
    T_c_fit: float
    prefactor: float
    exponent: float
    residual: float
    ill_conditioned: bool
    window: tuple


def focusing_window(t: np.ndarray, L: np.ndarray, min_factor: float = 10.0
                    ) -> np.ndarray:
    """Mask of the focusing stage past the requested focusing factor,
    up to the narrowest sample."""
    i_min = int(np.nanargmin(L))
    mask = np.zeros(t.size, dtype=bool)
    mask[: i_min + 1] = True
    mask &= L <= L[0] / min_factor
    return mask


def _models(kind: str):
    # each model maps (T_c, t, L) -> (design matrix for log L, names)
    if kind == "sqrt":
        def design(T_c, t):
            return np.column_stack([np.ones_like(t),
                                    0.5 * np.log(T_c - t)]), (1.0, False)
    elif kind == "sqrt_free":
        def design(T_c, t):
            return np.column_stack([np.ones_like(t),
                                    np.log(T_c - t)]), (None, True)
    elif kind == "loglog":
        def design(T_c, t):
            u = T_c - t
            core = np.log(u) - np.log(np.log(np.abs(np.log(u))))
            return np.column_stack([np.ones_like(t), 0.5 * core]), (1.0, False)
    else:
        raise ValidationError(f"unknown rate model {kind!r}")
    return design


def fit_blowup_rate(t: np.ndarray, L: np.ndarray, model_kind: str) -> RateFit:
    """Nonlinear least squares of the collapse-rate models on a focusing
    window: L = C (T_c - t)^e with e fixed at 1/2, free, or carrying the
    loglog correction.  Linear in everything but T_c, so the fit is a
    one-dimensional bounded search over T_c with closed-form inner fits."""
    t = np.asarray(t, dtype=float)
    L = np.asarray(L, dtype=float)
    ok = np.isfinite(L) & (L > 0)
    t, L = t[ok], L[ok]
    if t.size < 8:
        raise ValidationError("too few samples for a rate fit")
    logL = np.log(L)
    span = t[-1] - t[0]
    design = _models(model_kind)

    def solve_at(T_c):
        A, (fixed_e, free_e) = design(T_c, t)
        if not free_e:
            # exponent fixed: only the prefactor is linear
            y = logL - A[:, 1]
            c0 = float(np.mean(y))
            resid = y - c0
            return np.sqrt(np.mean(resid ** 2)), (c0, fixed_e), A
        coef, *_ = np.linalg.lstsq(A, logL, rcond=None)
        resid = A @ coef - logL
        return np.sqrt(np.mean(resid ** 2)), (float(coef[0]), float(coef[1])), A

    lo = t[-1] + 1e-6 * span
    hi = t[-1] + 2.0 * span
    res = minimize_scalar(lambda Tc: solve_at(Tc)[0], bounds=(lo, hi),
                          method="bounded",
                          options={"xatol": 1e-14 * max(1.0, abs(hi))})
    T_c = float(res.x)
    rms, (logC, e), A = solve_at(T_c)
    cond = float(np.linalg.cond(np.column_stack([A, np.ones(t.size)])))
    at_edge = T_c > t[-1] + 1.9 * span
    return RateFit(model_kind=model_kind, T_c_fit=T_c,
                   prefactor=float(np.exp(logC)), exponent=float(e),
                   residual=float(rms),
                   ill_conditioned=bool(cond > 1e8 or at_edge),
                   window=(float(t[0]), float(t[-1])))


def fit_linear_rate(t: np.ndarray, L: np.ndarray) -> tuple[float, float]:
    """L = C (t - T_c): returns (C, T_c) by plain linear least squares."""
    a, b = np.polyfit(t, L, 1)
    return float(a), float(-b / a)


@dataclass
class AsymmetryRecord:
    T_max: float
    window: float
    pre_slope: float
    post_slope: float
    ratio: float
    theta_at_arrest: float


def asymmetry_and_phase(diag: DiagnosticsSeries, T_max: float,
                        window: float | None = None,
                        exclude_frac: float = 0.1) -> AsymmetryRecord:
    """Linear slopes of L on symmetric windows on both sides of T_max, and
    the unwrapped on-axis phase at the arrest time."""
    t = diag.t
    L = diag.L
    avail_pre = T_max - t[0]
    avail_post = t[-1] - T_max
    if window is None:
        window = min(avail_pre, avail_post)
    if window > avail_pre + 1e-15 or window > avail_post + 1e-15:
        raise ValidationError(
            f"window {window} extends past data "
            f"(pre {avail_pre:.3g}, post {avail_post:.3g})")
    gap = exclude_frac * window
    pre = (t >= T_max - window) & (t <= T_max - gap)
    post = (t >= T_max + gap) & (t <= T_max + window)
    if pre.sum() < 2 or post.sum() < 2:
        raise ValidationError("not enough samples in the slope windows")
    pre_slope = float(np.polyfit(t[pre], L[pre], 1)[0])
    post_slope = float(np.polyfit(t[post], L[post], 1)[0])
    theta = float(np.interp(T_max, t, diag.phase0))
    ratio = abs(post_slope / pre_slope) if pre_slope != 0 else np.inf
    return AsymmetryRecord(T_max=T_max, window=float(window),
                           pre_slope=pre_slope, post_slope=post_slope,
                           ratio=float(ratio), theta_at_arrest=theta)


@dataclass
class ReducedPdeComparison:
    pre_max_rel: float
    post_max_rel: float
    t_arrest_pde: float
    t_arrest_reduced: float
    L_min_pde: float
    L_min_reduced: float


def compare_reduced_pde(diag: DiagnosticsSeries, traj, L_mod0: float,
                        L_pre_floor: float = 1e-2) -> ReducedPdeComparison:
    """Relative L(t) gap between a PDE run and the reduced model.

    The PDE width is converted to modulation units via L_mod0 (the initial
    modulation width; T_c for explicit-solution data).  The pre-arrest
    window stops at L_pre_floor in those units.
    """
    tt = diag.t
    t_hi = min(tt[-1], traj.t[-1])
    sel = tt <= t_hi
    tt = tt[sel]
    pde = L_mod0 * diag.L[sel]
    red = traj.sample(tt)[:, 0]
    i = int(np.argmin(pde))
    t_arr = float(tt[i])
    rel = np.abs(red - pde) / pde
    pre = (tt <= t_arr) & (pde >= L_pre_floor)
    post = tt > t_arr
    return ReducedPdeComparison(
        pre_max_rel=float(rel[pre].max()) if pre.any() else np.nan,
        post_max_rel=float(rel[post].max()) if post.any() else np.nan,
        t_arrest_pde=t_arr,
        t_arrest_reduced=float(traj.t_min) if traj.t_min else np.nan,
        L_min_pde=float(pde[i]),
        L_min_reduced=float(traj.L_min) if traj.L_min else np.nan)
