"""Time integration of the one-dimensional damped NLS

    i psi_t + psi_xx + |psi|^{p-1} psi + i delta |psi|^{q-1} psi = 0

by Strang splitting: an exact pointwise flow of the combined focusing +
damping local term, and a spectral (periodic) linear step.  The linear
substep is unitary and the local substep dissipates |psi| in closed form,
so power accounting is exact per substep.

The time step follows the square of the normalized on-axis width and the
grid is refined by band-limited (zero-pad) interpolation whenever the core
width drops below c_grid spacings.  A decay monitor near the boundary
flags contamination; the domain can double itself (zero embedding) before
that happens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, asdict

import numpy as np

from .field import (DiagnosticsSeries, NumericalFailure, RadialField,
                    ValidationError, config_hash, symmetric_grid)
from .profiles import GroundStateProfile, explicit_blowup


@dataclass
class SolverConfig:
    p: float
    q: float
    delta: float
    initial_condition: dict
    domain_half_width: float
    n_points: int
    dt0: float
    t_end: float
    focus_stop: float = 1e3
    sample_stride: int = 16
    c_grid: float = 16.0
    boundary_guard: float = 1e-8
    max_points: int = 1 << 21
    auto_expand: bool = True
    allow_crop: bool = False
    scheme: str = "strang"
    snapshot_pre_L: tuple = ()
    snapshot_post_L: tuple = ()
    snapshot_at_peak: bool = False

    def validate(self) -> None:
        if self.delta < 0:
            raise ValidationError("delta must be nonnegative")
        if self.p <= 1 or self.q < 1:
            raise ValidationError("exponents must satisfy p > 1, q >= 1")
        if self.focus_stop <= 1:
            raise ValidationError("focus_stop must exceed 1")
        n = self.n_points
        if n < 16 or (n & (n - 1)) != 0:
            raise ValidationError("n_points must be a power of two (>= 16)")
        if self.dt0 <= 0 or self.t_end <= 0 or self.domain_half_width <= 0:
            raise ValidationError("dt0, t_end, domain_half_width must be positive")
        if self.sample_stride < 1:
            raise ValidationError("sample_stride must be >= 1")
        if self.scheme not in ("strang", "yoshida4"):
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        kind = self.initial_condition.get("kind")
        if kind not in ("gaussian", "scaled_ground_state", "explicit"):
            raise ValidationError(f"unknown initial condition kind {kind!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snapshot_pre_L"] = list(self.snapshot_pre_L)
        d["snapshot_post_L"] = list(self.snapshot_post_L)
        return d

    def hash(self) -> str:
        return config_hash(self.to_dict())


def make_initial_condition(spec: dict, x_grid: np.ndarray,
                           profile: GroundStateProfile | None = None
                           ) -> RadialField:
    """Sample the configured initial field on the grid.

    Records power (and its ratio to P_cr when the critical-case profile is
    at hand) in the field's meta.
    """
    kind = spec.get("kind")
    if kind == "gaussian":
        amp = float(spec["amplitude"])
        psi = amp * np.exp(-x_grid ** 2) + 0j
        fld = RadialField(t=0.0, x_grid=x_grid, psi=psi)
    elif kind == "scaled_ground_state":
        if profile is None:
            raise ValidationError("scaled_ground_state needs a GroundStateProfile")
        factor = float(spec["factor"])
        psi = factor * profile.evaluate(x_grid) + 0j
        fld = RadialField(t=0.0, x_grid=x_grid, psi=psi)
    elif kind == "explicit":
        if profile is None or not profile.is_critical():
            raise ValidationError("explicit initial data needs the critical profile")
        fld = explicit_blowup(alpha=float(spec.get("alpha", 1.0)),
                              T_c=float(spec["T_c"]), t=0.0,
                              r_grid=x_grid, profile=profile)
        fld.t = 0.0
    else:
        raise ValidationError(f"unknown initial condition kind {kind!r}")

    if fld.boundary_ratio() > 1e-8:
        raise ValidationError("grid too small to hold the profile: initial "
                              f"boundary ratio {fld.boundary_ratio():.2e}")
    fld.meta["power"] = fld.power()
    if profile is not None and profile.is_critical():
        fld.meta["power_ratio_to_Pcr"] = fld.power() / profile.P_cr
    return fld


def _ipow(base: np.ndarray, m: float) -> np.ndarray:
    """base**m with cheap repeated squaring when m is a small integer."""
    if m == int(m) and 0 <= int(m) <= 64:
        m = int(m)
        out = np.ones_like(base)
        b = base
        while m:
            if m & 1:
                out = out * b
            b = b * b
            m >>= 1
        return out
    return base ** m


def local_phase_damping_step(psi: np.ndarray, dt: float, p: float, q: float,
                             delta: float) -> np.ndarray:
    """Exact flow of  i u_t + |u|^{p-1} u + i delta |u|^{q-1} u = 0.

    |u| obeys d|u|/dt = -delta |u|^q (closed form), and the phase advances
    by the time integral of |u|^{p-1} along that decay.
    """
    I = psi.real ** 2 + psi.imag ** 2
    if delta == 0.0:
        phase = dt * _ipow(I, (p - 1) / 2)
        return psi * np.exp(1j * phase)
    if q == 1.0:
        decay = math.exp(-delta * dt)
        k1 = -math.expm1(-(p - 1) * delta * dt) / ((p - 1) * delta)
        phase = _ipow(I, (p - 1) / 2) * k1
        return psi * (decay * np.exp(1j * phase))

    Iq = _ipow(I, (q - 1) / 2)
    c = delta * (q - 1.0) * Iq
    x = c * dt
    if dt < 0 and float(x.min()) <= -1.0:
        raise NumericalFailure("backward damping substep left its domain; "
                               "reduce the base time step")
    decay = np.exp(np.log1p(x) * (-1.0 / (q - 1.0)))
    m = (p - 1.0) / (q - 1.0)
    c_safe = np.where(c > 0, c, 1.0)
    if abs(m - 1.0) < 1e-12:
        integral = np.log1p(x) / c_safe
    else:
        integral = np.expm1((1.0 - m) * np.log1p(x)) / (c_safe * (1.0 - m))
    integral = np.where(c > 0, integral, dt)
    phase = _ipow(I, (p - 1) / 2) * integral
    return psi * decay * np.exp(1j * phase)


def linear_multiplier(n: int, dx: float, dt: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    return np.exp(-1j * k * k * dt)


def linear_substep(psi: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.fft.fft(psi) * multiplier)


_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1

# substep plans: alternating exact-local ("N") and spectral-linear ("L")
# stages whose coefficients multiply dt; adjacent local stages are merged
_PLANS = {
    "strang": (("N", 0.5), ("L", 1.0), ("N", 0.5)),
    "yoshida4": (("N", 0.5 * _W1), ("L", _W1), ("N", 0.5 * (_W1 + _W0)),
                 ("L", _W0), ("N", 0.5 * (_W0 + _W1)), ("L", _W1),
                 ("N", 0.5 * _W1)),
}


def step(field: RadialField, dt: float, config: SolverConfig) -> RadialField:
    """One split step (Strang by default); power-exact for delta = 0."""
    if dt <= 0:
        raise ValidationError("dt must be positive")
    psi = field.psi
    for kind, c in _PLANS[config.scheme]:
        if kind == "N":
            psi = local_phase_damping_step(psi, c * dt, config.p, config.q,
                                           config.delta)
        else:
            psi = linear_substep(psi, linear_multiplier(field.n, field.dx,
                                                        c * dt))
    if not np.isfinite(psi[field.n // 2]):
        raise NumericalFailure(f"non-finite field at t={field.t + dt}")
    return RadialField(t=field.t + dt, x_grid=field.x_grid, psi=psi,
                       level=field.level, meta=dict(field.meta))


def refine_spectral(psi: np.ndarray) -> np.ndarray:
    """Halve the spacing by zero-padding the spectrum (band-limited)."""
    n = psi.size
    F = np.fft.fft(psi)
    G = np.zeros(2 * n, dtype=complex)
    G[: n // 2] = F[: n // 2]
    G[-(n // 2) + 1:] = F[n // 2 + 1:]
    G[n // 2] = 0.5 * F[n // 2]
    G[-(n // 2)] = 0.5 * F[n // 2]
    return 2.0 * np.fft.ifft(G)


@dataclass
class _RunState:
    x: np.ndarray
    psi: np.ndarray
    dx: float
    half_width: float
    level: int = 0


class _Recorder:
    def __init__(self, p: float, q: float):
        self.p = p
        self.q = q
        self.rows = {k: [] for k in ("t", "L", "sup_norm", "power",
                                     "hamiltonian", "phase0", "axis_amp",
                                     "dt", "level", "damping_integral")}

    def record(self, st: _RunState, t, L, theta, dt):
        psi, dx = st.psi, st.dx
        I = psi.real ** 2 + psi.imag ** 2
        k = 2.0 * np.pi * np.fft.fftfreq(psi.size, d=dx)
        grad = np.fft.ifft(1j * k * np.fft.fft(psi))
        gI = grad.real ** 2 + grad.imag ** 2
        p_int = float(np.sum(I) * dx)
        r = self.rows
        r["t"].append(t)
        r["L"].append(L)
        r["sup_norm"].append(float(np.sqrt(I.max())))
        r["power"].append(p_int)
        r["hamiltonian"].append(float(np.sum(gI) * dx)
                                - 2.0 / (self.p + 1.0) * float(np.sum(_ipow(I, (self.p + 1) / 2)) * dx))
        r["phase0"].append(theta)
        r["axis_amp"].append(float(np.sqrt(I[psi.size // 2])))
        r["dt"].append(dt)
        r["level"].append(st.level)
        r["damping_integral"].append(float(np.sum(_ipow(I, (self.q + 1) / 2)) * dx))

    def series(self, cfg_hash: str, status: str, flags: dict) -> DiagnosticsSeries:
        arrs = {k: np.asarray(v) for k, v in self.rows.items()}
        arrs["level"] = arrs["level"].astype(int)
        return DiagnosticsSeries(config_hash=cfg_hash, status=status,
                                 flags=flags, **arrs)


def run(config: SolverConfig, ground_state: GroundStateProfile
        ) -> tuple[DiagnosticsSeries, list[RadialField]]:
    """Integrate to t_end, focus_stop, or boundary contamination.

    `ground_state` is the (d=1, p) profile; its on-axis value calibrates the
    physical core width used for the refinement trigger, and it supplies
    profile-based initial conditions.
    """
    config.validate()
    cfg_hash = config.hash()
    x = symmetric_grid(config.domain_half_width, config.n_points)
    ic = make_initial_condition(config.initial_condition, x, ground_state)
    st = _RunState(x=x, psi=ic.psi.astype(complex), dx=ic.dx,
                   half_width=config.domain_half_width)

    rec = _Recorder(config.p, config.q)
    flags: dict = {"ic": dict(ic.meta)}
    snapshots: list[RadialField] = []

    axis0 = abs(st.psi[st.psi.size // 2])
    if axis0 == 0:
        raise ValidationError("initial on-axis amplitude is zero")
    pm1_half = (config.p - 1.0) / 2.0
    width_of = lambda amp: (axis0 / amp) ** pm1_half
    core_width_of = lambda amp: (ground_state.R0 / amp) ** pm1_half

    t = 0.0
    theta = 0.0
    prev_raw = math.atan2(st.psi[st.psi.size // 2].imag,
                          st.psi[st.psi.size // 2].real)
    status = "completed"
    pre_targets = sorted(config.snapshot_pre_L, reverse=True)
    post_targets = sorted(config.snapshot_post_L)
    pre_idx = post_idx = 0
    best_amp = axis0
    peak_field = None
    declining = False

    plan = _PLANS[config.scheme]
    mult = None
    mult_dt = None

    def snap(label, milestone):
        snapshots.append(RadialField(
            t=t, x_grid=st.x.copy(), psi=st.psi.copy(), level=st.level,
            meta={"label": label, "milestone": milestone, "L": L_norm,
                  "config_hash": cfg_hash}))

    amp = axis0
    L_norm = 1.0
    rec.record(st, t, L_norm, theta, config.dt0)

    max_steps = 20_000_000
    for step_count in range(1, max_steps + 1):
        if t >= config.t_end:
            break
        amp = abs(st.psi[st.psi.size // 2])
        if not np.isfinite(amp):
            raise NumericalFailure(f"non-finite on-axis value at t={t}")
        if amp == 0.0:
            raise NumericalFailure(f"vanishing on-axis amplitude at t={t}")
        L_norm = width_of(amp)
        if 1.0 / L_norm >= config.focus_stop:
            status = "focus_stop"
            break

        # keep >= c_grid points across the physical core width
        L_core = core_width_of(amp)
        while L_core < config.c_grid * st.dx:
            if st.psi.size * 2 > config.max_points:
                flags["refinement_capped"] = True
                break
            st.psi = refine_spectral(st.psi)
            st.dx *= 0.5
            st.x = symmetric_grid(st.half_width, st.psi.size)
            st.level += 1
            mult = None

        dt_target = config.dt0 * L_norm * L_norm
        dt_target = min(dt_target, config.t_end - t)
        if mult is None or abs(dt_target / mult_dt - 1.0) > 0.01:
            mult_dt = dt_target
            mult = {c: linear_multiplier(st.psi.size, st.dx, c * mult_dt)
                    for kind, c in plan if kind == "L"}
        dt = mult_dt

        psi = st.psi
        for kind, c in plan:
            if kind == "N":
                psi = local_phase_damping_step(psi, c * dt, config.p,
                                               config.q, config.delta)
            else:
                psi = np.fft.ifft(np.fft.fft(psi) * mult[c])
        st.psi = psi
        t += dt

        raw = math.atan2(st.psi[st.psi.size // 2].imag,
                         st.psi[st.psi.size // 2].real)
        d_raw = raw - prev_raw
        if d_raw > math.pi:
            d_raw -= 2.0 * math.pi
        elif d_raw < -math.pi:
            d_raw += 2.0 * math.pi
        theta += d_raw
        prev_raw = raw
        if abs(d_raw) > 2.8:
            flags["phase_cadence"] = True

        if step_count % config.sample_stride == 0 or t >= config.t_end:
            amp = abs(st.psi[st.psi.size // 2])
            if not np.isfinite(amp):
                raise NumericalFailure(f"non-finite on-axis value at t={t}")
            L_norm = width_of(amp)
            rec.record(st, t, L_norm, theta, dt)

            # snapshot bookkeeping
            if amp > best_amp:
                best_amp = amp
                if config.snapshot_at_peak:
                    peak_field = RadialField(
                        t=t, x_grid=st.x.copy(), psi=st.psi.copy(),
                        level=st.level,
                        meta={"label": "peak", "L": L_norm,
                              "config_hash": cfg_hash})
            elif amp < 0.95 * best_amp:
                declining = True
            while pre_idx < len(pre_targets) and not declining \
                    and L_norm <= pre_targets[pre_idx]:
                snap("pre", pre_targets[pre_idx])
                pre_idx += 1
            while post_idx < len(post_targets) and declining \
                    and L_norm >= post_targets[post_idx]:
                snap("post", post_targets[post_idx])
                post_idx += 1

            # boundary decay monitor; expand ahead of contamination
            guard = config.boundary_guard
            sup = float(np.abs(st.psi).max())
            k = max(1, int(st.psi.size * 0.03))
            edge = max(np.abs(st.psi[:k]).max(), np.abs(st.psi[-k:]).max())
            if edge > 0.1 * guard * sup:
                if config.auto_expand and st.psi.size * 2 <= config.max_points:
                    psi2 = np.zeros(2 * st.psi.size, dtype=complex)
                    psi2[st.psi.size // 2: st.psi.size // 2 + st.psi.size] = st.psi
                    st.psi = psi2
                    st.half_width *= 2.0
                    st.x = symmetric_grid(st.half_width, st.psi.size)
                    mult = None
                    flags["expanded_to"] = st.half_width
                elif edge > guard * sup:
                    flags["boundary_contamination"] = True
                    status = "contaminated"
                    break
            elif config.allow_crop:
                half = st.psi.size // 4
                outer = max(np.abs(st.psi[:half]).max(),
                            np.abs(st.psi[-half:]).max())
                if outer < 1e-10 * sup and st.half_width / 2 > 50.0 * L_core \
                        and st.psi.size >= 512:
                    st.psi = st.psi[half:-half].copy()
                    st.half_width *= 0.5
                    st.x = symmetric_grid(st.half_width, st.psi.size)
                    mult = None
                    flags["cropped_to"] = st.half_width
    else:
        status = "max_steps"

    if len(rec.rows["t"]) == 0 or rec.rows["t"][-1] != t:
        amp = abs(st.psi[st.psi.size // 2])
        rec.record(st, t, width_of(amp), theta, config.dt0)
    if peak_field is not None:
        snapshots.append(peak_field)

    diag = rec.series(cfg_hash, status, flags)
    return diag, snapshots
