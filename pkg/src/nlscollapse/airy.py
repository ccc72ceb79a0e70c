"""Airy functions on a bounded real range, and the closed-form post-collapse
slope for critically damped minimal-power collapse.

No special-function library is used: Maclaurin series near the origin,
continued leftward by high-order Taylor stepping of y'' = s y.  Both routes
are cross-checked in the test suite against an independent ODE integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .field import ValidationError

S_MIN, S_MAX = -20.0, 5.0
_SERIES_EDGE = -5.0

# gamma(1/3), gamma(2/3) beyond float64 so the series coefficients do not
# limit the Wronskian identity at the top of the range
_GAMMA_13 = np.longdouble("2.67893853470774763365569294097467764412868937795730110095")
_GAMMA_23 = np.longdouble("1.35411793942640041694528802815451378551932726605679362683")
_AI0_LD = np.longdouble(3.0) ** (np.longdouble(-2.0) / 3) / _GAMMA_23
_AIP0_LD = -(np.longdouble(3.0) ** (np.longdouble(-1.0) / 3)) / _GAMMA_13

AI0 = float(_AI0_LD)
AIP0 = float(_AIP0_LD)
BI0 = float(np.longdouble(3.0) ** np.longdouble(0.5) * _AI0_LD)
BIP0 = float(-(np.longdouble(3.0) ** np.longdouble(0.5)) * _AIP0_LD)


@dataclass(frozen=True)
class AiryPair:
    s: float
    Ai: float
    Bi: float
    Ai_prime: float
    Bi_prime: float

    def wronskian(self) -> float:
        return self.Ai * self.Bi_prime - self.Ai_prime * self.Bi


def _basis_series(s: float) -> tuple[float, float, float, float]:
    """The two entire basis solutions f, g of y'' = s y and their derivatives,
    with f(0)=1, f'(0)=0 and g(0)=0, g'(0)=1.

    Summed in extended precision: for s near the top of the range the sums
    reach ~1e3 while Ai is a ~1e-4 difference of them, so float64 roundoff
    inside f and g would leak into the Wronskian at the 1e-10 level.
    """
    ld = np.longdouble
    s = ld(s)
    u = s ** 3
    f = tf = ld(1.0)
    fp = vf = ld(0.0)
    g = tg = s
    gp = zg = ld(1.0)
    for k in range(0, 120):
        tf_next = tf * u / ((3 * k + 2) * (3 * k + 3))
        vf = 3 * (k + 1) * tf_next / s if s != 0.0 else ld(0.0)
        tg_next = tg * u / ((3 * k + 3) * (3 * k + 4))
        zg = zg * u / ((3 * k + 1) * (3 * k + 3))
        f += tf_next
        fp += vf
        g += tg_next
        gp += zg
        tf, tg = tf_next, tg_next
        if max(abs(tf), abs(tg), abs(vf), abs(zg)) < 1e-22 * max(abs(f), abs(g), 1.0):
            break
    return f, fp, g, gp


_SQRT3 = np.longdouble(3.0) ** np.longdouble(0.5)


def _pair_from_series(s: float) -> AiryPair:
    c1, c2 = _AI0_LD, -_AIP0_LD
    f, fp, g, gp = _basis_series(s)
    ai = c1 * f - c2 * g
    aip = c1 * fp - c2 * gp
    bi = _SQRT3 * (c1 * f + c2 * g)
    bip = _SQRT3 * (c1 * fp + c2 * gp)
    return AiryPair(s=s, Ai=float(ai), Bi=float(bi),
                    Ai_prime=float(aip), Bi_prime=float(bip))


def _taylor_step(s0: float, y: np.ndarray, yp: np.ndarray, h: float,
                 order: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """One Taylor step of y'' = s y for a batch of solutions (columns)."""
    c = np.zeros((order + 1, y.size))
    c[0] = y
    c[1] = yp
    for n in range(order - 1):
        prev = c[n - 1] if n >= 1 else 0.0
        c[n + 2] = (s0 * c[n] + prev) / ((n + 1) * (n + 2))
    powers = h ** np.arange(order + 1)
    ynew = powers @ c
    ypnew = (np.arange(1, order + 1) * powers[:order]) @ c[1:]
    return ynew, ypnew


def _pair_by_continuation(s: float) -> AiryPair:
    """March from the series edge to s < edge with Taylor steps of y'' = s y."""
    s0 = _SERIES_EDGE
    edge = _pair_from_series(s0)
    y = np.array([edge.Ai, edge.Bi])
    yp = np.array([edge.Ai_prime, edge.Bi_prime])
    h = -0.125
    while s0 + h > s:
        y, yp = _taylor_step(s0, y, yp, h)
        s0 += h
    y, yp = _taylor_step(s0, y, yp, s - s0)
    return AiryPair(s=s, Ai=float(y[0]), Bi=float(y[1]),
                    Ai_prime=float(yp[0]), Bi_prime=float(yp[1]))


def airy_eval(s: float) -> AiryPair:
    """Ai, Bi and derivatives at s, accurate to ~1e-12 absolute on the range."""
    s = float(s)
    if not (S_MIN <= s <= S_MAX):
        raise ValidationError(f"argument {s} outside supported range "
                              f"[{S_MIN}, {S_MAX}]")
    if s >= _SERIES_EDGE:
        return _pair_from_series(s)
    return _pair_by_continuation(s)


def _G(s: float) -> float:
    pair = airy_eval(s)
    return math.sqrt(3.0) * pair.Ai - pair.Bi


def find_s_star(tol: float = 1e-10) -> float:
    """Largest negative root of G(s) = sqrt(3) Ai(s) - Bi(s).

    G vanishes identically at s = 0 (Bi(0) = sqrt(3) Ai(0)); the root wanted
    is the first strictly negative one.
    """
    grid = np.arange(-0.05, -6.0, -0.01)
    vals = [_G(s) for s in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] * vals[i + 1] < 0.0:
            return float(brentq(_G, grid[i], grid[i + 1], xtol=tol))
    raise RuntimeError("no sign change of G found in the scan range")


def kappa_critical(tol: float = 1e-10) -> float:
    """pi [Bi(0) Ai'(s*) - Ai(0) Bi'(s*)], the defocusing/focusing slope ratio."""
    s_star = find_s_star(tol=tol)
    at0 = airy_eval(0.0)
    at_star = airy_eval(s_star)
    return math.pi * (at0.Bi * at_star.Ai_prime - at0.Ai * at_star.Bi_prime)
