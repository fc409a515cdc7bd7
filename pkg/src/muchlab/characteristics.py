"""Lagrangian flow q(t, x0) of the breaking indicator and its exact mu0 = 0 laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import grid as G
from .errors import BlowupTimeExceededError
from .model import ModelParams
from .timestepper import REACHED_T_END, RunResult


def _point_values(fh: np.ndarray, x: float) -> tuple[float, float, float]:
    """u, u_x, u_xx of the trigonometric interpolant with rfft/n coefficients ``fh``."""
    n = 2 * (fh.size - 1)
    k = np.arange(1, fh.size - 1)
    e = np.exp(2j * np.pi * k * x)
    c = fh[1:-1] * e
    nyq = fh[-1].real * math.cos(math.pi * n * x)
    u = fh[0].real + 2.0 * c.sum().real + nyq
    ux = 2.0 * (2j * np.pi * k * c).sum().real
    uxx = 2.0 * (-(2.0 * np.pi * k) ** 2 * c).sum().real - (math.pi * n) ** 2 * nyq
    return float(u), float(ux), float(uxx)


def flow_speed(u, params: ModelParams, x) -> float | np.ndarray:
    """dq/dt = k1 (2 mu0 u - u_x^2) + k2 u, evaluated off-grid by trigonometric interpolation."""
    u = G.check_field(u)
    mu0 = float(np.mean(u))
    uv = G.interpolate(u, x)
    uxv = G.interpolate(G.deriv(u, 1), x)
    return params.k1 * (2.0 * mu0 * uv - uxv * uxv) + params.k2 * uv


@dataclass
class CharTrace:
    x0: float
    t: np.ndarray
    q: np.ndarray  # unwrapped
    qx: np.ndarray
    m: np.ndarray
    ux: np.ndarray
    Gamma: np.ndarray
    residual: np.ndarray  # Lagrangian momentum residual R(t)
    truncated: bool = False


def trace_characteristic(run: RunResult, x0: float, params: ModelParams | None = None) -> CharTrace:
    """Replay the stored snapshots of ``run`` along the characteristic from ``x0``.

    The position is advanced with RK4 over each snapshot interval, using
    states interpolated linearly in time; the Jacobian and momentum
    exponents are accumulated with the trapezoid rule.
    """
    params = params or run.params
    k1, k2 = params.k1, params.k2
    snaps = run.snapshots
    if len(snaps) < 1:
        raise ValueError("run has no stored snapshots")
    truncated = False
    if run.termination.kind != REACHED_T_END and len(snaps) > 1:
        snaps = snaps[:-1]
        truncated = True
    spectra = [np.fft.rfft(s.u) / s.u.size for s in snaps]

    def local(fh, x):
        uv, uxv, uxxv = _point_values(fh, x)
        mu0 = fh[0].real
        m = mu0 - uxxv
        speed = k1 * (2.0 * mu0 * uv - uxv * uxv) + k2 * uv
        return speed, m, uxv

    x = float(x0) % 1.0
    _, m0, ux0 = local(spectra[0], x)
    ts, qs, ms, uxs = [snaps[0].t], [x], [m0], [ux0]
    for i in range(len(snaps) - 1):
        h = snaps[i + 1].t - snaps[i].t
        fa, fb = spectra[i], spectra[i + 1]
        fm = 0.5 * (fa + fb)
        q = qs[-1]
        s1 = local(fa, q)[0]
        s2 = local(fm, q + 0.5 * h * s1)[0]
        s3 = local(fm, q + 0.5 * h * s2)[0]
        s4 = local(fb, q + h * s3)[0]
        qn = q + h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
        _, mn, uxn = local(fb, qn)
        if not all(math.isfinite(v) for v in (qn, mn, uxn)):
            truncated = True
            break
        ts.append(snaps[i + 1].t)
        qs.append(qn)
        ms.append(mn)
        uxs.append(uxn)

    t = np.array(ts)
    m = np.array(ms)
    ux = np.array(uxs)
    gamma = (k1 * m + k2) * ux
    jac_rate = 2.0 * k1 * m * ux + k2 * ux
    mom_rate = k1 * m * ux + k2 * ux
    dt = np.diff(t)
    jac_int = np.concatenate([[0.0], np.cumsum(0.5 * dt * (jac_rate[1:] + jac_rate[:-1]))])
    mom_int = np.concatenate([[0.0], np.cumsum(0.5 * dt * (mom_rate[1:] + mom_rate[:-1]))])
    residual = m * np.exp(2.0 * mom_int) - m[0]
    return CharTrace(float(x0), t, np.array(qs), np.exp(jac_int), m, ux, gamma, residual, truncated)


# ---------------------------------------------------------------------------
# closed forms for mu0 = 0


def _omega(mu1: float, k2: float) -> float:
    if not mu1 > 0:
        raise ValueError("mu1 must be positive")
    if k2 == 0:
        raise ValueError("k2 must be nonzero")
    return 0.5 * mu1 * k2


def ux_pole_time(u0x: float, mu1: float, k2: float) -> float:
    """First t > 0 at which the mu0 = 0 slope law diverges."""
    om = _omega(mu1, k2)
    return (0.5 * math.pi + math.atan(u0x / mu1)) / om


def exact_ux_mu0zero(t: float, u0x: float, mu1: float, k2: float) -> float:
    """u_x along the characteristic from x0 when mean(u) = 0."""
    om = _omega(mu1, k2)
    if t >= ux_pole_time(u0x, mu1, k2):
        raise BlowupTimeExceededError(f"t={t} is at or beyond the slope blow-up time")
    tn = math.tan(om * t)
    return mu1 * (u0x - mu1 * tn) / (mu1 + u0x * tn)


def _envelope(t: float, u0x: float, mu1: float, om: float) -> float:
    return math.cos(om * t) + (u0x / mu1) * math.sin(om * t)


def uxx_pole_time(u0x: float, u0xx: float, mu1: float, k1: float, k2: float) -> float:
    """First t > 0 where the curvature law's denominator vanishes (inf if none before the slope pole)."""
    om = _omega(mu1, k2)
    t_ux = ux_pole_time(u0x, mu1, k2)
    big_u = k1 * u0xx
    if big_u == k2 or big_u == 0.0:
        return t_ux
    rho = big_u / (big_u - k2)
    if rho <= 0:
        return t_ux
    r = rho ** 0.25
    beta = u0x / mu1
    amp = math.hypot(1.0, beta)
    if r > amp:
        return t_ux
    phi = math.atan(beta)
    spread = math.acos(r / amp)
    cands = [(phi - spread) / om, (phi + spread) / om]
    cands = [c for c in cands if c > 0]
    return min(cands + [t_ux])


def exact_uxx_mu0zero(t: float, u0x: float, u0xx: float, mu1: float, k1: float, k2: float) -> float:
    """u_xx along the characteristic from x0 when mean(u) = 0."""
    om = _omega(mu1, k2)
    if k1 == 0:
        raise ValueError("k1 must be nonzero")
    if t >= uxx_pole_time(u0x, u0xx, mu1, k1, k2):
        raise BlowupTimeExceededError(f"t={t} is at or beyond the curvature blow-up time")
    big_u0 = k1 * u0xx
    if big_u0 == 0.0:
        return 0.0
    y = _envelope(t, u0x, mu1, om)
    denom = big_u0 - (big_u0 - k2) * y ** 4
    return k2 * big_u0 / denom / k1
