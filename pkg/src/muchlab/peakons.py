"""Peakon solutions u = sum_i p_i g(x - q_i) and their particle dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import grid as G
from .errors import CollisionError, NoRealPeakonError
from .model import ModelParams
from .timestepper import StepControl, doubling_step, step_factor

COLLISION_TOL = 1e-9

VARIANTS = ("reconciled", "eq44", "printed")


@dataclass(frozen=True)
class AmplitudeSolution:
    roots: tuple[float, ...]
    degenerate: bool = False


def speed_for_amplitude(a: float, params: ModelParams) -> float:
    return 25.0 / 12.0 * params.k1 * a * a + 13.0 / 12.0 * params.k2 * a


def amplitude_for_speed(c: float, params: ModelParams) -> AmplitudeSolution:
    """Real amplitudes of the peakon a*g(x - c t) travelling at speed ``c``.

    Roots of (25/12) k1 a^2 + (13/12) k2 a - c = 0, ordered descending.
    """
    k1, k2 = params.k1, params.k2
    if k1 == 0:
        if k2 == 0:
            raise ValueError("k1 and k2 cannot both vanish")
        return AmplitudeSolution((12.0 * c / (13.0 * k2),))
    qa, qb = 25.0 * k1, 13.0 * k2
    qc = -12.0 * c
    disc = qb * qb - 4.0 * qa * qc
    if abs(disc) <= 1e-12 * (qb * qb + abs(4.0 * qa * qc)):
        return AmplitudeSolution((-qb / (2.0 * qa),), degenerate=True)
    if disc < 0:
        raise NoRealPeakonError(
            f"no real peakon for c={c}: need c >= -169 k2^2 / (1200 k1) = {-169 * k2 * k2 / (1200 * k1)}")
    # cancellation-free form of the quadratic formula
    s = -0.5 * (qb + math.copysign(math.sqrt(disc), qb if qb else 1.0))
    r1 = s / qa
    r2 = qc / s if s != 0 else -r1
    # with k1 vanishingly small the far root overflows; it is not a peakon
    return AmplitudeSolution(tuple(sorted((r for r in (r1, r2) if math.isfinite(r)), reverse=True)))


@dataclass
class PeakonSystem:
    """Amplitudes ``p`` and positions ``q``; ``ids`` tracks original labels."""

    p: np.ndarray
    q: np.ndarray
    ids: np.ndarray = field(default=None)

    def __post_init__(self):
        self.p = np.atleast_1d(np.asarray(self.p, dtype=float))
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if self.p.shape != self.q.shape or self.p.ndim != 1:
            raise ValueError("p and q must be 1-D arrays of equal length")
        if self.ids is None:
            self.ids = np.arange(self.p.size)
        self.ids = np.asarray(self.ids, dtype=int)

    @property
    def n_peaks(self) -> int:
        return self.p.size

    def sorted(self) -> "PeakonSystem":
        """Positions reduced to [0, 1) in increasing order, labels carried along."""
        q = self.q % 1.0
        order = np.argsort(q, kind="stable")
        return PeakonSystem(self.p[order], q[order], self.ids[order])


def sample_field(sys: PeakonSystem, grid: G.PeriodicGrid | int) -> np.ndarray:
    """u = sum_i p_i g(x - q_i) at the nodes of ``grid`` (a grid or its size)."""
    grid = grid if isinstance(grid, G.PeriodicGrid) else G.PeriodicGrid(grid)
    x = grid.nodes
    u = np.zeros(grid.n)
    for pi, qi in zip(sys.p, sys.q):
        u += pi * G.green_g(x - qi)
    return u


def min_gap(q: np.ndarray) -> float:
    if q.size < 2:
        return math.inf
    s = np.sort(q % 1.0)
    gaps = np.diff(np.append(s, s[0] + 1.0))
    return float(gaps.min())


def cyclic_gaps(q: np.ndarray) -> np.ndarray:
    s = np.sort(q % 1.0)
    return np.diff(np.append(s, s[0] + 1.0)) if q.size > 1 else np.array([1.0])


def _k1_reconciled(p: np.ndarray, d: np.ndarray) -> np.ndarray:
    # d[i, j] = frac(q_i - q_j)
    n = p.size
    out = 25.0 / 12.0 * p * p
    for i in range(n):
        others = np.arange(n) != i
        po, do = p[others], d[i, others]
        out[i] += p[i] * np.sum(po * ((do - 0.5) ** 2 + 49.0 / 12.0))
        out[i] += 23.0 / 12.0 * po.sum() ** 2
        diff = do[:, None] - do[None, :]
        out[i] += 0.5 * np.sum(np.outer(po, po) * diff * diff)
    return out


def _lam(i: int, j: int) -> float:
    return 1.0 if i < j else -1.0


def _eps(j: int, k: int) -> float:
    return 1.0 if k - j >= 2 else 0.0


def _k1_literal(p: np.ndarray, q: np.ndarray, pair_coef: float, sign: float) -> np.ndarray:
    # q sorted in [0, 1); index-based lambda/epsilon conventions
    n = p.size
    out = np.empty(n)
    for i in range(n):
        rest = [j for j in range(n) if j != i]
        pairs = sum((p[j] + p[k]) ** 2 for j in rest for k in rest)
        first = (pair_coef * pairs + 25.0 * p[i] ** 2) / 12.0
        second = p[i] * sum(p[j] * ((q[i] - q[j] + 0.5 * _lam(i, j)) ** 2 + 49.0 / 12.0) for j in rest)
        third = sum(p[j] * p[k] * (q[j] - q[k] + _eps(j, k)) ** 2
                    for j in rest for k in rest if j < k)
        out[i] = first + sign * (second + third)
    return out


def multipeakon_rhs(sys: PeakonSystem, params: ModelParams,
                    variant: str = "reconciled") -> tuple[np.ndarray, np.ndarray]:
    """(dp/dt, dq/dt) of the N-peakon system, in the order of ``sys``.

    ``variant`` selects the position equation:

    * ``"reconciled"`` (default): the velocity of peak i is
      ``k1 (2 mu u - <u_x^2>) + k2 u`` at q_i, with ``<u_x^2>`` the average
      of u_x^2 across the jump of u_x. Written out it reproduces the
      single-peakon speed and the mu-CH system.
    * ``"eq44"``: the published modified mu-CH bracket with unit
      coefficient on the (p_j + p_k)^2 sum.
    * ``"printed"``: the published combined system verbatim, including
      its sign pattern and the j = i term of the amplitude equation.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    n = sys.n_peaks
    if n == 0:
        return np.zeros(0), np.zeros(0)
    if min_gap(sys.q) < COLLISION_TOL:
        raise CollisionError(f"peakon positions closer than {COLLISION_TOL}")
    k1, k2 = params.k1, params.k2
    s = sys.sorted()
    order = np.argsort(sys.q % 1.0, kind="stable")
    p, q = s.p, s.q
    d = (q[:, None] - q[None, :]) % 1.0

    if variant == "printed":
        raw = q[:, None] - q[None, :]
        dp = -k2 * p * ((raw - 0.5) @ p)
        vk2 = (0.5 * raw ** 2 - 0.5 * np.abs(raw) + 13.0 / 12.0) @ p
        vk1 = _k1_literal(p, q, 23.0, -1.0)
    else:
        dp = -k2 * p * (G.green_gx(d) @ p)
        vk2 = G.green_g(d) @ p
        vk1 = _k1_reconciled(p, d) if variant == "reconciled" else _k1_literal(p, q, 1.0, 1.0)
    dq = k1 * vk1 + k2 * vk2

    out_p, out_q = np.empty(n), np.empty(n)
    out_p[order], out_q[order] = dp, dq
    return out_p, out_q


def two_peakon_closed_form(a: float, a1: float, b: float, t0: float, c1: float, t: float,
                           params: ModelParams) -> PeakonSystem:
    """Explicit two-peakon solution with logistic amplitude exchange."""
    if not b > 0:
        raise ValueError("b must be positive")
    k1, k2 = params.k1, params.k2
    s = b * (t - t0)
    if s >= 0:
        p2 = a * float(expit(-s))
        p1 = a - p2
    else:
        p1 = a * float(expit(s))
        p2 = a - p1
    log1pe = float(np.logaddexp(0.0, s))
    q1 = (-(k1 * a * a / b) * (1.0 / 12.0 + (0.5 - a1) ** 2) * float(expit(-s))
          + a / 12.0 * (23.0 * k1 * a + 6.0 * a1 * (a1 - 1.0) * k2 + 13.0 * k2) * (t - t0)
          + a / (6.0 * b) * (k1 * a - 3.0 * a1 * (a1 - 1.0) * k2) * log1pe
          + c1)
    q2 = q1 + a
    return PeakonSystem(np.array([p1, p2]), np.array([q1, q2]) % 1.0)


@dataclass
class PeakonTrajectory:
    t: np.ndarray
    p: np.ndarray  # (samples, N)
    q: np.ndarray  # unwrapped positions, (samples, N)
    sum_p: np.ndarray
    gaps: np.ndarray  # cyclic gaps between neighbours, (samples, N)
    n_accepted: int = 0

    def system(self, i: int = -1) -> PeakonSystem:
        return PeakonSystem(self.p[i], self.q[i] % 1.0)


def integrate_peakons(sys0: PeakonSystem, t_end: float, params: ModelParams,
                      control: StepControl | None = None, t0: float = 0.0,
                      variant: str = "reconciled", sample_times=None) -> PeakonTrajectory:
    """Adaptive RK4 (step doubling) on the particle system.

    Positions are integrated unwrapped so the trajectory is continuous;
    they are reduced modulo 1 only inside the right-hand side. With
    ``sample_times`` the integrator lands exactly on each requested time.
    """
    control = control or StepControl()
    n = sys0.n_peaks
    y = np.concatenate([sys0.p, sys0.q]).astype(float)

    def f(t, y):
        dp, dq = multipeakon_rhs(PeakonSystem(y[:n], y[n:]), params, variant)
        return np.concatenate([dp, dq])

    stops = [t_end] if sample_times is None else sorted(set(float(s) for s in sample_times) | {t_end})
    stops = [s for s in stops if s > t0]
    times, ys = [t0], [y.copy()]
    t, dt, n_acc = t0, control.dt_init, 0
    if n:
        f(t, y)
    for stop in stops:
        while t < stop:
            h = min(dt, control.dt_max)
            last = h >= stop - t
            if last:
                h = stop - t
            half, err = doubling_step(f, t, y, h)
            scale = control.abs_tol + control.rel_tol * float(np.max(np.abs(half), initial=0.0))
            factor = step_factor(err, scale)
            if err <= scale:
                t = stop if last else t + h
                y = half
                n_acc += 1
                if n > 1 and min_gap(y[n:]) < COLLISION_TOL:
                    raise CollisionError(f"peakons collided near t={t}")
                if sample_times is None or last:
                    times.append(t)
                    ys.append(y.copy())
                dt = h * factor if not last else max(dt, h * factor)
            else:
                dt = h * factor
                if dt < control.dt_min:
                    raise CollisionError(f"step size underflow at t={t}; peakons likely colliding")
    arr = np.array(ys).reshape(len(ys), 2 * n)
    p, q = arr[:, :n], arr[:, n:]
    gaps = np.array([cyclic_gaps(row) for row in q]) if n else np.zeros((len(ys), 0))
    return PeakonTrajectory(np.array(times), p, q, p.sum(axis=1), gaps, n_acc)
