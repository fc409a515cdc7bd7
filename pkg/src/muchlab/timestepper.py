"""Explicit RK4 time stepping with step-doubling error control and a blow-up guard."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import grid as G
from .errors import BlowupSuspectedError, InvalidFieldError
from .model import DiagnosticsSample, ModelParams, StateU, conserved, rhs_u

log = logging.getLogger(__name__)

REACHED_T_END = "reached_t_end"
BLOWUP_DETECTED = "blowup_detected"
DT_UNDERFLOW = "dt_underflow"
NON_FINITE = "non_finite"


@dataclass(frozen=True)
class StepControl:
    dt_init: float = 1e-3
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    dt_min: float = 1e-12
    blowup_gamma_threshold: float = 1e3
    blowup_m_threshold: float = 1e4
    sample_stride: int = 1
    # optional cap on accepted steps; keeps snapshot spacing fine for characteristic replay
    dt_max: float = math.inf

    def __post_init__(self):
        if not (self.dt_init > 0 and self.abs_tol > 0 and self.rel_tol > 0 and self.dt_min > 0):
            raise ValueError("dt_init, tolerances and dt_min must be positive")
        if self.dt_min >= self.dt_init:
            raise ValueError("dt_min must be smaller than dt_init")
        if self.blowup_gamma_threshold <= 0 or self.blowup_m_threshold <= 0:
            raise ValueError("blow-up thresholds must be positive")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ValueError("sample_stride must be a positive integer")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")


@dataclass(frozen=True)
class Termination:
    kind: str
    t: float
    guard: str | None = None

    def as_dict(self) -> dict:
        return {"kind": self.kind, "t": self.t, "guard": self.guard}


@dataclass
class RunResult:
    final: StateU
    diagnostics: list[DiagnosticsSample]
    termination: Termination
    params: ModelParams
    # (t, u) pairs at the same cadence as ``diagnostics``
    snapshots: list[StateU] = field(default_factory=list)
    n_accepted: int = 0
    n_rejected: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([d.t for d in self.diagnostics])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(d, name) for d in self.diagnostics])


def rk4(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    """Classical RK4 step for ``y' = f(t, y)``."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def doubling_step(f, t: float, y: np.ndarray, h: float) -> tuple[np.ndarray, float]:
    """Two half steps plus the local error estimate |y_half - y_full| / 15."""
    full = rk4(f, t, y, h)
    half = rk4(f, t + 0.5 * h, rk4(f, t, y, 0.5 * h), 0.5 * h)
    err = float(np.max(np.abs(half - full))) / 15.0 if y.size else 0.0
    return half, err


def step_factor(err: float, scale: float) -> float:
    """1/5-power step rescaling with safety 0.9, clipped to [0.2, 5]."""
    if not math.isfinite(err):
        return 0.2
    if err == 0.0:
        return 5.0
    return min(5.0, max(0.2, 0.9 * (scale / err) ** 0.2))


def _pde(params: ModelParams):
    return lambda t, u: rhs_u(u, params, t)


def _rk4(u: np.ndarray, dt: float, params: ModelParams, t: float) -> np.ndarray:
    return rk4(_pde(params), t, u, dt)


def step_rk4(state: StateU, dt: float, params: ModelParams) -> StateU:
    """One classical RK4 step of the u-form."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u = _rk4(G.check_field(state.u), dt, params, state.t)
    if not np.all(np.isfinite(u)):
        raise BlowupSuspectedError(f"non-finite state after step at t={state.t}", t=state.t)
    return StateU(state.t + dt, u)


def guard_tripped(sample: DiagnosticsSample, control: StepControl) -> str | None:
    if -sample.min_Gamma > control.blowup_gamma_threshold:
        return "gamma"
    if sample.sup_m > control.blowup_m_threshold:
        return "m"
    return None


def integrate(state0: StateU, t_end: float, params: ModelParams,
              control: StepControl | None = None) -> RunResult:
    """Adaptive RK4 from ``state0`` to ``t_end``.

    Each step is taken once with ``dt`` and twice with ``dt/2``; the
    difference (divided by 15) estimates the local error of the half-step
    solution, which is the one kept.
    """
    control = control or StepControl()
    if not t_end > state0.t:
        raise ValueError("t_end must exceed the initial time")
    u = G.check_field(state0.u).copy()
    t = float(state0.t)
    dt = control.dt_init
    sample = conserved(u, params, t)
    diagnostics = [sample]
    snapshots = [StateU(t, u.copy())]
    n_acc = n_rej = 0
    f = _pde(params)

    def finish(kind, guard=None):
        if diagnostics[-1].t != t:
            diagnostics.append(conserved(u, params, t))
            snapshots.append(StateU(t, u.copy()))
        term = Termination(kind, t, guard)
        log.debug("integration stopped: %s", term)
        return RunResult(StateU(t, u), diagnostics, term, params, snapshots, n_acc, n_rej)

    guard = guard_tripped(sample, control)
    if guard:
        return finish(BLOWUP_DETECTED, guard)

    while t < t_end:
        remaining = t_end - t
        h = min(dt, control.dt_max)
        last = h >= remaining
        if last:
            h = remaining
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                half, err = doubling_step(f, t, u, h)
        except (BlowupSuspectedError, InvalidFieldError):
            # an intermediate stage overflowed; treat as a failed trial step
            half, err = u, math.inf
        finite = math.isfinite(err) and bool(np.all(np.isfinite(half)))
        scale = control.abs_tol + control.rel_tol * float(np.max(np.abs(half))) if finite else 0.0
        factor = step_factor(err, scale) if finite else 0.2
        accepted = finite and err <= scale
        if accepted:
            n_acc += 1
            t = t_end if last else t + h
            u = half
            sample = conserved(u, params, t)
            if n_acc % control.sample_stride == 0 or t == t_end:
                diagnostics.append(sample)
                snapshots.append(StateU(t, u.copy()))
            guard = guard_tripped(sample, control)
            if guard:
                return finish(BLOWUP_DETECTED, guard)
            dt = h * factor if not last else max(dt, h * factor)
        else:
            n_rej += 1
            dt = h * factor
            if dt < control.dt_min:
                return finish(DT_UNDERFLOW if finite else NON_FINITE)
    return finish(REACHED_T_END)
