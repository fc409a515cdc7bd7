"""The generalized mu-CH equation in its nonlocal u-form.

    u_t = -k1 [ (2 mu u - u_x^2/3) u_x + d_x A^{-1}(2 mu^2 u + mu u_x^2) + mu(u_x^3)/3 ]
          -k2 [ u u_x + A^{-1} d_x (2 mu u + u_x^2/2) ]
          -gamma A^{-1} u_x

with ``mu = mean(u)`` and ``A = mu - d_x^2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import grid as G
from .errors import BlowupSuspectedError, InvalidFieldError


@dataclass(frozen=True)
class ModelParams:
    k1: float = 1.0
    k2: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("k1", "k2", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class StateU:
    t: float
    u: np.ndarray


@dataclass(frozen=True)
class DiagnosticsSample:
    t: float
    mu0: float
    mu1sq: float
    H1: float
    H2_printed: float
    H2_k1scaled: float
    min_ux: float
    max_m: float
    min_m: float
    min_Gamma: float
    # infima of the two pieces of Gamma, for the split breaking criterion
    min_k1_mux: float = 0.0
    min_k2_ux: float = 0.0
    # k1-scaled H2 with mu*u^2 in the k2 integral; the combination the flow conserves
    H2_conserved: float = 0.0

    @property
    def sup_m(self) -> float:
        return max(abs(self.max_m), abs(self.min_m))

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def momentum(u) -> np.ndarray:
    """m = mean(u) - u_xx."""
    return G.apply_A(u)


def rhs_u(u, params: ModelParams, t: float | None = None) -> np.ndarray:
    """Time derivative u_t of the u-form, with de-aliased products."""
    u = G.check_field(u)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            out = _rhs(u, params)
    except InvalidFieldError:
        # an intermediate product overflowed
        out = None
    if out is None or not np.all(np.isfinite(out)):
        raise BlowupSuspectedError(f"non-finite right-hand side at t={t}", t=t)
    return out


def _rhs(u: np.ndarray, params: ModelParams) -> np.ndarray:
    k1, k2, gamma = params.k1, params.k2, params.gamma
    mu = float(np.mean(u))
    ux = G.deriv(u, 1)
    ux2 = ux * ux
    out = np.zeros_like(u)
    if k1:
        local = G.dealias((2.0 * mu * u - ux2 / 3.0) * ux)
        nonlocal_ = G.deriv(G.apply_Ainv(G.dealias(2.0 * mu * mu * u + mu * ux2)), 1)
        cubic_mean = float(np.mean(ux2 * ux)) / 3.0
        out -= k1 * (local + nonlocal_ + cubic_mean)
    if k2:
        local = G.dealias(u * ux)
        nonlocal_ = G.apply_Ainv(G.deriv(G.dealias(2.0 * mu * u + 0.5 * ux2), 1))
        out -= k2 * (local + nonlocal_)
    if gamma:
        out -= gamma * G.apply_Ainv(ux)
    return out


def breaking_fields(u, params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (M, P, Gamma) = (m u_x, u_x, (k1 m + k2) u_x)."""
    u = G.check_field(u)
    m = momentum(u)
    ux = G.deriv(u, 1)
    return m * ux, ux, (params.k1 * m + params.k2) * ux


def gamma_field(u, params: ModelParams) -> np.ndarray:
    return breaking_fields(u, params)[2]


def hamiltonians(u, k1: float, k2: float) -> tuple[float, float, float, float]:
    """H1 and three readings of H2.

    Returns ``(H1, H2_printed, H2_k1scaled, H2_conserved)``:

    * printed: Q + k2 * int(mu u + u u_x^2 / 2)
    * k1scaled: k1 Q + k2 * int(mu u + u u_x^2 / 2)
    * conserved: k1 Q + k2 * int(mu u^2 + u u_x^2 / 2)

    with Q = int(mu^2 u^2 + mu u u_x^2 - u_x^4 / 12). Only the last is an
    invariant of the flow when k2 != 0.
    """
    u = G.check_field(u)
    mu = float(np.mean(u))
    ux = G.deriv(u, 1)
    ux2 = ux * ux
    m = momentum(u)
    h1 = 0.5 * float(np.mean(m * u))
    quartic = float(np.mean(mu * mu * u * u + mu * u * ux2 - ux2 * ux2 / 12.0))
    quadratic = float(np.mean(mu * u + 0.5 * u * ux2))
    mu_ch = float(np.mean(mu * u * u + 0.5 * u * ux2))
    return h1, quartic + k2 * quadratic, k1 * quartic + k2 * quadratic, k1 * quartic + k2 * mu_ch


def conserved(u, params: ModelParams, t: float = 0.0) -> DiagnosticsSample:
    """Conserved functionals and breaking indicators of one snapshot."""
    u = G.check_field(u)
    ux = G.deriv(u, 1)
    m = momentum(u)
    h1, h2p, h2s, h2c = hamiltonians(u, params.k1, params.k2)
    k1_mux = params.k1 * m * ux
    k2_ux = params.k2 * ux
    return DiagnosticsSample(
        t=float(t),
        mu0=float(np.mean(u)),
        mu1sq=float(np.mean(ux * ux)),
        H1=h1,
        H2_printed=h2p,
        H2_k1scaled=h2s,
        min_ux=float(ux.min()),
        max_m=float(m.max()),
        min_m=float(m.min()),
        min_Gamma=float((k1_mux + k2_ux).min()),
        min_k1_mux=float(k1_mux.min()),
        min_k2_ux=float(k2_ux.min()),
        H2_conserved=h2c,
    )


def constant_field(n: int, value: float) -> np.ndarray:
    if not math.isfinite(value):
        raise InvalidFieldError("constant value must be finite")
    return np.full(G.PeriodicGrid(n).n, float(value))
