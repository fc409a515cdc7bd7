"""Wave-breaking constants, hypothesis checkers and blow-up time bounds.

Every checker returns a :class:`BlowupAssessment`. When the hypotheses
fail, ``reasons`` names each failed condition and no bound is reported.
The formula evaluators (``*_bound``, ``*_tstar_from``) take plain scalars
so they can be exercised with injected constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.optimize import minimize_scalar

from . import grid as G
from .model import DiagnosticsSample, ModelParams, momentum

SQRT3 = math.sqrt(3.0)
MU0_ZERO_TOL = 1e-12
CASE1_TOL = 1e-10
# slopes within rounding of zero do not count as negative
SLOPE_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class BreakingConstants:
    mu0: float
    mu1: float
    C1: float
    C2: float
    C2_tilde_case3: float
    C2_tilde_case4: float
    K: float | None  # None when the radicand is negative
    K_radicand: float

    def as_dict(self) -> dict:
        return {
            "mu0": self.mu0, "mu1": self.mu1, "C1": self.C1, "C2": self.C2,
            "C2_tilde_case3": self.C2_tilde_case3, "C2_tilde_case4": self.C2_tilde_case4,
            "K": self.K, "K_radicand": self.K_radicand,
        }


@dataclass
class BlowupAssessment:
    theorem: str
    hypotheses_met: bool
    reasons: list[str] = field(default_factory=list)
    t_star: float | None = None
    x0: float | None = None
    rate_constant: float | None = None
    case: str | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem, "hypotheses_met": self.hypotheses_met,
            "reasons": list(self.reasons), "t_star": self.t_star, "x0": self.x0,
            "rate_constant": self.rate_constant, "case": self.case,
            "details": dict(self.details),
        }


def _require_no_dispersion(params: ModelParams):
    if params.gamma != 0.0:
        raise ValueError("breaking constants are defined for gamma = 0 only")


def constants_from(mu0: float, mu1: float, k1: float, k2: float) -> BreakingConstants:
    """All breaking constants from the two conserved norms."""
    c1 = 1.5 * k2 - k1 * mu0
    c2 = k1 * mu0 * mu1 * (SQRT3 / 3.0 * mu0 - mu1) + k2 * mu1 * (SQRT3 / 3.0 * mu0 - 0.5 * mu1)
    c3 = ((3.0 * k2 - 2.0 * mu0 * k1) * mu0 ** 2 + 5.0 * SQRT3 / 3.0 * k2 * mu0 * mu1
          - (9.0 * k2 + 26.0 * k1 * mu0) * mu1 ** 2 / 12.0)
    c4 = (3.0 * k2 - 2.0 * mu0 * k1) * (mu0 + SQRT3 / 6.0 * mu1) ** 2
    num = 2.0 * k1 * mu0 * mu1 * (SQRT3 * mu0 - 3.0 * mu1) + k2 * mu1 * (2.0 * SQRT3 * mu0 - 3.0 * mu1)
    den = 3.0 * k2 + 6.0 * mu0 * k1
    if den == 0.0:
        rad = math.inf if num > 0 else (-math.inf if num < 0 else math.nan)
    else:
        rad = num / den
    k = math.sqrt(rad) if rad >= 0.0 and math.isfinite(rad) else None
    return BreakingConstants(mu0, mu1, c1, c2, c3, c4, k, rad)


def breaking_constants(u0, params: ModelParams) -> BreakingConstants:
    """mu0, mu1 by quadrature and the derived constants C1, C2, the C2 substitutes and K."""
    _require_no_dispersion(params)
    u0 = G.check_field(u0)
    ux = G.deriv(u0, 1)
    mu0 = float(np.mean(u0))
    mu1 = math.sqrt(float(np.mean(ux * ux)))
    return constants_from(mu0, mu1, params.k1, params.k2)


def _positive_k(params: ModelParams) -> list[str]:
    reasons = []
    if not params.k1 > 0:
        reasons.append("k1 > 0 required")
    if not params.k2 > 0:
        reasons.append("k2 > 0 required")
    return reasons


def _point(u0: np.ndarray, x0: float) -> tuple[float, float]:
    """(u0_x, m0) at x0 via the trigonometric interpolant."""
    return float(G.interpolate(G.deriv(u0, 1), x0)), float(G.interpolate(momentum(u0), x0))


# ---------------------------------------------------------------------------
# mean-zero data


def thm71_tstar_from(u0x: float, mu1: float, k2: float) -> float:
    return -2.0 * math.atan(mu1 / u0x) / (mu1 * k2)


def thm71_tstar(u0, params: ModelParams, x0: float, overrides: dict | None = None) -> BlowupAssessment:
    """Breaking time for mean-zero data from a point of negative slope."""
    _require_no_dispersion(params)
    u0 = G.check_field(u0)
    const = breaking_constants(u0, params)
    u0x, m0 = _point(u0, x0)
    vals = {"mu0": const.mu0, "mu1": const.mu1, "u0x": u0x}
    vals.update(overrides or {})
    reasons = _positive_k(params)
    if abs(vals["mu0"]) >= MU0_ZERO_TOL:
        reasons.append(f"mean zero required: |mu0| = {abs(vals['mu0']):.3e} >= {MU0_ZERO_TOL}")
    if not float(np.max(np.abs(u0))) > 0 or not vals["mu1"] > 0:
        reasons.append("nonzero data required")
    if not vals["u0x"] < -SLOPE_ZERO_TOL * (1.0 + float(np.max(np.abs(G.deriv(u0, 1))))):
        reasons.append(f"u0_x(x0) < 0 required, got {vals['u0x']}")
    out = BlowupAssessment("7.1", not reasons, reasons, x0=float(x0), details=vals)
    if not reasons:
        out.t_star = thm71_tstar_from(vals["u0x"], vals["mu1"], params.k2)
    return out


# ---------------------------------------------------------------------------
# positive momentum, two-case criterion


def thm72_tstar_from(u0x: float, m0: float, c2: float, k1: float, k2: float) -> tuple[str | None, float | None, dict]:
    """Case selection and bound from the pointwise data; returns (case, t*, details)."""
    b = math.sqrt(1.0 / (2.0 * k2 * c2))
    n0 = 1.0 / m0
    ntau = 2.0 * b * (k1 + k2 / m0) * u0x
    edge1 = -1.0 / (2.0 * b * k2)
    edge2 = -math.sqrt(k2 + 2.0 * k1 * m0) / (2.0 * b * math.sqrt(k2) * (k1 * m0 + k2))
    info = {"b": b, "n0": n0, "ntau0": ntau, "slope_case1": edge1, "slope_case2_edge": edge2}
    if abs(u0x - edge1) <= CASE1_TOL:
        return "1", b * math.log(k2 / (k1 * m0) + 1.0), info
    if u0x < min(edge1, edge2):
        r = k1 / k2
        rad = ntau * ntau - n0 * n0 - 2.0 * r * n0
        info["radicand"] = rad
        if not rad > 0:
            return "2", None, info
        z1 = (r - math.sqrt(rad)) / (n0 + ntau + r)
        info["z1"] = z1
        if not z1 > 1.0:
            return "2", None, info
        return "2", b * math.log(z1), info
    return None, None, info


def thm72_check(u0, params: ModelParams, x0: float, overrides: dict | None = None,
                use_remarks: bool = False) -> BlowupAssessment:
    """Two-case blow-up criterion for nonnegative momentum.

    With ``use_remarks`` the C1 > 0 cases substitute C2 by the matching
    C2_tilde constant instead of failing the C1 gate.
    """
    _require_no_dispersion(params)
    u0 = G.check_field(u0)
    const = breaking_constants(u0, params)
    u0x, m0 = _point(u0, x0)
    vals = {"C1": const.C1, "C2": const.C2, "u0x": u0x, "m0": m0,
            "min_m0": float(momentum(u0).min())}
    vals.update(overrides or {})
    reasons = _positive_k(params)
    out = BlowupAssessment("7.2", False, reasons, x0=float(x0), details=dict(vals))
    c1, c2 = vals["C1"], vals["C2"]
    if c1 <= 0 and c2 <= 0:
        out.case = "i"
        out.details["note"] = "blow-up asserted by the differential inequality; no bound available"
        reasons.append(f"case (i): C1 <= 0 and C2 = {c2} <= 0; C2 > 0 required for a bound, no t* emitted")
        return out
    if c1 > 0:
        if use_remarks:
            c2 = const.C2_tilde_case3 if c2 >= 0 else const.C2_tilde_case4
            c2 = vals.get("C2_tilde", c2)
            out.details["C2_used"] = c2
            out.details["remark_case"] = "iii" if vals["C2"] >= 0 else "iv"
        else:
            reasons.append(f"C1 <= 0 required, got {c1}")
    if not c2 > 0:
        reasons.append(f"C2 > 0 required, got {c2}")
    if vals["min_m0"] < 0:
        reasons.append(f"m0 >= 0 on the grid required, min {vals['min_m0']}")
    if not vals["m0"] > 0:
        reasons.append(f"m0(x0) > 0 required, got {vals['m0']}")
    if reasons:
        return out
    case, t_star, info = thm72_tstar_from(vals["u0x"], vals["m0"], c2, params.k1, params.k2)
    out.details.update(info)
    out.case = case
    if case is None:
        reasons.append(
            f"slope condition failed: u0_x(x0) = {vals['u0x']} is neither {info['slope_case1']} "
            f"nor below min({info['slope_case1']}, {info['slope_case2_edge']})")
    elif t_star is None:
        reasons.append("case (2) root is not a valid time (radicand <= 0 or z1 <= 1)")
    else:
        out.t_star = t_star
        out.hypotheses_met = True
    return out


# ---------------------------------------------------------------------------
# bound through the infimum of the slope


def slope_infimum(u0) -> tuple[float, float]:
    """(inf u0_x, argmin): grid minimum polished by golden-section search on the interpolant."""
    u0 = G.check_field(u0)
    ux = G.deriv(u0, 1)
    n = ux.size
    j = int(np.argmin(ux))
    h = 1.0 / n
    xj = j * h

    def f(x):
        return G.interpolate(ux, x)

    best_x, best = xj, float(ux[j])
    lo, hi = f(xj - h), f(xj + h)
    if lo > best and hi > best:
        res = minimize_scalar(f, bracket=(xj - h, xj, xj + h), method="golden",
                              options={"xtol": 1e-12})
        if res.fun < best:
            best_x, best = float(res.x) % 1.0, float(res.fun)
    return best, best_x


def thm74_bound(inf_ux: float, K: float, k1: float, k2: float, mu0: float) -> float:
    return -4.0 / ((k2 + 2.0 * k1 * mu0) * (inf_ux + math.sqrt(-K * inf_ux)))


def thm74_check(u0, params: ModelParams, overrides: dict | None = None) -> BlowupAssessment:
    """Upper bound on the breaking time from the steepest negative slope."""
    _require_no_dispersion(params)
    u0 = G.check_field(u0)
    const = breaking_constants(u0, params)
    inf_ux, x_min = slope_infimum(u0)
    vals = {"C2": const.C2, "K": const.K, "K_radicand": const.K_radicand,
            "inf_u0x": inf_ux, "min_m0": float(momentum(u0).min()), "mu0": const.mu0}
    vals.update(overrides or {})
    reasons = _positive_k(params)
    if not vals["min_m0"] > 0:
        reasons.append(f"m0 > 0 on the grid required, min {vals['min_m0']}")
    if not vals["C2"] > 0:
        reasons.append(f"C2 > 0 required, got {vals['C2']}")
    if vals["K"] is None:
        reasons.append(f"K undefined: radicand {vals['K_radicand']} < 0")
    elif not vals["inf_u0x"] < -vals["K"]:
        reasons.append(f"inf u0_x < -K required: {vals['inf_u0x']} >= {-vals['K']}")
    out = BlowupAssessment("7.4", not reasons, reasons, x0=x_min, details=vals)
    if not reasons:
        out.t_star = thm74_bound(vals["inf_u0x"], vals["K"], params.k1, params.k2, vals["mu0"])
    return out


# ---------------------------------------------------------------------------
# pointwise bound with blow-up rate


def thm75_threshold(c2: float, m0: float, k1: float, k2: float) -> float:
    return -math.sqrt(c2 * (k1 * m0 + k2)) / (k1 * m0)


def thm75_bound(u0x: float, m0: float, c2: float, k1: float, k2: float) -> float:
    d = c2 * (k1 * m0 + k2)
    lead = -k1 * m0 * u0x / d
    return lead - math.sqrt(lead * lead - 1.0 / d)


def thm75_check(u0, params: ModelParams, x0: float, overrides: dict | None = None) -> BlowupAssessment:
    """Pointwise breaking bound; the rate constant is -1/(2 k1)."""
    _require_no_dispersion(params)
    u0 = G.check_field(u0)
    const = breaking_constants(u0, params)
    u0x, m0 = _point(u0, x0)
    vals = {"C2": const.C2, "u0x": u0x, "m0": m0}
    vals.update(overrides or {})
    reasons = _positive_k(params)
    if not vals["C2"] > 0:
        reasons.append(f"C2 > 0 required, got {vals['C2']}")
    if not vals["m0"] > 0:
        reasons.append(f"m0(x0) > 0 required, got {vals['m0']}")
    if not reasons:
        edge = thm75_threshold(vals["C2"], vals["m0"], params.k1, params.k2)
        vals["slope_threshold"] = edge
        if not vals["u0x"] < edge:
            reasons.append(f"u0_x(x0) < {edge} required (strict), got {vals['u0x']}")
    out = BlowupAssessment("7.5", not reasons, reasons, x0=float(x0), details=vals)
    if not reasons:
        out.t_star = thm75_bound(vals["u0x"], vals["m0"], vals["C2"], params.k1, params.k2)
        out.rate_constant = -1.0 / (2.0 * params.k1)
    return out


def assess_all(u0, params: ModelParams, x0s: Iterable[float] = ()) -> list[BlowupAssessment]:
    """Every checker at every seed point; thm74 needs no seed."""
    out = [thm74_check(u0, params)]
    for x0 in x0s:
        out.append(thm71_tstar(u0, params, x0))
        out.append(thm72_check(u0, params, x0))
        out.append(thm75_check(u0, params, x0))
    return out


# ---------------------------------------------------------------------------
# runtime detection on a diagnostics stream


@dataclass(frozen=True)
class DetectionReport:
    gamma_crossing: float | None
    split_crossing: float | None
    m_integral_crossing: float | None
    gamma_threshold: float
    split_threshold: float
    m_budget: float

    @property
    def detected(self) -> bool:
        return any(v is not None for v in (self.gamma_crossing, self.split_crossing,
                                           self.m_integral_crossing))

    def as_dict(self) -> dict:
        return {
            "gamma_crossing": self.gamma_crossing, "split_crossing": self.split_crossing,
            "m_integral_crossing": self.m_integral_crossing,
            "gamma_threshold": self.gamma_threshold, "split_threshold": self.split_threshold,
            "m_budget": self.m_budget,
        }


def _first_drop(t: np.ndarray, v: np.ndarray, level: float) -> float | None:
    """First time v reaches ``level`` from above, linear between samples."""
    hit = np.nonzero(v <= level)[0]
    if hit.size == 0:
        return None
    i = int(hit[0])
    if i == 0 or v[i] == level:
        return float(t[i])
    t0, t1, v0, v1 = t[i - 1], t[i], v[i - 1], v[i]
    return float(t0 + (level - v0) * (t1 - t0) / (v1 - v0))


def runtime_detector(samples: Iterable[DiagnosticsSample], gamma_threshold: float = 1e3,
                     split_threshold: float | None = None, m_budget: float = 1e8) -> DetectionReport:
    """First crossings of the three breaking indicators along a time-ordered stream.

    * min Gamma below ``-gamma_threshold``
    * min(inf k1 m u_x, inf k2 u_x) below ``-split_threshold``
    * running trapezoid integral of sup|m|^2 above ``m_budget``
    """
    samples = list(samples)
    split_threshold = gamma_threshold if split_threshold is None else split_threshold
    if not samples:
        return DetectionReport(None, None, None, gamma_threshold, split_threshold, m_budget)
    t = np.array([s.t for s in samples], dtype=float)
    if np.any(np.diff(t) < 0):
        raise ValueError("diagnostics stream must be ordered in t")
    gam = np.array([s.min_Gamma for s in samples])
    split = np.array([min(s.min_k1_mux, s.min_k2_ux) for s in samples])
    msq = np.array([s.sup_m for s in samples]) ** 2
    acc = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (msq[1:] + msq[:-1]))])
    return DetectionReport(
        _first_drop(t, gam, -gamma_threshold),
        _first_drop(t, split, -split_threshold),
        _first_drop(t, -acc, -m_budget),
        gamma_threshold, split_threshold, m_budget,
    )
