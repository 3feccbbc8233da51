"""Abel-type time integrals: the memory integral M(t), its derivative, and
the half-power convolution, all via the s = t - u^2 endpoint substitution.

The substitution turns every (t-s)^{-1/2}, (t-s)^{-3/2} (with vanishing
numerator) and (t-s)^{1/2} kernel into a smooth integrand on [0, sqrt(t)],
so plain composite Gauss-Legendre panels converge spectrally as long as the
panels are split at the profile's knots. Every evaluation is self-checked by
panel doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParamsError, ToleranceError
from .profiles import TemporalProfile

__all__ = [
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "abel_half",
    "m_of_t",
    "m_prime",
    "t0_star",
    "m_curve",
    "MCurve",
    "gauss_panels",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel counts and tolerances for the singular time quadratures."""

    panels: int = 8
    gauss_order: int = 16
    substitution: str = "sqrt-endpoint"
    rel_tol: float = 1e-8
    abs_tol: float = 1e-14
    check: bool = True

    def __post_init__(self):
        if self.panels < 1 or self.gauss_order < 2:
            raise InvalidParamsError("need panels >= 1 and gauss_order >= 2")
        if self.substitution not in ("sqrt-endpoint", "none"):
            raise InvalidParamsError(f"unknown substitution {self.substitution!r}")


DEFAULT_SPEC = QuadratureSpec()


def gauss_panels(edges: np.ndarray, order: int):
    """Composite Gauss-Legendre nodes/weights over consecutive [edge, edge]."""

    x, wt = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    nodes = (mid + half * x[None, :]).ravel()
    weights = (half * wt[None, :]).ravel()
    return nodes, weights


def _u_edges(t: float, panels: int, breakpoints: Sequence[float]) -> np.ndarray:
    """Panel edges in u = sqrt(t - s), split at the profile knots."""

    base = np.linspace(0.0, math.sqrt(t), panels + 1)
    knots = [math.sqrt(t - s) for s in breakpoints if 0.0 < s < t]
    return np.unique(np.concatenate([base, knots]))


def _self_checked(evaluate, spec: QuadratureSpec, label: str) -> float:
    coarse = evaluate(spec.panels)
    if not spec.check:
        return coarse
    fine = evaluate(2 * spec.panels)
    if abs(fine - coarse) > max(spec.abs_tol, spec.rel_tol * max(1.0, abs(fine))):
        raise ToleranceError(
            f"tolerance-not-met in {label}: panels {spec.panels}->{2*spec.panels} "
            f"moved the value by {abs(fine - coarse):.3e}"
        )
    return fine


def _as_callable(h):
    if isinstance(h, TemporalProfile):
        return h.value, h.breakpoints
    return h, getattr(h, "breakpoints", ())


def abel_half(h, t: float, spec: QuadratureSpec = DEFAULT_SPEC, breakpoints: Sequence[float] = ()) -> float:
    """Integral of h(s) (t-s)^{-1/2} over (0, t).

    ``h`` may be a TemporalProfile (its knots are honored automatically) or a
    plain vectorized callable.
    """

    if not 0.0 < t <= 2.0:
        raise InvalidParamsError(f"time must lie in (0, 2], got {t}")
    fn, knots = _as_callable(h)
    knots = tuple(breakpoints) or knots

    def evaluate(panels):
        u, w = gauss_panels(_u_edges(t, panels, knots), spec.gauss_order)
        return 2.0 * float(np.sum(w * np.asarray(fn(t - u * u))))

    return _self_checked(evaluate, spec, "abel_half")


_FORMS = ("raw", "first-ibp", "second-ibp")


def m_of_t(p: TemporalProfile, t: float, form: str = "first-ibp", spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """The memory integral M(t) of the profile, by one of three routes.

    ``raw`` integrates (phi(t) - phi(s)) (t-s)^{-3/2} plus the exact tail
    2 phi(t) t^{-1/2}; ``first-ibp`` uses 2 int phi'(s)(t-s)^{-1/2};
    ``second-ibp`` uses 4 int phi''(s)(t-s)^{1/2}. The integrated-by-parts
    routes require phi(0) = 0 and, for the second, phi'(0) = 0.
    """

    if form not in _FORMS:
        raise InvalidParamsError(f"unknown form {form!r}; expected one of {_FORMS}")
    if not 0.0 < t <= 2.0:
        raise InvalidParamsError(f"time must lie in (0, 2], got {t}")

    if form == "raw":
        phi_t = float(p.value(t))

        def evaluate(panels):
            u, w = gauss_panels(_u_edges(t, panels, p.breakpoints), spec.gauss_order)
            diff = phi_t - np.asarray(p.value(t - u * u))
            return 2.0 * float(np.sum(w * diff / (u * u)))

        tail = 2.0 * phi_t / math.sqrt(t)
        return tail + _self_checked(evaluate, spec, "m_of_t[raw]")

    if form == "first-ibp":
        if abs(float(p.value(0.0))) > 1e-10:
            raise InvalidParamsError("first-ibp form needs phi(0) = 0")

        def evaluate(panels):
            u, w = gauss_panels(_u_edges(t, panels, p.breakpoints), spec.gauss_order)
            return 4.0 * float(np.sum(w * np.asarray(p.deriv1(t - u * u))))

        return _self_checked(evaluate, spec, "m_of_t[first-ibp]")

    if abs(float(p.value(0.0))) > 1e-10 or abs(float(p.deriv1(0.0))) > 1e-10:
        raise InvalidParamsError("second-ibp form needs phi(0) = phi'(0) = 0")

    def evaluate(panels):
        u, w = gauss_panels(_u_edges(t, panels, p.breakpoints), spec.gauss_order)
        return 8.0 * float(np.sum(w * u * u * np.asarray(p.deriv2(t - u * u))))

    return _self_checked(evaluate, spec, "m_of_t[second-ibp]")


def m_prime(p: TemporalProfile, t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """dM/dt = 2 int_0^t phi''(s) (t-s)^{-1/2} ds (needs phi C^2, phi'(0)=0)."""

    if not 0.0 < t <= 2.0:
        raise InvalidParamsError(f"time must lie in (0, 2], got {t}")
    if abs(float(p.deriv1(0.0))) > 1e-10:
        raise InvalidParamsError("m_prime needs phi'(0) = 0")

    def evaluate(panels):
        u, w = gauss_panels(_u_edges(t, panels, p.breakpoints), spec.gauss_order)
        return 4.0 * float(np.sum(w * np.asarray(p.deriv2(t - u * u))))

    return _self_checked(evaluate, spec, "m_prime")


def t0_star(
    p: TemporalProfile,
    spec: QuadratureSpec = DEFAULT_SPEC,
    scan_step: float = 1e-2,
    xtol: float = 1e-8,
) -> Optional[float]:
    """First time in (0, 2) where M crosses from positive to nonpositive.

    Scans at ``scan_step`` then bisects the bracketing interval. Returns None
    when M stays positive (or never becomes positive, e.g. the zero profile).
    """

    ts = np.arange(scan_step, 2.0, scan_step)
    prev_t, prev_m = None, None
    fn = lambda t: m_of_t(p, t, "first-ibp", spec)
    for t in ts:
        m = fn(float(t))
        if prev_m is not None and prev_m > 0.0 and m <= 0.0:
            if m == 0.0:
                return float(t)
            return float(brentq(fn, prev_t, float(t), xtol=xtol))
        prev_t, prev_m = float(t), m
    return None


@dataclass(frozen=True)
class MCurve:
    """Sampled memory integral: times, M, M', and the first zero if any."""

    times: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    first_zero: Optional[float]

    def write_csv(self, path, profile: TemporalProfile) -> None:
        params = ",".join(f"{v:.17g}" for v in profile.params)
        t0 = "none" if self.first_zero is None else f"{self.first_zero:.17g}"
        lines = [f"# family={profile.family} params=[{params}] t0_star={t0}", "t,M,M_prime"]
        for t, m, mp in zip(self.times, self.values, self.derivs):
            lines.append(f"{t:.17g},{m:.17g},{mp:.17g}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def m_curve(p: TemporalProfile, times: Sequence[float], spec: QuadratureSpec = DEFAULT_SPEC) -> MCurve:
    """Evaluate M and M' on a time grid and locate the first zero of M."""

    times = np.asarray(sorted(float(t) for t in times))
    if times.size == 0 or times[0] <= 0.0 or times[-1] > 2.0:
        raise InvalidParamsError("times must be a nonempty grid inside (0, 2]")
    values = np.array([m_of_t(p, t, "first-ibp", spec) for t in times])
    derivs = np.array([m_prime(p, t, spec) for t in times])
    return MCurve(times, values, derivs, t0_star(p, spec))
