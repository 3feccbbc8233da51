"""Boundary-data building blocks: temporal inflow profiles and the spatial bump.

The boundary data is ``g(y', s) = a * psi(|y'|) * phi(s) * e_n``: a radial
smooth bump ``psi`` supported in the unit ball of the wall plane, modulated in
time by a unimodal profile ``phi`` that rises on (0, 1) and falls on (1, 2).
This module owns the built-in ``phi`` families, the bump, and the checkers for
the monotonicity assumption and the three sufficient sign conditions on the
memory integral M(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParamsError

__all__ = [
    "TemporalProfile",
    "SpatialBump",
    "BoundaryData",
    "make_profile",
    "custom_profile",
    "check_assumption1",
    "check_appendix_condition",
    "AssumptionReport",
    "ConditionReport",
    "FAMILIES",
]


# ---------------------------------------------------------------------------
# smooth step helpers (quintic: zero first and second derivative at both ends)
# ---------------------------------------------------------------------------

def smootherstep(u):
    u = np.asarray(u, dtype=float)
    return u**3 * (10.0 + u * (-15.0 + 6.0 * u))


def d_smootherstep(u):
    u = np.asarray(u, dtype=float)
    return 30.0 * u**2 * (1.0 - u) ** 2


def dd_smootherstep(u):
    u = np.asarray(u, dtype=float)
    return 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)


# max of d_smootherstep on (0,1); attained at u = 1/2
_RISE_MAX_SLOPE = 30.0 / 16.0


@dataclass(frozen=True)
class TemporalProfile:
    """Time profile phi on [0, 2] with analytic first and second derivatives.

    ``value``, ``deriv1`` and ``deriv2`` accept scalars or arrays.
    ``breakpoints`` lists interior knots where the third derivative may jump;
    quadratures split panels there.
    """

    family: str
    params: tuple
    value: Callable[[np.ndarray], np.ndarray]
    deriv1: Callable[[np.ndarray], np.ndarray]
    deriv2: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple = ()
    meta: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.value(t)


def _piecewise(bounds, funcs):
    """Build a vectorized piecewise map; zero outside [bounds[0], bounds[-1]]."""

    bounds = tuple(float(b) for b in bounds)

    def f(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for (lo, hi), fn in zip(zip(bounds[:-1], bounds[1:]), funcs):
            mask = (t >= lo) & (t <= hi) if hi == bounds[-1] else (t >= lo) & (t < hi)
            if np.any(mask):
                out[mask] = fn(t[mask])
        return out if out.ndim else float(out)

    return f


def _family_quartic() -> TemporalProfile:
    # phi(t) = t^2 (2-t)^2, normalized so phi(1) = 1
    def v(t):
        t = np.asarray(t, dtype=float)
        out = np.where((t >= 0.0) & (t <= 2.0), (t * (2.0 - t)) ** 2, 0.0)
        return out if out.ndim else float(out)

    def d1(t):
        t = np.asarray(t, dtype=float)
        out = np.where((t >= 0.0) & (t <= 2.0), 4.0 * t * (2.0 - t) * (1.0 - t), 0.0)
        return out if out.ndim else float(out)

    def d2(t):
        t = np.asarray(t, dtype=float)
        out = np.where((t >= 0.0) & (t <= 2.0), 12.0 * t * t - 24.0 * t + 8.0, 0.0)
        return out if out.ndim else float(out)

    return TemporalProfile("A", (), v, d1, d2, breakpoints=(), meta={"phi1": 1.0})


def _family_plateau(r0: float, delta: float, m: float | None, w: float | None) -> TemporalProfile:
    if not (1.0 < r0 < 2.0):
        raise InvalidParamsError(f"plateau family needs r0 in (1, 2), got {r0}")
    if not (0.0 < delta < 1.0):
        raise InvalidParamsError(f"plateau family needs delta in (0, 1), got {delta}")
    if w is None:
        w = min(0.4 * delta, 0.08)
    if m is None:
        # steep enough for the derivative-window condition when delta is small,
        # capped so the profile stays nonnegative and monotone
        threshold = 1.5 * math.sqrt(2.0) * _RISE_MAX_SLOPE / math.sqrt(delta)
        m = min(1.05 * threshold, 0.85 / (delta + w))
    if r0 - w < 1.0:
        raise InvalidParamsError("plateau family: drop lead-in starts before t=1")
    t_end = r0 + delta + w
    if t_end > 1.95:
        raise InvalidParamsError("plateau family: drop must finish by t=1.95")
    b = 1.0 - m * (delta + w)
    if b < 0.02:
        raise InvalidParamsError("plateau family: drop rate leaves no tail mass")
    tail = 2.0 - t_end
    phi_r0 = 1.0 - 0.5 * m * w

    def sigma(u):
        return u * u * (3.0 - 2.0 * u)

    def dsigma(u):
        return 6.0 * u * (1.0 - u)

    def ease(u):
        # integral of sigma from 0 to u
        return u**3 - 0.5 * u**4

    v = _piecewise(
        (0.0, 1.0, r0 - w, r0, r0 + delta, t_end, 2.0),
        (
            smootherstep,
            lambda t: np.ones_like(t),
            lambda t: 1.0 - m * w * ease((t - (r0 - w)) / w),
            lambda t: phi_r0 - m * (t - r0),
            lambda t: (phi_r0 - m * delta) - m * w * (0.5 - ease(1.0 - (t - (r0 + delta)) / w)),
            lambda t: b * (1.0 - smootherstep((t - t_end) / tail)),
        ),
    )
    d1 = _piecewise(
        (0.0, 1.0, r0 - w, r0, r0 + delta, t_end, 2.0),
        (
            d_smootherstep,
            lambda t: np.zeros_like(t),
            lambda t: -m * sigma((t - (r0 - w)) / w),
            lambda t: np.full_like(t, -m),
            lambda t: -m * sigma(1.0 - (t - (r0 + delta)) / w),
            lambda t: -(b / tail) * d_smootherstep((t - t_end) / tail),
        ),
    )
    d2 = _piecewise(
        (0.0, 1.0, r0 - w, r0, r0 + delta, t_end, 2.0),
        (
            dd_smootherstep,
            lambda t: np.zeros_like(t),
            lambda t: -(m / w) * dsigma((t - (r0 - w)) / w),
            lambda t: np.zeros_like(t),
            lambda t: (m / w) * dsigma(1.0 - (t - (r0 + delta)) / w),
            lambda t: -(b / tail**2) * dd_smootherstep((t - t_end) / tail),
        ),
    )
    return TemporalProfile(
        "B",
        (r0, delta, m, w),
        v,
        d1,
        d2,
        breakpoints=(1.0, r0 - w, r0, r0 + delta, t_end),
        meta={"r0": r0, "delta": delta, "drop_rate": m, "ease_width": w, "phi1": 1.0},
    )


def _family_slowfade(eps: float) -> TemporalProfile:
    if not (0.0 < eps <= 0.5):
        raise InvalidParamsError(f"slow-fade family needs eps in (0, 0.5], got {eps}")

    v = _piecewise(
        (0.0, 1.0, 2.0),
        (smootherstep, lambda t: 1.0 - eps * smootherstep(t - 1.0)),
    )
    d1 = _piecewise(
        (0.0, 1.0, 2.0),
        (d_smootherstep, lambda t: -eps * d_smootherstep(t - 1.0)),
    )
    d2 = _piecewise(
        (0.0, 1.0, 2.0),
        (dd_smootherstep, lambda t: -eps * dd_smootherstep(t - 1.0)),
    )
    return TemporalProfile("C", (eps,), v, d1, d2, breakpoints=(1.0,), meta={"eps": eps, "phi1": 1.0})


def _family_cubicfall() -> TemporalProfile:
    v = _piecewise(
        (0.0, 1.0, 2.0),
        (smootherstep, lambda t: 1.0 - (t - 1.0) ** 3),
    )
    d1 = _piecewise(
        (0.0, 1.0, 2.0),
        (d_smootherstep, lambda t: -3.0 * (t - 1.0) ** 2),
    )
    d2 = _piecewise(
        (0.0, 1.0, 2.0),
        (dd_smootherstep, lambda t: -6.0 * (t - 1.0)),
    )
    return TemporalProfile("D", (), v, d1, d2, breakpoints=(1.0,), meta={"phi1": 1.0})


def _family_zero() -> TemporalProfile:
    def z(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        return out if out.ndim else 0.0

    return TemporalProfile("zero", (), z, z, z, breakpoints=(), meta={"phi1": 0.0})


FAMILIES = {
    "A": "quartic rise/fall t^2(2-t)^2, peak 1 at t=1",
    "B": "smooth rise, plateau, steep late drop at (r0, delta), tail to 0",
    "C": "smooth rise, then slow fade with |phi'| <= 1.875*eps on (1,2)",
    "D": "smooth rise, cubic fall 1-(t-1)^3 with steadily steepening slope",
    "zero": "identically zero (diagnostic shim)",
}

_ALIASES = {
    "a": "A",
    "quartic": "A",
    "b": "B",
    "plateau": "B",
    "plateau-drop": "B",
    "c": "C",
    "slow-fade": "C",
    "slowfade": "C",
    "d": "D",
    "cubic-fall": "D",
    "cubicfall": "D",
    "zero": "zero",
}


def make_profile(family: str, params: dict | None = None) -> TemporalProfile:
    """Construct a built-in profile and validate its unimodal shape.

    Parameters
    ----------
    family : str
        One of ``A``/``B``/``C``/``D``/``zero`` (descriptive aliases accepted).
    params : dict, optional
        Family parameters. B takes ``r0`` (default 1.6), ``delta`` (default
        0.2) and optionally ``m``, ``w``; C takes ``eps`` (default 0.05).

    Raises
    ------
    InvalidParamsError
        If parameters are out of range or the resulting profile fails the
        monotonicity scan (rising on (0,1), falling on (1,2), phi(0)=0).
    """

    params = dict(params or {})
    key = _ALIASES.get(str(family).strip().lower())
    if key is None:
        raise InvalidParamsError(f"unknown profile family {family!r}; choose from {sorted(FAMILIES)}")
    if key == "A":
        _expect_keys(params, set())
        prof = _family_quartic()
    elif key == "B":
        _expect_keys(params, {"r0", "delta", "m", "w"})
        prof = _family_plateau(
            float(params.get("r0", 1.6)),
            float(params.get("delta", 0.2)),
            None if params.get("m") is None else float(params["m"]),
            None if params.get("w") is None else float(params["w"]),
        )
    elif key == "C":
        _expect_keys(params, {"eps"})
        prof = _family_slowfade(float(params.get("eps", 0.05)))
    elif key == "D":
        _expect_keys(params, set())
        prof = _family_cubicfall()
    else:
        _expect_keys(params, set())
        return _family_zero()

    report = check_assumption1(prof, grid_size=10_000)
    if not report.ok:
        raise InvalidParamsError(
            f"family {family!r} with params {params} violates the unimodal shape: {report.violations[:3]}"
        )
    return prof


def _expect_keys(params: dict, allowed: set) -> None:
    extra = set(params) - allowed
    if extra:
        raise InvalidParamsError(f"unexpected profile parameters {sorted(extra)}; allowed: {sorted(allowed)}")


def custom_profile(value, deriv1=None, deriv2=None, breakpoints=(), name="custom") -> TemporalProfile:
    """Wrap user callables as a profile without shape validation (test shims)."""

    def _zero(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        return out if out.ndim else 0.0

    return TemporalProfile(name, (), value, deriv1 or _zero, deriv2 or _zero, tuple(breakpoints))


# ---------------------------------------------------------------------------
# assumption and sufficient-condition checkers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionReport:
    ok: bool
    violations: tuple
    max_slope_rise: float
    min_slope_fall: float

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ConditionReport:
    which: str
    ok: bool
    margin: float
    details: dict

    def __bool__(self):
        return self.ok


def check_assumption1(p: TemporalProfile, grid_size: int = 1000) -> AssumptionReport:
    """Scan for phi(0)=0, phi>=0, rising on (0,1) and falling on (1,2)."""

    if grid_size < 100:
        raise InvalidParamsError("grid_size must be >= 100")
    t = np.linspace(0.0, 2.0, grid_size)
    phi = np.asarray(p.value(t))
    dphi = np.asarray(p.deriv1(t))
    scale = max(1.0, float(np.max(np.abs(dphi))))
    tol = 1e-9 * scale

    violations = []
    if abs(float(p.value(0.0))) > 1e-12:
        violations.append(("phi(0) != 0", float(p.value(0.0))))
    bad_neg = t[phi < -1e-12]
    if bad_neg.size:
        violations.append(("phi < 0", float(bad_neg[0])))
    rise = (t > 0.0) & (t < 1.0)
    fall = (t > 1.0) & (t < 2.0)
    bad_rise = t[rise & (dphi < -tol)]
    if bad_rise.size:
        violations.append(("phi' < 0 on (0,1)", float(bad_rise[0])))
    bad_fall = t[fall & (dphi > tol)]
    if bad_fall.size:
        violations.append(("phi' > 0 on (1,2)", float(bad_fall[0])))

    return AssumptionReport(
        ok=not violations,
        violations=tuple(violations),
        max_slope_rise=float(np.max(dphi[rise], initial=0.0)),
        min_slope_fall=float(np.min(dphi[fall], initial=0.0)),
    )


def _gauss_integral(f, a: float, b: float, knots: Sequence[float] = (), order: int = 24) -> float:
    """Composite Gauss-Legendre integral with panels split at profile knots."""

    edges = sorted({a, b, *(k for k in knots if a < k < b)})
    x, wt = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        total += half * float(np.sum(wt * np.asarray(f(mid + half * x))))
    return total


def check_appendix_condition(p: TemporalProfile, which: str) -> ConditionReport:
    """Test one of the three sufficient conditions on the memory integral sign.

    ``which='i'``: there is r0 in (1.5, 2) with 2^{3/2} phi(t) < 2^{-3/2}
    * int_0^1 phi for all t in (r0, 2); guarantees M < 0 on (r0, 2).
    ``which='ii'``: on the drop window (r0, r0+delta) the slope sits strictly
    inside (-phi(r0)/(2 delta), -(3/2) sqrt(2) a0 / sqrt(delta)) with a0 the
    max rise slope; guarantees M(r0+delta) < 0.
    ``which='iii'``: inf_(1,2) phi' >= -(1/4) int_0^1 phi'(s)(2-s)^{-1/2} ds;
    guarantees M(t) > phi(1)/sqrt(2) on (1, 2).

    Returns the verdict together with the worst-case slack (margin).
    """

    which = str(which).lower()
    if which == "i":
        integral = _gauss_integral(p.value, 0.0, 1.0, p.breakpoints)
        bound = 2.0 ** (-1.5) * integral
        tgrid = np.linspace(1.5, 2.0, 2001)[1:-1]
        slack = bound - 2.0**1.5 * np.asarray(p.value(tgrid))
        ok_mask = slack > 0.0
        # first index from which the inequality holds through t -> 2
        holds_to_end = np.flip(np.logical_and.accumulate(np.flip(ok_mask)))
        idx = np.argmax(holds_to_end) if holds_to_end.any() else None
        if idx is not None and tgrid[idx] <= 1.99:
            r0 = float(tgrid[idx])
            margin = float(np.min(slack[idx:]))
            return ConditionReport("i", True, margin, {"r0": r0, "int_phi_01": integral})
        return ConditionReport(
            "i", False, float(np.min(slack[-50:])), {"r0": None, "int_phi_01": integral}
        )

    if which == "ii":
        r0 = p.meta.get("r0")
        delta = p.meta.get("delta")
        candidates = (
            [(float(r0), float(delta))]
            if r0 is not None and delta is not None
            else [(rr, dd) for rr in np.arange(1.1, 1.95, 0.05) for dd in (0.005, 0.01, 0.02, 0.05, 0.1)]
        )
        scan = np.linspace(0.0, 1.0, 10_001)[1:-1]
        a0 = float(np.max(np.asarray(p.deriv1(scan))))
        best = None
        for rr, dd in candidates:
            if rr + dd >= 2.0:
                continue
            upper = -1.5 * math.sqrt(2.0) * a0 / math.sqrt(dd)
            lower = -0.5 * float(p.value(rr)) / dd
            tgrid = rr + dd * (np.arange(200) + 0.5) / 200.0
            slopes = np.asarray(p.deriv1(tgrid))
            margin = float(min(np.min(slopes - lower), np.min(upper - slopes)))
            cand = ConditionReport(
                "ii",
                margin > 0.0,
                margin,
                {"r0": rr, "delta": dd, "a0": a0, "upper": upper, "lower": lower},
            )
            if best is None or cand.margin > best.margin:
                best = cand
        if best is None:
            best = ConditionReport("ii", False, -math.inf, {"a0": a0})
        return best

    if which == "iii":
        tgrid = np.linspace(1.0, 2.0, 10_001)[1:-1]
        inf_slope = float(np.min(np.asarray(p.deriv1(tgrid))))
        integral = _gauss_integral(
            lambda s: np.asarray(p.deriv1(s)) * (2.0 - np.asarray(s)) ** (-0.5),
            0.0,
            1.0,
            p.breakpoints,
        )
        rhs = -0.25 * integral
        margin = inf_slope - rhs
        return ConditionReport(
            "iii", margin >= 0.0, margin, {"inf_slope_fall": inf_slope, "rhs": rhs}
        )

    raise InvalidParamsError(f"unknown condition {which!r}; expected 'i', 'ii' or 'iii'")


# ---------------------------------------------------------------------------
# spatial bump
# ---------------------------------------------------------------------------

class SpatialBump:
    """Radial smooth cutoff supported in the unit ball of the wall plane.

    ``psi(r) = height * exp(1 - 1/(1 - r^2))`` for r < 1, zero beyond. The
    height must exceed e^{1/3} so that psi > 1 on the half ball. ``mass`` is
    the integral of psi over R^{n-1}, computed by quadrature; ``mass_check``
    repeats it at doubled resolution.
    """

    def __init__(self, n: int = 3, height: float = 2.0):
        if n not in (2, 3):
            raise InvalidParamsError(f"dimension n must be 2 or 3, got {n}")
        if height <= math.exp(1.0 / 3.0):
            raise InvalidParamsError(
                f"height must exceed e^(1/3) ~ 1.3956 so psi > 1 on the half ball, got {height}"
            )
        self.n = int(n)
        self.d = self.n - 1  # wall-plane dimension
        self.height = float(height)
        self.mass = self._mass(panels=64)
        self.mass_check = self._mass(panels=128)

    # radial profile and derivatives ---------------------------------------

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = np.abs(r) < 1.0 - 1e-12
        if np.any(inside):
            v = 1.0 - r[inside] ** 2
            out[inside] = self.height * np.exp(1.0 - 1.0 / v)
        return out if out.ndim else float(out)

    def _w_derivs(self, r):
        """Derivatives of w(r) = 1 - 1/(1-r^2) up to fourth order (inside only)."""
        v = 1.0 - r * r
        w1 = -2.0 * r / v**2
        w2 = -2.0 / v**2 - 8.0 * r**2 / v**3
        w3 = -24.0 * r / v**3 - 48.0 * r**3 / v**4
        w4 = -24.0 / v**3 - 288.0 * r**2 / v**4 - 384.0 * r**4 / v**5
        return w1, w2, w3, w4

    def radial_derivs(self, r):
        """psi and its first four radial derivatives, vectorized."""
        r = np.abs(np.asarray(r, dtype=float))
        shape = r.shape
        p = np.zeros(shape)
        d1 = np.zeros(shape)
        d2 = np.zeros(shape)
        d3 = np.zeros(shape)
        d4 = np.zeros(shape)
        inside = r < 1.0 - 1e-12
        if np.any(inside):
            ri = r[inside]
            psi = self.radial(ri)
            w1, w2, w3, w4 = self._w_derivs(ri)
            p[inside] = psi
            d1[inside] = psi * w1
            d2[inside] = psi * (w2 + w1**2)
            d3[inside] = psi * (w3 + 3.0 * w1 * w2 + w1**3)
            d4[inside] = psi * (w4 + 4.0 * w1 * w3 + 3.0 * w2**2 + 6.0 * w1**2 * w2 + w1**4)
        return p, d1, d2, d3, d4

    # tangential-Laplacian powers as radial functions ----------------------

    def lap_radial(self, r):
        """(Delta' psi)(r) for the wall-plane Laplacian in d = n-1 dims."""
        r = np.abs(np.asarray(r, dtype=float))
        p, d1, d2, _, _ = self.radial_derivs(r)
        out = np.zeros_like(r)
        inside = r < 1.0 - 1e-12
        if np.any(inside):
            ri = r[inside]
            v = 1.0 - ri * ri
            s1 = p[inside] * (-2.0 / v**2)  # psi'(r)/r, exact (w' has an r factor)
            out[inside] = d2[inside] + (self.d - 1) * s1
        return out if out.ndim else float(out)

    def lap_radial_deriv(self, r):
        """d/dr of (Delta' psi)(r)."""
        r = np.abs(np.asarray(r, dtype=float))
        p, d1, d2, d3, _ = self.radial_derivs(r)
        out = np.zeros_like(r)
        inside = r < 1.0 - 1e-12
        if np.any(inside):
            ri = r[inside]
            # (psi'/r)' = psi''/r - psi'/r^2; with s2 := (psi'' - psi'/r)/r
            v = 1.0 - ri * ri
            s1 = p[inside] * (-2.0 / v**2)
            s2 = np.where(ri > 1e-8, (d2[inside] - s1) / ri, 0.0)
            out[inside] = d3[inside] + (self.d - 1) * s2
        return out if out.ndim else float(out)

    def lap2_radial(self, r):
        """(Delta'^2 psi)(r): Delta' applied to the radial function Delta' psi."""
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        inside = (r < 1.0 - 1e-12) & (r > 1e-7)
        if np.any(inside):
            ri = r[inside]
            _, d1, d2, d3, d4 = self.radial_derivs(ri)
            gp = d3 + (self.d - 1) * (d2 / ri - d1 / ri**2)
            gpp = d4 + (self.d - 1) * (d3 / ri - 2.0 * d2 / ri**2 + 2.0 * d1 / ri**3)
            out[inside] = gpp + (self.d - 1) * gp / ri
        center = r <= 1e-7
        if np.any(center):
            # radial smooth function: derivative formula degenerates on the
            # axis, evaluate just off it
            out[center] = self.lap2_radial(np.full(np.count_nonzero(center), 2e-7))
        return out if out.ndim else float(out)

    # mass ------------------------------------------------------------------

    def _mass(self, panels: int) -> float:
        x, wt = np.polynomial.legendre.leggauss(8)
        edges = np.linspace(0.0, 1.0, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        nodes = mid + half * x[None, :]
        weights = half * wt[None, :]
        vals = self.radial(nodes.ravel()).reshape(nodes.shape)
        if self.n == 3:
            return float(2.0 * math.pi * np.sum(weights * vals * nodes))
        return float(2.0 * np.sum(weights * vals))

    def __repr__(self):
        return f"SpatialBump(n={self.n}, height={self.height}, mass={self.mass:.12g})"


@dataclass(frozen=True)
class BoundaryData:
    """Inflow data g(y', s) = amplitude * psi(|y'|) phi(s) e_n."""

    amplitude: float
    bump: SpatialBump
    profile: TemporalProfile

    def __post_init__(self):
        if self.amplitude <= 0.0:
            raise InvalidParamsError(f"amplitude must be positive, got {self.amplitude}")
