"""Quantitative checks of the comparison bounds and identities on solver output.

Every check produces a :class:`Check` with a verdict in {pass, fail,
inconclusive}; a :class:`Report` collects them into one JSON document.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError, GeometryError, PreconditionError
from .field import GridField, _System, _node_potential, modulus_field
from .oracles import ClosedFormProfile
from .potential import PotentialSpec, RadialPotential, Variant, compute_iq
from .quadrature import adaptive_gk
from .radial import (
    ComparisonPair,
    RadialProfile,
    Tie,
    core_radius,
    solve_dp,
    zero_tolerance,
)


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class Mode(str, Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


@dataclass
class Check:
    name: str
    parameters: dict
    residuals: dict
    tolerance: Optional[float]
    verdict: Verdict

    def to_dict(self) -> dict:
        return _jsonable({
            "check": self.name,
            "parameters": self.parameters,
            "residuals": self.residuals,
            "tolerance": self.tolerance,
            "verdict": Verdict(self.verdict),
        })


@dataclass
class Report:
    checks: list = field(default_factory=list)
    config: Optional[dict] = None

    def add(self, item) -> "Report":
        self.checks.append(item if isinstance(item, Check) else item.to_check())
        return self

    @property
    def verdicts(self) -> list:
        return [c.verdict for c in self.checks]

    def to_dict(self) -> dict:
        d = {"checks": [c.to_dict() for c in self.checks]}
        if self.config is not None:
            d["config"] = _jsonable(self.config)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _radial_potential(spec_or_p) -> RadialPotential:
    if isinstance(spec_or_p, PotentialSpec):
        return spec_or_p.w_rad
    return spec_or_p


# -- comparison principle ----------------------------------------------------------

def comparison_tolerance(h: float, q: float, M: Optional[int]) -> float:
    """Default slack 3 (h + q/M) for lattice-versus-radial comparisons."""
    return 3.0 * (h + (q / M if M else 0.0))


@dataclass
class ComparisonVerdict:
    max_violation: float
    ball_center: tuple
    ball_radius: float
    nodes_checked: int
    mode: Mode
    tolerance: float
    verdict: Verdict
    worst_node: Optional[tuple] = None

    def to_check(self) -> Check:
        return Check(
            "comparison",
            {"ball_center": list(self.ball_center), "ball_radius": self.ball_radius, "mode": self.mode},
            {"max_violation": self.max_violation, "nodes_checked": self.nodes_checked,
             "worst_node": list(self.worst_node) if self.worst_node else None},
            self.tolerance,
            self.verdict,
        )


def verify_comparison(
    f: GridField,
    pair: ComparisonPair,
    center,
    R: float,
    mode: Mode = Mode.INTERIOR,
    tol: Optional[float] = None,
    certified: bool = False,
) -> ComparisonVerdict:
    """Check ``|u(x)| <= Psi_R(x - x0)`` on the lattice nodes of the test ball.

    Interior mode needs the closed ball inside the closed domain; Boundary
    mode needs the boundary data to vanish wherever the ball meets the
    boundary. The upper envelope is interpolated linearly in the distance
    to the centre. A violation beyond the tolerance is inconclusive (the
    field may not be a minimiser) unless ``certified`` marks the field as a
    known minimiser, in which case it fails.
    """
    mode = Mode(mode)
    dom = f.domain
    up = pair.upper
    if not math.isclose(up.grid.R, R, rel_tol=1e-9):
        raise DomainError(f"comparison pair was computed for R = {up.grid.R}, not {R}")
    if up.grid.n != dom.n:
        raise DomainError("comparison pair dimension differs from the field's")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    x = dom.coords()
    dist = np.linalg.norm(x - c, axis=-1)
    if mode is Mode.INTERIOR:
        if _distance_to_boundary_at(dom, c) < R * (1 - 1e-12):
            raise GeometryError("test ball is not contained in the domain")
    else:
        pts = dom.boundary_points()
        near = np.linalg.norm(pts - c, axis=-1) <= R
        if not near.any():
            raise GeometryError("Boundary mode needs a ball that meets the boundary")
        if np.any(np.linalg.norm(f.boundary_data[near], axis=-1) > 1e-12):
            raise PreconditionError("boundary data do not vanish on the ball's trace on the boundary")
    sel = dom.interior & (dist <= R)
    if tol is None:
        tol = comparison_tolerance(dom.h, f.q, up.M)
    if not sel.any():
        return ComparisonVerdict(-math.inf, tuple(c), R, 0, mode, tol, Verdict.INCONCLUSIVE)
    bound = np.interp(dist[sel], up.grid.radii, up.values)
    viol = modulus_field(f)[sel] - bound
    k = int(np.argmax(viol))
    worst = tuple(int(i) for i in np.argwhere(sel)[k])
    vmax = float(viol[k])
    if vmax <= tol:
        verdict = Verdict.PASS
    else:
        verdict = Verdict.FAIL if certified else Verdict.INCONCLUSIVE
    return ComparisonVerdict(vmax, tuple(float(v) for v in c), float(R), int(sel.sum()), mode, tol, verdict, worst)


def _distance_to_boundary_at(dom, c) -> float:
    if dom.kind == "disk":
        return dom.radius - float(np.linalg.norm(c - np.asarray(dom.center)))
    lo = np.asarray(dom.origin)
    hi = lo + dom.h * (np.asarray(dom.shape) - 1)
    return float(np.minimum(c - lo, hi - c).min())


# -- radial integrals ----------------------------------------------------------------

def _cells(profile: RadialProfile, p: RadialPotential, upper: bool = False):
    r = profile.grid.radii
    h = np.asarray(profile.values, dtype=float)
    dr = np.diff(r)
    g = np.diff(h) / dr
    w = p(h[1:] if upper else h[:-1], check=False)
    return r, dr, g, w


def _partial_sum(r, density, radius):
    """int_0^radius of a cellwise-constant density (already times r^(n-1))."""
    dr = np.diff(r)
    full = np.clip((radius - r[:-1]) / dr, 0.0, 1.0)
    return float(np.sum(density * dr * full))


def _cell_at(r, radius):
    return int(np.clip(np.searchsorted(r, radius, side="right") - 1, 0, r.size - 2))


@dataclass
class PohozaevRecord:
    r: float
    lhs: float
    rhs: float
    residual: float
    excluded: bool = False


def _residual(lhs, rhs, scale):
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), scale, 1e-30)


def _pohozaev_profile(profile: RadialProfile, p: RadialPotential, radii, exclude_width):
    """Both sides for the piecewise-linear interpolant of a lattice profile.

    Bulk cells use the exact gradient and W at the cell midpoint value; the
    shell uses the interpolated value and the slope interpolated between
    cell midpoints.
    """
    n = profile.grid.n
    r = profile.grid.radii
    h = np.asarray(profile.values, dtype=float)
    dr = np.diff(r)
    g = np.diff(h) / dr
    mid = 0.5 * (r[1:] + r[:-1])
    wm = p(0.5 * (h[1:] + h[:-1]), check=False)
    wt = mid ** (n - 1)
    bulk = wt * (0.5 * (n - 2) * g * g + n * wm)
    mag = wt * (0.5 * abs(n - 2) * g * g + n * wm)
    if p.pieces() is not None:
        wn = p(h, check=False)
        jumps = mid[np.diff(wn) != 0.0]
    else:
        jumps = np.empty(0)
    out = []
    for rad in radii:
        if not 0.0 < rad <= r[-1]:
            raise DomainError(f"radius {rad} outside (0, {r[-1]}]")
        k = _cell_at(r, rad)
        lhs = _partial_sum(r, bulk, rad)
        hv = float(np.interp(rad, r, h))
        gv = float(np.interp(rad, mid, g))
        wv = float(p(min(max(hv, 0.0), p.q)))
        rhs = rad ** n * (wv - 0.5 * gv * gv)
        scale = _partial_sum(r, mag, rad) + rad ** n * (wv + 0.5 * gv * gv)
        excl = bool(jumps.size and np.min(np.abs(jumps - rad)) < exclude_width * dr[k])
        out.append(PohozaevRecord(float(rad), lhs, float(rhs), _residual(lhs, rhs, 1e-14 * scale), excl))
    return out


def _pohozaev_closed(prof: ClosedFormProfile, p: RadialPotential, radii):
    n = prof.n
    ell = prof.params.get("core_edge", 0.0)

    def dens(s, signed=True):
        h = prof(s)
        d = prof.derivative(s)
        c = 0.5 * (n - 2) if signed else 0.5 * abs(n - 2)
        return s ** (n - 1) * (c * d * d + n * p(h, check=False))

    out = []
    for rad in radii:
        if not 0.0 < rad <= prof.R:
            raise DomainError(f"radius {rad} outside (0, {prof.R}]")
        a0 = min(max(ell, 0.0), rad)
        lhs, _ = adaptive_gk(dens, a0, rad, tol=1e-15)
        mag, _ = adaptive_gk(lambda s: dens(s, False), a0, rad, tol=1e-15)
        h = prof(rad)
        d = prof.derivative(rad)
        wv = p(h, check=False)
        rhs = rad ** n * (wv - 0.5 * d * d)
        scale = mag + rad ** n * (wv + 0.5 * d * d)
        out.append(PohozaevRecord(float(rad), float(lhs), float(rhs), _residual(lhs, rhs, scale)))
    return out


def _node_gradients(f: GridField) -> np.ndarray:
    """Nodal gradient (central differences, one-sided next to inactive nodes); shape (..., m, n)."""
    dom = f.domain
    u = f.values
    act = dom.active
    grads = []
    for ax in range(dom.n):
        fwd = np.zeros_like(u)
        bwd = np.zeros_like(u)
        ok_f = np.zeros(dom.shape, dtype=bool)
        ok_b = np.zeros(dom.shape, dtype=bool)
        sl_lo = [slice(None)] * dom.n
        sl_hi = [slice(None)] * dom.n
        sl_lo[ax] = slice(None, -1)
        sl_hi[ax] = slice(1, None)
        d = (u[tuple(sl_hi)] - u[tuple(sl_lo)]) / dom.h
        both = act[tuple(sl_hi)] & act[tuple(sl_lo)]
        fwd[tuple(sl_lo)] = d
        ok_f[tuple(sl_lo)] = both
        bwd[tuple(sl_hi)] = d
        ok_b[tuple(sl_hi)] = both
        cnt = ok_f.astype(float) + ok_b.astype(float)
        g = (fwd * ok_f[..., None] + bwd * ok_b[..., None]) / np.maximum(cnt, 1.0)[..., None]
        grads.append(g)
    return np.stack(grads, axis=-1)


def _interp(dom, arr, pts):
    """Multilinear interpolation of a nodal array at points of shape (k, n)."""
    t = (pts - np.asarray(dom.origin)) / dom.h
    i0 = np.clip(np.floor(t).astype(int), 0, np.asarray(dom.shape) - 2)
    fr = t - i0
    out = 0.0
    for corner in np.ndindex(*([2] * dom.n)):
        wgt = np.ones(pts.shape[0])
        idx = []
        for ax, c in enumerate(corner):
            wgt = wgt * (fr[:, ax] if c else 1.0 - fr[:, ax])
            idx.append(i0[:, ax] + c)
        val = arr[tuple(idx)]
        out = out + wgt.reshape((-1,) + (1,) * (val.ndim - 1)) * val
    return out


def _field_center(f: GridField, center) -> tuple:
    dom = f.domain
    c = np.atleast_1d(np.asarray(center, dtype=float))
    t = (c - np.asarray(dom.origin)) / dom.h
    ti = np.rint(t)
    if np.any(np.abs(t - ti) > 1e-9) or np.any(ti < 0) or np.any(ti >= np.asarray(dom.shape)):
        raise DomainError("scan centre must be a lattice node")
    return c


def _pohozaev_field(f: GridField, spec: PotentialSpec, radii, center):
    dom = f.domain
    n = dom.n
    c = _field_center(f, center)
    dmax = _distance_to_boundary_at(dom, c)
    x = dom.coords()
    dist = np.linalg.norm(x - c, axis=-1)
    G = _node_gradients(f)
    grad2 = np.sum(G * G, axis=(-1, -2))
    Wn = np.zeros(dom.shape)
    act = dom.active
    Wn[act] = _node_potential(spec, f.values[act])
    from .field import _weights

    mass = _weights(dom).mass
    out = []
    for rad in radii:
        if not 0.0 < rad <= dmax + 1e-12:
            raise DomainError(f"radius {rad} exceeds the distance {dmax} to the boundary")
        sel = act & (dist <= rad)
        lhs = float(np.sum(mass[sel] * (0.5 * (n - 2) * grad2[sel] + n * Wn[sel])))
        mag = float(np.sum(mass[sel] * (0.5 * abs(n - 2) * grad2[sel] + n * Wn[sel])))
        if n == 1:
            pts = np.array([[c[0] - rad], [c[0] + rad]])
            nu = np.array([[-1.0], [1.0]])
            area = np.ones(2)
        else:
            k = max(64, int(math.ceil(32 * 2 * math.pi * rad / dom.h)))
            th = 2 * math.pi * (np.arange(k) + 0.5) / k
            nu = np.stack([np.cos(th), np.sin(th)], axis=-1)
            pts = c + rad * nu
            area = np.full(k, 2 * math.pi * rad / k)
        Gs = _interp(dom, G, pts)
        us = _interp(dom, f.values, pts)
        ws = _node_potential(spec, us)
        g2 = np.sum(Gs * Gs, axis=(-1, -2))
        dnu = np.einsum("kmn,kn->km", Gs, nu)
        dn2 = np.sum(dnu * dnu, axis=-1)
        rhs = rad * float(np.sum(area * (0.5 * g2 + ws - dn2)))
        scale = mag + rad * float(np.sum(area * (0.5 * g2 + ws + dn2)))
        out.append(PohozaevRecord(float(rad), lhs, rhs, _residual(lhs, rhs, 1e-14 * scale)))
    return out


def pohozaev_scan(obj, spec, radii: Sequence[float], center=None, exclude_width: float = 2.0) -> list:
    """Bulk and shell sides of the Pohozaev identity at each radius.

    ``obj`` is a RadialProfile, a ClosedFormProfile or a GridField. The
    surface measure is dropped on both sides for radial input. When both
    sides vanish identically (one-dimensional dead-core profiles) the
    residual is normalised by the magnitude of the integrands instead of
    the two sides, so rounding noise is not amplified. Radial records
    within ``exclude_width`` cells of a jump of W(h) are flagged.
    """
    p = _radial_potential(spec)
    if isinstance(obj, RadialProfile):
        return _pohozaev_profile(obj, p, radii, exclude_width)
    if isinstance(obj, ClosedFormProfile):
        return _pohozaev_closed(obj, p, radii)
    if isinstance(obj, GridField):
        if not isinstance(spec, PotentialSpec):
            spec = PotentialSpec(spec, m=obj.m)
        return _pohozaev_field(obj, spec, radii, center if center is not None else np.zeros(obj.domain.n))
    raise TypeError(f"unsupported input {type(obj).__name__}")


def pohozaev_check(records, tol: float, name: str = "pohozaev") -> Check:
    kept = [rec for rec in records if not rec.excluded]
    worst = max((rec.residual for rec in kept), default=math.nan)
    verdict = Verdict.INCONCLUSIVE if not kept else (Verdict.PASS if worst <= tol else Verdict.FAIL)
    return Check(name, {"radii": [rec.r for rec in records]},
                 {"residuals": [rec.residual for rec in records], "excluded": [rec.excluded for rec in records],
                  "max_residual": worst}, tol, verdict)


# -- monotonicity formula --------------------------------------------------------------

@dataclass
class MonotonicityScan:
    records: list
    slack: list
    max_drop: float
    verdict: Verdict

    def to_check(self) -> Check:
        return Check("monotonicity", {"radii": [r for r, _ in self.records]},
                     {"values": [v for _, v in self.records], "max_drop": self.max_drop}, None, self.verdict)


def monotonicity_scan(obj, spec, radii: Sequence[float], center=None) -> MonotonicityScan:
    """``r^-(n-2) E_{B_r}`` at increasing radii, with a discretisation slack.

    For lattice profiles the error per radius is estimated as the gap
    between the lower-node and upper-node potential rules; consecutive
    values may drop by at most twice the sum of the two estimates.
    """
    p = _radial_potential(spec)
    radii = np.asarray(sorted(radii), dtype=float)
    if isinstance(obj, RadialProfile):
        n = obj.grid.n
        r, dr, g, w = _cells(obj, p)
        _, _, _, wu = _cells(obj, p, upper=True)
        wt = (0.5 * (r[1:] + r[:-1])) ** (n - 1)
        e_lo = np.array([_partial_sum(r, wt * (0.5 * g * g + w), x) for x in radii])
        e_hi = np.array([_partial_sum(r, wt * (0.5 * g * g + wu), x) for x in radii])
        err = np.abs(e_hi - e_lo) * radii ** (-(n - 2.0))
        vals = e_lo * radii ** (-(n - 2.0))
    elif isinstance(obj, ClosedFormProfile):
        n = obj.n

        def dens(s):
            return s ** (n - 1) * (0.5 * obj.derivative(s) ** 2 + p(obj(s), check=False))

        vals = np.array([adaptive_gk(dens, 0.0, x, tol=1e-14)[0] for x in radii]) * radii ** (-(n - 2.0))
        err = np.full(radii.size, 1e-12) * np.maximum(np.abs(vals), 1.0)
    elif isinstance(obj, GridField):
        dom = obj.domain
        n = dom.n
        if not isinstance(spec, PotentialSpec):
            spec = PotentialSpec(spec, m=obj.m)
        c = _field_center(obj, center if center is not None else np.zeros(n))
        dist = np.linalg.norm(dom.coords() - c, axis=-1)
        G = _node_gradients(obj)
        dens = np.zeros(dom.shape)
        act = dom.active
        dens[act] = 0.5 * np.sum(G * G, axis=(-1, -2))[act] + _node_potential(spec, obj.values[act])
        from .field import _weights

        mass = _weights(dom).mass
        if radii.size and radii[-1] > _distance_to_boundary_at(dom, c) + 1e-12:
            raise DomainError("scan radius exceeds the distance to the boundary")
        vals = np.array([np.sum((mass * dens)[act & (dist <= x)]) for x in radii]) * radii ** (-(n - 2.0))
        err = np.array([np.sum((mass * dens)[act & (np.abs(dist - x) <= dom.h)]) for x in radii]) \
            * radii ** (-(n - 2.0))
    else:
        raise TypeError(f"unsupported input {type(obj).__name__}")
    drops = vals[:-1] - vals[1:]
    allow = 2.0 * (err[:-1] + err[1:])
    max_drop = float(np.max(drops, initial=-math.inf))
    ok = bool(np.all(drops <= allow))
    return MonotonicityScan(list(zip(radii.tolist(), vals.tolist())), (2.0 * err).tolist(), max_drop,
                            Verdict.PASS if ok else Verdict.FAIL)


# -- first integral in one dimension -----------------------------------------------------

@dataclass
class HamiltonianRecord:
    radii: np.ndarray
    values: np.ndarray
    mean: float
    max_deviation: float
    has_core: bool
    max_abs: float
    rule: str

    def to_check(self, tol: Optional[float] = None) -> Check:
        if tol is None:
            verdict = Verdict.INCONCLUSIVE
        else:
            ok = self.max_deviation <= tol and (not self.has_core or self.max_abs <= tol)
            verdict = Verdict.PASS if ok else Verdict.FAIL
        return Check("hamiltonian", {"rule": self.rule, "cells": int(self.values.size)},
                     {"mean": self.mean, "max_deviation": self.max_deviation,
                      "has_core": self.has_core, "max_abs": self.max_abs}, tol, verdict)


def hamiltonian_check(profile: RadialProfile, p, ztol: Optional[float] = None, rule: str = "lower") -> HamiltonianRecord:
    """Per-cell ``1/2 h'^2 - W(h)`` where the profile exceeds ``ztol``.

    ``rule`` picks the potential sample: the lower node (the rule of the
    discrete energy), the mean of both node values ("trapezoid"), or the
    value at the mean ("midpoint").
    """
    p = _radial_potential(p)
    if profile.grid.n != 1:
        raise PreconditionError("the first integral holds in one dimension only")
    if ztol is None:
        ztol = zero_tolerance(profile.q, profile.M)
    h = np.asarray(profile.values, dtype=float)
    r = profile.grid.radii
    g = np.diff(h) / np.diff(r)
    if rule == "lower":
        w = p(h[:-1], check=False)
    elif rule == "trapezoid":
        w = 0.5 * (p(h[:-1], check=False) + p(h[1:], check=False))
    elif rule == "midpoint":
        w = p(0.5 * (h[:-1] + h[1:]), check=False)
    else:
        raise DomainError(f"unknown rule {rule!r}")
    sel = h[:-1] > ztol
    if not sel.any():
        raise DomainError("profile vanishes: empty positive region")
    H = 0.5 * g[sel] ** 2 - w[sel]
    mean = float(np.mean(H))
    return HamiltonianRecord(
        radii=0.5 * (r[1:] + r[:-1])[sel],
        values=H,
        mean=mean,
        max_deviation=float(np.max(np.abs(H - mean))),
        has_core=bool(h[0] <= ztol),
        max_abs=float(np.max(np.abs(H))),
        rule=rule,
    )


# -- maximum principle -------------------------------------------------------------------

@dataclass
class MaxPrincipleResult:
    min_value: float
    verdict: Verdict
    node: Optional[tuple]
    floor: float

    def __iter__(self):
        return iter((self.min_value, self.verdict))

    def to_check(self) -> Check:
        return Check("maximum_principle", {"positivity_floor": self.floor},
                     {"min_value": self.min_value, "node": list(self.node) if self.node else None},
                     self.floor, self.verdict)


def _iq_infinite(p: RadialPotential) -> bool:
    try:
        return not compute_iq(p, Variant.SQRT_W).finite
    except DomainError:
        return True


def maximum_principle_check(f: GridField, spec, subdomain: Optional[np.ndarray] = None,
                            floor: Optional[float] = None) -> MaxPrincipleResult:
    """Positivity of a scalar field where the dead-core integral diverges.

    ``subdomain`` is a boolean node mask (default: all Interior nodes);
    its boundary is the set of active nodes outside it that touch it.
    """
    if not isinstance(spec, PotentialSpec):
        spec = PotentialSpec(spec, m=f.m)
    if f.m != 1:
        raise PreconditionError("maximum principle check needs a scalar field")
    if spec.w_0 is not None:
        raise PreconditionError("maximum principle check needs w_0 = 0")
    if not _iq_infinite(spec.w_rad):
        raise PreconditionError("I_q is finite: dead cores are possible and the check is vacuous")
    dom = f.domain
    inner = dom.interior if subdomain is None else (np.asarray(subdomain, dtype=bool) & dom.active)
    if not inner.any():
        raise DomainError("empty subdomain")
    ring = np.zeros(dom.shape, dtype=bool)
    for ax in range(dom.n):
        ring |= np.roll(inner, 1, axis=ax) | np.roll(inner, -1, axis=ax)
    ring &= dom.active & ~inner
    u = f.values[..., 0]
    if ring.any() and np.any(u[ring] <= 0.0):
        raise PreconditionError("field is not positive on the subdomain boundary")
    if floor is None:
        floor = f.q * 1e-6
    vals = np.where(inner, u, np.inf)
    node = np.unravel_index(int(np.argmin(vals)), dom.shape)
    vmin = float(vals[node])
    verdict = Verdict.PASS if vmin > floor else Verdict.FAIL
    return MaxPrincipleResult(vmin, verdict, tuple(int(i) for i in node), floor)


# -- dead core -----------------------------------------------------------------------------

def dead_core_check_profile(profile: RadialProfile, p, slack: float = 0.0, ztol: Optional[float] = None) -> Check:
    """The core of a radial profile must reach ``R - sqrt2 I_q`` (Sqrt2W variant), up to ``slack``."""
    p = _radial_potential(p)
    iq2 = compute_iq(p, Variant.SQRT_2W)
    iq = compute_iq(p, Variant.SQRT_W)
    R = profile.grid.R
    bound = R - math.sqrt(2.0) * iq2.value
    rc = core_radius(profile, ztol)
    verdict = Verdict.PASS if rc >= bound - slack else Verdict.FAIL
    return Check("dead_core_profile",
                 {"R": R, "n": profile.grid.n, "threshold": (4 * profile.grid.n + math.sqrt(2.0)) * iq.value},
                 {"core_radius": rc, "core_bound": bound}, slack, verdict)


def dead_core_check(f: GridField, spec, ztol: Optional[float] = None) -> Check:
    """|u| <= ztol at every node at distance >= (4n + sqrt2) I_q from the boundary.

    Also records the smallest distance d such that every node at distance
    at least d lies in the numerical core.
    """
    p = _radial_potential(spec)
    iq = compute_iq(p, Variant.SQRT_W)
    dom = f.domain
    if ztol is None:
        ztol = f.q * 1e-3
    thr = (4 * dom.n + math.sqrt(2.0)) * iq.value
    d = dom.distance_to_boundary()
    mod = modulus_field(f)
    act = dom.interior
    far = act & (d >= thr)
    outside_core = act & (mod > ztol)
    empirical = float(np.max(d[outside_core], initial=-math.inf))
    resid = {"threshold_distance": thr, "nodes_beyond": int(far.sum()),
             "max_modulus_beyond": float(np.max(mod[far], initial=0.0)),
             "empirical_core_distance": empirical}
    if not far.any():
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS if resid["max_modulus_beyond"] <= ztol else Verdict.FAIL
    return Check("dead_core", {"n": dom.n, "iq": iq.value}, resid, ztol, verdict)


# -- scaling law ------------------------------------------------------------------------------

def scaling_check(p: RadialPotential, n: int, R: float, lam: float, kappa: float, N: int, M: int,
                  tie: Tie = Tie.PREFER_LOW, levels: float = 2.0) -> Check:
    """Compare the (R, lam) solution with the (R/kappa, kappa^2 lam) one at r/kappa.

    With the same N both discrete energies are proportional, so the DP
    minimisers agree node by node; the tolerance is ``levels`` value levels.
    """
    a = solve_dp(p, n, R, lam, N, M, tie)
    b = solve_dp(p, n, R / kappa, kappa * kappa * lam, N, M, tie)
    resampled = np.interp(a.grid.radii / kappa, b.grid.radii, b.values)
    err = float(np.max(np.abs(a.values - resampled)))
    tol = levels * p.q / M
    return Check("scaling_law", {"R": R, "lambda": lam, "kappa": kappa, "n": n, "N": N, "M": M},
                 {"max_difference": err, "energy_ratio": b.energy / a.energy if a.energy else None},
                 tol, Verdict.PASS if err <= tol else Verdict.FAIL)
