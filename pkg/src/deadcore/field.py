"""Lattice minimisers of E(u) = sum 1/2 |grad u|^2 + W(u) with |u| <= q and Dirichlet data.

Quadrature is the trapezoid rule on the union of active cells (cells whose
corners are all Interior or Boundary): every node carries the mass
``h^n * (active cells at the node) / 2^n`` and every axis edge the weight
``(active cells containing the edge) / 2^(n-1)``. On a rectangle this is
the exact area and the forward-difference Dirichlet energy.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import DomainError, GeometryError
from .potential import NORM_TOL, Kind, PotentialSpec, RadialPotential


class Cell(IntEnum):
    OUTSIDE = 0
    INTERIOR = 1
    BOUNDARY = 2


@dataclass(frozen=True, eq=False)
class LatticeDomain:
    n: int
    shape: tuple
    h: float
    mask: np.ndarray
    origin: tuple
    kind: str = "rectangle"
    radius: Optional[float] = None
    center: Optional[tuple] = None

    def __post_init__(self):
        if self.n not in (1, 2):
            raise DomainError("lattice domains support n = 1 or 2")
        mask = np.asarray(self.mask, dtype=np.int8)
        if mask.shape != tuple(self.shape) or len(self.shape) != self.n:
            raise DomainError("mask shape does not match the domain")
        if not self.h > 0:
            raise DomainError("grid spacing must be positive")
        interior = mask == Cell.INTERIOR
        for ax in range(self.n):
            for shift in (1, -1):
                nb = np.roll(mask, shift, axis=ax)
                edge = [slice(None)] * self.n
                edge[ax] = 0 if shift == 1 else -1
                bad = interior & (nb == Cell.OUTSIDE)
                if np.any(bad) or np.any(interior[tuple(edge)]):
                    raise GeometryError("an Interior node has a neighbour outside the domain")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    # -- constructors --------------------------------------------------------
    @classmethod
    def interval(cls, a: float, b: float, K: int) -> "LatticeDomain":
        """[a, b] with K nodes; the two end nodes are Boundary."""
        if not b > a or K < 3:
            raise DomainError("interval needs b > a and at least 3 nodes")
        mask = np.full(K, Cell.INTERIOR, dtype=np.int8)
        mask[[0, -1]] = Cell.BOUNDARY
        return cls(1, (K,), (b - a) / (K - 1), mask, (a,), "rectangle")

    @classmethod
    def rectangle(cls, shape: Sequence[int], h: float, origin: Sequence[float] = (0.0, 0.0)) -> "LatticeDomain":
        """Kx x Ky nodes with spacing h; the outer ring is Boundary."""
        shape = tuple(int(s) for s in shape)
        if len(shape) != 2 or min(shape) < 3:
            raise DomainError("rectangle needs two extents of at least 3 nodes")
        mask = np.full(shape, Cell.BOUNDARY, dtype=np.int8)
        mask[1:-1, 1:-1] = Cell.INTERIOR
        return cls(2, shape, float(h), mask, tuple(origin), "rectangle")

    @classmethod
    def disk(cls, radius: float, K: int, center: Sequence[float] = (0.0, 0.0)) -> "LatticeDomain":
        """K x K nodes covering a disk; Boundary is the first layer of nodes outside it."""
        if not radius > 0 or K < 7:
            raise DomainError("disk needs a positive radius and K >= 7")
        h = 2.0 * radius / (K - 3)
        c = np.asarray(center, dtype=float)
        origin = c - 0.5 * (K - 1) * h
        x = origin[0] + h * np.arange(K)
        y = origin[1] + h * np.arange(K)
        X, Y = np.meshgrid(x, y, indexing="ij")
        inside = np.hypot(X - c[0], Y - c[1]) < radius * (1 - 1e-12)
        near = np.zeros_like(inside)
        near[1:, :] |= inside[:-1, :]
        near[:-1, :] |= inside[1:, :]
        near[:, 1:] |= inside[:, :-1]
        near[:, :-1] |= inside[:, 1:]
        mask = np.where(inside, Cell.INTERIOR, np.where(near, Cell.BOUNDARY, Cell.OUTSIDE)).astype(np.int8)
        return cls(2, (K, K), h, mask, tuple(origin), "disk", float(radius), tuple(c))

    # -- geometry ------------------------------------------------------------
    def coords(self) -> np.ndarray:
        axes = [self.origin[a] + self.h * np.arange(self.shape[a]) for a in range(self.n)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @property
    def interior(self) -> np.ndarray:
        return self.mask == Cell.INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.mask == Cell.BOUNDARY

    @property
    def active(self) -> np.ndarray:
        return self.mask != Cell.OUTSIDE

    def boundary_points(self) -> np.ndarray:
        """Where boundary data are evaluated: node positions, projected onto the circle for disks."""
        x = self.coords()[self.boundary]
        if self.kind == "disk":
            c = np.asarray(self.center)
            d = x - c
            r = np.linalg.norm(d, axis=-1, keepdims=True)
            x = c + self.radius * d / np.where(r > 0, r, 1.0)
        return x

    def distance_to_boundary(self) -> np.ndarray:
        """Distance of every node to the continuous boundary (rectangle edges or circle)."""
        x = self.coords()
        if self.kind == "disk":
            return self.radius - np.linalg.norm(x - np.asarray(self.center), axis=-1)
        lo = np.asarray(self.origin)
        hi = lo + self.h * (np.asarray(self.shape) - 1)
        return np.minimum(x - lo, hi - x).min(axis=-1)

    def describe(self) -> dict:
        d = {"n": self.n, "shape": list(self.shape), "h": self.h, "origin": list(self.origin), "mask_type": self.kind}
        if self.kind == "disk":
            d["radius"] = self.radius
            d["center"] = list(self.center)
        return d


@dataclass(frozen=True, eq=False)
class _Weights:
    mass: np.ndarray
    edges: tuple
    stiff: np.ndarray


def _weights(dom: LatticeDomain) -> _Weights:
    act = dom.active.astype(float)
    n = dom.n
    if n == 1:
        cells = act[:-1] * act[1:]
        mass = np.zeros(dom.shape)
        mass[:-1] += 0.5 * cells
        mass[1:] += 0.5 * cells
        edges = (cells.copy(),)
    else:
        cells = act[:-1, :-1] * act[1:, :-1] * act[:-1, 1:] * act[1:, 1:]
        mass = np.zeros(dom.shape)
        for sx in (slice(None, -1), slice(1, None)):
            for sy in (slice(None, -1), slice(1, None)):
                mass[sx, sy] += 0.25 * cells
        ex = np.zeros((dom.shape[0] - 1, dom.shape[1]))
        ex[:, :-1] += 0.5 * cells
        ex[:, 1:] += 0.5 * cells
        ey = np.zeros((dom.shape[0], dom.shape[1] - 1))
        ey[:-1, :] += 0.5 * cells
        ey[1:, :] += 0.5 * cells
        edges = (ex, ey)
    mass *= dom.h ** n
    scale = dom.h ** (n - 2)
    edges = tuple(e * scale for e in edges)
    stiff = np.zeros(dom.shape)
    for ax, e in enumerate(edges):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        stiff[tuple(lo)] += e
        stiff[tuple(hi)] += e
    if np.any(dom.interior & (mass <= 0)):
        raise GeometryError("an Interior node touches no active cell")
    return _Weights(mass, edges, stiff)


@dataclass(eq=False)
class GridField:
    domain: LatticeDomain
    m: int
    values: np.ndarray
    boundary_data: np.ndarray
    q: float

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float)
        shape = tuple(self.domain.shape) + (self.m,)
        if self.values.shape != shape:
            raise DomainError(f"values must have shape {shape}")
        bd = np.asarray(self.boundary_data, dtype=float)
        if bd.shape != (int(self.domain.boundary.sum()), self.m):
            raise DomainError("boundary_data must list one m-vector per Boundary node")
        self.boundary_data = bd
        if np.any(np.linalg.norm(bd, axis=-1) > self.q + NORM_TOL):
            raise DomainError("boundary data exceed q")
        self.values[self.domain.boundary] = bd
        self.values[~self.domain.active] = 0.0
        if np.any(np.linalg.norm(self.values, axis=-1) > self.q + NORM_TOL):
            raise DomainError("field values exceed q")

    @classmethod
    def from_boundary(cls, domain: LatticeDomain, m: int, q: float, data: Callable, fill=None) -> "GridField":
        """Boundary nodes take ``data(points)`` (points of shape (k, n)); Interior nodes ``fill``."""
        bd = np.asarray(data(domain.boundary_points()), dtype=float).reshape(-1, m)
        vals = np.zeros(tuple(domain.shape) + (m,))
        if fill is not None:
            vals[domain.interior] = fill
        return cls(domain, m, vals, bd, q)

    def with_values(self, values) -> "GridField":
        return GridField(self.domain, self.m, values, self.boundary_data, self.q)


# -- boundary data ----------------------------------------------------------------

def constant_data(vec) -> Callable:
    v = np.atleast_1d(np.asarray(vec, dtype=float))
    return lambda x: np.broadcast_to(v, (x.shape[0], v.size)).copy()


def hedgehog_data(q: float, center=(0.0, 0.0), zero_arc: Optional[tuple] = None) -> Callable:
    """``q (x - c)/|x - c|`` on the boundary, optionally faded to 0 on an arc.

    ``zero_arc = (theta0, half_width, ramp)`` makes the data vanish for
    polar angles within ``half_width`` of ``theta0`` and rise back to the
    full hedgehog over a further ``ramp`` with a smoothstep.
    """
    c = np.asarray(center, dtype=float)

    def data(x):
        d = x - c
        r = np.linalg.norm(d, axis=-1, keepdims=True)
        out = q * d / np.where(r > 0, r, 1.0)
        if zero_arc is not None:
            th0, hw, ramp = zero_arc
            th = np.arctan2(d[:, 1], d[:, 0])
            dist = np.abs((th - th0 + np.pi) % (2 * np.pi) - np.pi)
            t = np.clip((dist - hw) / ramp, 0.0, 1.0)
            out = out * (t * t * (3 - 2 * t))[:, None]
        return out

    return data


def edge_data(dom: LatticeDomain, left, right, bottom=None, top=None) -> Callable:
    """Per-edge constants on a rectangle (1D: left and right ends); corners take the x-edge value."""
    lo = np.asarray(dom.origin)
    hi = lo + dom.h * (np.asarray(dom.shape) - 1)
    tol = 1e-9 * dom.h
    vals = [np.atleast_1d(np.asarray(v, dtype=float)) for v in (left, right, bottom, top) if v is not None]

    def data(x):
        out = np.zeros((x.shape[0], vals[0].size))
        if dom.n == 2:
            out[np.abs(x[:, 1] - lo[1]) < tol] = vals[2]
            out[np.abs(x[:, 1] - hi[1]) < tol] = vals[3]
        out[np.abs(x[:, 0] - lo[0]) < tol] = vals[0]
        out[np.abs(x[:, 0] - hi[0]) < tol] = vals[1]
        return out

    return data


# -- energy -----------------------------------------------------------------------

def _dirichlet(u: np.ndarray, wts: _Weights) -> float:
    total = 0.0
    for ax, e in enumerate(wts.edges):
        d = np.diff(u, axis=ax)
        total += 0.5 * float(np.sum(e * np.sum(d * d, axis=-1)))
    return total


def _potential(u: np.ndarray, spec: PotentialSpec, wts: _Weights, active: np.ndarray) -> float:
    return float(np.sum(wts.mass[active] * spec(u[active])))


def grid_energy(f: GridField, spec: PotentialSpec) -> float:
    """Dirichlet energy plus the lumped potential term (trapezoid weights)."""
    wts = _weights(f.domain)
    return _dirichlet(f.values, wts) + _potential(f.values, spec, wts, f.domain.active)


def modulus_field(f: GridField) -> np.ndarray:
    """Pointwise Euclidean norm of the field values."""
    return np.linalg.norm(f.values, axis=-1)


# -- proximal maps ------------------------------------------------------------------

def _bisect(g, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        neg = g(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


def prox_radial(p: RadialPotential, a, tau) -> np.ndarray:
    """argmin over s in [0, q] of (s - a)^2 / (2 tau) + W_rad(s), smallest on ties.

    ``a`` may be negative (shifted arguments); then the answer is 0.
    """
    a = np.asarray(a, dtype=float)
    tau = np.broadcast_to(np.asarray(tau, dtype=float), a.shape)
    q = p.q
    top = np.clip(a, 0.0, q)
    if p.kind is Kind.ZERO:
        return top
    pieces = p.pieces()
    if pieces is not None:
        edges, vals = pieces
        best_s = np.zeros_like(a)
        best_c = a * a / (2 * tau)
        for k in range(len(vals)):
            s = np.clip(a, edges[k], edges[k + 1])
            c = (s - a) ** 2 / (2 * tau) + p(s, check=False)
            better = c < best_c
            best_s = np.where(better, s, best_s)
            best_c = np.where(better, c, best_c)
        return best_s
    e = p.exponent
    pos = a > 0.0
    if e == 1.0:
        s = np.maximum(a - tau, 0.0)
    elif e == 2.0:
        s = np.maximum(a, 0.0) / (1.0 + 2.0 * tau)
    elif e > 1.0:
        s = _bisect(lambda x: (x - a) / tau + e * x ** (e - 1.0), np.zeros_like(a), np.maximum(a, 0.0))
    else:
        # W' is decreasing: the stationarity function is convex with its
        # minimum at s_star, so the only candidate besides 0 is the larger root.
        s_star = (e * (1.0 - e) * tau) ** (1.0 / (2.0 - e))
        lo = np.minimum(s_star, np.maximum(a, 0.0))
        hi = np.maximum(a, 0.0)

        def g(x):
            with np.errstate(divide="ignore", invalid="ignore"):
                return (x - a) / tau + e * np.where(x > 0, x, np.inf) ** (e - 1.0)

        root = _bisect(g, lo, hi)
        has = pos & (g(lo) < 0.0)
        s = np.where(has, root, 0.0)
    s = np.where(pos, np.minimum(s, q), 0.0)
    if e is not None and e < 1.0:
        cost_s = (s - a) ** 2 / (2 * tau) + s ** e
        cost_0 = a * a / (2 * tau)
        s = np.where(cost_s < cost_0, s, 0.0)
    return s


def prox_vector(spec: PotentialSpec, y: np.ndarray, tau) -> np.ndarray:
    """Proximal point of tau*W at each m-vector along the last axis.

    W is nondecreasing along rays, so the prox keeps the direction of y and
    solves a one-dimensional problem for the length.
    """
    y = np.asarray(y, dtype=float)
    a = _norm(y)
    radial = getattr(spec.w_rad, "prox", None) or (lambda b, t: prox_radial(spec.w_rad, b, t))
    if spec.w_0 is None:
        s = radial(a, tau)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            xi = np.where(a[..., None] > 0, y / np.where(a > 0, a, 1.0)[..., None], 0.0)
        tau_b = np.broadcast_to(np.asarray(tau, dtype=float), a.shape)
        if spec.w0_kind == "ray_linear":
            c = spec.w0_coeff * (1.0 + xi[..., 0]) / 2.0
            s = radial(a - tau_b * c, tau_b)
        else:
            s = _prox_generic(spec, a, xi, tau_b)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(a > 0, s / np.where(a > 0, a, 1.0), 0.0)
    return y * scale[..., None]


def _prox_generic(spec, a, xi, tau, samples=2001):
    """Dense search along each ray, then golden refinement around the best sample."""
    q = spec.q
    top = np.minimum(a, q)
    t = np.linspace(0.0, 1.0, samples)
    S = top[..., None] * t
    cost = (S - a[..., None]) ** 2 / (2 * tau[..., None]) + spec.radial_angular(S, xi[..., None, :])
    k = np.argmin(cost, axis=-1)
    lo = np.maximum(top * t[np.maximum(k - 1, 0)], 0.0)
    hi = np.minimum(top * t[np.minimum(k + 1, samples - 1)], top)
    best = np.take_along_axis(S, k[..., None], -1)[..., 0]
    best_c = np.take_along_axis(cost, k[..., None], -1)[..., 0]

    def f(s):
        return (s - a) ** 2 / (2 * tau) + spec.radial_angular(s, xi)

    gr = (math.sqrt(5) - 1) / 2
    x1 = hi - gr * (hi - lo)
    x2 = lo + gr * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(60):
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = hi - gr * (hi - lo)
        nx2 = lo + gr * (hi - lo)
        x1, x2 = nx1, nx2
        f1, f2 = f(x1), f(x2)
    x = 0.5 * (lo + hi)
    fx = f(x)
    return np.where(fx < best_c, x, best)


# -- solver ----------------------------------------------------------------------

@dataclass
class SolveStats:
    iterations: int
    final_energy: float
    last_energy_decrease: float
    max_constraint_violation_before_projection: float
    converged: bool
    energies: list = field(default_factory=list, repr=False)
    polish_sweeps: int = 0

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_energy": self.final_energy,
            "last_energy_decrease": self.last_energy_decrease,
            "max_constraint_violation_before_projection": self.max_constraint_violation_before_projection,
            "converged": self.converged,
            "polish_sweeps": self.polish_sweeps,
        }


class _System:
    """Active nodes flattened; A is the stiffness matrix of the weighted edges."""

    def __init__(self, dom: LatticeDomain):
        wts = _weights(dom)
        self.dom = dom
        active = dom.active.ravel()
        inner = dom.interior.ravel()
        # Free (Interior) nodes first so that they form a leading slice.
        self.flat = np.concatenate([np.flatnonzero(inner), np.flatnonzero(active & ~inner)])
        self.nf = int(inner.sum())
        pos = -np.ones(active.size, dtype=np.int64)
        pos[self.flat] = np.arange(self.flat.size)
        pos = pos.reshape(dom.shape)
        rows, cols, vals = [], [], []
        for ax, e in enumerate(wts.edges):
            lo = [slice(None)] * dom.n
            hi = [slice(None)] * dom.n
            lo[ax] = slice(None, -1)
            hi[ax] = slice(1, None)
            i = pos[tuple(lo)]
            j = pos[tuple(hi)]
            sel = e > 0
            i, j, w = i[sel], j[sel], e[sel]
            rows += [i, j, i, j]
            cols += [i, j, j, i]
            vals += [w, w, -w, -w]
        na = self.flat.size
        self.A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(na, na))
        self.diag = self.A.diagonal()
        self.mass = wts.mass.ravel()[self.flat]
        self.free = np.arange(na) < self.nf
        parity = (np.indices(dom.shape).sum(axis=0) % 2).ravel()[self.flat]
        self.colours = [self.free & (parity == c) for c in (0, 1)]

    def gather(self, values: np.ndarray) -> np.ndarray:
        m = values.shape[-1]
        return values.reshape(-1, m)[self.flat].copy()

    def scatter(self, U: np.ndarray, like: np.ndarray) -> np.ndarray:
        out = np.zeros_like(like)
        m = like.shape[-1]
        out.reshape(-1, m)[self.flat] = U
        return out

    def dirichlet(self, U, AU=None) -> float:
        if AU is None:
            AU = self.A @ U
        return 0.5 * float(np.sum(U * AU))

    def potential(self, U, spec) -> float:
        return float(self.mass @ _node_potential(spec, U))


def _norm(U):
    return np.sqrt(np.einsum("...i,...i->...", U, U))


def _node_potential(spec, U):
    if spec.w_0 is None:
        return spec.w_rad(_norm(U), check=False)
    return spec(U)


class _Ramp:
    """Continuous lower approximation of a piecewise-constant W_rad.

    Every jump of height J at s_k becomes the ramp ``J * clip((s - s_k)/eps, 0, 1)``.
    The result is piecewise linear, increases to W_rad as eps -> 0, and its
    proximal map is exact.
    """

    def __init__(self, p: RadialPotential, eps: float):
        edges, vals = p.pieces()
        self.q = p.q
        self.starts = np.asarray(edges[:-1], dtype=float)
        self.jumps = np.diff(np.concatenate([[0.0], vals]))
        self.eps = float(eps)
        knots = np.concatenate([[0.0, self.q], self.starts, np.minimum(self.starts + self.eps, self.q)])
        self.knots = np.unique(np.clip(knots, 0.0, self.q))

    def __call__(self, s, check: bool = False):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for s0, J in zip(self.starts, self.jumps):
            out = out + J * np.clip((s - s0) / self.eps, 0.0, 1.0)
        return out

    def prox(self, a, tau):
        a = np.asarray(a, dtype=float)
        k = self.knots
        wk = self(k)
        best_s = np.zeros_like(a)
        best_c = a * a / (2 * tau)
        for j in range(k.size - 1):
            slope = (wk[j + 1] - wk[j]) / (k[j + 1] - k[j])
            s = np.clip(a - tau * slope, k[j], k[j + 1])
            c = (s - a) ** 2 / (2 * tau) + self(s)
            better = c < best_c
            best_s = np.where(better, s, best_s)
            best_c = np.where(better, c, best_c)
        return best_s


def harmonic_extension(f: GridField) -> GridField:
    """Discrete harmonic extension of the boundary data (sparse direct solve), projected to |u| <= q."""
    sysm = _System(f.domain)
    U = sysm.gather(f.values)
    fr = sysm.free
    if fr.any():
        A = sysm.A
        rhs = -(A[fr][:, ~fr] @ U[~fr])
        sol = spsolve(A[fr][:, fr].tocsc(), rhs)
        U[fr] = np.asarray(sol).reshape(int(fr.sum()), f.m)
    norm = np.linalg.norm(U, axis=-1, keepdims=True)
    U = np.where(norm > f.q, U * f.q / np.where(norm > 0, norm, 1.0), U)
    return f.with_values(sysm.scatter(U, f.values))


def _polish(sysm: _System, U, spec, sweeps, tol):
    E = sysm.dirichlet(U) + sysm.potential(U, spec)
    energies = [E]
    done = 0
    for _ in range(sweeps):
        for sel in sysm.colours:
            d = sysm.diag[sel]
            pull = sysm.diag[:, None] * U - sysm.A @ U
            U[sel] = prox_vector(spec, pull[sel] / d[:, None], sysm.mass[sel] / d)
        done += 1
        En = sysm.dirichlet(U) + sysm.potential(U, spec)
        energies.append(En)
        dec = E - En
        E = En
        if dec <= tol:
            break
    return U, done, energies


def polish_field(f: GridField, spec: PotentialSpec, sweeps: int = 50, tol: float = 0.0):
    """Red-black sweeps of exact nodewise minimisation; returns (field, sweeps, energies)."""
    sysm = _System(f.domain)
    U, done, energies = _polish(sysm, sysm.gather(f.values), spec, sweeps, tol)
    return f.with_values(sysm.scatter(U, f.values)), done, energies


def _fista(sysm: _System, U, spec, tau, max_iters, tol):
    """Monotone accelerated forward-backward loop on the free nodes.

    A is linear, so the product at the extrapolated point is combined from
    the products at the last two iterates; one sparse product per step.
    """
    fr = slice(0, sysm.nf)
    step = tau / sysm.mass[fr][:, None]
    q = spec.q

    def fb(V, AV):
        Y = V[fr] - step * AV[fr]
        out = V.copy()
        out[fr] = prox_vector(spec, Y, tau)
        viol = float(np.max(_norm(Y), initial=0.0)) - q
        return out, max(viol, 0.0)

    def energy(V):
        AV = sysm.A @ V
        return sysm.dirichlet(V, AV) + sysm.potential(V, spec), AV

    X = U
    E, AX = energy(X)
    energies = [E]
    Y, AY = X.copy(), AX.copy()
    t = 1.0
    viol_max = 0.0
    decrease = math.inf
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        Z, viol = fb(Y, AY)
        Ez, AZ = energy(Z)
        restart = Ez > E
        if restart:
            Z, viol = fb(X, AX)
            Ez, AZ = energy(Z)
            t = 1.0
        viol_max = max(viol_max, viol)
        decrease = E - Ez
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if restart:
            Y, AY = Z.copy(), AZ.copy()
        else:
            beta = (t - 1.0) / t_new
            Y = Z + beta * (Z - X)
            AY = AZ + beta * (AZ - AX)
        X, AX, E, t = Z, AZ, Ez, t_new
        energies.append(E)
        # A plain step with a tiny decrease means a fixed point; a tiny
        # decrease of a momentum step may be a coincidence, so confirm it.
        if restart and decrease < tol:
            converged = True
            break
        if not restart and 0.0 <= decrease < tol and it > 1:
            Zp, _ = fb(X, AX)
            if E - energy(Zp)[0] < tol:
                converged = True
                break
    return X, it, energies, decrease, viol_max, converged


def minimize_field(
    f0: GridField,
    spec: PotentialSpec,
    max_iters: int = 5000,
    tol: float = 1e-10,
    init: str = "harmonic",
    polish_sweeps: int = 20,
    continuation: int = 8,
    jitter: float = 0.0,
    seed: int = 42,
):
    """Monotone accelerated forward-backward splitting.

    Each step takes an explicit gradient step on the Dirichlet term with
    step tau = min(h^2/(4n), 1/L), then the exact pointwise prox of tau*W
    (which also enforces |u| <= q). A momentum step that raises the energy
    is replaced by a plain forward-backward step from the last iterate,
    which cannot raise it since tau <= 1/L. The loop stops once a plain
    step decreases the energy by less than ``tol``.

    The prox of a jump potential only sees values below sqrt(2 tau), so for
    piecewise-constant W_rad the solve is preceded by ``continuation``
    stages on ramped potentials whose ramp width halves from q. Red-black
    exact nodewise sweeps finish the solve. Hitting ``max_iters`` in the
    final stage sets ``converged=False`` rather than raising.
    """
    if spec.m != f0.m or not math.isclose(spec.q, f0.q):
        raise DomainError("potential and field disagree on m or q")
    dom = f0.domain
    sysm = _System(dom)
    if init == "harmonic":
        f0 = harmonic_extension(f0)
    elif init != "given":
        raise DomainError(f"unknown init {init!r}")
    U = sysm.gather(f0.values)
    fr = sysm.free
    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        U[fr] += jitter * f0.q * rng.standard_normal(U[fr].shape)
        nrm = np.linalg.norm(U, axis=-1, keepdims=True)
        U = np.where(nrm > f0.q, U * f0.q / np.where(nrm > 0, nrm, 1.0), U)
    if not fr.any():
        E = sysm.dirichlet(U) + sysm.potential(U, spec)
        return f0.with_values(sysm.scatter(U, f0.values)), SolveStats(0, E, 0.0, 0.0, True, [E])
    lip = float(np.max(2.0 * sysm.diag[fr] / sysm.mass[fr]))
    tau = min(dom.h ** 2 / (4 * dom.n), 1.0 / lip)

    stages = []
    if continuation and spec.w_rad.pieces() is not None and spec.w_rad.kind is not Kind.ZERO:
        stages = [replace(spec, w_rad=_Ramp(spec.w_rad, spec.q * 0.5 ** k)) for k in range(continuation)]
    for st in stages:
        U, *_ = _fista(sysm, U, st, tau, max_iters, tol)
    U, it, energies, decrease, viol_max, converged = _fista(sysm, U, spec, tau, max_iters, tol)
    E = energies[-1]
    sweeps = 0
    if polish_sweeps > 0:
        U, sweeps, pe = _polish(sysm, U, spec, polish_sweeps, tol)
        if pe[-1] < E:
            decrease = E - pe[-1]
        energies.extend(pe[1:])
        E = pe[-1]
    stats = SolveStats(it, E, float(decrease), viol_max, converged, energies, sweeps)
    return f0.with_values(sysm.scatter(U, f0.values)), stats


# -- serialisation -----------------------------------------------------------------

def field_csv(f: GridField) -> str:
    """Active nodes as rows ``i[,j],u1,...,um`` with 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    axes = ["i", "j"][: f.domain.n]
    w.writerow(axes + [f"u{k + 1}" for k in range(f.m)])
    for idx in zip(*np.nonzero(f.domain.active)):
        w.writerow([str(int(i)) for i in idx] + [f"{v:.17g}" for v in f.values[idx]])
    return buf.getvalue()


def field_sidecar(f: GridField) -> dict:
    d = f.domain.describe()
    d.update({"q": f.q, "m": f.m})
    return d


def save_field(f: GridField, csv_path, json_path=None) -> None:
    from pathlib import Path

    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    csv_path.write_text(field_csv(f), encoding="utf-8")
    json_path.write_text(json.dumps(field_sidecar(f), sort_keys=True, indent=2) + "\n", encoding="utf-8")
