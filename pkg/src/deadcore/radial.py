"""Radially reduced minimisation of J^lam over monotone profiles with h(R) = q.

The discrete functional on a radial grid 0 = r_0 < ... < r_N = R is

    J(h) = sum_i  rbar_i^(n-1) dr_i [ 1/2 ((h_{i+1} - h_i)/dr_i)^2 + lam W(h_i) ]

with ``rbar_i`` the cell midpoint. The surface measure |S^(n-1)| is dropped
throughout. The potential is sampled at the lower node of each cell, which
never overestimates a jump of W along a nondecreasing profile.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from numba import njit
from scipy.linalg import solve_banded

from .errors import DomainError, NonConvergenceError, ResourceError
from .potential import IqResult, Kind, RadialPotential, Variant, compute_iq

DP_BUDGET = 2e9
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Tie(str, Enum):
    PREFER_LOW = "PreferLow"
    PREFER_HIGH = "PreferHigh"


@dataclass(frozen=True)
class RadialGrid:
    n: int
    R: float
    radii: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if self.n < 1:
            raise DomainError("dimension n must be >= 1")
        if r.ndim != 1 or r.size < 2 or r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise DomainError("radii must be strictly increasing and start at 0")
        if not math.isclose(r[-1], self.R, rel_tol=1e-12):
            raise DomainError("last radius must equal R")
        r = r.copy()
        r[-1] = self.R
        r.setflags(write=False)
        object.__setattr__(self, "radii", r)

    @classmethod
    def uniform(cls, n: int, R: float, N: int) -> "RadialGrid":
        if not R > 0:
            raise DomainError("R must be positive")
        return cls(int(n), float(R), np.linspace(0.0, R, int(N) + 1))

    @property
    def N(self) -> int:
        return self.radii.size - 1

    @property
    def dr(self) -> np.ndarray:
        return np.diff(self.radii)

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.radii[1:] + self.radii[:-1])

    @property
    def weights(self) -> np.ndarray:
        """Cell weights rbar_i^(n-1); equal to 1 in one dimension."""
        return self.mid ** (self.n - 1)


@dataclass
class RadialProfile:
    grid: RadialGrid
    values: np.ndarray
    lam: float
    energy: float
    q: float
    M: Optional[int] = None

    @property
    def radii(self) -> np.ndarray:
        return self.grid.radii

    def __call__(self, r):
        """Piecewise-linear interpolation (monotone, since the values are)."""
        return np.interp(r, self.grid.radii, self.values)

    def to_csv(self) -> str:
        return profile_csv(self.grid.radii, self.values)


def profile_csv(radii, values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "h"])
    for r, h in zip(radii, values):
        w.writerow([f"{r:.17g}", f"{h:.17g}"])
    return buf.getvalue()


def _energy(grid: RadialGrid, values: np.ndarray, p: RadialPotential, lam: float) -> float:
    dr = grid.dr
    w = grid.weights
    g = np.diff(values) / dr
    pot = p(values[:-1], check=False)
    return float(np.sum(w * dr * (0.5 * g * g + lam * pot)))


def discrete_energy(profile: RadialProfile, p: RadialPotential, rule: str = "lower") -> float:
    """Discrete J^lam of a profile with midpoint radial weights.

    ``rule="lower"`` samples the potential at the lower node of each cell,
    which is the energy the solvers minimise; ``rule="midpoint"`` samples it
    at the mean of the two node values.
    """
    v = np.asarray(profile.values, dtype=float)
    if rule == "lower":
        return _energy(profile.grid, v, p, profile.lam)
    if rule != "midpoint":
        raise DomainError(f"unknown rule {rule!r}")
    grid = profile.grid
    g = np.diff(v) / grid.dr
    pot = p(0.5 * (v[1:] + v[:-1]), check=False)
    return float(np.sum(grid.weights * grid.dr * (0.5 * g * g + profile.lam * pot)))


def _check_profile(grid: RadialGrid, values: np.ndarray, q: float) -> None:
    if values.shape != grid.radii.shape:
        raise DomainError("profile length does not match grid")
    if np.any(np.diff(values) < -1e-12 * q) or values[-1] != q:
        raise DomainError("profile must be nondecreasing and end at q")
    if values.min() < -1e-12 * q or values.max() > q * (1 + 1e-12):
        raise DomainError("profile values must lie in [0, q]")


def make_profile(grid: RadialGrid, values, p: RadialPotential, lam: float = 1.0, M: Optional[int] = None) -> RadialProfile:
    """Wrap sampled values as a validated profile and compute its energy."""
    v = np.asarray(values, dtype=float).copy()
    _check_profile(grid, v, p.q)
    v = np.clip(v, 0.0, p.q)
    return RadialProfile(grid, v, float(lam), _energy(grid, v, p, lam), p.q, M)


# -- dynamic programming ------------------------------------------------------

def _dp(grid, levels, wl, lam, windows, tie, d2=None):
    """Exact DP over per-node level windows ``[lo_i, hi_i]`` (inclusive).

    Node N is pinned to the top level. Returns level indices per node.
    """
    N = grid.N
    dr = grid.dr
    w = grid.weights
    K = levels.size - 1
    if d2 is None:
        d2 = (levels[None, :] - levels[:, None]) ** 2
        d2 = np.where(np.triu(np.ones((K + 1, K + 1), dtype=bool)), d2, np.inf)
    lo0, hi0 = windows[0]
    V = np.zeros(hi0 - lo0 + 1)
    preds = []
    for i in range(N):
        lo, hi = windows[i]
        nlo, nhi = windows[i + 1]
        alpha = 0.5 * w[i] / dr[i]
        beta = lam * w[i] * dr[i]
        base = V + beta * wl[lo:hi + 1]
        T = base[:, None] + alpha * d2[lo:hi + 1, nlo:nhi + 1]
        best = T.min(axis=0)
        if not np.all(np.isfinite(best)):
            raise NonConvergenceError("DP windows admit no monotone path")
        near = T <= best + 1e-12 * np.abs(best)
        if tie is Tie.PREFER_LOW:
            a = near.argmax(axis=0)
        else:
            a = near.shape[0] - 1 - near[::-1].argmax(axis=0)
        preds.append(a + lo)
        V = T[a, np.arange(T.shape[1])]
    idx = np.empty(N + 1, dtype=np.int64)
    idx[N] = K
    for i in range(N - 1, -1, -1):
        nlo = windows[i + 1][0]
        idx[i] = preds[i][idx[i + 1] - nlo]
    return idx


def solve_dp(
    p: RadialPotential,
    n: int,
    R: float,
    lam: float,
    N: int,
    M: int,
    tie: Tie = Tie.PREFER_LOW,
    budget: float = DP_BUDGET,
    grid: Optional[RadialGrid] = None,
) -> RadialProfile:
    """Global minimiser of the discrete J^lam over monotone level-valued profiles.

    Values live on the M+1 uniform levels ``q*k/M``. Among optimal
    predecessors the lowest (PreferLow) or highest (PreferHigh) level wins.
    """
    tie = Tie(tie)
    if N < 16 or M < 8:
        raise DomainError("solve_dp needs N >= 16 and M >= 8")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if N * M * M > budget:
        raise ResourceError(f"N*M^2 = {N * M * M:.3g} exceeds budget {budget:.3g}")
    grid = grid or RadialGrid.uniform(n, R, N)
    if grid.N != N:
        raise DomainError("grid size does not match N")
    levels = p.q * np.arange(M + 1) / M
    levels[-1] = p.q
    wl = p(levels)
    windows = [(0, M)] * N + [(M, M)]
    idx = _dp(grid, levels, wl, lam, windows, tie)
    return make_profile(grid, levels[idx], p, lam, M)


def solve_dp_multires(
    p: RadialPotential,
    n: int,
    R: float,
    lam: float,
    N: int,
    M: int,
    tie: Tie = Tie.PREFER_LOW,
    factor: int = 4,
    tube: int = 3,
    grid: Optional[RadialGrid] = None,
) -> RadialProfile:
    """Coarse DP at M levels, then DP at ``factor*M`` levels inside a tube.

    The tube spans ``+-tube`` coarse levels around the coarse solution.
    """
    coarse = solve_dp(p, n, R, lam, N, M, tie, grid=grid)
    grid = coarse.grid
    Mf = factor * M
    levels = p.q * np.arange(Mf + 1) / Mf
    levels[-1] = p.q
    wl = p(levels)
    cidx = np.rint(coarse.values / p.q * M).astype(int)
    lo = np.clip((cidx - tube) * factor, 0, Mf)
    hi = np.clip((cidx + tube) * factor, 0, Mf)
    # Running extrema keep consecutive windows compatible with monotone paths.
    lo = np.minimum.accumulate(lo[::-1])[::-1]
    hi = np.maximum.accumulate(hi)
    windows = [(int(a), int(b)) for a, b in zip(lo, hi)]
    windows[-1] = (Mf, Mf)
    idx = _dp(grid, levels, wl, lam, windows, Tie(tie))
    return make_profile(grid, levels[idx], p, lam, Mf)


@njit(cache=True)
def _tube_kernel(dr, w, cand, wcand, lam, prefer_high):
    n_nodes, K = cand.shape
    N = n_nodes - 1
    V = np.zeros(K)
    Vn = np.empty(K)
    preds = np.empty((N, K), dtype=np.int64)
    for i in range(N):
        alpha = 0.5 * w[i] / dr[i]
        beta = lam * w[i] * dr[i]
        for b in range(K):
            vb = cand[i + 1, b]
            best = np.inf
            for a in range(K):
                d = vb - cand[i, a]
                if d >= 0.0:
                    t = V[a] + beta * wcand[i, a] + alpha * d * d
                    if t < best:
                        best = t
            tol = best + 1e-12 * abs(best)
            pick = -1
            for a in range(K):
                d = vb - cand[i, a]
                if d >= 0.0:
                    t = V[a] + beta * wcand[i, a] + alpha * d * d
                    if t <= tol:
                        pick = a
                        if not prefer_high:
                            break
            preds[i, b] = pick
            Vn[b] = best
        V[:] = Vn
    k = np.empty(n_nodes, dtype=np.int64)
    k[N] = np.argmin(V)
    for i in range(N - 1, -1, -1):
        k[i] = preds[i, k[i + 1]]
    return k


def _dp_values(grid, cand, wcand, lam, tie):
    """Exact DP where node i may take any value in the row ``cand[i]``.

    ``cand`` has shape (N+1, K); each row sorted ascending. Transitions must
    be nondecreasing. Returns the chosen column per node.
    """
    return _tube_kernel(grid.dr, grid.weights, np.ascontiguousarray(cand, dtype=float),
                        np.ascontiguousarray(wcand, dtype=float), float(lam), tie is Tie.PREFER_HIGH)


def refine_tube(
    profile: RadialProfile,
    p: RadialPotential,
    half_width: int = 20,
    delta: Optional[float] = None,
    rounds: int = 200,
    min_delta: Optional[float] = None,
    tie: Tie = Tie.PREFER_LOW,
) -> RadialProfile:
    """Iterated DP inside a shrinking tube around the current profile.

    Node i may move to ``h_i + k*delta`` for ``|k| <= half_width`` or drop to
    0. Each round re-centres the tube on the new optimum and halves ``delta``
    whenever no node reaches the tube wall. The current profile is always
    admissible, so the energy never increases. The default start
    ``delta = 8q/M`` is wide enough to move a free boundary pinned by level
    quantisation, which coordinate descent cannot do.
    """
    grid = profile.grid
    q = p.q
    lam = profile.lam
    tie = Tie(tie)
    if delta is None:
        delta = 8.0 * q / (profile.M or 100)
    if min_delta is None:
        min_delta = q * 1e-9
    h = np.array(profile.values, dtype=float)
    E = _energy(grid, h, p, lam)
    for _ in range(rounds):
        cand = np.clip(h[:, None] + delta * np.arange(-half_width, half_width + 1)[None, :], 0.0, q)
        cand = np.concatenate([np.zeros((h.size, 1)), cand], axis=1)
        cand[-1] = q
        wc = p(cand, check=False)
        k = _dp_values(grid, cand, wc, lam, tie)
        hn = cand[np.arange(h.size), k]
        En = _energy(grid, hn, p, lam)
        if En <= E:
            moved = np.any(np.abs(k - (half_width + 1)) == half_width)
            h, E = hn, En
        else:
            moved = False
        if not moved:
            delta *= 0.5
            if delta < min_delta:
                break
    h = np.maximum.accumulate(np.clip(h, 0.0, q))
    h[-1] = q
    out = make_profile(grid, h, p, lam, profile.M)
    return out if out.energy <= profile.energy else profile


# -- local polish ---------------------------------------------------------------

def _local_min(p, lo, hi, a, b, A, B, C, x0):
    """Vectorised minimisation of A(x-a)^2 + B(b-x)^2 + C W(x) on [lo, hi]."""

    def f(x):
        return A * (x - a) ** 2 + B * (b - x) ** 2 + C * p(x, check=False)

    with np.errstate(invalid="ignore", divide="ignore"):
        xq = np.where(A + B > 0, (A * a + B * b) / np.where(A + B > 0, A + B, 1.0), lo)
    cands = [x0, lo, hi, np.clip(xq, lo, hi)]
    pieces = p.pieces()
    if pieces is not None:
        edges = pieces[0]
        for e0, e1 in zip(edges[:-1], edges[1:]):
            cands.append(np.clip(np.clip(xq, e0, e1), lo, hi))
    else:
        u, v = lo.copy(), hi.copy()
        x1 = v - GOLDEN * (v - u)
        x2 = u + GOLDEN * (v - u)
        f1, f2 = f(x1), f(x2)
        for _ in range(64):
            left = f1 <= f2
            v = np.where(left, x2, v)
            u = np.where(left, u, x1)
            nx1 = np.where(left, v - GOLDEN * (v - u), x2)
            nx2 = np.where(left, x1, u + GOLDEN * (v - u))
            f1, f2 = np.where(left, f(nx1), f2), np.where(left, f1, f(nx2))
            x1, x2 = nx1, nx2
        cands.append(0.5 * (u + v))
    X = np.stack(cands)
    F = f(X)
    k = F.argmin(axis=0)
    best = X[k, np.arange(X.shape[1])]
    fbest = F[k, np.arange(X.shape[1])]
    return np.where(fbest < f(x0), best, x0)


def refine_local(profile: RadialProfile, p: RadialPotential, passes: int = 10) -> RadialProfile:
    """Coordinate-descent polish over continuous values.

    Each node value is minimised over ``[h_{i-1}, h_{i+1}]`` given its
    neighbours (red-black ordering, so same-colour nodes are independent).
    A move is accepted only if it lowers the two adjacent cell energies, so
    the discrete energy never increases and monotonicity is preserved.
    """
    grid = profile.grid
    h = np.array(profile.values, dtype=float)
    N = grid.N
    dr = grid.dr
    w = grid.weights
    lam = profile.lam
    B_all = 0.5 * w / dr
    C_all = lam * w * dr
    A_all = np.concatenate([[0.0], B_all[:-1]])
    for _ in range(passes):
        for start in (0, 1):
            i = np.arange(start, N, 2)
            a = np.where(i > 0, h[np.maximum(i - 1, 0)], 0.0)
            b = h[i + 1]
            lo = a
            hi = b
            h[i] = _local_min(p, lo, hi, a, b, A_all[i], B_all[i], C_all[i], h[i])
    out = make_profile(grid, h, p, lam, profile.M)
    if out.energy > profile.energy:
        return profile
    return out


def polish_convex(profile: RadialProfile, p: RadialPotential, tol: float = 1e-13, max_iter: int = 200) -> RadialProfile:
    """Projected Newton on the discrete energy for convex power-type potentials.

    For W(s) = s^alpha with alpha >= 1 the discrete functional is convex
    under the bound h >= 0, so this converges to its unique minimiser over
    continuous values. Returns the input unchanged for other kinds.
    """
    e = p.exponent
    if e is None or e < 1.0:
        return profile
    grid = profile.grid
    N = grid.N
    lam = profile.lam
    q = p.q
    dr = grid.dr
    w = grid.weights
    Kc = w / dr
    mass = lam * w * dr
    floor = q * 1e-12
    x = np.array(profile.values[:-1], dtype=float)

    def full(x):
        return np.concatenate([x, [q]])

    def energy(x):
        return _energy(grid, full(x), p, lam)

    def grad(x):
        h = full(x)
        d = np.diff(h)
        g = -Kc * d
        g[1:] += Kc[:-1] * d[:-1]
        dw = np.ones_like(x) if e == 1.0 else e * np.maximum(x, 0.0) ** (e - 1.0)
        return g + mass * dw

    E = energy(x)
    for _ in range(max_iter):
        g = grad(x)
        pg = np.where((x <= 0.0) & (g > 0.0), 0.0, g)
        if np.max(np.abs(pg)) <= tol * max(1.0, np.max(np.abs(mass))):
            break
        eps_act = min(1e-10 * q, float(np.linalg.norm(x - np.clip(x - g, 0.0, q))))
        active = (x <= eps_act) & (g > 0.0)
        _, d2w = p.smooth_derivatives(np.maximum(x, floor))
        diag = Kc.copy()
        diag[1:] += Kc[:-1]
        diag = diag + mass * d2w
        off = -Kc[:-1].copy()
        off[active[:-1] | active[1:]] = 0.0
        diag = np.where(active, 1.0, diag)
        rhs = np.where(active, 0.0, -g)
        ab = np.zeros((3, N))
        ab[0, 1:] = off
        ab[1] = diag
        ab[2, :-1] = off
        d = solve_banded((1, 1), ab, rhs)
        t = 1.0
        while True:
            xn = np.clip(x + t * d, 0.0, q)
            En = energy(xn)
            if En <= E + 1e-4 * float(g @ (xn - x)) or t < 1e-12:
                break
            t *= 0.5
        if En > E:
            break
        converged = E - En <= 1e-16 * max(abs(E), 1e-300)
        x, E = xn, En
        if converged:
            break
    x = np.maximum.accumulate(np.clip(x, 0.0, q))
    out = make_profile(grid, full(x), p, lam, profile.M)
    return out if out.energy <= profile.energy else profile


def polish_pieces(profile: RadialProfile, p: RadialPotential, max_iter: int = 20) -> RadialProfile:
    """Exact minimisation with every node held inside its piece of W.

    For piecewise-constant potentials the energy is a pure quadratic once
    each node's piece is fixed, so the minimiser over that piece assignment
    is one tridiagonal solve (nodes at 0 or on a piece edge are held fixed).
    The step is cut back so that no node leaves its piece. Returns the
    input unchanged for smooth kinds.
    """
    pieces = p.pieces()
    if pieces is None:
        return profile
    edges, _ = pieces
    grid = profile.grid
    Kc = grid.weights / grid.dr
    h = np.array(profile.values, dtype=float)
    E = profile.energy
    for _ in range(max_iter):
        k = np.searchsorted(edges, h, side="left") - 1
        on_edge = np.isin(h, edges)
        free = ~on_edge
        free[-1] = False
        idx = np.nonzero(free)[0]
        if idx.size == 0:
            break
        # Gradient of 1/2 sum Kc_i (h_{i+1} - h_i)^2 and its tridiagonal Hessian.
        d = np.diff(h)
        g = np.zeros_like(h)
        g[:-1] -= Kc * d
        g[1:] += Kc * d
        diag = np.zeros_like(h)
        diag[:-1] += Kc
        diag[1:] += Kc
        off = -Kc.copy()
        off[~(free[:-1] & free[1:])] = 0.0
        diag = np.where(free, diag, 1.0)
        rhs = np.where(free, -g, 0.0)
        ab = np.zeros((3, h.size))
        ab[0, 1:] = off
        ab[1] = diag
        ab[2, :-1] = off
        step = solve_banded((1, 1), ab, rhs)
        lo = edges[np.clip(k, 0, edges.size - 2)]
        hi = edges[np.clip(k + 1, 1, edges.size - 1)]
        t = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(free & (step > 0), (hi - h) / step, np.inf)
            dn = np.where(free & (step < 0), (lo - h) / step, np.inf)
        t = min(1.0, float(np.min(up)), float(np.min(dn)) * (1 - 1e-12))
        if not t > 0:
            break
        hn = np.where(free, h + t * step, h)
        hn = np.maximum.accumulate(np.clip(hn, 0.0, p.q))
        hn[-1] = p.q
        En = _energy(grid, hn, p, profile.lam)
        if not En < E:
            break
        h, E = hn, En
        if t == 1.0:
            break
    out = make_profile(grid, h, p, profile.lam, profile.M)
    return out if out.energy <= profile.energy else profile


def solve_profile(
    p: RadialPotential,
    n: int,
    R: float,
    lam: float,
    N: int,
    M: int,
    tie: Tie = Tie.PREFER_LOW,
    passes: int = 40,
    grid: Optional[RadialGrid] = None,
    tube: bool = True,
) -> RadialProfile:
    """DP seeds, tube re-solves, coordinate-descent polish, Newton for convex kinds.

    With M levels on N cells a steep profile rises by only a few levels per
    cell, and the level-valued DP then pays a rounding penalty of order
    ``(qN/M)^2`` that can select the wrong branch. A second seed is therefore
    computed by the same DP on about M/4 cells, where every cell spans many
    levels, and interpolated onto the fine grid. Both seeds are refined and
    the one with lower energy is kept.
    """
    tie = Tie(tie)
    prof = solve_dp(p, n, R, lam, N, M, tie, grid=grid)
    seeds = [prof]
    Nc = max(16, M // 4)
    if tube and Nc < N:
        cgrid = RadialGrid(n, R, np.interp(np.linspace(0.0, 1.0, Nc + 1),
                                           np.linspace(0.0, 1.0, prof.grid.N + 1), prof.grid.radii))
        coarse = solve_dp(p, n, R, lam, Nc, M, tie, grid=cgrid)
        vals = np.interp(prof.grid.radii, cgrid.radii, coarse.values)
        seeds.append(make_profile(prof.grid, vals, p, lam, M))
    best = None
    for seed in seeds:
        cand = refine_tube(seed, p, tie=tie) if tube else seed
        cand = polish_pieces(polish_convex(refine_local(cand, p, passes), p), p)
        if best is None or cand.energy < best.energy - 1e-12 * abs(best.energy):
            best = cand
    return best


# -- comparison functions -------------------------------------------------------

@dataclass
class ComparisonPair:
    upper: RadialProfile
    lower: RadialProfile
    lambda_bracket: tuple

    @property
    def bracket_width(self) -> float:
        """Sup-distance between the two envelopes."""
        return float(np.max(np.abs(self.upper.values - self.lower.values)))


def comparison_pair(
    p: RadialPotential,
    n: int,
    R: float,
    N: int,
    M: int,
    eps: float = 1e-3,
    passes: int = 40,
    grid: Optional[RadialGrid] = None,
) -> ComparisonPair:
    """Approximate the largest and smallest radial minimisers of J on B_R.

    The upper envelope solves at lam = 1 - eps (ties to the highest level),
    the lower one at lam = 1 + eps (ties to the lowest level).
    """
    if not 0.0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 0.5)")
    tol = p.q / M + 1e-9 * p.q
    while eps >= 1e-6:
        up = solve_profile(p, n, R, 1.0 - eps, N, M, Tie.PREFER_HIGH, passes, grid)
        lo = solve_profile(p, n, R, 1.0 + eps, N, M, Tie.PREFER_LOW, passes, grid)
        if np.all(lo.values <= up.values + tol):
            return ComparisonPair(up, lo, (1.0 - eps, 1.0 + eps))
        eps /= 10.0
    raise NonConvergenceError("envelopes stay unordered for eps down to 1e-6")


def zero_tolerance(q: float, M: Optional[int]) -> float:
    return q * 1e-3 + (q / M if M else 0.0)


def core_radius(profile: RadialProfile, ztol: Optional[float] = None) -> float:
    """Largest r such that the profile stays below ``ztol`` on [0, r]."""
    if ztol is None:
        ztol = zero_tolerance(profile.q, profile.M)
    above = np.nonzero(profile.values > ztol)[0]
    k = above[0] - 1 if above.size else profile.values.size - 1
    return float(profile.grid.radii[k]) if k >= 0 else 0.0


def _finite_or_none(x):
    return x if (x is not None and math.isfinite(x)) else None


@dataclass
class DeadCoreReport:
    core_radius: float
    iq: IqResult
    iq_sqrt2w: IqResult
    theorem2_threshold: float
    lemma_pl3_core_bound: float
    has_dead_core: bool
    n: int
    R: float
    q: float
    N: int
    M: Optional[int]
    lambda_bracket: tuple
    zero_tolerance: float = 0.0

    def to_dict(self) -> dict:
        return {
            "core_radius": self.core_radius,
            "iq_value": _finite_or_none(self.iq.value),
            "iq_variant": self.iq.definition_variant.value,
            "iq_sqrt2w_value": _finite_or_none(self.iq_sqrt2w.value),
            "iq_normalization_note": (
                "threshold (4n+sqrt2)*I_q uses int ds/sqrt(W); core bound R - sqrt2*I_q "
                "uses int ds/sqrt(2W); both are reported"
            ),
            "theorem2_threshold": _finite_or_none(self.theorem2_threshold),
            "lemma_pl3_core_bound": _finite_or_none(self.lemma_pl3_core_bound),
            "has_dead_core": self.has_dead_core,
            "n": self.n,
            "R": self.R,
            "q": self.q,
            "N": self.N,
            "M": self.M,
            "lambda_bracket": list(self.lambda_bracket),
            "zero_tolerance": self.zero_tolerance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _safe_iq(p: RadialPotential, variant: Variant) -> IqResult:
    try:
        return compute_iq(p, variant)
    except DomainError:
        return IqResult(math.inf, variant, 0.0)


def dead_core_report(pair: ComparisonPair, p: RadialPotential, ztol: Optional[float] = None) -> DeadCoreReport:
    up = pair.upper
    iq = _safe_iq(p, Variant.SQRT_W)
    iq2 = _safe_iq(p, Variant.SQRT_2W)
    if ztol is None:
        # with a divergent I_q the claim is strict positivity, which refined
        # profiles resolve below the level spacing; only exact zeros count
        ztol = zero_tolerance(p.q, up.M) if iq.finite else 0.0
    rc = core_radius(up, ztol)
    n = up.grid.n
    return DeadCoreReport(
        core_radius=rc,
        iq=iq,
        iq_sqrt2w=iq2,
        theorem2_threshold=(4 * n + math.sqrt(2.0)) * iq.value,
        lemma_pl3_core_bound=up.grid.R - math.sqrt(2.0) * iq2.value,
        has_dead_core=rc > 0.0,
        n=n,
        R=up.grid.R,
        q=p.q,
        N=up.grid.N,
        M=up.M,
        lambda_bracket=tuple(pair.lambda_bracket),
        zero_tolerance=ztol,
    )


@dataclass
class CriticalRadius:
    value: float
    bracket: tuple
    solves: int

    def __float__(self) -> float:
        return self.value


def critical_radius(
    p: RadialPotential,
    n: int,
    q: Optional[float] = None,
    tol: float = 1e-3,
    N: int = 800,
    M: int = 200,
    eps: float = 1e-3,
    passes: int = 20,
) -> CriticalRadius:
    """Bisection on R for the onset of a dead core in the upper envelope."""
    if q is not None and not math.isclose(q, p.q):
        raise DomainError("q does not match the potential")
    iq = compute_iq(p, Variant.SQRT_W)
    if not iq.finite:
        raise DomainError("I_q diverges: no dead core exists")
    ztol = zero_tolerance(p.q, M)
    solves = 0

    def has_core(R):
        nonlocal solves
        solves += 1
        prof = solve_profile(p, n, R, 1.0 - eps, N, M, Tie.PREFER_HIGH, passes)
        return core_radius(prof, ztol) > 0.0

    cap = 10.0 * (4 * n + math.sqrt(2.0)) * iq.value
    hi = (4 * n + math.sqrt(2.0)) * iq.value
    while not has_core(hi):
        hi *= 2.0
        if hi > cap:
            raise NonConvergenceError(f"no dead core found up to R = {cap:.6g}")
    lo = 1e-3 * hi
    if has_core(lo):
        raise NonConvergenceError("dead core present at the smallest probed radius")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_core(mid):
            hi = mid
        else:
            lo = mid
    return CriticalRadius(0.5 * (lo + hi), (lo, hi), solves)
