"""Closed-form radial minimisers and an exhaustive reference for the DP."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, PreconditionError, ResourceError
from .potential import Kind, RadialPotential, Variant, compute_iq
from .quadrature import adaptive_gk, integrate_singular_left
from .radial import RadialGrid, RadialProfile, Tie, make_profile, profile_csv

SQRT2 = math.sqrt(2.0)
SQRT_E = math.sqrt(math.e)
BRUTE_FORCE_CAP = 5_000_000


class Family(str, Enum):
    REMARK1 = "Remark1_n2_Characteristic"
    LOG_CORE = "LogCore_n2_Characteristic"
    FIRST_INTEGRAL = "FirstIntegral_n1_PowerLaw"
    COSH = "Cosh_n1_Quadratic"


class Branch(str, Enum):
    UPPER = "Upper"
    LOWER = "Lower"


@dataclass
class ClosedFormProfile:
    """A radial profile on [0, R] given by formulas, evaluated lazily."""

    family: Family
    params: dict
    _value: Callable = field(repr=False)
    _slope: Callable = field(repr=False)

    @property
    def n(self) -> int:
        return self.params["n"]

    @property
    def q(self) -> float:
        return self.params["q"]

    @property
    def R(self) -> float:
        return self.params["R"]

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if r.size and (r.min() < 0.0 or r.max() > self.R * (1 + 1e-12)):
            raise DomainError(f"radius outside [0, {self.R}]")
        return np.minimum(r, self.R)

    def __call__(self, r):
        rr = self._check(r)
        out = np.where(rr >= self.R, self.q, self._value(rr))
        return float(out) if np.ndim(r) == 0 else out

    def derivative(self, r):
        rr = self._check(r)
        out = self._slope(rr)
        return float(out) if np.ndim(r) == 0 else np.asarray(out, dtype=float)

    def sample(self, grid: RadialGrid) -> np.ndarray:
        return self(grid.radii)

    def as_profile(self, grid: RadialGrid, p: RadialPotential, lam: float = 1.0) -> RadialProfile:
        """Nodal samples wrapped as a discrete profile (energy included)."""
        v = np.maximum.accumulate(np.clip(self.sample(grid), 0.0, self.q))
        v[-1] = self.q
        return make_profile(grid, v, p, lam)

    def to_csv(self, radii) -> str:
        return profile_csv(radii, self(radii))


def _positive(name, x):
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"{name} must be positive and finite, got {x}")


def _constant(q):
    return (lambda r: np.full(np.shape(r), q, dtype=float)), (lambda r: np.zeros(np.shape(r)))


def _log_branch(q, ell, R):
    L = math.log(R / ell)

    def value(r):
        with np.errstate(divide="ignore"):
            return np.where(r <= ell, 0.0, q * np.log(np.maximum(r, ell) / ell) / L)

    def slope(r):
        with np.errstate(divide="ignore"):
            return np.where(r <= ell, 0.0, q / (L * np.maximum(r, ell)))

    return value, slope


def remark1_profile(q: float, R: float, branch: Branch = Branch.UPPER) -> ClosedFormProfile:
    """The two-dimensional characteristic-potential profiles exactly as stated in the source.

    Below the critical radius ``sqrt(2e) q`` both branches are the constant q.
    Above it both are 0 up to ``R/sqrt(e)`` and ``2q ln(sqrt(e) r / R)`` after.
    At the critical radius Upper is constant and Lower has a core of radius
    ``sqrt(2) q``. Away from the critical radius the stated core profile is
    not the minimiser; see :func:`log_core_profile`.
    """
    _positive("q", q)
    _positive("R", R)
    branch = Branch(branch)
    R0 = math.sqrt(2.0 * math.e) * q
    params = {"n": 2, "q": q, "R": R, "branch": branch.value}
    if R < R0 or (math.isclose(R, R0, rel_tol=1e-12) and branch is Branch.UPPER):
        v, s = _constant(q)
    else:
        ell = R / SQRT_E
        v, s = _log_branch(q, ell, R)
    return ClosedFormProfile(Family.REMARK1, params, v, s)


def log_core_edge(q: float, R: float) -> float:
    """Core edge l of the two-dimensional minimiser: l ln(R/l) = q/sqrt(2), larger root.

    This is the free-boundary condition h'(l) = sqrt(2 W) = sqrt(2) for the
    harmonic profile ``q ln(r/l) / ln(R/l)``. Real roots exist once
    ``R >= e q / sqrt(2)``.
    """
    _positive("q", q)
    _positive("R", R)
    target = q / SQRT2
    lo = R / math.e
    if lo * math.log(R / lo) < target * (1 - 1e-15):
        raise PreconditionError("no core edge exists for R < e q / sqrt(2)")
    if math.isclose(lo * math.log(R / lo), target, rel_tol=1e-15):
        return lo
    return brentq(lambda l: l * math.log(R / l) - target, lo, R, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def log_core_profile(q: float, R: float, branch: Branch = Branch.UPPER) -> ClosedFormProfile:
    """Exact radial minimiser for the characteristic potential in two dimensions.

    Competing profiles are the constant q (energy R^2/2 with the surface
    factor dropped) and the harmonic core profile with edge l from
    :func:`log_core_edge` (energy ``q^2 / (2 ln(R/l)) + (R^2 - l^2)/2``).
    The core wins strictly above ``sqrt(2e) q``; there both tie and the
    branch picks the constant (Upper) or the cored one (Lower).
    """
    _positive("q", q)
    _positive("R", R)
    branch = Branch(branch)
    R0 = math.sqrt(2.0 * math.e) * q
    params = {"n": 2, "q": q, "R": R, "branch": branch.value}
    if R < R0 or (math.isclose(R, R0, rel_tol=1e-12) and branch is Branch.UPPER):
        v, s = _constant(q)
    else:
        ell = SQRT2 * q if math.isclose(R, R0, rel_tol=1e-12) else log_core_edge(q, R)
        params["core_edge"] = ell
        v, s = _log_branch(q, ell, R)
    return ClosedFormProfile(Family.LOG_CORE, params, v, s)


def log_core_energy(q: float, R: float, ell: Optional[float]) -> float:
    """Continuum energy (surface factor dropped) of the constant or cored profile."""
    if ell is None:
        return 0.5 * R * R
    return q * q / (2.0 * math.log(R / ell)) + 0.5 * (R * R - ell * ell)


# -- one dimension: first integral ------------------------------------------------

class _Gamma:
    """gamma(s) = int_0^s ds / sqrt(2 W) from a cached table plus one local panel."""

    def __init__(self, p: RadialPotential, table: int = 64):
        self.p = p
        pieces = p.pieces()
        knots = set(np.linspace(0.0, p.q, table + 1).tolist())
        if pieces is not None:
            knots.update(float(e) for e in pieces[0])
        self.knots = np.array(sorted(knots))
        self.values = np.zeros_like(self.knots)
        first, _ = integrate_singular_left(self._f, self.knots[1], breakpoints=())
        self.values[1] = first
        for j in range(2, self.knots.size):
            seg, _ = adaptive_gk(self._f, self.knots[j - 1], self.knots[j])
            self.values[j] = self.values[j - 1] + seg

    def _f(self, s):
        w = self.p(np.asarray(s, dtype=float), check=False)
        with np.errstate(divide="ignore"):
            return 1.0 / np.sqrt(2.0 * w)

    def __call__(self, s: float) -> float:
        if s <= 0.0:
            return 0.0
        j = int(np.searchsorted(self.knots, s, side="right") - 1)
        j = min(j, self.knots.size - 1)
        if self.knots[j] == s:
            return float(self.values[j])
        if j == 0:
            v, _ = integrate_singular_left(self._f, s)
            return v
        seg, _ = adaptive_gk(self._f, self.knots[j], s)
        return float(self.values[j] + seg)

    def inverse(self, t: float, rtol: float = 1e-10) -> float:
        """Bisection for gamma(s) = t; stops once gamma is pinned within rtol in radius."""
        q = self.p.q
        if t <= 0.0:
            return 0.0
        if t >= self.values[-1]:
            return q
        j = int(np.searchsorted(self.values, t, side="right") - 1)
        lo, hi = float(self.knots[j]), float(self.knots[min(j + 1, self.knots.size - 1)])
        glo, ghi = float(self.values[j]), float(self.values[min(j + 1, self.knots.size - 1)])
        while ghi - glo > rtol and hi - lo > 4 * np.finfo(float).eps * q:
            mid = 0.5 * (lo + hi)
            g = self(mid)
            if g < t:
                lo, glo = mid, g
            else:
                hi, ghi = mid, g
        # Linear interpolation inside the final bracket.
        if ghi > glo:
            return lo + (hi - lo) * (t - glo) / (ghi - glo)
        return lo


@lru_cache(maxsize=32)
def _gamma_for(p: RadialPotential) -> _Gamma:
    return _Gamma(p)


def first_integral_profile_n1(p: RadialPotential, q: Optional[float] = None, R: float = 1.0,
                              method: str = "auto") -> ClosedFormProfile:
    """One-dimensional dead-core minimiser from ``1/2 beta'^2 = W(beta)``.

    The core edge is ``l = R - int_0^q ds/sqrt(2W)`` and ``beta(r) =
    gamma^{-1}(r - l)`` beyond it. Power laws and the characteristic
    potential use the analytic inverse unless ``method="quadrature"``.
    """
    if q is not None and not math.isclose(q, p.q):
        raise DomainError("q does not match the potential")
    q = p.q
    _positive("R", R)
    if p.kind is Kind.ZERO:
        raise PreconditionError("W_rad must be positive on (0, q]")
    try:
        iq = compute_iq(p, Variant.SQRT_2W)
    except DomainError as exc:
        raise PreconditionError(str(exc)) from exc
    if not iq.finite:
        raise PreconditionError("I_q diverges: no dead-core profile")
    if R < iq.value:
        raise PreconditionError(f"R = {R} is below I_q = {iq.value}: no dead core")
    ell = R - iq.value
    params = {"n": 1, "q": q, "R": R, "core_edge": ell, "kind": p.kind.value}
    e = p.exponent
    analytic = method == "auto" and (e is not None or p.kind is Kind.CHARACTERISTIC)

    if analytic:
        k = 1.0 if e is None else 1.0 - e / 2.0
        c = k * SQRT2

        def inv(t):
            return np.minimum((c * np.maximum(t, 0.0)) ** (1.0 / k), q)
    else:
        gam = _gamma_for(p)

        def inv(t):
            t = np.atleast_1d(np.asarray(t, dtype=float))
            return np.array([gam.inverse(x) for x in t])

    def value(r):
        out = inv(np.asarray(r, dtype=float) - ell)
        return np.where(np.asarray(r) <= ell, 0.0, out).reshape(np.shape(r))

    def slope(r):
        b = value(r)
        s = np.sqrt(2.0 * p(b, check=False))
        return np.where(np.asarray(r) <= ell, 0.0, s)

    return ClosedFormProfile(Family.FIRST_INTEGRAL, params, value, slope)


def cosh_profile_n1(q: float, R: float) -> ClosedFormProfile:
    """``q cosh(sqrt2 r) / cosh(sqrt2 R)``: the one-dimensional minimiser for W = s^2."""
    _positive("q", q)
    _positive("R", R)
    a = SQRT2

    def ratio(r):
        r = np.abs(np.asarray(r, dtype=float))
        return np.exp(a * (r - R)) * (1.0 + np.exp(-2 * a * r)) / (1.0 + math.exp(-2 * a * R))

    def value(r):
        return q * ratio(r)

    def slope(r):
        r = np.asarray(r, dtype=float)
        return q * a * np.exp(a * (np.abs(r) - R)) * (1.0 - np.exp(-2 * a * np.abs(r))) \
            / (1.0 + math.exp(-2 * a * R)) * np.sign(r)

    return ClosedFormProfile(Family.COSH, {"n": 1, "q": q, "R": R}, value, slope)


# -- exhaustive DP reference --------------------------------------------------------

@lru_cache(maxsize=8)
def _monotone_sequences(length: int, M: int) -> np.ndarray:
    count = math.comb(length + M, M)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations_with_replacement(range(M + 1), length)),
        dtype=np.int16,
        count=count * length,
    )
    out = flat.reshape(count, length)
    out.setflags(write=False)
    return out


def brute_force_dp_oracle(
    p: RadialPotential,
    n: int,
    R: float,
    lam: float,
    N: int,
    M: int,
    grid: Optional[RadialGrid] = None,
    tie: Tie = Tie.PREFER_LOW,
) -> RadialProfile:
    """Global minimiser over all monotone level assignments by enumeration.

    Nodes 0..L-1 and L..N-1 are enumerated separately (every nondecreasing
    level sequence of each half), the best half-costs are tabulated by the
    level at the seam, and the two halves are joined through the seam cell
    by checking every admissible pair of seam levels. Sequences within a
    relative 1e-12 of the optimum count as tied; PreferLow returns the one
    that is lowest at the outermost node where they differ, PreferHigh the
    highest, matching the dynamic programme.
    """
    if N > 24 or M > 12 or N < 2 or M < 1:
        raise ResourceError("brute force oracle handles N <= 24 and M <= 12 only")
    grid = grid or RadialGrid.uniform(n, R, N)
    L = N // 2
    for length in (L, N - L):
        if math.comb(length + M, M) > BRUTE_FORCE_CAP:
            raise ResourceError("too many monotone sequences to enumerate")
    levels = p.q * np.arange(M + 1) / M
    levels[-1] = p.q
    wl = p(levels)
    dr = grid.dr
    w = grid.weights
    a_coef = 0.5 * w / dr
    b_coef = lam * w * dr

    A = _monotone_sequences(L, M)
    costA = np.zeros(A.shape[0])
    for i in range(L - 1):
        d = levels[A[:, i + 1]] - levels[A[:, i]]
        costA += a_coef[i] * d * d + b_coef[i] * wl[A[:, i]]

    B = _monotone_sequences(N - L, M)
    costB = np.zeros(B.shape[0])
    for j in range(N - L):
        i = L + j
        nxt = levels[B[:, j + 1]] if j + 1 < N - L else p.q
        d = nxt - levels[B[:, j]]
        costB += a_coef[i] * d * d + b_coef[i] * wl[B[:, j]]

    lastA = A[:, -1]
    firstB = B[:, 0]
    bestA = np.full(M + 1, np.inf)
    argA = np.zeros(M + 1, dtype=np.int64)
    bestB = np.full(M + 1, np.inf)
    argB = np.zeros(M + 1, dtype=np.int64)
    for k in range(M + 1):
        sel = np.nonzero(lastA == k)[0]
        if sel.size:
            j = sel[np.argmin(costA[sel])]
            bestA[k], argA[k] = costA[j], j
        sel = np.nonzero(firstB == k)[0]
        if sel.size:
            j = sel[np.argmin(costB[sel])]
            bestB[k], argB[k] = costB[j], j

    seam = L - 1
    best = np.inf
    for a in range(M + 1):
        for b in range(a, M + 1):
            d = levels[b] - levels[a]
            best = min(best, bestA[a] + a_coef[seam] * d * d + b_coef[seam] * wl[a] + bestB[b])
    # Every sequence within the tie tolerance of the optimum, so the choice
    # among exact ties follows the same rule as the dynamic programme.
    slack = 1e-12 * abs(best)
    near = []
    for a in range(M + 1):
        ia = np.nonzero((lastA == a) & (costA <= bestA[a] + slack))[0]
        for b in range(a, M + 1):
            d = levels[b] - levels[a]
            link = a_coef[seam] * d * d + b_coef[seam] * wl[a]
            if bestA[a] + link + bestB[b] > best + slack:
                continue
            ib = np.nonzero((firstB == b) & (costB <= bestB[b] + slack))[0]
            tot = costA[ia][:, None] + link + costB[ib][None, :]
            for i, j in zip(*np.nonzero(tot <= best + slack)):
                near.append(np.concatenate([A[ia[i]], B[ib[j]], [M]]))
    cands = np.array(near, dtype=np.int64)
    order = np.lexsort(cands.T)  # last node is the primary key
    seq = cands[order[0] if tie is Tie.PREFER_LOW else order[-1]]
    return make_profile(grid, levels[seq], p, lam, M)
