"""Potentials W(u) = W_rad(|u|) + W_0(u) on the closed ball of radius q.

``W_rad`` is nondecreasing and lower semicontinuous on [0, q]; ``W_0`` is
nondecreasing along rays from the origin. Only the radial part enters the
comparison functions and the dead-core integral ``I_q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .quadrature import integrate_singular_left

NORM_TOL = 1e-12


class Kind(str, Enum):
    POWER_LAW = "power"
    CHARACTERISTIC = "characteristic"
    QUADRATIC = "quadratic"
    TABULATED = "tabulated"
    ZERO = "zero"


class Variant(str, Enum):
    """Normalisation of the dead-core integral: 1/sqrt(W) or 1/sqrt(2W)."""

    SQRT_W = "SqrtW"
    SQRT_2W = "Sqrt2W"

    @property
    def factor(self) -> float:
        return 1.0 if self is Variant.SQRT_W else 2.0


@dataclass(frozen=True)
class RadialPotential:
    """A nondecreasing lsc function on [0, q] with value 0 at the origin.

    Tabulated potentials are piecewise constant: ``breakpoints`` is a sequence
    of ``(s_k, v_k)`` with ``s_0 = 0`` and the value ``v_k`` taken on
    ``(s_k, s_{k+1}]``. At every jump the smaller (left) value is returned,
    which is the lower semicontinuous envelope.
    """

    kind: Kind
    q: float
    alpha: Optional[float] = None
    breakpoints: tuple = ()

    def __post_init__(self):
        if not (self.q > 0 and math.isfinite(self.q)):
            raise DomainError(f"q must be a positive finite real, got {self.q}")
        if self.kind is Kind.POWER_LAW:
            if self.alpha is None or not self.alpha > 0:
                raise DomainError("power-law potential needs alpha > 0")
        if self.kind is Kind.TABULATED:
            bp = tuple((float(s), float(v)) for s, v in self.breakpoints)
            if not bp:
                raise DomainError("tabulated potential needs at least one breakpoint")
            s = [b[0] for b in bp]
            v = [b[1] for b in bp]
            if s[0] != 0.0:
                raise DomainError("first breakpoint must sit at s = 0")
            if any(b <= a for a, b in zip(s, s[1:])) or s[-1] >= self.q:
                raise DomainError("breakpoints must be strictly increasing and below q")
            if any(x < 0 for x in v) or any(b < a for a, b in zip(v, v[1:])):
                raise DomainError("tabulated values must be nonnegative and nondecreasing")
            object.__setattr__(self, "breakpoints", bp)

    # -- constructors -------------------------------------------------------
    @classmethod
    def power_law(cls, alpha: float, q: float = 1.0) -> "RadialPotential":
        return cls(Kind.POWER_LAW, float(q), alpha=float(alpha))

    @classmethod
    def characteristic(cls, q: float = 1.0) -> "RadialPotential":
        return cls(Kind.CHARACTERISTIC, float(q))

    @classmethod
    def quadratic(cls, q: float = 1.0) -> "RadialPotential":
        return cls(Kind.QUADRATIC, float(q))

    @classmethod
    def tabulated(cls, breakpoints, q: float = 1.0) -> "RadialPotential":
        return cls(Kind.TABULATED, float(q), breakpoints=tuple(breakpoints))

    @classmethod
    def zero(cls, q: float = 1.0) -> "RadialPotential":
        return cls(Kind.ZERO, float(q))

    # -- evaluation ---------------------------------------------------------
    @property
    def sup_value(self) -> float:
        return float(self(self.q))

    @property
    def exponent(self) -> Optional[float]:
        """Power of s for the smooth power-type kinds, else None."""
        if self.kind is Kind.POWER_LAW:
            return self.alpha
        if self.kind is Kind.QUADRATIC:
            return 2.0
        return None

    @property
    def is_convex(self) -> bool:
        e = self.exponent
        return self.kind is Kind.ZERO or (e is not None and e >= 1.0)

    def pieces(self):
        """(edges, values) for piecewise-constant kinds, else None.

        ``values[k]`` is taken on ``(edges[k], edges[k+1]]``; 0 is taken at s=0.
        """
        if self.kind is Kind.CHARACTERISTIC:
            return np.array([0.0, self.q]), np.array([1.0])
        if self.kind is Kind.ZERO:
            return np.array([0.0, self.q]), np.array([0.0])
        if self.kind is Kind.TABULATED:
            s = [b[0] for b in self.breakpoints] + [self.q]
            v = [b[1] for b in self.breakpoints]
            return np.array(s), np.array(v)
        return None

    def __call__(self, s, check: bool = True):
        s_arr = np.asarray(s, dtype=float)
        if check and s_arr.size and (np.min(s_arr) < 0.0 or np.max(s_arr) > self.q * (1 + 1e-12)):
            raise DomainError(f"argument outside [0, {self.q}]")
        s_arr = np.clip(s_arr, 0.0, self.q)
        e = self.exponent
        if e is not None:
            out = s_arr ** e
        else:
            edges, vals = self.pieces()
            idx = np.searchsorted(edges, s_arr, side="left") - 1
            out = np.where(idx < 0, 0.0, vals[np.clip(idx, 0, len(vals) - 1)])
        if np.ndim(s) == 0:
            return float(out)
        return out

    def smooth_derivatives(self, s):
        """First and second derivative for the power-type kinds (s > 0)."""
        e = self.exponent
        if e is None:
            raise DomainError(f"{self.kind.value} potential has no classical derivative")
        s = np.asarray(s, dtype=float)
        return e * s ** (e - 1.0), e * (e - 1.0) * s ** (e - 2.0)

    def describe(self) -> dict:
        d = {"kind": self.kind.value, "q": self.q}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.breakpoints:
            d["breakpoints"] = [list(b) for b in self.breakpoints]
        return d


def eval_wrad(p: RadialPotential, s):
    """Value of the lsc radial potential at ``s``; raises DomainError outside [0, q]."""
    return p(s)


def _ray_linear(coeff: float):
    def w0(s, xi):
        xi = np.asarray(xi, dtype=float)
        return coeff * np.asarray(s, dtype=float) * (1.0 + xi[..., 0]) / 2.0

    return w0


@dataclass(frozen=True)
class PotentialSpec:
    """Full potential: ``W(u) = w_rad(|u|) + w_0(|u|, u/|u|)`` for m-vectors u."""

    w_rad: RadialPotential
    w_0: Optional[Callable] = field(default=None, compare=False)
    m: int = 1
    w0_kind: str = "none"
    w0_coeff: float = 0.0

    @classmethod
    def ray_linear(cls, w_rad: RadialPotential, m: int, coeff: float = 1.0) -> "PotentialSpec":
        """Angular part ``coeff * s * (1 + xi_1) / 2``, nondecreasing along every ray."""
        return cls(w_rad, _ray_linear(coeff), m=m, w0_kind="ray_linear", w0_coeff=coeff)

    @property
    def q(self) -> float:
        return self.w_rad.q

    def radial_angular(self, s, xi):
        """W on points ``s * xi`` given their radius and unit direction."""
        s = np.asarray(s, dtype=float)
        val = self.w_rad(s)
        if self.w_0 is not None:
            val = val + np.where(s > 0.0, self.w_0(s, xi), 0.0)
        return val

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.m:
            raise DomainError(f"expected {self.m}-vectors, got shape {u.shape}")
        s = np.linalg.norm(u, axis=-1)
        if np.any(s > self.q + NORM_TOL):
            raise DomainError(f"|u| exceeds q = {self.q}")
        s = np.minimum(s, self.q)
        with np.errstate(invalid="ignore", divide="ignore"):
            xi = np.where(s[..., None] > 0.0, u / np.where(s > 0.0, s, 1.0)[..., None], 0.0)
        val = self.radial_angular(s, xi)
        if np.ndim(val) == 0:
            return float(val)
        return val


def eval_total(spec: PotentialSpec, u) -> float:
    """W(u) for a single m-vector (or an array of them along the last axis)."""
    return spec(u)


@dataclass(frozen=True)
class IqResult:
    value: float
    definition_variant: Variant
    abs_error_estimate: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def compute_iq(p: RadialPotential, variant: Variant = Variant.SQRT_W, method: str = "auto") -> IqResult:
    """Dead-core integral ``int_0^q ds / sqrt(c W_rad(s))`` with c = 1 or 2.

    ``method="auto"`` uses closed forms for the characteristic and power-type
    kinds; ``method="quadrature"`` forces the dyadic adaptive route.
    Divergence is reported as ``value = inf``, not raised.
    """
    variant = Variant(variant)
    c = variant.factor
    q = p.q
    if p.kind is Kind.ZERO:
        raise DomainError("W_rad vanishes identically on (0, q]; I_q is undefined")
    pieces = p.pieces()
    if pieces is not None:
        edges, vals = pieces
        if np.any(vals <= 0.0):
            raise DomainError("W_rad vanishes on a set of positive measure inside (0, q]")
    if method == "auto":
        if p.kind is Kind.CHARACTERISTIC:
            return IqResult(q / math.sqrt(c), variant, 0.0)
        e = p.exponent
        if e is not None:
            if e >= 2.0:
                return IqResult(math.inf, variant, 0.0)
            k = 1.0 - e / 2.0
            return IqResult(q ** k / (k * math.sqrt(c)), variant, 0.0)
    elif method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    def integrand(s):
        w = p(np.asarray(s), check=False)
        with np.errstate(divide="ignore"):
            return 1.0 / np.sqrt(c * w)

    bps = [] if pieces is None else list(pieces[0][1:-1])
    value, err = integrate_singular_left(integrand, q, breakpoints=bps)
    return IqResult(value, variant, err)
