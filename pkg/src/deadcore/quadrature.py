"""Adaptive Gauss-Kronrod quadrature with dyadic handling of a singular endpoint."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

# 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
_XK = np.array([
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144845693013,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


def gk15(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float]:
    """One Gauss-Kronrod 7/15 panel. Returns (kronrod estimate, |kronrod - gauss|)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = np.asarray(f(mid + half * _XK), dtype=float)
    k = half * float(_WK @ y)
    g = half * float(_WG @ y)
    return k, abs(k - g)


def adaptive_gk(f, a: float, b: float, tol: float = 1e-13, max_panels: int = 2000) -> tuple[float, float]:
    """Globally adaptive bisection of the worst panel until the summed error is below tol."""
    if b <= a:
        return 0.0, 0.0
    k, e = gk15(f, a, b)
    panels = [(e, a, b, k)]
    total, err = k, e
    scale_tol = max(tol, tol * abs(total))
    while err > scale_tol and len(panels) < max_panels:
        idx = max(range(len(panels)), key=lambda i: panels[i][0])
        e0, a0, b0, k0 = panels.pop(idx)
        m = 0.5 * (a0 + b0)
        k1, e1 = gk15(f, a0, m)
        k2, e2 = gk15(f, m, b0)
        panels.extend([(e1, a0, m, k1), (e2, m, b0, k2)])
        total += k1 + k2 - k0
        err += e1 + e2 - e0
        scale_tol = max(tol, tol * abs(total))
    total = math.fsum(p[3] for p in panels)
    err = math.fsum(p[0] for p in panels)
    return total, err


def integrate_singular_left(
    f,
    b: float,
    breakpoints=(),
    levels: int = 60,
    blowup: float = 1e12,
    tol: float = 1e-13,
) -> tuple[float, float]:
    """Integrate f over (0, b] where f may blow up only at 0.

    The interval is cut into dyadic shells [b/2^(k+1), b/2^k]. Each shell is
    integrated adaptively (split further at any breakpoint it contains). The
    integral is declared divergent (returns inf) when the partial sum exceeds
    ``blowup`` or when successive shell contributions stop decreasing
    geometrically. A convergent geometric tail is extrapolated.
    """
    cuts = sorted(float(s) for s in breakpoints if 0.0 < s < b)
    contributions: list[float] = []
    err = 0.0
    hi = b
    for _ in range(levels):
        lo = 0.5 * hi
        pts = [lo] + [s for s in cuts if lo < s < hi] + [hi]
        c = 0.0
        for u, v in zip(pts[:-1], pts[1:]):
            val, e = adaptive_gk(f, u, v, tol=tol)
            c += val
            err += e
        contributions.append(c)
        if math.fsum(contributions) > blowup:
            return math.inf, math.inf
        hi = lo
    total = math.fsum(contributions)
    last, prev = contributions[-1], contributions[-2]
    if last == 0.0:
        return total, err
    ratio = last / prev if prev > 0.0 else 1.0
    if ratio >= 1.0 - 1e-6:
        return math.inf, math.inf
    tail = last * ratio / (1.0 - ratio)
    # Uncertainty of the extrapolation: drift of the shell ratio between levels.
    prev_ratio = prev / contributions[-3] if contributions[-3] > 0.0 else ratio
    tail_err = abs(tail) * abs(ratio - prev_ratio) / (1.0 - ratio) + 1e-12 * abs(total + tail)
    return total + tail, err + tail_err
