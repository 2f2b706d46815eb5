"""Command-line front end: ``python -m deadcore {profile,critical,verify,plotdata}``.

Configuration is a flat INI file. Sections and keys (all optional unless a
command needs them)::

    [potential]  kind = characteristic | power | quadratic | tabulated | zero
                 alpha, q, breakpoints = "0:0, 0.5:1", w0_kind = none | ray_linear, w0_coeff
    [geometry]   n, R (comma list sweeps), N, M,
                 domain = interval | rectangle | disk, a, b, K, shape, h, origin,
                 radius, center, m
    [solver]     eps, passes, max_iters, tol, polish_sweeps, continuation, jitter,
                 critical_tol
    [boundary]   type = constant | hedgehog | edges, value, zero_arc = theta0,half,ramp,
                 left, right, bottom, top
    [checks]     comparison = "x,y,R; x,y,R", boundary_balls = "x,y,R", comparison_N,
                 comparison_M, pohozaev = radii, pohozaev_tol, monotonicity = radii,
                 maximum_principle, dead_core = auto | true | false, certified
    [plot]       profile, oracle = remark1 | log_core | cosh | first_integral | <csv path>,
                 field, max_points

Every JSON report embeds the fully resolved configuration under ``config``;
passing such a report back through ``--config`` reruns it unchanged.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from . import diagnostics as dg
from .errors import (
    ConfigError,
    DeadCoreError,
    DomainError,
    GeometryError,
    NonConvergenceError,
    PreconditionError,
    ResourceError,
)
from .field import (
    GridField,
    LatticeDomain,
    constant_data,
    edge_data,
    field_csv,
    field_sidecar,
    hedgehog_data,
    minimize_field,
    modulus_field,
)
from .oracles import (
    cosh_profile_n1,
    first_integral_profile_n1,
    log_core_profile,
    remark1_profile,
)
from .potential import Kind, PotentialSpec, RadialPotential, Variant, compute_iq
from .radial import comparison_pair, critical_radius, dead_core_report, profile_csv

EXIT_OK, EXIT_CONFIG, EXIT_NONCONV = 0, 2, 3
MIN_M = 8

DEFAULTS = {
    "potential": {"kind": "characteristic", "alpha": "1", "q": "1", "breakpoints": "",
                  "w0_kind": "none", "w0_coeff": "0"},
    "geometry": {"n": "2", "R": "1", "N": "800", "M": "200", "domain": "", "a": "", "b": "",
                 "K": "101", "shape": "", "h": "", "origin": "0,0", "radius": "", "center": "",
                 "m": "1"},
    "solver": {"eps": "0.001", "passes": "40", "max_iters": "5000", "tol": "1e-10",
               "polish_sweeps": "20", "continuation": "8", "jitter": "0", "critical_tol": "0.001"},
    "boundary": {"type": "constant", "value": "", "zero_arc": "", "left": "", "right": "",
                 "bottom": "", "top": ""},
    "checks": {"comparison": "", "boundary_balls": "", "comparison_N": "800", "comparison_M": "200",
               "pohozaev": "", "pohozaev_tol": "0.05", "monotonicity": "", "maximum_principle": "false",
               "dead_core": "auto", "certified": "false"},
    "plot": {"profile": "", "oracle": "", "field": "", "max_points": "500"},
}


# -- configuration -----------------------------------------------------------------

class Config:
    """Resolved configuration: every key of every section as a string."""

    def __init__(self, raw: dict):
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown section(s): {sorted(unknown)}")
        self.data = {}
        for sec, keys in DEFAULTS.items():
            given = {k: str(v).strip() for k, v in raw.get(sec, {}).items()}
            bad = set(given) - set(keys)
            if bad:
                raise ConfigError(f"unknown key(s) in [{sec}]: {sorted(bad)}")
            self.data[sec] = {**keys, **given}

    @classmethod
    def load(cls, path) -> "Config":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json":
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"malformed JSON config: {e}") from None
            if not isinstance(doc, dict) or not isinstance(doc.get("config"), dict):
                raise ConfigError("JSON config needs a 'config' object")
            return cls(doc["config"])
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            cp.read_string(text, source=str(path))
        except configparser.Error as e:
            raise ConfigError(f"malformed config: {e}") from None
        return cls({s: dict(cp[s]) for s in cp.sections()})

    def str(self, sec, key) -> str:
        return self.data[sec][key]

    def has(self, sec, key) -> bool:
        return self.data[sec][key] != ""

    def float(self, sec, key, positive=False, nonneg=False) -> float:
        s = self.str(sec, key)
        try:
            v = float(s)
        except ValueError:
            raise ConfigError(f"[{sec}] {key} = {s!r} is not a number") from None
        if not math.isfinite(v) or (positive and v <= 0) or (nonneg and v < 0):
            raise ConfigError(f"[{sec}] {key} = {s!r} out of range")
        return v

    def int(self, sec, key, minimum=None) -> int:
        s = self.str(sec, key)
        try:
            v = int(s)
        except ValueError:
            raise ConfigError(f"[{sec}] {key} = {s!r} is not an integer") from None
        if minimum is not None and v < minimum:
            raise ConfigError(f"[{sec}] {key} = {v} is below the minimum {minimum}")
        return v

    def bool(self, sec, key) -> bool:
        s = self.str(sec, key).lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off", ""):
            return False
        raise ConfigError(f"[{sec}] {key} = {s!r} is not a boolean")

    def floats(self, sec, key, sep=",") -> list:
        s = self.str(sec, key)
        if not s:
            return []
        try:
            return [float(x) for x in s.split(sep) if x.strip()]
        except ValueError:
            raise ConfigError(f"[{sec}] {key} = {s!r} is not a list of numbers") from None

    def balls(self, key) -> list:
        s = self.str("checks", key)
        out = []
        for part in filter(str.strip, s.split(";")):
            try:
                vals = [float(x) for x in part.split(",")]
            except ValueError:
                raise ConfigError(f"[checks] {key}: bad ball {part!r}") from None
            if len(vals) < 2 or vals[-1] <= 0:
                raise ConfigError(f"[checks] {key}: ball needs centre coordinates and a positive radius")
            out.append((tuple(vals[:-1]), vals[-1]))
        return out

    def to_dict(self) -> dict:
        return {s: dict(sorted(v.items())) for s, v in sorted(self.data.items())}


def build_potential(cfg: Config, q: Optional[float] = None) -> RadialPotential:
    kind = cfg.str("potential", "kind").lower()
    q = cfg.float("potential", "q", positive=True) if q is None else q
    try:
        if kind == "characteristic":
            return RadialPotential.characteristic(q)
        if kind in ("power", "powerlaw", "power_law"):
            return RadialPotential.power_law(cfg.float("potential", "alpha", positive=True), q)
        if kind == "quadratic":
            return RadialPotential.quadratic(q)
        if kind == "zero":
            return RadialPotential.zero(q)
        if kind == "tabulated":
            bp = []
            for item in filter(str.strip, cfg.str("potential", "breakpoints").split(",")):
                s, _, v = item.partition(":")
                bp.append((float(s), float(v)))
            return RadialPotential.tabulated(bp, q)
    except (DomainError, ValueError) as e:
        raise ConfigError(f"invalid potential: {e}") from None
    raise ConfigError(f"unknown potential kind {kind!r}")


def build_spec(cfg: Config, m: int) -> PotentialSpec:
    p = build_potential(cfg)
    w0 = cfg.str("potential", "w0_kind").lower()
    if w0 in ("none", ""):
        return PotentialSpec(p, m=m)
    if w0 == "ray_linear":
        return PotentialSpec.ray_linear(p, m, cfg.float("potential", "w0_coeff", nonneg=True))
    raise ConfigError(f"unknown w0_kind {w0!r}")


def _radial_sizes(cfg: Config, sec="geometry", nkey="N", mkey="M"):
    N = cfg.int(sec, nkey, minimum=2)
    M = cfg.int(sec, mkey)
    if M < MIN_M:
        raise ConfigError(f"[{sec}] {mkey} = {M} is below the minimum M = {MIN_M}")
    return N, M


def _dimension(cfg: Config) -> int:
    return cfg.int("geometry", "n", minimum=1)


# -- output helpers ------------------------------------------------------------------

def _json(doc: dict) -> str:
    return json.dumps(dg._jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _write_all(out: Path, files: dict) -> list:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        path = out / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(str(path))
    return written


def _suffix(k: int, total: int) -> str:
    return "" if total == 1 else f"_{k}"


def _sweep(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# -- commands ------------------------------------------------------------------------

def cmd_profile(cfg: Config, threads: int = 1, seed: int = 42) -> tuple:
    """Comparison pair and dead-core report for each R in the sweep."""
    p = build_potential(cfg)
    n = _dimension(cfg)
    N, M = _radial_sizes(cfg)
    radii = cfg.floats("geometry", "R")
    if not radii or any(r <= 0 or not math.isfinite(r) for r in radii):
        raise ConfigError("[geometry] R must list positive radii")
    eps = cfg.float("solver", "eps", positive=True)
    if eps >= 0.5:
        raise ConfigError("[solver] eps must lie in (0, 0.5)")
    passes = cfg.int("solver", "passes", minimum=0)
    if N * M * M > 2e9:
        raise ConfigError("N*M^2 exceeds the dynamic-programming budget")

    def run(R):
        pair = comparison_pair(p, n, R, N, M, eps=eps, passes=passes)
        return pair, dead_core_report(pair, p)

    results = _sweep(run, radii, threads)
    files = {}
    for k, (R, (pair, rep)) in enumerate(zip(radii, results)):
        sfx = _suffix(k, len(radii))
        files[f"upper{sfx}.csv"] = pair.upper.to_csv()
        files[f"lower{sfx}.csv"] = pair.lower.to_csv()
        doc = rep.to_dict()
        doc.update({"upper_energy": pair.upper.energy, "lower_energy": pair.lower.energy,
                    "bracket_width": pair.bracket_width, "potential": p.describe(),
                    "config": cfg.to_dict()})
        files[f"dead_core{sfx}.json"] = _json(doc)
    return files, EXIT_OK, ""


def _iq_finite(p: RadialPotential) -> bool:
    try:
        return compute_iq(p, Variant.SQRT_W).finite
    except DomainError:
        return False


def cmd_critical(cfg: Config, threads: int = 1, seed: int = 42) -> tuple:
    """Bisection for the smallest radius with a dead core, for each q in the sweep."""
    qs = cfg.floats("potential", "q")
    if not qs or any(q <= 0 for q in qs):
        raise ConfigError("[potential] q must list positive values")
    pots = [build_potential(cfg, q) for q in qs]
    n = _dimension(cfg)
    N, M = _radial_sizes(cfg)
    tol = cfg.float("solver", "critical_tol", positive=True)
    eps = cfg.float("solver", "eps", positive=True)
    passes = cfg.int("solver", "passes", minimum=0)
    if not all(_iq_finite(p) for p in pots):
        return {}, EXIT_NONCONV, "I_q divergent: no dead core exists"

    def run(p):
        return critical_radius(p, n, tol=tol * p.q, N=N, M=M, eps=eps, passes=passes)

    results = _sweep(run, pots, threads)
    rows = []
    for p, res in zip(pots, results):
        row = {"q": p.q, "n": n, "critical_radius": res.value, "bracket": list(res.bracket),
               "solves": res.solves, "potential": p.describe()}
        if p.kind is Kind.CHARACTERISTIC and n == 2:
            row["theory"] = math.sqrt(2.0 * math.e) * p.q
            row["theory_relative_error"] = abs(res.value - row["theory"]) / row["theory"]
        if n == 1:
            row["first_integral_estimate"] = compute_iq(p, Variant.SQRT_2W).value
        rows.append(row)
    doc = {"results": rows, "config": cfg.to_dict()}
    return {"critical.json": _json(doc)}, EXIT_OK, ""


def _build_domain(cfg: Config) -> LatticeDomain:
    n = _dimension(cfg)
    kind = cfg.str("geometry", "domain").lower() or ("interval" if n == 1 else "rectangle")
    K = cfg.int("geometry", "K", minimum=3)
    try:
        if kind == "interval":
            if n != 1:
                raise ConfigError("interval domains need n = 1")
            if cfg.has("geometry", "a") or cfg.has("geometry", "b"):
                a, b = cfg.float("geometry", "a"), cfg.float("geometry", "b")
            else:
                R = cfg.floats("geometry", "R")
                if len(R) != 1:
                    raise ConfigError("interval needs a, b or a single R")
                a, b = -R[0], R[0]
            return LatticeDomain.interval(a, b, K)
        if n != 2:
            raise ConfigError(f"{kind} domains need n = 2")
        if kind == "disk":
            center = cfg.floats("geometry", "center") or [0.0, 0.0]
            rad = cfg.float("geometry", "radius", positive=True)
            return LatticeDomain.disk(rad, K, tuple(center))
        if kind == "rectangle":
            shape = [int(s) for s in cfg.floats("geometry", "shape")] or [K, K]
            h = cfg.float("geometry", "h", positive=True)
            return LatticeDomain.rectangle(shape, h, tuple(cfg.floats("geometry", "origin")))
    except (DomainError, GeometryError) as e:
        raise ConfigError(f"invalid domain: {e}") from None
    raise ConfigError(f"unknown domain {kind!r}")


def _build_data(cfg: Config, dom: LatticeDomain, q: float, m: int):
    kind = cfg.str("boundary", "type").lower()
    if kind == "constant":
        v = cfg.floats("boundary", "value") or [q] + [0.0] * (m - 1)
        if len(v) != m:
            raise ConfigError(f"[boundary] value needs {m} components")
        return constant_data(v)
    if kind == "hedgehog":
        if m != dom.n:
            raise ConfigError("hedgehog data need m equal to the dimension")
        arc = cfg.floats("boundary", "zero_arc")
        if arc and (len(arc) != 3 or arc[1] < 0 or arc[2] <= 0):
            raise ConfigError("[boundary] zero_arc = theta0, half_width, ramp (ramp > 0)")
        center = dom.center if dom.center is not None else (0.0,) * dom.n
        return hedgehog_data(q, center, tuple(arc) if arc else None)
    if kind == "edges":
        keys = ("left", "right") if dom.n == 1 else ("left", "right", "bottom", "top")
        vals = []
        for k in keys:
            v = cfg.floats("boundary", k)
            if len(v) != m:
                raise ConfigError(f"[boundary] {k} needs {m} components")
            vals.append(v)
        return edge_data(dom, *vals)
    raise ConfigError(f"unknown boundary type {kind!r}")


def _radial_dead_core(f: GridField, pair, center, R) -> dg.Check:
    """Where the upper envelope vanishes, the field must vanish too (None if it never does)."""
    dom = f.domain
    dist = np.linalg.norm(dom.coords() - np.asarray(center, dtype=float), axis=-1)
    env = np.interp(dist, pair.upper.grid.radii, pair.upper.values)
    sel = dom.interior & (dist <= R) & (env <= 0.0)
    tol = dg.comparison_tolerance(dom.h, f.q, pair.upper.M)
    mod = modulus_field(f)
    worst = float(np.max(mod[sel], initial=0.0))
    if not sel.any():
        return None
    verdict = dg.Verdict.PASS if worst <= tol else dg.Verdict.FAIL
    return dg.Check("dead_core_radial", {"ball_center": list(center), "ball_radius": R},
                    {"nodes_in_envelope_core": int(sel.sum()), "max_modulus": worst}, tol, verdict)


def cmd_verify(cfg: Config, threads: int = 1, seed: int = 42) -> tuple:
    """Solve the lattice problem and run the requested checks on the result."""
    dom = _build_domain(cfg)
    m = cfg.int("geometry", "m", minimum=1)
    spec = build_spec(cfg, m)
    data = _build_data(cfg, dom, spec.q, m)
    solver = dict(max_iters=cfg.int("solver", "max_iters", minimum=1),
                  tol=cfg.float("solver", "tol", positive=True),
                  polish_sweeps=cfg.int("solver", "polish_sweeps", minimum=0),
                  continuation=cfg.int("solver", "continuation", minimum=0),
                  jitter=cfg.float("solver", "jitter", nonneg=True), seed=seed)
    balls = [(c, R, dg.Mode.INTERIOR) for c, R in cfg.balls("comparison")]
    balls += [(c, R, dg.Mode.BOUNDARY) for c, R in cfg.balls("boundary_balls")]
    for c, _, _ in balls:
        if len(c) != dom.n:
            raise ConfigError(f"ball centre {c} does not have {dom.n} coordinates")
    Nc, Mc = _radial_sizes(cfg, "checks", "comparison_N", "comparison_M")
    eps = cfg.float("solver", "eps", positive=True)
    poz = cfg.floats("checks", "pohozaev")
    mono = cfg.floats("checks", "monotonicity")
    want_mp = cfg.bool("checks", "maximum_principle")
    if cfg.str("checks", "dead_core").lower() == "auto":
        want_core = _iq_finite(spec.w_rad)
    else:
        want_core = cfg.bool("checks", "dead_core")
    certified = cfg.bool("checks", "certified")
    poz_tol = cfg.float("checks", "pohozaev_tol", positive=True)
    try:
        f0 = GridField.from_boundary(dom, m, spec.q, data)
    except DeadCoreError as e:
        raise ConfigError(f"invalid boundary data: {e}") from None

    f, stats = minimize_field(f0, spec, **solver)
    report = dg.Report(config=cfg.to_dict())
    report.add(dg.Check("solver", {"max_iters": solver["max_iters"], "tol": solver["tol"]}, stats.to_dict(),
                        solver["tol"], dg.Verdict.PASS if stats.converged else dg.Verdict.INCONCLUSIVE))
    center = dom.center if dom.center is not None else tuple(np.zeros(dom.n))

    def add_or_note(name, fn):
        try:
            item = fn()
        except (GeometryError, PreconditionError, DomainError) as e:
            report.add(dg.Check(name, {}, {"error": str(e)}, None, dg.Verdict.INCONCLUSIVE))
            return
        if item is None:
            return
        for it in (item if isinstance(item, list) else [item]):
            if not stats.converged and it.verdict == dg.Verdict.FAIL:
                it.verdict = dg.Verdict.INCONCLUSIVE
            report.add(it)

    pairs = {}
    for R in sorted({R for _, R, _ in balls}):
        pairs[R] = comparison_pair(spec.w_rad, dom.n, R, Nc, Mc, eps=eps)
    for c, R, mode in balls:
        add_or_note("comparison",
                    lambda c=c, R=R, mode=mode: dg.verify_comparison(f, pairs[R], c, R, mode, certified=certified)
                    .to_check())
    if want_core:
        add_or_note("dead_core", lambda: dg.dead_core_check(f, spec))
        for c, R, mode in balls:
            if mode is dg.Mode.INTERIOR:
                add_or_note("dead_core_radial", lambda c=c, R=R: _radial_dead_core(f, pairs[R], c, R))
    if poz:
        add_or_note("pohozaev", lambda: dg.pohozaev_check(dg.pohozaev_scan(f, spec, poz, center), poz_tol))
    if mono:
        add_or_note("monotonicity", lambda: dg.monotonicity_scan(f, spec, mono, center).to_check())
    if want_mp:
        add_or_note("maximum_principle", lambda: dg.maximum_principle_check(f, spec).to_check())

    files = {"field.csv": field_csv(f), "field.json": _json(field_sidecar(f)), "report.json": report.to_json()}
    if not stats.converged:
        return files, EXIT_NONCONV, f"field solver did not converge in {stats.iterations} iterations"
    return files, EXIT_OK, ""


def _read_csv(path: str) -> tuple:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"input not found: {path}")
    rows = list(csv.reader(p.read_text(encoding="utf-8").splitlines()))
    if len(rows) < 2:
        raise ConfigError(f"input is empty: {path}")
    header = rows[0]
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError:
        raise ConfigError(f"non-numeric data in {path}") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ConfigError(f"ragged CSV: {path}")
    return header, data


def _downsample(k: int, limit: int) -> np.ndarray:
    if k <= limit:
        return np.arange(k)
    return np.unique(np.linspace(0, k - 1, limit).round().astype(int))


def _oracle_values(cfg: Config, name: str, r: np.ndarray, q: float, R: float) -> np.ndarray:
    n = _dimension(cfg)
    low = name.lower()
    try:
        if low == "remark1":
            return remark1_profile(q, R)(r)
        if low == "log_core":
            return log_core_profile(q, R)(r)
        if low == "cosh":
            return cosh_profile_n1(q, R)(r)
        if low == "first_integral":
            if n != 1:
                raise ConfigError("first_integral oracle needs n = 1")
            return first_integral_profile_n1(build_potential(cfg, q), q, R)(r)
    except (DomainError, PreconditionError) as e:
        raise ConfigError(f"oracle {name!r} not available: {e}") from None
    header, data = _read_csv(name)
    return np.interp(r, data[:, 0], data[:, 1])


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else f"{v:.17g}" for v in row])
    return buf.getvalue()


def cmd_plotdata(cfg: Config, threads: int = 1, seed: int = 42) -> tuple:
    """Downsampled overlay and heat-map data with gnuplot scripts (no rendering)."""
    limit = cfg.int("plot", "max_points", minimum=2)
    if not (cfg.has("plot", "profile") or cfg.has("plot", "field")):
        raise ConfigError("[plot] needs a profile or a field input")
    files = {}
    if cfg.has("plot", "profile"):
        _, data = _read_csv(cfg.str("plot", "profile"))
        r, h = data[:, 0], data[:, 1]
        idx = _downsample(r.size, limit)
        cols = [r[idx], h[idx]]
        header = ["r", "numerical"]
        if cfg.has("plot", "oracle"):
            cols.append(_oracle_values(cfg, cfg.str("plot", "oracle"), r[idx], float(h[-1]), float(r[-1])))
            header.append("oracle")
        files["overlay.csv"] = _rows_csv(header, zip(*cols))
        lines = ["set datafile separator ','", "set key autotitle columnhead", "set xlabel 'r'",
                 "set ylabel 'value'", "plot 'overlay.csv' using 1:2 with lines"]
        if len(header) == 3:
            lines[-1] += ", '' using 1:3 with lines dashtype 2"
        files["overlay.gp"] = "\n".join(lines) + "\n"
    if cfg.has("plot", "field"):
        header, data = _read_csv(cfg.str("plot", "field"))
        if header[:2] != ["i", "j"]:
            raise ConfigError("heat map needs a two-dimensional field CSV (columns i, j, u1, ...)")
        mod = np.linalg.norm(data[:, 2:], axis=1)
        rows = [(str(int(i)), str(int(j)), v) for i, j, v in zip(data[:, 0], data[:, 1], mod)]
        files["heatmap.csv"] = _rows_csv(["i", "j", "modulus"], rows)
        files["heatmap.gp"] = ("set datafile separator ','\nset view map\nset size ratio -1\n"
                               "plot 'heatmap.csv' using 1:2:3 every ::1 with points pt 5 ps 0.3 palette\n")
    return files, EXIT_OK, ""


COMMANDS = {"profile": cmd_profile, "critical": cmd_critical, "verify": cmd_verify, "plotdata": cmd_plotdata}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deadcore", description="Dead-core minimisers: radial and lattice solvers.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="INI file, or a JSON report with an embedded config")
    ap.add_argument("--out", default="./out", help="output directory (default ./out)")
    ap.add_argument("--seed", type=int, default=42, help="seed for all randomness (default 42)")
    ap.add_argument("--threads", type=int, default=1, help="workers for parameter sweeps")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = Config.load(args.config)
        files, code, msg = COMMANDS[args.command](cfg, args.threads, args.seed)
    except (ConfigError, ResourceError, DomainError, GeometryError, PreconditionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NONCONV
    written = _write_all(Path(args.out), files) if files else []
    for path in written:
        print(path)
    if msg:
        print(msg, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
