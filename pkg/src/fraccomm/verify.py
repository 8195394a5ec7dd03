"""Index admissibility, pointwise checks, ratio sweeps and constant fits."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from . import norms, singular, spectral
from .grid import Domain, GridFunction, TruncatedLine, make_domain, pointwise_product, sample_family
from .squarefn import GStarParams, g_star

HOLDER_TOL = 1e-12
ACTIVITY = 1e-8
CS_REL = 1e-6
CS_ABS = 1e-10


class VerificationError(RuntimeError):
    """A numerical check exceeded its tolerance."""


class InactiveError(VerificationError):
    """Every node fell below the activity threshold."""


class FitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# indices


@dataclass(frozen=True)
class FractionalIndices:
    s1: float
    s2: float

    def __post_init__(self):
        for name in ("s1", "s2"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0,1), got {v}")

    @property
    def s(self) -> float:
        return self.s1 + self.s2


@dataclass(frozen=True)
class LebesgueIndices:
    """``1/r = 1/p1 + 1/p2``; ``r`` is derived when omitted."""

    p1: float
    p2: float
    r: float | None = None

    def __post_init__(self):
        if not (self.p1 > 0 and self.p2 > 0):
            raise ValueError("p1 and p2 must be positive")
        inv = 1 / self.p1 + 1 / self.p2
        if self.r is None:
            object.__setattr__(self, "r", math.inf if inv == 0 else 1 / inv)
        elif abs(1 / self.r - inv) > HOLDER_TOL:
            raise ValueError(f"1/r = {1 / self.r} does not equal 1/p1 + 1/p2 = {inv}")


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    q: tuple
    lam_windows: tuple
    violations: tuple = ()

    def lam_inside(self, j: int) -> float:
        """Midpoint of the j-th lambda window (``nan`` if empty)."""
        lo, hi = self.lam_windows[j]
        return 0.5 * (lo + hi) if lo < hi else math.nan


def weight_class(n: int, s: float, p: float) -> float:
    """Muckenhoupt index ``q`` for a weight on one factor of the commutator."""
    if n == 1:
        return min(p, p * (0.5 + s))
    return p * (0.5 + s / n)


def admissible(n: int, idx: FractionalIndices, leb: LebesgueIndices) -> Admissibility:
    if n not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {n}")
    bad = []
    qs, windows = [], []
    for j, (s, p) in enumerate(((idx.s1, leb.p1), (idx.s2, leb.p2)), start=1):
        thresh = 2 * n / (n + 2 * s)
        if not thresh < p:
            bad.append(f"p{j} = {p:g} <= 2n/(n+2 s{j}) = {thresh:.6g}")
        if not math.isfinite(p):
            bad.append(f"p{j} must be finite")
        qs.append(weight_class(n, s, p))
        windows.append((max(1.0, 2 / p), 1 + 2 * s / n))
    return Admissibility(not bad, tuple(qs), tuple(windows), tuple(bad))


# ---------------------------------------------------------------------------
# pointwise checks


@dataclass(frozen=True)
class CSResult:
    violations: int
    worst_ratio: float
    slack: GridFunction


def check_pointwise_cs(u, v, idx: FractionalIndices, quad=singular.DEFAULT_QUADRATURE, raise_on_violation=True) -> CSResult:
    """``|T_s(u,v)| <= D_{s1}[u] D_{s2}[v]`` at every node."""
    lhs = np.abs(singular.bilinear_T(u, v, idx.s, quad).samples)
    rhs = singular.square_fractional(u, idx.s1, quad).samples.real * singular.square_fractional(v, idx.s2, quad).samples.real
    scale = max(float(rhs.max()), float(lhs.max()))
    bound = (1 + CS_REL) * rhs + CS_ABS * scale
    bad = int((lhs > bound).sum())
    active = rhs > ACTIVITY * rhs.max() if rhs.max() > 0 else np.zeros_like(rhs, bool)
    worst = float((lhs[active] / rhs[active]).max()) if active.any() else 0.0
    if bad and raise_on_violation:
        raise VerificationError(f"{bad} Cauchy-Schwarz violations (worst ratio {worst:.12g})")
    return CSResult(bad, worst, GridFunction(u.domain, rhs - lhs, "cs-slack"))


def _active_ratio(num: np.ndarray, den: np.ndarray) -> tuple:
    top = den.max()
    active = den > ACTIVITY * top if top > 0 else np.zeros_like(den, bool)
    if not active.any():
        raise InactiveError("all nodes inactive: denominator vanishes")
    ratio = np.where(active, num / np.where(active, den, 1.0), 0.0)
    k = int(np.argmax(ratio))
    return float(ratio.ravel()[k]), np.unravel_index(k, ratio.shape)


def stein_ratio(u: GridFunction, s: float, lam: float, quad=singular.DEFAULT_QUADRATURE) -> float:
    """Max over active nodes of ``D_s[u] / g*_lam(D^s u)``."""
    num = singular.square_fractional(u, s, quad).samples.real
    den = g_star(spectral.ds(u, s), GStarParams(lam)).samples.real
    return _active_ratio(num, den)[0]


@dataclass(frozen=True)
class CommutatorBound:
    constant: float
    node: tuple


def check_pointwise_commutator(u, v, idx: FractionalIndices, lam1: float, lam2: float) -> CommutatorBound:
    n = u.domain.dim
    for j, (lam, s) in enumerate(((lam1, idx.s1), (lam2, idx.s2)), start=1):
        if not lam < 1 + 2 * s / n:
            raise ValueError(f"lambda{j} = {lam} must be below 1 + 2 s{j}/n = {1 + 2 * s / n}")
    num = np.abs(spectral.commutator_spectral(u, v, idx.s).samples)
    g1 = g_star(spectral.ds(u, idx.s1), GStarParams(lam1)).samples.real
    g2 = g_star(spectral.ds(v, idx.s2), GStarParams(lam2)).samples.real
    c, node = _active_ratio(num, g1 * g2)
    return CommutatorBound(c, tuple(int(i) for i in node))


# ---------------------------------------------------------------------------
# sweeps

INEQUALITIES = (
    "commutator",
    "weighted",
    "besov",
    "leibniz",
    "kato_ponce",
    "kpv",
    "gstar_lp",
    "gstar_weighted",
)

SINGLE = ("gstar_lp", "gstar_weighted")


@dataclass(frozen=True)
class SweepPoint:
    """One index tuple; unused fields stay ``None``.

    ``q1, q2`` are Besov integrability indices for ``besov`` and the second
    pair of Lebesgue exponents for ``leibniz``/``kato_ponce``.  ``a1, a2``
    are power-weight exponents, ``p``/``lam`` the square-function indices.
    """

    s1: float | None = None
    s2: float | None = None
    s: float | None = None
    p1: float | None = None
    p2: float | None = None
    q1: float | None = None
    q2: float | None = None
    p: float | None = None
    lam: float | None = None
    a1: float | None = None
    a2: float | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None:
                object.__setattr__(self, f.name, float(v))

    @property
    def order(self) -> float:
        return self.s if self.s is not None else self.s1 + self.s2

    @property
    def r(self) -> float | None:
        if self.p1 is None:
            return None
        return LebesgueIndices(self.p1, self.p2).r

    def key(self) -> str:
        parts = [f"{f.name}={getattr(self, f.name):g}" for f in fields(self) if getattr(self, f.name) is not None]
        return ";".join(parts)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepPoint":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown index fields {sorted(unknown)}")
        return cls(**{k: (math.inf if v in ("inf", "Infinity") else v) for k, v in d.items()})


DEFAULT_POINTS = {
    "commutator": [
        SweepPoint(s1=0.45, s2=0.45, p1=2, p2=2),
        SweepPoint(s1=0.45, s2=0.45, p1=1.1, p2=1.1),
        SweepPoint(s1=0.3, s2=0.6, p1=1.5, p2=3),
        SweepPoint(s1=0.9, s2=0.9, p1=0.8, p2=0.8),
    ],
    "weighted": [
        SweepPoint(s1=0.45, s2=0.45, p1=2, p2=2, a1=0.2, a2=0.2),
        SweepPoint(s1=0.45, s2=0.45, p1=2, p2=2, a1=0.5, a2=0.5),
        SweepPoint(s1=0.45, s2=0.45, p1=2, p2=2, a1=0.2, a2=0.5),
    ],
    "besov": [
        SweepPoint(s1=0.45, s2=0.45, p1=2, p2=2, q1=2, q2=2),
        SweepPoint(s1=0.3, s2=0.5, p1=2, p2=2, q1=1.5, q2=3),
    ],
    "leibniz": [
        SweepPoint(s=0.5, p1=2, p2=2, q1=2, q2=2),
        SweepPoint(s=1.2, p1=4, p2=4 / 3, q1=4 / 3, q2=4),
    ],
    "kato_ponce": [
        SweepPoint(s=0.5, p1=4, p2=4, q1=4, q2=4),
        SweepPoint(s=1.5, p1=3, p2=6, q1=6, q2=3),
    ],
    "kpv": [
        SweepPoint(s1=0.3, s2=0.4, p1=3, p2=3),
        SweepPoint(s1=0.2, s2=0.5, p1=4, p2=2),
    ],
    "gstar_lp": [
        SweepPoint(p=2, lam=1.5),
        SweepPoint(p=4, lam=1.2),
        SweepPoint(p=1.5, lam=1.6),
    ],
    "gstar_weighted": [
        SweepPoint(p=2, lam=1.5, a1=0.2),
        SweepPoint(p=2, lam=1.5, a1=-0.3),
    ],
}


def point_admissibility(ineq: str, pt: SweepPoint, n: int) -> tuple:
    """``(admissible, reasons)`` for one inequality at one index tuple."""
    bad = []

    def need(cond, msg):
        if not cond:
            bad.append(msg)

    if ineq in ("commutator", "weighted", "kpv", "besov"):
        for j, s in ((1, pt.s1), (2, pt.s2)):
            need(s is not None and 0 < s < 1, f"s{j} must lie in (0,1)")
        if bad:
            return False, tuple(bad)
    if ineq in ("commutator", "weighted"):
        adm = admissible(n, FractionalIndices(pt.s1, pt.s2), LebesgueIndices(pt.p1, pt.p2))
        bad.extend(adm.violations)
        if ineq == "weighted":
            for j, (a, p, q) in enumerate(((pt.a1, pt.p1, adm.q[0]), (pt.a2, pt.p2, adm.q[1])), start=1):
                if n == 1:
                    need(p > 1, f"p{j} must exceed 1 for weights in 1-D")
                need(q > 1, f"q{j} = {q:g} must exceed 1")
                a = 0.0 if a is None else a
                need(-n < a < n * (q - 1), f"power weight a{j} = {a:g} not in A_q{j}, q{j} = {q:g}")
    elif ineq == "kpv":
        need(0 < pt.order < 1, "s must lie in (0,1)")
        r = pt.r
        for name, v in (("r", r), ("p1", pt.p1), ("p2", pt.p2)):
            need(1 < v < math.inf, f"{name} must lie in (1,inf)")
    elif ineq == "besov":
        r = pt.r
        need(abs(1 / pt.q1 + 1 / pt.q2 - 1) <= HOLDER_TOL, "1/q1 + 1/q2 must equal 1")
        for name, v in (("r", r), ("p1", pt.p1), ("p2", pt.p2), ("q1", pt.q1), ("q2", pt.q2)):
            need(v >= 1, f"{name} must lie in [1,inf]")
    elif ineq in ("leibniz", "kato_ponce"):
        r = pt.r
        need(abs(1 / pt.q1 + 1 / pt.q2 - 1 / r) <= HOLDER_TOL, "1/q1 + 1/q2 must equal 1/r")
        for name in ("p1", "p2", "q1", "q2"):
            need(getattr(pt, name) > 1, f"{name} must lie in (1,inf]")
        if ineq == "leibniz":
            need(pt.order > max(0.0, n / r - n), "s must exceed max(0, n/r - n)")
        else:
            need(pt.order > 0, "s must be positive")
            need(1 < r < math.inf, "r must lie in (1,inf)")
    elif ineq in SINGLE:
        need(0 < pt.p < math.inf, "p must lie in (0,inf)")
        need(pt.lam > max(1.0, 2 / pt.p), "lambda must exceed max(1, 2/p)")
        if ineq == "gstar_weighted":
            need(pt.p > 1, "p must exceed 1")
            q = min(pt.p, pt.p * pt.lam / 2)
            a = 0.0 if pt.a1 is None else pt.a1
            need(-n < a < n * (q - 1), f"power weight a = {a:g} not in A_q, q = {q:g}")
    else:
        raise ValueError(f"unknown inequality {ineq!r}")
    return not bad, tuple(bad)


@dataclass(frozen=True)
class SweepConfig:
    inequality: str
    points: tuple = ()
    families: tuple = ()
    resolutions: tuple = (512, 1024)
    dim: int = 1
    half_width: float = 20.0
    seed: int = 42
    explore_outside: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.inequality not in INEQUALITIES:
            raise ValueError(f"unknown inequality {self.inequality!r}; choose from {INEQUALITIES}")
        pts = tuple(p if isinstance(p, SweepPoint) else SweepPoint.from_dict(p) for p in self.points)
        object.__setattr__(self, "points", pts or tuple(DEFAULT_POINTS[self.inequality]))
        object.__setattr__(self, "resolutions", tuple(int(N) for N in self.resolutions))
        if not self.resolutions:
            raise ValueError("need at least one resolution")

    def family_objects(self) -> list:
        from .grid import default_family, family_from_dict

        if not self.families:
            return default_family(self.seed)
        return [family_from_dict(dict(f)) for f in self.families]


COLUMNS = (
    "inequality", "n", "N", "index", "pair", "lhs", "rhs", "ratio", "admissible", "flags",
    "s1", "s2", "s", "p1", "p2", "r", "q1", "q2", "p", "lam", "lam1", "lam2",
    "weight1", "weight2", "ap1", "ap2",
)


@dataclass
class SweepRow:
    inequality: str
    n: int
    N: int
    index: str
    pair: str
    lhs: float
    rhs: float
    ratio: float
    admissible: bool
    flags: str = ""
    s1: float | None = None
    s2: float | None = None
    s: float | None = None
    p1: float | None = None
    p2: float | None = None
    r: float | None = None
    q1: float | None = None
    q2: float | None = None
    p: float | None = None
    lam: float | None = None
    lam1: float | None = None
    lam2: float | None = None
    weight1: str = ""
    weight2: str = ""
    ap1: float | None = None
    ap2: float | None = None


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


class _Bank:
    """Per-resolution cache of sampled functions and derived fields."""

    def __init__(self, dom: Domain, families: list):
        self.dom = dom
        self.funcs = [sample_family(f, dom) for f in families]
        self.ids = [f.id for f in families]
        self._cache = {}

    def get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def ds(self, i, s):
        return self.get(("ds", i, s), lambda: spectral.ds(self.funcs[i], s))

    def norm(self, tag, i, spec, make):
        return self.get(("norm", tag, i, repr(spec)), lambda: norms.norm(make(), spec))


def _rhs_norm(f: GridFunction, p: float) -> float:
    return norms.lebesgue_or_hardy(f, p)


def _weight(bank: _Bank, a):
    if a is None or a == 0:
        return norms.unit_weight(bank.dom)
    return bank.get(("weight", a), lambda: norms.make_power_weight(a, bank.dom))


def _pair_rows(cfg: SweepConfig, pt: SweepPoint, bank: _Bank, adm: bool, reasons: tuple) -> list:
    ineq, dom = cfg.inequality, bank.dom
    n = dom.dim
    base = dict(inequality=ineq, n=n, N=dom.points, index=pt.key(), admissible=adm,
                s1=pt.s1, s2=pt.s2, s=pt.order if pt.s1 is not None or pt.s is not None else None,
                p1=pt.p1, p2=pt.p2, r=pt.r, q1=pt.q1, q2=pt.q2, p=pt.p, lam=pt.lam)
    flags = [] if adm else ["inadmissible"]
    if ineq in ("commutator", "kpv") and adm and n == 1 and pt.r <= 0.5:
        flags.append("novel-range")
    extra = {}
    if ineq in ("weighted", "gstar_weighted"):
        w1 = _weight(bank, pt.a1)
        extra["weight1"] = w1.label
        if ineq == "weighted":
            w2 = _weight(bank, pt.a2)
            extra["weight2"] = w2.label
            qs = admissible(n, FractionalIndices(pt.s1, pt.s2), LebesgueIndices(pt.p1, pt.p2)).q
            extra["ap1"] = bank.get(("ap", pt.a1, qs[0]), lambda: norms.ap_constant(w1, qs[0]) if qs[0] > 1 else math.inf)
            extra["ap2"] = bank.get(("ap", pt.a2, qs[1]), lambda: norms.ap_constant(w2, qs[1]) if qs[1] > 1 else math.inf)
        else:
            q = min(pt.p, pt.p * pt.lam / 2)
            extra["ap1"] = bank.get(("ap", pt.a1, q), lambda: norms.ap_constant(w1, q) if q > 1 else math.inf)
    flag_str = ",".join(flags)
    rows = []
    m = len(bank.funcs)
    if ineq in SINGLE:
        combos = [(i,) for i in range(m)]
    else:
        combos = list(itertools.product(range(m), repeat=2))
    for combo in combos:
        lhs, rhs = _evaluate(cfg, pt, bank, combo)
        ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
        pair = "|".join(bank.ids[i] for i in combo)
        rows.append(SweepRow(pair=pair, lhs=lhs, rhs=rhs, ratio=ratio, flags=flag_str, **base, **extra))
    return rows


def _evaluate(cfg: SweepConfig, pt: SweepPoint, bank: _Bank, combo: tuple) -> tuple:
    ineq = cfg.inequality
    f = bank.funcs
    if ineq in SINGLE:
        (i,) = combo
        u = f[i]
        gs = bank.get(("gstar", i, pt.lam), lambda: g_star(u, GStarParams(pt.lam)))
        if ineq == "gstar_lp":
            return norms.norm(gs, norms.Lp(pt.p)), bank.get(("lp_or_h", i, pt.p), lambda: _rhs_norm(u, pt.p))
        w = norms.WeightedLp(pt.p, _weight(bank, pt.a1))
        return norms.norm(gs, w), norms.norm(u, w)
    i, j = combo
    u, v = f[i], f[j]
    s = pt.order
    if ineq in ("commutator", "kpv", "weighted", "besov"):
        comm = bank.get(("comm", i, j, s), lambda: spectral.commutator_spectral(u, v, s))
        if ineq == "besov":
            lhs = norms.norm(comm, norms.Lp(pt.r))
            b1 = bank.get(("besov", i, pt.s1, pt.p1, pt.q1), lambda: norms.norm(u, norms.Besov(pt.s1, pt.p1, pt.q1)))
            b2 = bank.get(("besov", j, pt.s2, pt.p2, pt.q2), lambda: norms.norm(v, norms.Besov(pt.s2, pt.p2, pt.q2)))
            return lhs, b1 * b2
        if ineq == "weighted":
            w1, w2 = _weight(bank, pt.a1), _weight(bank, pt.a2)
            r = pt.r
            lw = GridFunction(bank.dom, w1.values ** (r / pt.p1) * w2.values ** (r / pt.p2), "lhs-weight")
            lhs = norms.norm(comm, norms.WeightedLp(r, norms.Weight(lw)))
            n1 = norms.norm(bank.ds(i, pt.s1), norms.WeightedLp(pt.p1, w1))
            n2 = norms.norm(bank.ds(j, pt.s2), norms.WeightedLp(pt.p2, w2))
            return lhs, n1 * n2
        lhs = norms.norm(comm, norms.Lp(pt.r))
        n1 = bank.get(("rhs", i, pt.s1, pt.p1), lambda: _rhs_norm(bank.ds(i, pt.s1), pt.p1))
        n2 = bank.get(("rhs", j, pt.s2, pt.p2), lambda: _rhs_norm(bank.ds(j, pt.s2), pt.p2))
        return lhs, n1 * n2
    if ineq == "leibniz":
        uv = pointwise_product(u, v)
        lhs = norms.norm(spectral.ds(uv, s), norms.Lp(pt.r))
        rhs = (norms.norm(bank.ds(i, s), norms.Lp(pt.p1)) * norms.norm(v, norms.Lp(pt.p2))
               + norms.norm(u, norms.Lp(pt.q1)) * norms.norm(bank.ds(j, s), norms.Lp(pt.q2)))
        return lhs, rhs
    if ineq == "kato_ponce":
        J = spectral.Js
        uv = pointwise_product(u, v)
        lhs_f = spectral.apply_multiplier(J(s), uv).samples - u.samples * spectral.apply_multiplier(J(s), v).samples
        lhs = norms.norm(GridFunction(bank.dom, lhs_f), norms.Lp(pt.r))
        grad = spectral.gradient(u)
        du = GridFunction(bank.dom, np.sqrt(sum(np.abs(g.samples) ** 2 for g in grad)))
        rhs = (norms.norm(spectral.apply_multiplier(J(s), u), norms.Lp(pt.p1)) * norms.norm(v, norms.Lp(pt.p2))
               + norms.norm(du, norms.Lp(pt.q1)) * norms.norm(spectral.apply_multiplier(J(s - 1), v), norms.Lp(pt.q2)))
        return lhs, rhs
    raise ValueError(f"unknown inequality {ineq!r}")


@dataclass
class SweepReport:
    config: SweepConfig
    rows: list
    config_hash: str = ""

    def summary(self) -> list:
        """Max ratio per index tuple, per resolution, with stability flags."""
        out = []
        for key in dict.fromkeys(r.index for r in self.rows):
            sel = [r for r in self.rows if r.index == key]
            by_n = {}
            for r in sel:
                by_n[r.N] = max(by_n.get(r.N, 0.0), r.ratio)
            res = sorted(by_n)
            vals = [by_n[N] for N in res]
            change = abs(vals[-1] - vals[0]) / max(vals[0], 1e-300) if len(vals) > 1 else 0.0
            adm = sel[0].admissible
            flags = [f for f in sel[0].flags.split(",") if f]
            if len(vals) > 1 and change > 0.15:
                flags.append("diverging" if not adm and vals[-1] > vals[0] else "unstable")
            out.append({
                "index": key,
                "admissible": adm,
                "max_ratio": {str(N): by_n[N] for N in res},
                "resolution_change": change,
                "finite": all(math.isfinite(v) and v > 0 for v in vals),
                "flags": flags,
            })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            d = asdict(r)
            w.writerow([_fmt(d[c]) for c in COLUMNS])
        return buf.getvalue()

    def to_json(self, timestamp: str | None = None) -> str:
        doc = {
            "provenance": {
                "version": __version__,
                "seed": self.config.seed,
                "config_hash": self.config_hash,
                "inequality": self.config.inequality,
                "hardy_proxy": "vertical Poisson maximal function (used for p <= 1)",
            },
            "summary": self.summary(),
            "rows": [{c: asdict(r)[c] for c in COLUMNS} for r in self.rows],
        }
        if timestamp is not None:
            doc["provenance"]["timestamp"] = timestamp
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, default=_json_default)

    def max_ratio(self, index: str | None = None, N: int | None = None) -> float:
        sel = [r.ratio for r in self.rows if (index is None or r.index == index) and (N is None or r.N == N)]
        return max(sel) if sel else math.nan


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def _domain_for(cfg: SweepConfig, N: int) -> Domain:
    return make_domain(cfg.dim, TruncatedLine(cfg.half_width), N)


def sweep(cfg: SweepConfig, config_hash: str = "") -> SweepReport:
    """Evaluate every (index tuple, resolution) case; row order is fixed."""
    families = cfg.family_objects()
    n = cfg.dim
    cases = []
    for pt in cfg.points:
        adm, reasons = point_admissibility(cfg.inequality, pt, n)
        if not adm and not cfg.explore_outside:
            continue
        for N in cfg.resolutions:
            cases.append((pt, N, adm, reasons))
    banks = {N: _Bank(_domain_for(cfg, N), families) for N in cfg.resolutions}

    def run(case):
        pt, N, adm, reasons = case
        return _pair_rows(cfg, pt, banks[N], adm, reasons)

    # cases sharing a bank would race on its cache; group by resolution
    by_res = {N: [c for c in cases if c[1] == N] for N in cfg.resolutions}

    def run_group(N):
        return {id(c): run(c) for c in by_res[N]}

    if cfg.workers > 1 and len(by_res) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            results = {}
            for part in ex.map(run_group, list(by_res)):
                results.update(part)
    else:
        results = {}
        for N in by_res:
            results.update(run_group(N))
    rows = []
    for c in cases:
        rows.extend(results[id(c)])
    return SweepReport(cfg, rows, config_hash)


# ---------------------------------------------------------------------------
# Lerner exponent fit


@dataclass(frozen=True)
class LernerFit:
    beta1: float
    beta2: float
    r2_1: float
    r2_2: float
    bound1: float
    bound2: float
    table: tuple


def _fit(x: np.ndarray, y: np.ndarray) -> tuple:
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 3 or np.ptp(x) < 1e-12:
        raise FitError("degenerate fit: fewer than 3 usable points with distinct [w]_Ap")
    slope, icept = np.polyfit(x, y, 1)
    ss = ((y - y.mean()) ** 2).sum()
    r2 = 1 - ((y - (slope * x + icept)) ** 2).sum() / ss if ss > 0 else 1.0
    return float(slope), float(r2)


def weighted_constant(dom: Domain, funcs: list, idx: FractionalIndices, leb: LebesgueIndices, w1, w2) -> float:
    """Max over ordered pairs of the weighted commutator ratio."""
    r = leb.r
    lw = norms.Weight(GridFunction(dom, w1.values ** (r / leb.p1) * w2.values ** (r / leb.p2)))
    best = 0.0
    d1 = [spectral.ds(u, idx.s1) for u in funcs]
    d2 = [spectral.ds(u, idx.s2) for u in funcs]
    n1 = [norms.norm(d, norms.WeightedLp(leb.p1, w1)) for d in d1]
    n2 = [norms.norm(d, norms.WeightedLp(leb.p2, w2)) for d in d2]
    for i, j in itertools.product(range(len(funcs)), repeat=2):
        comm = spectral.commutator_spectral(funcs[i], funcs[j], idx.s)
        best = max(best, norms.norm(comm, norms.WeightedLp(r, lw)) / (n1[i] * n2[j]))
    return best


def lerner_fit(weights: list, leb: LebesgueIndices, idx: FractionalIndices, funcs: list) -> LernerFit:
    """Slopes of log(constant) against log [w]_{A_p}, one weight varied at a time."""
    if not weights:
        raise FitError("empty weight family")
    dom = weights[0].domain
    unit = norms.unit_weight(dom)
    table = []
    xs = {1: [], 2: []}
    ys = {1: [], 2: []}
    for w in weights:
        for side, p in ((1, leb.p1), (2, leb.p2)):
            A = norms.ap_constant(w, p)
            w1, w2 = (w, unit) if side == 1 else (unit, w)
            C = weighted_constant(dom, funcs, idx, leb, w1, w2)
            xs[side].append(math.log(A))
            ys[side].append(math.log(C))
            table.append((side, w.label, A, C))
    b1, r1 = _fit(np.array(xs[1]), np.array(ys[1]))
    b2, r2 = _fit(np.array(xs[2]), np.array(ys[2]))
    bound = lambda p: max(0.5, 1 / (p - 1))
    return LernerFit(b1, b2, r1, r2, bound(leb.p1), bound(leb.p2), tuple(table))


# ---------------------------------------------------------------------------
# named suite checks (driven by the command line)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    details: dict


def _family_funcs(dom: Domain, families: list) -> list:
    return [sample_family(f, dom) for f in families]


def _pairs(m: int):
    return list(itertools.combinations_with_replacement(range(m), 2))


def _rel_sup(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.abs(b).max()
    return float(np.abs(a - b).max() / scale) if scale > 0 else float(np.abs(a - b).max())


def check_identity_commint(families, N=1024, half_width=20.0, orders=(0.3, 0.9, 1.0, 1.5, 1.9), tol=1e-2) -> CheckResult:
    """Spectral commutator against ``c(n,s) T_s`` on every family pair."""
    from .grid import Torus

    dom = make_domain(1, TruncatedLine(half_width), N)
    funcs = _family_funcs(dom, families)
    worst = {}
    for s in orders:
        c = singular.constant_c(1, s)
        err = 0.0
        for i, j in _pairs(len(funcs)):
            comm = spectral.commutator_spectral(funcs[i], funcs[j], s).samples
            T = singular.bilinear_T(funcs[i], funcs[j], s).samples
            err = max(err, _rel_sup(c * T, comm))
        worst[repr(s)] = err
    tor = make_domain(1, Torus(2 * math.pi), 64)
    e = GridFunction(tor, np.exp(1j * tor.axis))
    torus_res = float(np.abs(spectral.commutator_spectral(e, e, 1.0).samples).max())
    ok = max(worst.values()) <= tol and torus_res <= 1e-12
    return CheckResult("identity_commint", ok, {"N": N, "tolerance": tol, "worst_relative_error": worst, "torus_exp_s1_residual": torus_res})


def check_cs_suite(families, N=1024, half_width=20.0, splits=((0.4, 0.5), (0.45, 0.45), (0.9, 0.9))) -> CheckResult:
    dom = make_domain(1, TruncatedLine(half_width), N)
    funcs = _family_funcs(dom, families)
    violations, worst = {}, {}
    for s1, s2 in splits:
        idx = FractionalIndices(s1, s2)
        key = f"{s1:g},{s2:g}"
        violations[key], worst[key] = 0, 0.0
        for i, j in _pairs(len(funcs)):
            res = check_pointwise_cs(funcs[i], funcs[j], idx, raise_on_violation=False)
            violations[key] += res.violations
            worst[key] = max(worst[key], res.worst_ratio)
    ok = sum(violations.values()) == 0
    return CheckResult("pointwise_cs", ok, {"N": N, "violations": violations, "worst_ratio": worst})


def check_stein_suite(families, N=1024, half_width=20.0, orders=(0.25, 0.5, 0.75), tol=0.10) -> CheckResult:
    res = {}
    for s in orders:
        lam = 1 + 2 * s - 0.05
        vals = []
        for M in (N // 2, N):
            dom = make_domain(1, TruncatedLine(half_width), M)
            vals.append(max(stein_ratio(u, s, lam) for u in _family_funcs(dom, families)))
        res[repr(s)] = {"lambda": lam, "max_ratio": {str(N // 2): vals[0], str(N): vals[1]},
                        "change": abs(vals[1] - vals[0]) / vals[0]}
    ok = all(math.isfinite(r["max_ratio"][str(N)]) and r["change"] <= tol for r in res.values())
    return CheckResult("pointwise_stein", ok, {"tolerance": tol, "orders": res})


def pointwise_commutator_constant(funcs: list, idx: FractionalIndices, lam1: float, lam2: float) -> float:
    return max(check_pointwise_commutator(funcs[i], funcs[j], idx, lam1, lam2).constant for i, j in _pairs(len(funcs)))


def check_commutator_suite(families, N=1024, half_width=20.0, indices=(0.45, 0.45, 1.8, 1.8), tol=0.10) -> CheckResult:
    s1, s2, l1, l2 = indices
    idx = FractionalIndices(s1, s2)
    vals = {}
    for M in (N // 2, N):
        dom = make_domain(1, TruncatedLine(half_width), M)
        vals[str(M)] = pointwise_commutator_constant(_family_funcs(dom, families), idx, l1, l2)
    a, b = vals[str(N // 2)], vals[str(N)]
    change = abs(b - a) / a
    ok = math.isfinite(b) and change <= tol
    return CheckResult("pointwise_commutator", ok, {"indices": list(indices), "constant": vals, "change": change, "tolerance": tol})


def check_spectral_vs_quadrature(families, N=1024, half_width=20.0, orders=(0.3, 0.7, 1.0, 1.5), tol=1e-2) -> CheckResult:
    """Both quadrature forms against spectral ``D^s`` at ``N`` and ``2N``."""
    errs = {}
    for form in ("pv", "second_difference"):
        quad = singular.SingularQuadrature(form=form)
        for s in orders:
            row = []
            for M in (N, 2 * N):
                dom = make_domain(1, TruncatedLine(half_width), M)
                e = 0.0
                for u in _family_funcs(dom, families):
                    e = max(e, _rel_sup(singular.hypersingular_ds(u, s, quad).samples, spectral.ds(u, s).samples))
                row.append(e)
            errs[f"{form}:{s:g}"] = {str(N): row[0], str(2 * N): row[1]}
    ok = all(v[str(N)] <= tol and v[str(2 * N)] < v[str(N)] for v in errs.values())
    return CheckResult("spectral_vs_quadrature", ok, {"tolerance": tol, "errors": errs})


CHECKS = {
    "identity_commint": check_identity_commint,
    "pointwise_cs": check_cs_suite,
    "pointwise_stein": check_stein_suite,
    "pointwise_commutator": check_commutator_suite,
    "spectral_vs_quadrature": check_spectral_vs_quadrature,
}


def default_suite(seed: int = 42, workers: int = 1, resolutions=(512, 1024)) -> tuple:
    """Every named check and every default sweep; returns ``(checks, reports)``."""
    from .grid import Bump, Gaussian, WavePacket, default_family

    fams = default_family(seed)
    smooth = [f for f in fams if isinstance(f, (Gaussian, Bump, WavePacket))]
    checks = [fn(smooth if name == "spectral_vs_quadrature" else fams) for name, fn in CHECKS.items()]
    reports = {
        ineq: sweep(SweepConfig(ineq, resolutions=resolutions, seed=seed, workers=workers))
        for ineq in INEQUALITIES
    }
    return checks, reports
