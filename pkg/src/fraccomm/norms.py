"""Norms, seminorms and Muckenhoupt weights on grids."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .grid import Domain, GridError, GridFunction
from . import singular
from .spectral import default_t_levels, poisson_extend, validate_t_levels


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True, eq=False)
class Weight:
    """Positive weight on a grid.

    ``descriptor`` is ``"power"`` (with ``exponent`` a) or ``"custom"``.
    ``claimed_q`` is the Muckenhoupt class the caller asserts, if any.
    """

    samples: GridFunction
    descriptor: str = "custom"
    exponent: float | None = None
    claimed_q: float | None = None

    def __post_init__(self):
        w = self.samples.samples
        if np.abs(w.imag).max() > 0:
            raise GridError("weights must be real")
        if not (np.all(w.real > 0) and np.all(np.isfinite(w.real))):
            raise GridError("weights must be strictly positive and finite")

    @property
    def domain(self) -> Domain:
        return self.samples.domain

    @property
    def values(self) -> np.ndarray:
        return self.samples.samples.real

    def admissible(self, q: float) -> bool | None:
        """Classical power-weight criterion ``-n < a < n (q - 1)``; None if unknown."""
        if self.descriptor != "power":
            return None
        n = self.domain.dim
        return -n < self.exponent < n * (q - 1)

    @property
    def label(self) -> str:
        if self.descriptor == "power":
            return f"power(a={self.exponent:g})"
        return self.samples.label or "custom"


def make_power_weight(a: float, dom: Domain, claimed_q: float | None = None) -> Weight:
    """``|x|^a`` on a truncated box (the offset grid never hits ``x = 0``)."""
    if dom.kind != "line":
        raise GridError("power weights need a truncated-line domain")
    w = dom.radius() ** a
    return Weight(GridFunction(dom, w, f"power(a={a:g})"), "power", float(a), claimed_q)


def unit_weight(dom: Domain) -> Weight:
    return Weight(GridFunction(dom, np.ones(dom.shape), "unit"), "power", 0.0)


def _window_sums(arr: np.ndarray, length: int, periodic: bool) -> np.ndarray:
    """Sums of ``arr`` over all length-``length`` windows (cubes in 2-D)."""
    if periodic:
        arr = np.concatenate([arr, arr[: length - 1]], axis=0)
        if arr.ndim == 2:
            arr = np.concatenate([arr, arr[:, : length - 1]], axis=1)
    c = np.cumsum(arr, axis=0)
    c = np.concatenate([np.zeros((1,) + c.shape[1:]), c], axis=0)
    s = c[length:] - c[:-length]
    if arr.ndim == 2:
        c = np.cumsum(s, axis=1)
        c = np.concatenate([np.zeros((c.shape[0], 1)), c], axis=1)
        s = c[:, length:] - c[:, :-length]
    return s


def ap_constant(w: Weight, p: float) -> float:
    """Discrete ``[w]_{A_p}``: max over dyadic windows of ``<w> <w^{-1/(p-1)}>^{p-1}``.

    Windows have side ``2^k h`` for ``k >= 1`` at every offset; on a torus
    they wrap around.
    """
    if not p > 1:
        raise ValueError(f"A_p needs p > 1, got {p}")
    dom = w.domain
    vals = w.values
    dual = vals ** (-1.0 / (p - 1))
    periodic = dom.kind == "torus"
    best = 1.0
    length = 2
    while length <= dom.points:
        cells = length**dom.dim
        avg_w = _window_sums(vals, length, periodic) / cells
        avg_d = _window_sums(dual, length, periodic) / cells
        best = max(best, float((avg_w * avg_d ** (p - 1)).max()))
        length *= 2
    return best


# ---------------------------------------------------------------------------
# norm descriptors


@dataclass(frozen=True)
class Lp:
    p: float

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p}")


@dataclass(frozen=True)
class WeakLp:
    p: float

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError(f"weak L^p needs 0 < p < inf, got {self.p}")


@dataclass(frozen=True, eq=False)
class WeightedLp:
    """``(int |u|^p w^beta)^{1/p}``; ``beta`` is the exponent on the weight."""

    p: float
    weight: Weight
    beta: float = 1.0

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError(f"weighted L^p needs 0 < p < inf, got {self.p}")


@dataclass(frozen=True)
class Besov:
    """Homogeneous ``B^s_{p,q}`` seminorm by the first-difference characterization."""

    s: float
    p: float
    q: float

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValueError(f"Besov smoothness must lie in (0,1), got {self.s}")
        if not (self.p >= 1 and self.q >= 1):
            raise ValueError("Besov exponents p, q must lie in [1, inf]")


@dataclass(frozen=True)
class HardyProxy:
    """L^p norm of the vertical Poisson maximal function ``sup_{t >= 0} |U(., t)|``."""

    p: float
    t_levels: tuple | None = None

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError(f"Hardy proxy needs 0 < p < inf, got {self.p}")


NormSpec = Union[Lp, WeakLp, WeightedLp, Besov, HardyProxy]


def _lp(vals: np.ndarray, p: float, h_n: float) -> float:
    a = np.abs(vals)
    if math.isinf(p):
        return float(a.max())
    return float((h_n * (a**p).sum()) ** (1 / p))


def weak_lp(u: GridFunction, p: float) -> float:
    """Exact discrete ``sup_tau tau |{|u| > tau}|^{1/p}`` (sort based)."""
    a = np.sort(np.abs(u.samples).ravel())[::-1]
    if a.size == 0 or a[0] == 0:
        return 0.0
    # for tau just below a_k the level set holds every sample >= a_k
    counts = np.searchsorted(-a, -a, side="right")
    meas = counts * u.domain.cell_volume
    return float((a * meas ** (1 / p)).max())


def besov_seminorm(u: GridFunction, s: float, p: float, q: float, correct: bool = True) -> float:
    """``|| ||u(.+y) - u||_{L^p_x} / |y|^{s + n/q} ||_{L^q_y}`` on the periodic lattice.

    For finite ``q`` the y-integral uses the periodized weight, which is the
    exact seminorm of the periodic function.  The leading small-``y`` lattice
    error is removed in 1-D, and in 2-D when ``p = q = 2``.
    """
    dom = u.domain
    n = dom.dim
    plan = singular.lattice_plan(dom, "periodic", dom.half_width)
    arr = u.samples
    diffs = np.empty(len(plan.offsets))
    for idx in singular._chunks(plan):
        sh = singular._gather(arr, plan, idx)
        d = np.abs(sh - arr)
        d = d.reshape(len(idx), -1)
        if math.isinf(p):
            diffs[idx] = d.max(axis=1)
        else:
            diffs[idx] = (dom.cell_volume * (d**p).sum(axis=1)) ** (1 / p)
    if math.isinf(q):
        return float((diffs / plan.r**s).max())
    order = s * q
    w = singular._weights(plan, n + order)
    total = float((w * diffs**q).sum())
    if correct:
        grads = singular._central_gradient(arr, dom.h)
        if n == 1:
            lead = _lp(grads[0], p, dom.cell_volume) ** q
            total -= dom.h ** (q - order) * lead * singular.lattice_zeta(1, 1 + order - q)
        elif p == 2 and q == 2:
            lead = sum(_lp(g, 2, dom.cell_volume) ** 2 for g in grads)
            total -= dom.h ** (2 - order) * lead / n * singular.lattice_zeta(n, n + order - 2)
    return float(max(total, 0.0) ** (1 / q))


def hardy_proxy(u: GridFunction, p: float, t_levels=None) -> float:
    dom = u.domain
    levels = default_t_levels(dom) if t_levels is None else validate_t_levels(dom, t_levels)
    field = poisson_extend(u, levels)
    # the t -> 0 limit of U is u itself
    maximal = np.maximum(np.abs(field.U).max(axis=0), np.abs(u.samples))
    return _lp(maximal, p, dom.cell_volume)


def norm(u: GridFunction, spec: NormSpec) -> float:
    h_n = u.domain.cell_volume
    if isinstance(spec, Lp):
        return _lp(u.samples, spec.p, h_n)
    if isinstance(spec, WeakLp):
        return weak_lp(u, spec.p)
    if isinstance(spec, WeightedLp):
        if spec.weight.domain != u.domain:
            raise GridError("weight and function live on different domains")
        a = np.abs(u.samples) ** spec.p * spec.weight.values**spec.beta
        return float((h_n * a.sum()) ** (1 / spec.p))
    if isinstance(spec, Besov):
        return besov_seminorm(u, spec.s, spec.p, spec.q)
    if isinstance(spec, HardyProxy):
        return hardy_proxy(u, spec.p, spec.t_levels)
    raise TypeError(f"unknown norm descriptor {spec!r}")


def lebesgue_or_hardy(u: GridFunction, p: float) -> float:
    """``L^p`` for ``p > 1``, the Hardy proxy for ``p <= 1``."""
    return norm(u, Lp(p) if p > 1 else HardyProxy(p))
