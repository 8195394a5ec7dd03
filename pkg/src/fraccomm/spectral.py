"""Fourier-multiplier calculus on the periodic grid.

The transform convention is ``u_hat(xi) = sum_j u(x_j) exp(-i x_j . xi)``
with angular frequencies ``xi = 2 pi k / extent``.  Only symbol values
enter, so every identity checked here is normalization independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .grid import Domain, GridError, GridFunction, pointwise_product


@dataclass(frozen=True)
class MultiplierOp:
    """A radial or directional Fourier multiplier.

    kinds: ``ds`` |xi|^s, ``js`` (1+|xi|^2)^(s/2), ``directional`` |xi_j|^s,
    ``poisson`` exp(-t|xi|), ``poisson_grad`` the symbol of one component of
    the half-space gradient of the Poisson extension (axis ``"t"`` or an
    integer spatial axis).
    """

    kind: str
    order: float = 0.0
    t: float | None = None
    axis: Union[int, str, None] = None

    def __post_init__(self):
        if self.kind in ("ds", "directional") and not self.order >= 0:
            raise ValueError(f"order must be >= 0, got s={self.order}")
        if self.kind in ("poisson", "poisson_grad") and not (self.t is not None and self.t > 0):
            raise ValueError(f"Poisson time must be > 0, got t={self.t}")
        if self.kind not in ("ds", "js", "directional", "poisson", "poisson_grad"):
            raise ValueError(f"unknown multiplier kind {self.kind!r}")


def Ds(s: float) -> MultiplierOp:
    return MultiplierOp("ds", float(s))


def Js(s: float) -> MultiplierOp:
    # negative orders are allowed: the symbol stays bounded
    return MultiplierOp("js", float(s))


def DirectionalDs(axis: int, s: float) -> MultiplierOp:
    return MultiplierOp("directional", float(s), axis=int(axis))


def Poisson(t: float) -> MultiplierOp:
    return MultiplierOp("poisson", t=float(t))


def PoissonGrad(t: float, axis) -> MultiplierOp:
    return MultiplierOp("poisson_grad", t=float(t), axis=axis)


@lru_cache(maxsize=64)
def _frequencies(dom: Domain) -> tuple:
    xi = 2 * np.pi * np.fft.fftfreq(dom.points, dom.h)
    grids = np.meshgrid(*([xi] * dom.dim), indexing="ij")
    for g in grids:
        g.setflags(write=False)
    return tuple(grids)


def frequencies(dom: Domain) -> tuple:
    return _frequencies(dom)


@lru_cache(maxsize=64)
def _abs_xi(dom: Domain) -> np.ndarray:
    a = np.sqrt(sum(g * g for g in _frequencies(dom)))
    a.setflags(write=False)
    return a


def _nyquist_mask(dom: Domain, axis: int) -> np.ndarray:
    k = np.fft.fftfreq(dom.points) * dom.points
    keep = (np.abs(k) != dom.points // 2).astype(float)
    shape = [1] * dom.dim
    shape[axis] = dom.points
    return keep.reshape(shape)


@lru_cache(maxsize=256)
def symbol(op: MultiplierOp, dom: Domain) -> np.ndarray:
    """Symbol values on the FFT frequency grid (cached per domain)."""
    absxi = _abs_xi(dom)
    if op.kind == "ds":
        out = absxi**op.order if op.order > 0 else np.ones_like(absxi)
        if op.order > 0:
            out = np.where(absxi == 0, 0.0, out)
    elif op.kind == "js":
        out = (1 + absxi**2) ** (op.order / 2)
    elif op.kind == "directional":
        if not 0 <= op.axis < dom.dim:
            raise ValueError(f"axis {op.axis} out of range for dim {dom.dim}")
        xj = np.abs(_frequencies(dom)[op.axis])
        out = xj**op.order if op.order > 0 else np.ones_like(xj)
    elif op.kind == "poisson":
        out = np.exp(-op.t * absxi)
    else:
        decay = np.exp(-op.t * absxi)
        if op.axis == "t" or op.axis == dom.dim:
            out = -absxi * decay
        else:
            ax = int(op.axis)
            if not 0 <= ax < dom.dim:
                raise ValueError(f"axis {op.axis} out of range for dim {dom.dim}")
            # odd symbol: drop the unpaired Nyquist mode to keep real data real
            out = 1j * _frequencies(dom)[ax] * decay * _nyquist_mask(dom, ax)
    out = np.asarray(out)
    out.setflags(write=False)
    return out


def _fftn(a):
    return np.fft.fftn(a)


def _ifftn(a):
    return np.fft.ifftn(a)


def apply_multiplier(op: MultiplierOp, u: GridFunction) -> GridFunction:
    out = _ifftn(symbol(op, u.domain) * _fftn(u.samples))
    return GridFunction(u.domain, out, _op_label(op, u.label))


def _op_label(op: MultiplierOp, label: str) -> str:
    if op.kind in ("poisson", "poisson_grad"):
        return f"{op.kind}[t={op.t:g}]({label})"
    return f"{op.kind}[{op.order:g}]({label})"


def ds(u: GridFunction, s: float) -> GridFunction:
    return apply_multiplier(Ds(s), u)


def compose_check(s: float, t: float, u: GridFunction) -> float:
    """Sup-norm residual of ``Ds(s) Ds(t) u - Ds(s+t) u``."""
    if s < 0 or t < 0:
        raise ValueError("orders must be >= 0")
    lhs = apply_multiplier(Ds(s), apply_multiplier(Ds(t), u)).samples
    rhs = apply_multiplier(Ds(s + t), u).samples
    return float(np.abs(lhs - rhs).max())


def gradient(u: GridFunction) -> tuple:
    """Spectral spatial gradient, one GridFunction per axis."""
    xi = _frequencies(u.domain)
    uh = _fftn(u.samples)
    out = []
    for ax in range(u.domain.dim):
        sym = 1j * xi[ax] * _nyquist_mask(u.domain, ax)
        out.append(GridFunction(u.domain, _ifftn(sym * uh), f"d{ax}({u.label})"))
    return tuple(out)


def commutator_spectral(u: GridFunction, v: GridFunction, s: float) -> GridFunction:
    """Leibniz defect ``Ds(uv) - u Ds v - v Ds u``."""
    if u.domain != v.domain:
        raise GridError("domain mismatch")
    if not 0 < s < 2:
        raise ValueError(f"commutator order s must lie in (0,2), got {s}")
    op = Ds(s)
    uv = pointwise_product(u, v)
    out = (
        apply_multiplier(op, uv).samples
        - u.samples * apply_multiplier(op, v).samples
        - v.samples * apply_multiplier(op, u).samples
    )
    return GridFunction(u.domain, out, f"comm[{s:g}]({u.label},{v.label})")


# ---------------------------------------------------------------------------
# Poisson extension


def poisson_kernel(n: int, t: float, y) -> np.ndarray:
    """Explicit Poisson kernel of the upper half space in R^{n+1}."""
    y = np.asarray(y, dtype=float)
    const = math.gamma((n + 1) / 2) / math.pi ** ((n + 1) / 2)
    return const * t / (t * t + y * y) ** ((n + 1) / 2)


def default_t_levels(dom: Domain, count: int = 64) -> np.ndarray:
    """Log-spaced levels from ``h/2`` to twice the extent."""
    return np.geomspace(dom.h / 2, 2 * dom.extent, count)


def validate_t_levels(dom: Domain, t_levels) -> np.ndarray:
    t = np.asarray(t_levels, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_levels must be a non-empty 1-D sequence")
    if not np.all(t > 0) or not np.all(np.diff(t) > 0):
        raise ValueError("t_levels must be positive and strictly increasing")
    if t.size < 16:
        raise ValueError(f"need at least 16 t-levels, got {t.size}")
    if t[0] > dom.h / 2 * (1 + 1e-12):
        raise ValueError(f"first t-level {t[0]:g} exceeds h/2 = {dom.h / 2:g}")
    if t[-1] < dom.extent * (1 - 1e-12):
        raise ValueError(f"last t-level {t[-1]:g} is below the extent {dom.extent:g}")
    return t


@dataclass(frozen=True, eq=False)
class HalfSpaceField:
    """Poisson extension ``U`` and its gradient on a slab of t-levels.

    ``U`` has shape ``(levels, *grid)``; ``grad`` has shape
    ``(levels, n + 1, *grid)`` with the spatial components first and the
    t-derivative last.
    """

    domain: Domain
    t_levels: np.ndarray
    U: np.ndarray
    grad: np.ndarray

    def level(self, i: int) -> GridFunction:
        return GridFunction(self.domain, self.U[i], f"U[t={self.t_levels[i]:g}]")

    def energy(self) -> np.ndarray:
        """``|d_{x,t} U|^2`` summed over components, shape ``(levels, *grid)``."""
        g = self.grad
        return (g.real**2 + g.imag**2).sum(axis=1)


def poisson_extend(u: GridFunction, t_levels=None) -> HalfSpaceField:
    dom = u.domain
    t = default_t_levels(dom) if t_levels is None else validate_t_levels(dom, t_levels)
    absxi = _abs_xi(dom)
    xi = _frequencies(dom)
    uh = _fftn(u.samples)
    masks = [_nyquist_mask(dom, ax) for ax in range(dom.dim)]
    # broadcast over levels: (L, *grid)
    tt = t.reshape((-1,) + (1,) * dom.dim)
    decay = np.exp(-tt * absxi) * uh
    axes = tuple(range(1, dom.dim + 1))
    U = np.fft.ifftn(decay, axes=axes)
    grad = np.empty((t.size, dom.dim + 1) + dom.shape, dtype=complex)
    for ax in range(dom.dim):
        grad[:, ax] = np.fft.ifftn(1j * xi[ax] * masks[ax] * decay, axes=axes)
    grad[:, dom.dim] = np.fft.ifftn(-absxi * decay, axes=axes)
    return HalfSpaceField(dom, t, U, grad)


def harmonicity_residual(field: HalfSpaceField) -> float:
    """Relative sup of ``(Delta_x + d_t^2) U`` on interior levels.

    The t-derivative uses the three-point second difference on the
    (non-uniform) level grid, the x-Laplacian is spectral.
    """
    dom = field.domain
    absxi2 = _abs_xi(dom) ** 2
    axes = tuple(range(1, dom.dim + 1))
    U = field.U
    lap = np.fft.ifftn(-absxi2 * np.fft.fftn(U, axes=axes), axes=axes)
    t = field.t_levels
    h0 = np.diff(t)[:-1].reshape((-1,) + (1,) * dom.dim)
    h1 = np.diff(t)[1:].reshape((-1,) + (1,) * dom.dim)
    d2 = 2 * (h0 * U[2:] - (h0 + h1) * U[1:-1] + h1 * U[:-2]) / (h0 * h1 * (h0 + h1))
    res = np.abs(lap[1:-1] + d2).max()
    scale = np.abs(lap[1:-1]).max()
    return float(res / scale) if scale > 0 else float(res)
