"""Littlewood's nontangential square function and the Lusin area integral.

Both are weighted energies of the half-space gradient of the Poisson
extension.  Per t-level the y-integral is a circular convolution of
``|d_{x,t} U(., t)|^2`` with a radial kernel sampled at minimal-image
offsets; the t-integral is the trapezoid rule in ``log t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import Domain, GridFunction
from .spectral import HalfSpaceField, default_t_levels, poisson_extend, validate_t_levels

MODES = ("convolutional", "direct")


@dataclass(frozen=True)
class GStarParams:
    """``lam > 0`` is accepted for exploration; admissibility is judged elsewhere."""

    lam: float
    t_levels: tuple | None = None
    mode: str = "convolutional"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.mode not in MODES:
            raise ValueError(f"unknown evaluation mode {self.mode!r}")
        if self.t_levels is not None:
            object.__setattr__(self, "t_levels", tuple(float(t) for t in self.t_levels))

    def levels(self, dom: Domain) -> np.ndarray:
        if self.t_levels is None:
            return default_t_levels(dom)
        return validate_t_levels(dom, self.t_levels)


@lru_cache(maxsize=16)
def _min_image_radius(dom: Domain) -> np.ndarray:
    k = np.fft.fftfreq(dom.points) * dom.points
    d = np.abs(k) * dom.h
    grids = np.meshgrid(*([d] * dom.dim), indexing="ij")
    r = np.sqrt(sum(g * g for g in grids))
    r.setflags(write=False)
    return r


def _gstar_kernel(r: np.ndarray, t: float, lam: float, n: int) -> np.ndarray:
    return (t / (t + r)) ** (lam * n) * t ** (1 - n)


def _cone_kernel(r: np.ndarray, t: float, aperture: float, n: int) -> np.ndarray:
    return np.where(r < aperture * t, 1.0, 0.0) * t ** (1 - n)


def _convolve_levels(energy: np.ndarray, kernels: np.ndarray, dom: Domain) -> np.ndarray:
    axes = tuple(range(1, dom.dim + 1))
    eh = np.fft.rfftn(energy, axes=axes)
    kh = np.fft.rfftn(kernels, axes=axes)
    out = np.fft.irfftn(eh * kh, s=dom.shape, axes=axes)
    return dom.cell_volume * out


def _direct_levels(energy: np.ndarray, kernels: np.ndarray, dom: Domain) -> np.ndarray:
    """Explicit sum ``h^n sum_j k(x_i - x_j) E(x_j)`` over all node pairs."""
    N = dom.points
    idx = np.arange(N)
    diff = (idx[:, None] - idx[None, :]) % N
    out = np.empty_like(energy)
    for lvl in range(energy.shape[0]):
        k, e = kernels[lvl], energy[lvl]
        if dom.dim == 1:
            out[lvl] = k[diff] @ e
        else:
            acc = np.zeros(dom.shape)
            for j0 in range(N):
                rows = k[diff[:, j0]]
                acc += np.einsum("abj,j->ab", rows[:, diff], e[j0])
            out[lvl] = acc
    return dom.cell_volume * out


def _t_integral(values: np.ndarray, t: np.ndarray) -> np.ndarray:
    # int f dt = int f t d(log t)
    tt = t.reshape((-1,) + (1,) * (values.ndim - 1))
    return np.trapezoid(values * tt, np.log(t), axis=0)


def _square_function(field: HalfSpaceField, kernel_fn, mode: str) -> np.ndarray:
    dom = field.domain
    r = _min_image_radius(dom)
    kernels = np.stack([kernel_fn(r, t) for t in field.t_levels])
    energy = field.energy()
    if mode == "convolutional":
        per_level = _convolve_levels(energy, kernels, dom)
    else:
        per_level = _direct_levels(energy, kernels, dom)
    return np.sqrt(np.maximum(_t_integral(per_level, field.t_levels), 0.0))


def g_star(u: GridFunction, params: GStarParams, field: HalfSpaceField | None = None) -> GridFunction:
    """Pointwise ``g*_lambda(u)``; pass ``field`` to reuse a Poisson extension."""
    dom = u.domain
    if field is None:
        field = poisson_extend(u, params.levels(dom))
    elif params.t_levels is not None and not np.array_equal(field.t_levels, params.levels(dom)):
        raise ValueError("field t-levels do not match the parameters")
    n, lam = dom.dim, params.lam
    vals = _square_function(field, lambda r, t: _gstar_kernel(r, t, lam, n), params.mode)
    return GridFunction(dom, vals, f"gstar[{lam:g}]({u.label})")


def area_integral(u: GridFunction, aperture: float, t_levels=None, mode: str = "convolutional") -> GridFunction:
    """Lusin area integral over the cone ``|y| < aperture * t``."""
    if not aperture > 0:
        raise ValueError(f"aperture must be positive, got {aperture}")
    dom = u.domain
    levels = default_t_levels(dom) if t_levels is None else validate_t_levels(dom, t_levels)
    field = poisson_extend(u, levels)
    n = dom.dim
    vals = _square_function(field, lambda r, t: _cone_kernel(r, t, aperture, n), mode)
    return GridFunction(dom, vals, f"area[{aperture:g}]({u.label})")


def cone_constant(aperture: float, lam: float, n: int) -> float:
    """Bound of the area integral by ``g*_lambda``: ``(1 + aperture)^(lam n / 2)``.

    On the cone the ``g*`` weight is at least ``(1 + aperture)^(-lam n)``;
    the square root comes from the outer power 1/2.
    """
    return (1 + aperture) ** (lam * n / 2)


def tmin_refinement_diff(u: GridFunction, params: GStarParams) -> float:
    """Relative sup change of ``g*`` when a level at ``t_min / 2`` is prepended."""
    dom = u.domain
    t = params.levels(dom)
    base = g_star(u, GStarParams(params.lam, tuple(t), params.mode)).samples.real
    finer = np.concatenate([[t[0] / 2], t])
    ref = g_star(u, GStarParams(params.lam, tuple(finer), params.mode)).samples.real
    scale = np.abs(ref).max()
    return float(np.abs(ref - base).max() / scale) if scale > 0 else 0.0
