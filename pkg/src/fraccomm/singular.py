"""Hypersingular quadrature on the grid lattice.

Every integral here has the shape ``int F(x, y) |y|^{-n-a} dy`` and is
evaluated as a lattice sum over the grid offsets ``y = m h``, applied as
shifted-array arithmetic.  Three tail models are available:

* ``periodic`` (default): periodic shifts with the periodized kernel
  ``sum_k |y + k L|^{-n-a}``.  This is the exact real-space form of the
  Fourier multipliers in :mod:`fraccomm.spectral`.
* ``truncate``: zero padding off the box, offsets with ``|y| <= outer``.
* ``decay_model``: zero padding over the full reach of the box plus the
  closed-form far tail of the kernel, i.e. the operator on ``R^n`` for a
  function vanishing outside the box.

Near ``y = 0`` the integrands of the linear and bilinear forms behave like a
quadratic form ``y.A y`` times ``|y|^{-n-a}``.  The plain lattice sum then
carries an ``O(h^{2-a})`` error whose leading term is
``h^{2-a} tr(A)/n * Z_n(n+a-2)`` with ``Z_n`` the (analytically continued)
lattice zeta function ``sum_{m != 0} |m|^{-sigma}``.  That term is
subtracted, with ``tr(A)`` taken from central differences, which leaves an
``O(h^{4-a})`` scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import mpmath
import numpy as np
from scipy import integrate as _integrate
from scipy.special import zeta as _hurwitz

from .grid import Domain, GridError, GridFunction, TruncatedLine, make_domain, sample_family, Gaussian
from . import spectral

TAILS = ("periodic", "truncate", "decay_model")
FORMS = ("pv", "second_difference")
_IMAGE_RANGE_2D = 48
_IMAGE_RANGE_FREE = 16
_CHUNK_ELEMENTS = 1 << 21


class QuadratureError(ValueError):
    pass


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class SingularQuadrature:
    """Quadrature settings for the hypersingular forms.

    ``form=None`` picks the principal-value form for ``s < 1`` and the
    second-difference form otherwise.  ``epsilon`` (default ``h/2``) drops
    lattice nodes with ``|y| <= epsilon``; with ``lattice_correction`` the
    dropped core is restored from the quadratic Taylor model.
    """

    form: str | None = None
    epsilon: float | None = None
    outer_radius: float | None = None
    tail: str = "periodic"
    lattice_correction: bool = True

    def __post_init__(self):
        if self.form is not None and self.form not in FORMS:
            raise QuadratureError(f"unknown quadrature form {self.form!r}")
        if self.tail not in TAILS:
            raise QuadratureError(f"unknown tail handling {self.tail!r}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise QuadratureError("epsilon must be positive")
        if self.form == "second_difference" and self.epsilon is not None:
            raise QuadratureError("the second-difference form takes no cutoff")

    def resolve(self, dom: Domain) -> tuple:
        eps = dom.h / 2 if self.epsilon is None else self.epsilon
        outer = dom.half_width if self.outer_radius is None else self.outer_radius
        if not eps < outer:
            raise QuadratureError(f"cutoff {eps:g} must be below the outer radius {outer:g}")
        if self.tail != "periodic" and dom.kind == "torus" and self.tail == "decay_model":
            raise QuadratureError("decay_model needs a truncated-line domain")
        return eps, outer


DEFAULT_QUADRATURE = SingularQuadrature()


# ---------------------------------------------------------------------------
# lattice zeta function and kernels


@lru_cache(maxsize=512)
def lattice_zeta(n: int, sigma: float) -> float:
    """``sum_{m in Z^n, m != 0} |m|^{-sigma}``, analytically continued.

    Uses ``2 zeta(sigma)`` in 1-D and ``4 zeta(sigma/2) beta(sigma/2)`` on the
    square lattice, ``beta`` being the Dirichlet beta function.
    """
    if n == 1:
        return float(2 * mpmath.zeta(sigma))
    if n == 2:
        half = mpmath.mpf(sigma) / 2
        return float(4 * mpmath.zeta(half) * mpmath.dirichlet(half, [0, 1, 0, -1]))
    raise ValueError("dimension must be 1 or 2")


@lru_cache(maxsize=64)
def _square_exterior_factor(s: float) -> float:
    # int_{|z|_inf > 1} |z|^{-2-s} dz = 8/s * int_0^{pi/4} cos^s
    val, _ = _integrate.quad(lambda th: math.cos(th) ** s, 0.0, math.pi / 4)
    return 8.0 * val / s


def tail_integral(n: int, a: float, half_width: float) -> float:
    """``int |y|^{-n-a}`` over the exterior of the cube ``|y|_inf > half_width``."""
    if n == 1:
        return 2.0 * half_width ** (-a) / a
    return _square_exterior_factor(a) * half_width ** (-a)


def _periodized_kernel(dom: Domain, ynorm_parts: np.ndarray, exponent: float) -> np.ndarray:
    """``sum_k |y + k L|^{-exponent}`` for offsets ``y`` of shape ``(M, n)``."""
    L = dom.extent
    if dom.dim == 1:
        y = np.abs(ynorm_parts[:, 0]) / L
        return L ** (-exponent) * (_hurwitz(exponent, y) + _hurwitz(exponent, 1 - y))
    K = _IMAGE_RANGE_2D
    y0, y1 = ynorm_parts[:, 0], ynorm_parts[:, 1]
    out = np.zeros(y0.shape)
    ks = np.arange(-K, K + 1) * L
    for k0 in ks:
        d0 = (y0 + k0) ** 2
        out += (((d0[:, None] + (y1[:, None] + ks[None, :]) ** 2)) ** (-exponent / 2)).sum(axis=1)
    # far images by the cell-average (integral) approximation
    out += tail_integral(2, exponent - 2, (K + 0.5) * L) / L**2
    return out


@dataclass(frozen=True, eq=False)
class LatticePlan:
    domain: Domain
    tail: str
    offsets: np.ndarray  # (M, n) ints, ordered m1, -m1, m2, -m2, ...
    y: np.ndarray  # (M, n) floats
    r: np.ndarray  # (M,)
    antipodal: np.ndarray  # (M,) bool, m == -m on the torus
    padded: bool
    reach: float  # half width of the cube covered by the lattice cells


@lru_cache(maxsize=32)
def lattice_plan(dom: Domain, tail: str, outer: float) -> LatticePlan:
    N, h, n = dom.points, dom.h, dom.dim
    padded = tail != "periodic" and dom.kind == "line"
    if padded:
        rng = np.arange(-(N - 1), N)
    else:
        rng = np.arange(-N // 2 + 1, N // 2 + 1)
    grids = np.meshgrid(*([rng] * n), indexing="ij")
    m = np.stack([g.ravel() for g in grids], axis=1)
    m = m[np.any(m != 0, axis=1)]
    y = m * h
    r = np.sqrt((y * y).sum(axis=1))
    if tail == "truncate":
        keep = r <= outer * (1 + 1e-12)
        m, y, r = m[keep], y[keep], r[keep]
    # canonical order: by radius, then lexicographic, with each -m right after m
    key = np.lexsort(tuple(m[:, k] for k in reversed(range(n))) + (np.round(r / h, 9),))
    m, y, r = m[key], y[key], r[key]
    if padded:
        antipodal = np.zeros(len(m), dtype=bool)
    else:
        antipodal = np.all((m == 0) | (m == N // 2), axis=1)
    order = _pair_order(m, N if not padded else None)
    m, y, r, antipodal = m[order], y[order], r[order], antipodal[order]
    for a in (m, y, r, antipodal):
        a.setflags(write=False)
    reach = (N - 0.5) * h if padded else dom.half_width
    return LatticePlan(dom, tail, m, y, r, antipodal, padded, reach)


def _pair_order(m: np.ndarray, period) -> np.ndarray:
    index = {tuple(row): i for i, row in enumerate(m)}
    seen = np.zeros(len(m), dtype=bool)
    order = []
    for i, row in enumerate(m):
        if seen[i]:
            continue
        seen[i] = True
        order.append(i)
        neg = -row
        if period is not None:
            neg = np.where(neg == -(period // 2), period // 2, neg)
        j = index.get(tuple(neg))
        if j is not None and not seen[j]:
            seen[j] = True
            order.append(j)
    return np.asarray(order)


def _half_mask(plan: LatticePlan) -> np.ndarray:
    """Select one of each ``+-m`` pair (first nonzero coordinate positive)."""
    m = plan.offsets
    first = np.zeros(len(m), dtype=int)
    for k in reversed(range(m.shape[1])):
        first = np.where(m[:, k] != 0, m[:, k], first)
    return (first > 0) | plan.antipodal


@lru_cache(maxsize=128)
def _weights(plan: LatticePlan, exponent: float) -> np.ndarray:
    dom = plan.domain
    if plan.tail == "periodic":
        k = _periodized_kernel(dom, plan.y, exponent)
    else:
        k = plan.r ** (-exponent)
    w = dom.cell_volume * k
    w.setflags(write=False)
    return w


def kernel_weights(dom: Domain, order: float, quad: SingularQuadrature = DEFAULT_QUADRATURE):
    """Lattice plan and quadrature weights ``h^n K(y)`` for ``|y|^{-n-order}``."""
    _, outer = quad.resolve(dom)
    plan = lattice_plan(dom, quad.tail, outer)
    return plan, _weights(plan, dom.dim + order)


def _gather(arr: np.ndarray, plan: LatticePlan, sl: slice) -> np.ndarray:
    """Stack of shifted copies ``arr(x + m h)`` for the offsets in ``sl``."""
    dom = plan.domain
    N = dom.points
    m = plan.offsets[sl]
    base = np.arange(N)
    if plan.padded:
        src = np.pad(arr, N)
        if dom.dim == 1:
            return src[base[None, :] + m[:, 0:1] + N]
        i0 = base[None, :, None] + m[:, 0, None, None] + N
        i1 = base[None, None, :] + m[:, 1, None, None] + N
        return src[i0, i1]
    if dom.dim == 1:
        return arr[(base[None, :] + m[:, 0:1]) % N]
    i0 = (base[None, :, None] + m[:, 0, None, None]) % N
    i1 = (base[None, None, :] + m[:, 1, None, None]) % N
    return arr[i0, i1]


def _chunks(plan: LatticePlan, select: np.ndarray | None = None):
    idx = np.arange(len(plan.offsets)) if select is None else np.flatnonzero(select)
    step = max(1, _CHUNK_ELEMENTS // plan.domain.cell_count)
    for start in range(0, len(idx), step):
        yield idx[start : start + step]


def _reduce(plan, weights, fields, integrand, select=None, coeff=None) -> np.ndarray:
    """``sum_m w_m * integrand(shifted fields, fields)`` in a fixed order."""
    dom = plan.domain
    total = np.zeros(dom.shape, dtype=complex)
    expand = (slice(None),) + (None,) * dom.dim
    for idx in _chunks(plan, select):
        shifted = [_gather(f, plan, idx) for f in fields]
        vals = integrand(shifted, fields, idx)
        w = weights[idx][expand]
        if coeff is not None:
            w = w * coeff(idx)
        total += (w * vals).sum(axis=0)
    return total


# fourth-order central stencils; only feed the O(h^{2-a}) correction term
def _central_gradient(arr: np.ndarray, h: float) -> list:
    out = []
    for ax in range(arr.ndim):
        p1, m1 = np.roll(arr, -1, ax), np.roll(arr, 1, ax)
        p2, m2 = np.roll(arr, -2, ax), np.roll(arr, 2, ax)
        out.append((8 * (p1 - m1) - (p2 - m2)) / (12 * h))
    return out


def _central_laplacian(arr: np.ndarray, h: float) -> np.ndarray:
    total = 0
    for ax in range(arr.ndim):
        p1, m1 = np.roll(arr, -1, ax), np.roll(arr, 1, ax)
        p2, m2 = np.roll(arr, -2, ax), np.roll(arr, 2, ax)
        total = total + (16 * (p1 + m1) - (p2 + m2) - 30 * arr) / (12 * h**2)
    return total


def _quadratic_correction(plan, weights, order, trace, eps) -> np.ndarray:
    """Restore the dropped core and remove the leading lattice error.

    ``trace`` is ``tr(A)`` of the local quadratic model ``y.A y`` of the
    integrand numerator; the kernel is ``|y|^{-n-order}``.
    """
    dom = plan.domain
    n, h = dom.dim, dom.h
    core = plan.r <= eps * (1 + 1e-12)
    out = np.zeros(dom.shape, dtype=complex)
    if core.any():
        out += trace * float((plan.r[core] ** 2 * weights[core]).sum()) / n
    out -= h ** (2 - order) * trace / n * lattice_zeta(n, n + order - 2)
    return out


def _tail_term(plan: LatticePlan, order: float) -> float:
    if plan.tail != "decay_model":
        return 0.0
    return tail_integral(plan.domain.dim, order, plan.reach)


def _check_pair(u: GridFunction, v: GridFunction):
    if u.domain != v.domain:
        raise GridError("domain mismatch")


# ---------------------------------------------------------------------------
# operators


def pv_integral(u: GridFunction, s: float, quad: SingularQuadrature = DEFAULT_QUADRATURE) -> np.ndarray:
    """Unnormalized ``PV int (u(x+y) - u(x)) |y|^{-n-s} dy`` at every node."""
    if not 0 < s < 2:
        raise ValueError(f"order s must lie in (0,2), got {s}")
    dom = u.domain
    eps, _ = quad.resolve(dom)
    plan, w = kernel_weights(dom, s, quad)
    arr = u.samples
    form = quad.form or ("pv" if s < 1 else "second_difference")
    if form == "pv":
        keep = plan.r > eps * (1 + 1e-12)
        total = _reduce(plan, w, [arr], lambda sh, f, idx: sh[0] - f[0], select=keep)
    else:
        half = _half_mask(plan)
        dup = np.where(plan.antipodal, 0.5, 1.0)
        mult = lambda idx: dup[idx].reshape((-1,) + (1,) * dom.dim)
        total = np.zeros(dom.shape, dtype=complex)
        # u(x+y) + u(x-y) - 2u(x) over the half lattice
        neg_plan = _negated(plan)
        expand = (slice(None),) + (None,) * dom.dim
        for idx in _chunks(plan, half):
            plus = _gather(arr, plan, idx)
            minus = _gather(arr, neg_plan, idx)
            vals = (plus + minus - 2 * arr) * mult(idx)
            total += (w[idx][expand] * vals).sum(axis=0)
    if quad.lattice_correction:
        trace = _central_laplacian(arr, dom.h) / 2
        total += _quadratic_correction(plan, w, s, trace, eps if form == "pv" else 0.0)
    total -= arr * _tail_term(plan, s)
    return total


@lru_cache(maxsize=32)
def _negated_cached(plan: LatticePlan) -> LatticePlan:
    m = -plan.offsets
    m.setflags(write=False)
    return LatticePlan(plan.domain, plan.tail, m, -plan.y, plan.r, plan.antipodal, plan.padded, plan.reach)


def _negated(plan: LatticePlan) -> LatticePlan:
    return _negated_cached(plan)


@lru_cache(maxsize=64)
def constant_c(n: int, s: float, points: int | None = None) -> float:
    """Normalization with ``Ds(s) u = c(n, s) * PV int (u(x+y)-u(x))/|y|^{n+s} dy``.

    Obtained as the median ratio of the spectral ``Ds`` to the lattice PV
    integral on a reference Gaussian (periodic kernel, corrected lattice).
    With this sign convention ``c`` is negative; ``c(1, 1) = -1/pi``.
    """
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    if not 0 < s < 2:
        raise ValueError(f"order s must lie in (0,2), got {s}")
    if n == 1:
        dom = make_domain(1, TruncatedLine(20.0), points or 1024)
    else:
        dom = make_domain(2, TruncatedLine(8.0), points or 64)
    u = sample_family(Gaussian(1.0), dom)
    raw = pv_integral(u, s, SingularQuadrature(form="pv")).real
    ref = spectral.ds(u, s).samples.real
    good = (np.abs(raw) > 0.05 * np.abs(raw).max()) & (np.abs(ref) > 0.05 * np.abs(ref).max())
    ratios = ref[good] / raw[good]
    med = float(np.median(ratios))
    lo, hi = np.percentile(ratios, [5, 95])
    if (hi - lo) > 0.05 * abs(med):
        raise QuadratureError(
            f"c({n},{s}) ratio dispersion {(hi - lo) / abs(med):.3g} exceeds 5%: under-resolved"
        )
    return med


def hypersingular_ds(u: GridFunction, s: float, quad: SingularQuadrature = DEFAULT_QUADRATURE) -> GridFunction:
    """``D^s u`` from the hypersingular integral.

    The second-difference form evaluates ``c' * int (u(x+y)+u(x-y)-2u(x))
    |y|^{-n-s} dy`` with ``c' = c/2``; the principal-value form evaluates
    ``c * PV int (u(x+y)-u(x)) |y|^{-n-s} dy``.
    """
    form = quad.form or ("pv" if s < 1 else "second_difference")
    raw = pv_integral(u, s, quad)
    c = constant_c(u.domain.dim, s)
    if form == "second_difference":
        out = (c / 2) * (2 * raw)
    else:
        out = c * raw
    return GridFunction(u.domain, out, f"hyper_ds[{s:g}]({u.label})")


def _image_kernel(dom: Domain, z: np.ndarray, exponent: float) -> np.ndarray:
    """``sum_{k != 0} |z + k L|^{-exponent}`` for offsets ``z`` of shape ``(M, n)``, ``|z_i| < L``."""
    L = dom.extent
    if dom.dim == 1:
        y = np.abs(z[:, 0]) / L
        return L ** (-exponent) * (_hurwitz(exponent, 1 + y) + _hurwitz(exponent, 1 - y))
    K = _IMAGE_RANGE_FREE
    out = np.zeros(len(z))
    for k0 in range(-K, K + 1):
        for k1 in range(-K, K + 1):
            if k0 == 0 and k1 == 0:
                continue
            out += ((z[:, 0] + k0 * L) ** 2 + (z[:, 1] + k1 * L) ** 2) ** (-exponent / 2)
    out += tail_integral(2, exponent - 2, (K + 0.5) * L) / L**2
    return out


def free_space_ds(u: GridFunction, s: float) -> GridFunction:
    """``D^s u`` on ``R^n`` for ``u`` vanishing off a truncated box.

    The FFT multiplier returns the periodization ``sum_k (D^s u)(x + k L)``,
    whose image terms decay only like ``|kL|^{-n-s}``.  Off the support the
    operator is the convolution ``c(n,s) int u(w) |w - z|^{-n-s} dw``, so the
    images are removed by one linear convolution with the image kernel.
    """
    if not 0 < s < 2:
        raise ValueError(f"order s must lie in (0,2), got {s}")
    dom = u.domain
    if dom.kind != "line":
        raise GridError("free-space evaluation needs a truncated-line domain")
    N, n, h = dom.points, dom.dim, dom.h
    d = np.arange(-N, N) * h
    grids = np.meshgrid(*([d] * n), indexing="ij")
    z = np.stack([g.ravel() for g in grids], axis=1)
    # the offset -L is never a node difference; zero it to skip the pole
    inside = np.all(np.abs(z) < dom.extent - h / 2, axis=1)
    kern = np.zeros(len(z))
    kern[inside] = _image_kernel(dom, z[inside], n + s)
    kern = kern.reshape((2 * N,) * n)
    kern = np.fft.ifftshift(kern)
    padded = np.zeros((2 * N,) * n, dtype=complex)
    padded[(slice(0, N),) * n] = u.samples
    images = np.fft.ifftn(np.fft.fftn(padded) * np.fft.fftn(kern))[(slice(0, N),) * n]
    out = spectral.ds(u, s).samples - constant_c(n, s) * dom.cell_volume * images
    return GridFunction(dom, out, f"free_ds[{s:g}]({u.label})")


def bilinear_T(u: GridFunction, v: GridFunction, s: float, quad: SingularQuadrature = DEFAULT_QUADRATURE) -> GridFunction:
    """``T_s(u,v)(x) = int (u(x+y)-u(x))(v(x+y)-v(x)) |y|^{-n-s} dy``."""
    _check_pair(u, v)
    if not 0 < s < 2:
        raise ValueError(f"order s must lie in (0,2), got {s}")
    dom = u.domain
    eps, _ = quad.resolve(dom)
    plan, w = kernel_weights(dom, s, quad)
    a, b = u.samples, v.samples
    keep = plan.r > eps * (1 + 1e-12)
    total = _reduce(plan, w, [a, b], lambda sh, f, idx: (sh[0] - f[0]) * (sh[1] - f[1]), select=keep)
    if quad.lattice_correction:
        ga, gb = _central_gradient(a, dom.h), _central_gradient(b, dom.h)
        trace = sum(x * y for x, y in zip(ga, gb))
        total += _quadratic_correction(plan, w, s, trace, eps)
    total += a * b * _tail_term(plan, s)
    return GridFunction(dom, total, f"T[{s:g}]({u.label},{v.label})")


def square_fractional(u: GridFunction, gamma: float, quad: SingularQuadrature = DEFAULT_QUADRATURE) -> GridFunction:
    """``(int |u(x+y)-u(x)|^2 |y|^{-n-2 gamma} dy)^{1/2}``, a nonnegative field."""
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0,1), got {gamma}")
    dom = u.domain
    eps, _ = quad.resolve(dom)
    order = 2 * gamma
    plan, w = kernel_weights(dom, order, quad)
    a = u.samples
    keep = plan.r > eps * (1 + 1e-12)

    def sq(sh, f, idx):
        d = sh[0] - f[0]
        return d.real**2 + d.imag**2

    total = _reduce(plan, w, [a], sq, select=keep).real
    if quad.lattice_correction:
        trace = sum(np.abs(g) ** 2 for g in _central_gradient(a, dom.h))
        total += _quadratic_correction(plan, w, order, trace, eps).real
    total += np.abs(a) ** 2 * _tail_term(plan, order)
    return GridFunction(dom, np.sqrt(np.maximum(total, 0.0)), f"Dgamma[{gamma:g}]({u.label})")


def fractional_p_laplacian(u: GridFunction, s: float, p: float, quad: SingularQuadrature = DEFAULT_QUADRATURE) -> GridFunction:
    """``int |u(x)-u(y)|^{p-2} (u(x)-u(y)) |x-y|^{-n-sp} dy`` with unit coefficient.

    Only ``p = 2`` gets the lattice correction (the integrand is then
    linear); otherwise the scheme is the plain truncated lattice sum.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0,1), got {s}")
    if not s * p < 2:
        raise ValueError(f"need s*p < 2, got {s * p}")
    if not u.is_real():
        raise ValueError("the fractional p-Laplacian is defined for real u")
    dom = u.domain
    eps, _ = quad.resolve(dom)
    order = s * p
    plan, w = kernel_weights(dom, order, quad)
    a = u.samples.real
    keep = plan.r > eps * (1 + 1e-12)

    def g(d):
        return np.sign(d) * np.abs(d) ** (p - 1)

    total = _reduce(plan, w, [a], lambda sh, f, idx: g(f[0] - sh[0]), select=keep).real
    if quad.lattice_correction and p == 2:
        trace = -_central_laplacian(a, dom.h) / 2
        total += _quadratic_correction(plan, w, order, trace, eps).real
    total += g(a) * _tail_term(plan, order)
    return GridFunction(dom, total, f"plap[s={s:g},p={p:g}]({u.label})")


@dataclass(frozen=True)
class DirichletKernel:
    """Symmetric coefficient ``A(x, y)`` with ``1/Lambda <= A <= Lambda``.

    ``coefficient`` takes two coordinate arrays of shape ``(..., n)`` and
    returns ``A`` with shape ``(...)``.
    """

    a: float
    coefficient: Callable
    Lambda: float = 1.0

    def __post_init__(self):
        if not 0 < self.a < 2:
            raise KernelError(f"exponent a must lie in (0,2), got {self.a}")
        if not self.Lambda >= 1:
            raise KernelError("Lambda must be >= 1")

    def check_bounds(self, values: np.ndarray):
        tol = 1e-12 * self.Lambda
        if values.min() < 1 / self.Lambda - tol or values.max() > self.Lambda + tol:
            raise KernelError(
                f"coefficient leaves [{1 / self.Lambda:g}, {self.Lambda:g}]: "
                f"range [{values.min():g}, {values.max():g}]"
            )


def unit_kernel(a: float) -> DirichletKernel:
    return DirichletKernel(a, lambda x, y: np.ones(np.broadcast_shapes(x.shape, y.shape)[:-1]))


def _points(dom: Domain) -> np.ndarray:
    return np.stack(dom.mesh(), axis=-1)


def check_kernel_symmetry(kernel: DirichletKernel, dom: Domain, samples: int = 4096):
    pts = _points(dom).reshape(-1, dom.dim)
    rng = np.random.default_rng(0)
    i = rng.integers(0, len(pts), samples)
    j = rng.integers(0, len(pts), samples)
    axy = np.asarray(kernel.coefficient(pts[i], pts[j]), dtype=float)
    ayx = np.asarray(kernel.coefficient(pts[j], pts[i]), dtype=float)
    if np.abs(axy - ayx).max() > 1e-12 * kernel.Lambda:
        raise KernelError("coefficient A(x, y) is not symmetric")
    kernel.check_bounds(axy)


def dirichlet_form(u: GridFunction, v: GridFunction, kernel: DirichletKernel, quad: SingularQuadrature = DEFAULT_QUADRATURE) -> complex:
    """``iint (u(x)-u(y))(v(x)-v(y)) A(x,y) |x-y|^{-n-a} dy dx``."""
    _check_pair(u, v)
    dom = u.domain
    check_kernel_symmetry(kernel, dom)
    eps, _ = quad.resolve(dom)
    plan, w = kernel_weights(dom, kernel.a, quad)
    pts = _points(dom)
    a, b = u.samples, v.samples
    keep = plan.r > eps * (1 + 1e-12)

    def integrand(sh, f, idx):
        y = plan.y[idx].reshape((-1,) + (1,) * dom.dim + (dom.dim,))
        other = pts[None] + y
        if not plan.padded:
            other = _wrap(dom, other)
        coef = np.asarray(kernel.coefficient(np.broadcast_to(pts[None], other.shape), other), dtype=float)
        kernel.check_bounds(coef)
        return (sh[0] - f[0]) * (sh[1] - f[1]) * coef

    field = _reduce(plan, w, [a, b], integrand, select=keep)
    diag = np.asarray(kernel.coefficient(pts, pts), dtype=float)
    if quad.lattice_correction:
        ga, gb = _central_gradient(a, dom.h), _central_gradient(b, dom.h)
        trace = diag * sum(x * y for x, y in zip(ga, gb))
        field += _quadratic_correction(plan, w, kernel.a, trace, eps)
    if plan.tail == "decay_model":
        # far tail with A frozen at the diagonal
        field += diag * a * b * _tail_term(plan, kernel.a)
    return complex(dom.cell_volume * field.sum())


def _wrap(dom: Domain, pts: np.ndarray) -> np.ndarray:
    if dom.kind == "torus":
        return pts % dom.extent
    R = dom.half_width
    return (pts + R) % dom.extent - R
