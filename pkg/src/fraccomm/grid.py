"""Uniform grids, sampled test functions, quadrature and the on-disk format.

Two domain kinds are supported.  A torus of period ``L`` is sampled at
``x_j = j h``; a truncated line/box ``[-R, R]^n`` is sampled at the offset
nodes ``x_j = (j + 1/2) h - R`` so that ``x = 0`` is never a node.  Every
transform in the package treats both kinds as periodic with period equal to
the extent (``L`` or ``2R``).

File format (``save`` / ``load``)::

    <one line of UTF-8 JSON header>\\n
    <points_per_axis**dim pairs of little-endian float64 (re, im), row-major>

The header carries ``format``, ``dim``, ``kind``, ``extent``,
``points_per_axis`` and ``label``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np

FORMAT_TAG = "fraccomm-grid-v1"
DECAY_TOL = 1e-12


class GridError(ValueError):
    pass


class DomainError(GridError):
    pass


class FormatError(GridError):
    pass


@dataclass(frozen=True)
class Torus:
    period: float = 2 * math.pi


@dataclass(frozen=True)
class TruncatedLine:
    half_width: float = 20.0


DomainKind = Union[Torus, TruncatedLine]


@dataclass(frozen=True)
class Domain:
    """A uniform grid on a torus or a truncated box.

    ``extent`` is the side length of the periodic cell: the period for a
    torus, ``2R`` for a truncated line.
    """

    dim: int
    kind: str
    extent: float
    points: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2, got {self.dim}")
        if self.kind not in ("torus", "line"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        n = self.points
        if n < 8 or n & (n - 1):
            raise DomainError(f"points_per_axis must be a power of two >= 8, got {n}")
        if not (self.extent > 0 and math.isfinite(self.extent)):
            raise DomainError(f"extent must be positive, got {self.extent}")

    @property
    def h(self) -> float:
        return self.extent / self.points

    @property
    def half_width(self) -> float:
        return self.extent / 2

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dim

    @property
    def cell_count(self) -> int:
        return self.points**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        j = np.arange(self.points)
        if self.kind == "torus":
            return j * self.h
        return (j + 0.5) * self.h - self.half_width

    def mesh(self) -> tuple:
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    def radius(self, center=0.0) -> np.ndarray:
        """Distance from ``center``; minimal-image distance on the torus."""
        c = np.broadcast_to(np.asarray(center, dtype=float), (self.dim,))
        sq = 0.0
        for x, cj in zip(self.mesh(), c):
            d = x - cj
            if self.kind == "torus":
                d = (d + self.extent / 2) % self.extent - self.extent / 2
            sq = sq + d * d
        return np.sqrt(sq)

    def header(self) -> dict:
        return {
            "dim": self.dim,
            "kind": self.kind,
            "extent": self.extent,
            "points_per_axis": self.points,
        }


def make_domain(dim: int, kind: DomainKind, points_per_axis: int) -> Domain:
    """Build a domain from a kind descriptor.

    >>> make_domain(1, TruncatedLine(20.0), 1024).h
    0.0390625
    """
    if isinstance(kind, Torus):
        return Domain(dim, "torus", float(kind.period), int(points_per_axis))
    if isinstance(kind, TruncatedLine):
        return Domain(dim, "line", 2.0 * float(kind.half_width), int(points_per_axis))
    raise DomainError(f"unknown domain kind {kind!r}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    domain: Domain
    samples: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.complex128)
        if arr.size != self.domain.cell_count:
            raise GridError(
                f"expected {self.domain.cell_count} samples, got {arr.size}"
            )
        arr = arr.reshape(self.domain.shape)
        if not np.all(np.isfinite(arr)):
            raise GridError("samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_callable(cls, domain: Domain, f: Callable, label: str = "") -> "GridFunction":
        return cls(domain, np.broadcast_to(f(*domain.mesh()), domain.shape), label)

    @classmethod
    def constant(cls, domain: Domain, value: complex = 1.0, label: str = "const"):
        return cls(domain, np.full(domain.shape, value, dtype=complex), label)

    @property
    def real(self) -> np.ndarray:
        return self.samples.real

    def relabel(self, label: str) -> "GridFunction":
        return GridFunction(self.domain, self.samples, label)

    def with_samples(self, samples, label: str | None = None) -> "GridFunction":
        return GridFunction(self.domain, samples, self.label if label is None else label)

    def is_real(self, tol: float = 1e-10) -> bool:
        scale = max(float(np.abs(self.samples).max()), 1e-300)
        return float(np.abs(self.samples.imag).max()) <= tol * scale

    def _check(self, other: "GridFunction"):
        if other.domain != self.domain:
            raise GridError("domain mismatch")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self.with_samples(self.samples + other.samples)
        return self.with_samples(self.samples + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return self.with_samples(self.samples - other.samples)
        return self.with_samples(self.samples - other)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            return pointwise_product(self, other)
        return self.with_samples(self.samples * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_samples(-self.samples)

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.label == other.label
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None


def pointwise_product(u: GridFunction, v: GridFunction) -> GridFunction:
    if u.domain != v.domain:
        raise GridError("domain mismatch")
    label = f"{u.label}*{v.label}" if u.label or v.label else ""
    return GridFunction(u.domain, u.samples * v.samples, label)


def integrate(u: GridFunction) -> complex:
    """Rectangle rule ``h^n * sum(samples)``; exact for sub-Nyquist trig polynomials."""
    return complex(u.domain.cell_volume * u.samples.sum())


# ---------------------------------------------------------------------------
# test families


def _check_decay(dom: Domain, arr: np.ndarray, name: str):
    if dom.kind != "line":
        return
    edge = 0.0
    for ax in range(dom.dim):
        edge = max(
            edge,
            float(np.abs(np.take(arr, 0, axis=ax)).max()),
            float(np.abs(np.take(arr, -1, axis=ax)).max()),
        )
    if edge >= DECAY_TOL:
        raise DomainError(
            f"{name}: boundary value {edge:.3e} >= {DECAY_TOL:g}; enlarge the box"
        )


def _shifted_mesh(dom: Domain, center) -> tuple:
    c = np.broadcast_to(np.asarray(center, dtype=float), (dom.dim,))
    out = []
    for x, cj in zip(dom.mesh(), c):
        d = x - cj
        if dom.kind == "torus":
            d = (d + dom.extent / 2) % dom.extent - dom.extent / 2
        out.append(d)
    return tuple(out)


@dataclass(frozen=True)
class Gaussian:
    sigma: float = 1.0
    center: float = 0.0

    @property
    def id(self) -> str:
        return f"gaussian(sigma={self.sigma:g},center={self.center:g})"

    def values(self, dom: Domain) -> np.ndarray:
        r2 = sum(d * d for d in _shifted_mesh(dom, self.center))
        return np.exp(-r2 / (2 * self.sigma**2))


@dataclass(frozen=True)
class Bump:
    """``exp(1 - 1/(1 - (r/radius)^2))`` inside the ball, zero outside."""

    radius: float = 3.0
    center: float = 0.0

    @property
    def id(self) -> str:
        return f"bump(radius={self.radius:g},center={self.center:g})"

    def values(self, dom: Domain) -> np.ndarray:
        reach = self.radius + abs(self.center)
        if reach >= dom.half_width:
            raise DomainError(
                f"bump of radius {self.radius} at {self.center} exceeds the box"
            )
        r2 = sum(d * d for d in _shifted_mesh(dom, self.center)) / self.radius**2
        out = np.zeros(dom.shape)
        inside = r2 < 1
        out[inside] = np.exp(1 - 1 / (1 - r2[inside]))
        return out


@dataclass(frozen=True)
class WavePacket:
    """Real packet ``cos(k x_1) exp(-|x|^2 / 2 sigma^2)``."""

    k: float = 4.0
    sigma: float = 1.0
    center: float = 0.0

    @property
    def id(self) -> str:
        return f"wave_packet(k={self.k:g},sigma={self.sigma:g})"

    def values(self, dom: Domain) -> np.ndarray:
        d = _shifted_mesh(dom, self.center)
        if self.k >= math.pi / dom.h:
            raise DomainError(f"wave_packet k={self.k} is above the grid Nyquist")
        r2 = sum(di * di for di in d)
        return np.cos(self.k * d[0]) * np.exp(-r2 / (2 * self.sigma**2))


@dataclass(frozen=True)
class RandomTrig:
    """Random real trigonometric polynomial with bin frequencies ``1..K``.

    Frequencies are in units of ``2 pi / extent``.  On a truncated line the
    polynomial is multiplied by a Gaussian envelope of width ``R / 9`` so the
    decay tolerance holds at the box edge.
    """

    K: int = 8
    seed: int = 42

    @property
    def id(self) -> str:
        return f"random_trig(K={self.K},seed={self.seed})"

    def values(self, dom: Domain) -> np.ndarray:
        if self.K < 1 or self.K >= dom.points // 2:
            raise DomainError(f"random_trig K={self.K} aliases on {dom.points} points")
        rng = np.random.default_rng(self.seed)
        k0 = 2 * math.pi / dom.extent
        mesh = dom.mesh()
        out = np.zeros(dom.shape)
        if dom.dim == 1:
            modes = [(m,) for m in range(1, self.K + 1)]
        else:
            modes = [
                (m1, m2)
                for m1 in range(0, self.K + 1)
                for m2 in range(-self.K, self.K + 1)
                if (m1 > 0 or m2 > 0)
            ]
        coef = rng.standard_normal((len(modes), 2))
        for (a, b), m in zip(coef, modes):
            phase = k0 * sum(mj * xj for mj, xj in zip(m, mesh))
            amp = 1.0 / math.sqrt(sum(mj * mj for mj in m))
            out += amp * (a * np.cos(phase) + b * np.sin(phase))
        if dom.kind == "line":
            env = dom.half_width / 9
            out *= np.exp(-sum(x * x for x in mesh) / (2 * env**2))
        return out


@dataclass(frozen=True)
class StepSmooth:
    """Smoothed plateau ``(tanh((r + a)/w) - tanh((r - a)/w)) / 2``."""

    width: float = 1.0
    plateau: float = 2.0

    @property
    def id(self) -> str:
        return f"step_smooth(width={self.width:g},plateau={self.plateau:g})"

    def values(self, dom: Domain) -> np.ndarray:
        r = dom.radius()
        a, w = self.plateau, self.width
        return 0.5 * (np.tanh((r + a) / w) - np.tanh((r - a) / w))


TestFamily = Union[Gaussian, Bump, WavePacket, RandomTrig, StepSmooth]

FAMILY_TYPES = {
    "gaussian": Gaussian,
    "bump": Bump,
    "wave_packet": WavePacket,
    "random_trig": RandomTrig,
    "step_smooth": StepSmooth,
}


def family_from_dict(spec: dict) -> TestFamily:
    """``{"family": "gaussian", "sigma": 1.0}`` -> ``Gaussian(sigma=1.0)``."""
    spec = dict(spec)
    name = spec.pop("family", None)
    if name not in FAMILY_TYPES:
        raise GridError(f"unknown test family {name!r}")
    return FAMILY_TYPES[name](**spec)


def sample_family(fam: TestFamily, dom: Domain) -> GridFunction:
    arr = fam.values(dom)
    _check_decay(dom, arr, fam.id)
    return GridFunction(dom, arr, fam.id)


def default_family(seed: int = 42) -> list:
    return [
        Gaussian(1.0),
        Bump(3.0),
        WavePacket(4.0, 1.0),
        RandomTrig(8, seed),
        StepSmooth(1.0, 2.0),
    ]


# ---------------------------------------------------------------------------
# serialization


def save(u: GridFunction, path) -> Path:
    path = Path(path)
    header = dict(u.domain.header(), label=u.label, format=FORMAT_TAG)
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(u.samples, dtype="<c16").tobytes())
    return path


def load(path) -> GridFunction:
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(line.decode("utf-8"))
        if header.get("format") != FORMAT_TAG:
            raise FormatError(f"unexpected format tag {header.get('format')!r}")
        dim = header["dim"]
        kind = header["kind"]
        extent = float(header["extent"])
        points = header["points_per_axis"]
        label = header.get("label", "")
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed header: {exc}") from exc
    dom = Domain(dim, kind, extent, points)
    expected = dom.cell_count * 16
    if len(payload) != expected:
        raise FormatError(f"length mismatch: expected {expected} bytes, found {len(payload)}")
    arr = np.frombuffer(payload, dtype="<c16").reshape(dom.shape)
    return GridFunction(dom, arr, label)
