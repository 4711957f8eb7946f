"""Anisotropic scaling arithmetic.

The anisotropy ``a`` assigns a positive weight to every coordinate of
``z = (x_1, ..., x_n, t)``.  The parabolic case is ``a = (1, ..., 1, 2)``;
dilations act as ``mu^a z = (mu^{a_1} z_1, ..., mu^{a_{n+1}} z_{n+1})`` and
``|z|_a`` is the unique ``mu > 0`` with ``sum_i z_i^2 / mu^{2 a_i} = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .exceptions import ConfigurationError, StructuralError

__all__ = [
    "Anisotropy",
    "Box",
    "ParabolicCube",
    "SamplerPolicy",
    "aniso_distance",
    "cube_sampler",
    "dilate",
]


@dataclass(frozen=True)
class Anisotropy:
    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if len(w) == 0:
            raise StructuralError("anisotropy needs at least one weight")
        if not all(v > 0 and math.isfinite(v) for v in w):
            raise ConfigurationError(f"anisotropy weights must be positive, got {w}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def parabolic(cls, n: int) -> "Anisotropy":
        """``(1, ..., 1, 2)`` with ``n`` spatial coordinates."""
        if n < 1:
            raise ConfigurationError("parabolic anisotropy needs n >= 1")
        return cls((1.0,) * n + (2.0,))

    @classmethod
    def isotropic(cls, dim: int) -> "Anisotropy":
        if dim < 1:
            raise ConfigurationError("isotropic anisotropy needs dim >= 1")
        return cls((1.0,) * dim)

    @classmethod
    def from_name(cls, name: str, dim: int) -> "Anisotropy":
        if name == "parabolic":
            return cls.parabolic(dim - 1)
        if name == "isotropic":
            return cls.isotropic(dim)
        raise ConfigurationError(f"unknown anisotropy {name!r}")

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def homogeneous_dimension(self) -> float:
        return float(sum(self.weights))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.weights)

    @property
    def is_isotropic(self) -> bool:
        return all(w == 1.0 for w in self.weights)

    @property
    def is_parabolic(self) -> bool:
        w = self.weights
        return len(w) >= 2 and all(v == 1.0 for v in w[:-1]) and w[-1] == 2.0

    @property
    def name(self) -> str:
        if self.is_isotropic:
            return "isotropic"
        if self.is_parabolic:
            return "parabolic"
        return "custom"


@dataclass(frozen=True)
class Box:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi):
            raise StructuralError("box bounds have different lengths")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ConfigurationError(f"box needs lower < upper on every axis, got {lo}, {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def omega_T(cls, n: int, T: float = 1.0) -> "Box":
        """``(0, 1)^n x (0, T)``."""
        return cls((0.0,) * n + (0.0,), (1.0,) * n + (float(T),))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.upper) + np.asarray(self.lower))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in
                   zip(self.lower, self.upper, other.lower, other.upper))

    def strictly_contains(self, other: "Box") -> bool:
        return all(a < c and d < b for a, b, c, d in
                   zip(self.lower, self.upper, other.lower, other.upper))

    def dilate(self, mu: float, a: Anisotropy) -> "Box":
        return Box(tuple(dilate(self.lower, a, mu)), tuple(dilate(self.upper, a, mu)))


def _as_point(z, a: Anisotropy) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[-1:] != (a.dim,):
        raise StructuralError(f"point of length {z.shape[-1:]} does not match anisotropy of length {a.dim}")
    return z


def dilate(z, a: Anisotropy, mu: float) -> np.ndarray:
    """Componentwise ``mu^{a_i} z_i``; the last axis of ``z`` indexes coordinates."""
    if mu < 0:
        raise ConfigurationError("dilation factor must be nonnegative")
    z = _as_point(z, a)
    return z * np.power(float(mu), a.array)


def aniso_distance(z, a: Anisotropy) -> np.ndarray | float:
    """Anisotropic distance ``|z|_a``.

    Vectorized over leading axes of ``z``.  Closed form for the isotropic and
    parabolic anisotropies, bracketed bisection otherwise.
    """
    z = _as_point(z, a)
    scalar = z.ndim == 1
    if a.is_isotropic:
        out = np.sqrt(np.sum(z * z, axis=-1))
    elif a.is_parabolic:
        r2 = np.sum(z[..., :-1] ** 2, axis=-1)
        t = z[..., -1]
        out = np.sqrt(0.5 * (r2 + np.sqrt(r2 * r2 + 4.0 * t * t)))
    else:
        out = _distance_bisect(z.reshape(-1, a.dim), a.array).reshape(z.shape[:-1])
    return float(out) if scalar else out


def _distance_bisect(z: np.ndarray, w: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # F(mu) = sum z_i^2 mu^{-2 w_i} is strictly decreasing; bracket then bisect in log(mu)
    absz = np.abs(z)
    nz = absz.max(axis=1) > 0
    out = np.zeros(len(z))
    if not nz.any():
        return out
    zz = absz[nz]
    # mu at which a single coordinate alone saturates the equation bounds the root
    with np.errstate(divide="ignore"):
        single = np.where(zz > 0, zz ** (1.0 / w), 0.0)
    lo = single.max(axis=1)                      # F(lo) >= 1
    hi = lo * float(len(w)) ** (1.0 / (2 * w.min()))  # F(hi) <= 1
    llo, lhi = np.log(lo), np.log(hi)
    for _ in range(200):
        mid = 0.5 * (llo + lhi)
        F = np.sum(zz ** 2 * np.exp(-2.0 * np.outer(mid, w)), axis=1)
        big = F > 1.0
        llo = np.where(big, mid, llo)
        lhi = np.where(big, lhi, mid)
        if np.all(np.exp(lhi) - np.exp(llo) <= tol * np.exp(lhi)):
            break
    out[nz] = np.exp(0.5 * (llo + lhi))
    return out


def unit_ball_measure(dim: int) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


@dataclass(frozen=True)
class ParabolicCube:
    """A parabolic ball ``{|z - center|_a < radius}`` or a dilated lattice cube
    ``2^{a j} [(0,1)^{n+1} + k]``.

    Only the fields of the chosen ``kind`` are meaningful.
    """

    kind: str
    center: tuple[float, ...] = ()
    radius: float = 0.0
    scale: int = 0
    offset: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "ball":
            if not self.radius > 0:
                raise ConfigurationError("cube radius must be positive")
        elif self.kind != "lattice":
            raise ConfigurationError(f"unknown cube kind {self.kind!r}")

    @classmethod
    def ball(cls, center, radius: float) -> "ParabolicCube":
        return cls("ball", center=tuple(float(c) for c in center), radius=float(radius))

    @classmethod
    def lattice(cls, scale: int, offset) -> "ParabolicCube":
        return cls("lattice", scale=int(scale), offset=tuple(int(k) for k in offset))

    def side_lengths(self, a: Anisotropy) -> np.ndarray:
        """Full side lengths of the cube, or of the ball's bounding box."""
        if self.kind == "lattice":
            return np.power(2.0, self.scale * a.array)
        return 2.0 * np.power(self.radius, a.array)

    def bounds(self, a: Anisotropy) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "lattice":
            side = self.side_lengths(a)
            lo = np.asarray(self.offset, dtype=float) * side
            return lo, lo + side
        half = np.power(self.radius, a.array)
        c = np.asarray(self.center)
        return c - half, c + half

    def measure(self, a: Anisotropy) -> float:
        if self.kind == "lattice":
            return float(2.0 ** (self.scale * a.homogeneous_dimension))
        return self.radius ** a.homogeneous_dimension * unit_ball_measure(a.dim)

    def dilate(self, mu: float, a: Anisotropy) -> "ParabolicCube":
        """Image of the cube under ``z -> mu^a z``; lattice cubes need ``mu`` a power of 2."""
        if self.kind == "ball":
            return ParabolicCube.ball(dilate(self.center, a, mu), self.radius * mu)
        k = math.log2(mu)
        if k != round(k):
            raise ConfigurationError("lattice cubes only dilate by powers of two")
        return ParabolicCube.lattice(self.scale + int(round(k)), self.offset)


@dataclass(frozen=True)
class SamplerPolicy:
    """How the supremum over cubes is sampled.

    ``lattice_scales=None`` uses every scale the grid resolves with at least
    ``min_points`` samples per axis.  ``lattice_per_scale=None`` keeps every
    lattice cube of a scale.  Random balls have log-uniform radii in
    ``radius_range`` (default: ``[r_max / 8, r_max]`` with ``r_max`` the largest
    ball fitting the domain).  ``inside=True`` keeps only cubes contained in
    the domain, otherwise cubes merely intersect it (periodic setting).
    """

    lattice: bool = True
    lattice_scales: tuple[int, ...] | None = None
    lattice_per_scale: int | None = None
    n_random: int = 256
    radius_range: tuple[float, float] | None = None
    min_points: int = 2
    inside: bool = False
    seed: int = 42

    def budget(self) -> dict:
        return {
            "lattice": self.lattice,
            "lattice_scales": None if self.lattice_scales is None else list(self.lattice_scales),
            "lattice_per_scale": self.lattice_per_scale,
            "n_random": self.n_random,
            "radius_range": None if self.radius_range is None else list(self.radius_range),
            "min_points": self.min_points,
            "inside": self.inside,
            "seed": self.seed,
        }


def resolvable_lattice_scales(domain: Box, a: Anisotropy, spacing: Sequence[float],
                              min_points: int = 2) -> list[int]:
    """Lattice scales whose cubes hold ``>= min_points`` samples per axis and fit in ``domain``."""
    w = a.array
    h = np.asarray(spacing, dtype=float)
    L = domain.lengths
    # side_i = 2^{j w_i}: need min_points * h_i <= side_i <= L_i
    j_lo = int(math.ceil(max(math.log2(min_points * hi) / wi for hi, wi in zip(h, w)) - 1e-12))
    j_hi = int(math.floor(min(math.log2(li) / wi for li, wi in zip(L, w)) + 1e-12))
    return list(range(j_lo, j_hi + 1))


def _lattice_offsets(domain: Box, a: Anisotropy, j: int, inside: bool) -> np.ndarray:
    side = np.power(2.0, j * a.array)
    ranges = []
    for lo, hi, s in zip(domain.lower, domain.upper, side):
        if inside:
            k0, k1 = math.ceil(lo / s - 1e-12), math.floor(hi / s + 1e-12) - 1
        else:
            k0, k1 = math.floor(lo / s + 1e-12), math.ceil(hi / s - 1e-12) - 1
        ranges.append(np.arange(k0, k1 + 1))
    if any(len(r) == 0 for r in ranges):
        return np.zeros((0, a.dim), dtype=int)
    mesh = np.meshgrid(*ranges, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def cube_sampler(domain: Box, a: Anisotropy, policy: SamplerPolicy = SamplerPolicy(),
                 spacing: Sequence[float] | None = None) -> list[ParabolicCube]:
    """Deterministic family of cubes intersecting (or inside) ``domain``.

    ``spacing`` is the grid step per axis; it is needed to decide which lattice
    scales are resolvable when ``policy.lattice_scales`` is not given.
    """
    return list(iter_cubes(domain, a, policy, spacing))


def iter_cubes(domain: Box, a: Anisotropy, policy: SamplerPolicy = SamplerPolicy(),
               spacing: Sequence[float] | None = None) -> Iterator[ParabolicCube]:
    if domain.dim != a.dim:
        raise StructuralError("domain and anisotropy dimensions differ")
    if not policy.lattice and policy.n_random <= 0:
        raise ConfigurationError("sampler policy requests zero cubes")
    if policy.lattice_per_scale is not None and policy.lattice_per_scale <= 0:
        raise ConfigurationError("lattice_per_scale must be positive")
    rng = np.random.default_rng(policy.seed)
    if policy.lattice:
        if policy.lattice_scales is not None:
            scales = list(policy.lattice_scales)
        elif spacing is not None:
            scales = resolvable_lattice_scales(domain, a, spacing, policy.min_points)
        else:
            raise ConfigurationError("lattice scales need either explicit scales or a grid spacing")
        for j in scales:
            offsets = _lattice_offsets(domain, a, j, policy.inside)
            cap = policy.lattice_per_scale
            if cap is not None and len(offsets) > cap:
                keep = np.sort(rng.choice(len(offsets), size=cap, replace=False))
                offsets = offsets[keep]
            for k in offsets:
                yield ParabolicCube.lattice(j, k)
    if policy.n_random > 0:
        yield from _random_balls(domain, a, policy, rng)


def _random_balls(domain: Box, a: Anisotropy, policy: SamplerPolicy, rng) -> Iterator[ParabolicCube]:
    w = a.array
    L = domain.lengths
    r_fit = float(np.min((L / 2.0) ** (1.0 / w)))
    if policy.radius_range is None:
        r_lo, r_hi = r_fit / 8.0, r_fit
    else:
        r_lo, r_hi = map(float, policy.radius_range)
        if not 0 < r_lo <= r_hi:
            raise ConfigurationError("radius_range must satisfy 0 < lo <= hi")
    lo = np.asarray(domain.lower)
    u = rng.random((policy.n_random, a.dim + 1))
    for row in u:
        r = r_lo * (r_hi / r_lo) ** row[0]
        if policy.inside:
            r = min(r, r_fit)
            half = r ** w
            c = lo + half + row[1:] * (L - 2 * half)
        else:
            c = lo + row[1:] * L
        yield ParabolicCube.ball(c, r)
