"""Higher-order reflection extension from a box to its threefold enlargement.

Along an axis ``[a, b]`` of length ``L`` the extension to ``[a - L, b + L]`` is

    f~(x) = sum_j c_j f(a + lambda_j (a - x))   for a - L < x < a,
    f~(x) = sum_j c_j f(b + lambda_j (b - x))   for b < x < b + L,

with ``lambda_j = 2^{-j}``, ``j < K``, and ``sum_j c_j (-lambda_j)^k = 1`` for
``k < K``; the moment conditions make ``f~`` match ``K - 1`` derivatives
across the boundary and reproduce polynomials of degree ``< K``.  Spatial
axes use ``K = 2m``, time uses ``K = m``.  Off-grid reflected points are read
by local Lagrange interpolation of degree ``2m + 1``.

The localization step multiplies by a plateau cutoff, embeds the product in a
zero-padded periodic box and integrates it in ``x``.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import ConfigurationError, StructuralError
from .field import Field, Grid, antiderivative
from .geometry import Box
from .littlewood_paley import _bump, smooth_step

__all__ = [
    "ExtensionCoefficients",
    "extension_coefficients",
    "extension_matrix",
    "extend_to_box",
    "build_plateau_cutoff",
    "default_plateau_sets",
    "embed_periodic",
    "localize",
    "Localization",
]

K_MAX = 12


@dataclass(frozen=True)
class ExtensionCoefficients:
    order: int
    lambdas: np.ndarray
    cs: np.ndarray
    residual: float
    condition: float

    def moments(self) -> np.ndarray:
        """``sum_j c_j (-lambda_j)^k`` for ``k < order``, correctly rounded.

        The ``lambda_j`` are powers of two, so every product is exact and
        ``math.fsum`` returns the exact moment rounded once.
        """
        return np.array([math.fsum(c * (-lam) ** k for c, lam in zip(self.cs, self.lambdas))
                         for k in range(self.order)])


# rounding search window (ulps either side) and the largest K searched exhaustively
_ULP_WINDOW = 2
_SEARCH_MAX_K = 8


def _exact_coefficients(K: int) -> list[Fraction]:
    # sum_j c_j p(y_j) = p(1) for every polynomial p of degree < K with nodes
    # y_j = -lambda_j, so c_j is the Lagrange basis polynomial of node j at 1.
    y = [-Fraction(1, 2 ** j) for j in range(K)]
    out = []
    for j in range(K):
        c = Fraction(1)
        for i in range(K):
            if i != j:
                c *= (1 - y[i]) / (y[j] - y[i])
        out.append(c)
    return out


def _round_coefficients(exact: list[Fraction], V: np.ndarray) -> np.ndarray:
    """Float coefficients minimizing the exact moment residual.

    The nearest doubles leave a residual of order ``eps * max|c|`` (about
    ``1e-8`` at ``K = 8``).  For small ``K`` every choice within a few ulps of
    the exact values is tried and the one with the smallest exact residual
    kept.
    """
    nearest = np.array([float(c) for c in exact])
    K = len(exact)
    if K > _SEARCH_MAX_K:
        return nearest
    cands = []
    for c in nearest:
        lo = hi = c
        opts = [c]
        for _ in range(_ULP_WINDOW):
            lo, hi = np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)
            opts += [lo, hi]
        cands.append(np.array(opts))
    # offsets from the exact values, computed exactly and rounded once
    delta = [np.array([float(Fraction(o) - e) for o in opts]) for opts, e in zip(cands, exact)]
    choice = np.array(list(itertools.product(range(2 * _ULP_WINDOW + 1), repeat=K)))
    D = np.stack([delta[j][choice[:, j]] for j in range(K)], axis=1)
    best = int(np.argmin(np.abs(D @ V.T).max(axis=1)))
    return np.array([cands[j][choice[best, j]] for j in range(K)])


@lru_cache(maxsize=None)
def _coefficients(K: int) -> tuple[np.ndarray, np.ndarray, float]:
    lam = 2.0 ** -np.arange(K)
    V = (-lam[None, :]) ** np.arange(K)[:, None]
    cs = _round_coefficients(_exact_coefficients(K), V)
    cs.setflags(write=False)
    lam.setflags(write=False)
    return lam, cs, float(np.linalg.cond(V))


def extension_coefficients(K: int) -> ExtensionCoefficients:
    """Solves ``sum_j c_j (-2^{-j})^k = 1``, ``k = 0..K-1``.

    The solution is computed in exact rational arithmetic (Lagrange form, which
    avoids the ill-conditioned Vandermonde solve) and rounded to the doubles
    with the smallest exact residual.  Warns when the condition number of the
    system exceeds ``1e12`` or the residual exceeds ``1e-10``.
    """
    K = int(K)
    if not 1 <= K <= K_MAX:
        raise ConfigurationError(f"extension order K must lie in [1, {K_MAX}], got {K}")
    lam, cs, cond = _coefficients(K)
    if cond > 1e12:
        warnings.warn(f"extension system condition number {cond:.2e}", RuntimeWarning, stacklevel=2)
    out = ExtensionCoefficients(K, lam, cs, 0.0, cond)
    res = float(np.max(np.abs(out.moments() - 1.0)))
    if res > 1e-10:
        warnings.warn(f"extension moment residual {res:.2e} exceeds 1e-10 for K={K}",
                      RuntimeWarning, stacklevel=2)
    return ExtensionCoefficients(K, lam, cs, res, cond)


def _lagrange_rows(x0: float, h: float, n: int, targets: np.ndarray, degree: int) -> np.ndarray:
    """Interpolation weights (``len(targets) x n``) on the uniform nodes ``x0 + h k``."""
    W = np.zeros((len(targets), n))
    npts = degree + 1
    if n < npts:
        raise StructuralError(f"need at least {npts} samples per axis for degree-{degree} interpolation")
    for r, x in enumerate(targets):
        u = (x - x0) / h
        k = int(round(u))
        if abs(u - k) < 1e-12 and 0 <= k < n:
            W[r, k] = 1.0
            continue
        start = min(max(int(math.floor(u)) - (npts // 2 - 1), 0), n - npts)
        nodes = np.arange(start, start + npts)
        for i, ki in enumerate(nodes):
            others = np.delete(nodes, i)
            W[r, ki] = np.prod((u - others) / (ki - others))
    return W


def extension_matrix(n: int, lo: float, hi: float, K: int, degree: int) -> np.ndarray:
    """Matrix mapping ``n`` closure samples of ``[lo, hi]`` to ``3(n-1)+1`` samples of
    ``[lo - L, hi + L]`` with the same spacing."""
    coeffs = extension_coefficients(K)
    L = hi - lo
    h = L / (n - 1)
    m_out = 3 * (n - 1) + 1
    x_out = (lo - L) + h * np.arange(m_out)
    E = np.zeros((m_out, n))
    inner = slice(n - 1, 2 * (n - 1) + 1)
    E[inner] = np.eye(n)
    left = np.arange(0, n - 1)
    right = np.arange(2 * (n - 1) + 1, m_out)
    for c, lam in zip(coeffs.cs, coeffs.lambdas):
        E[left] += c * _lagrange_rows(lo, h, n, lo + lam * (lo - x_out[left]), degree)
        E[right] += c * _lagrange_rows(lo, h, n, hi + lam * (hi - x_out[right]), degree)
    return E


def _apply_along(values: np.ndarray, M: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(values, axis, -1)
    return np.moveaxis(moved @ M.T, -1, axis)


def extend_to_box(f: Field, m: int, axes_order=None, degree: int | None = None) -> Field:
    """Extension of ``f`` (closure grid of a box) to the box three times larger per axis.

    Spatial axes use ``K = 2m`` reflections and the time axis ``K = m``.
    ``axes_order`` fixes the order in which the per-axis operators are
    composed (default: spatial axes, then time).
    """
    grid = f.grid
    if grid.periodic:
        raise StructuralError("the extension needs samples on the closure of the box (periodic=False)")
    m = int(m)
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    degree = 2 * m + 1 if degree is None else int(degree)
    d = grid.ndim
    axes_order = list(range(d)) if axes_order is None else list(axes_order)
    if sorted(axes_order) != list(range(d)):
        raise ConfigurationError("axes_order must be a permutation of the axes")
    vals = f.values
    for ax in axes_order:
        K = m if ax == d - 1 else 2 * m
        E = extension_matrix(grid.dims[ax], grid.box.lower[ax], grid.box.upper[ax], K, degree)
        vals = _apply_along(vals, E, ax)
    L = grid.box.lengths
    box = Box(tuple(np.asarray(grid.box.lower) - L), tuple(np.asarray(grid.box.upper) + L))
    dims = tuple(3 * (n - 1) + 1 for n in grid.dims)
    return Field(Grid(dims, box, grid.anisotropy, periodic=False), vals)


def default_plateau_sets(box: Box) -> tuple[Box, Box]:
    """``Z1 = box`` widened by a quarter of its side, ``Z2`` by three quarters."""
    lo, L = np.asarray(box.lower), box.lengths
    z1 = Box(tuple(lo - L / 4), tuple(lo + 5 * L / 4))
    z2 = Box(tuple(lo - 3 * L / 4), tuple(lo + 7 * L / 4))
    return z1, z2


def build_plateau_cutoff(Z1: Box, Z2: Box, grid: Grid) -> Field:
    """Smooth ``Psi`` with ``Psi = 1`` on ``Z1``, ``0`` off ``Z2``, ``0 <= Psi <= 1``.

    Tensor product of one-dimensional C-infinity ramps.
    """
    if not Z2.strictly_contains(Z1):
        raise ConfigurationError("Z1 must lie strictly inside Z2")
    vals = np.ones(grid.dims)
    for ax, x in enumerate(grid.coords):
        a1, b1, a2, b2 = Z1.lower[ax], Z1.upper[ax], Z2.lower[ax], Z2.upper[ax]
        ramp = smooth_step((x - a2) / (a1 - a2)) * smooth_step((b2 - x) / (b2 - b1))
        shape = [1] * grid.ndim
        shape[ax] = len(x)
        vals = vals * ramp.reshape(shape)
    return Field(grid, np.clip(vals, 0.0, 1.0))


def embed_periodic(f: Field, pad: float = 1 / 6) -> tuple[Field, tuple[int, ...]]:
    """Zero-pads a closure-grid field into a periodic box with ``pad`` times the side added
    on each end.  Returns the periodic field and the index offset of ``f``'s first sample."""
    grid = f.grid
    h = grid.spacing
    dims, offsets, lower, upper = [], [], [], []
    for ax in range(grid.ndim):
        n = grid.dims[ax]
        extra = int(round(pad * (n - 1)))
        total = (n - 1) + 2 * extra
        total += total % 2
        dims.append(total)
        offsets.append(extra)
        lower.append(grid.box.lower[ax] - extra * h[ax])
        upper.append(lower[-1] + total * h[ax])
    if total <= 0:
        raise ConfigurationError("pad must be positive")
    big = Grid(tuple(dims), Box(tuple(lower), tuple(upper)), grid.anisotropy, periodic=True)
    vals = np.zeros(big.dims)
    vals[tuple(slice(o, o + n) for o, n in zip(offsets, grid.dims))] = f.values
    return Field(big, vals), tuple(offsets)


@dataclass
class Localization:
    product: Field          # Psi * f~ on the periodic embedding
    g: Field                # antiderivative along ``axis`` with g = 0 on {x_axis = 0}
    compensation: Field     # slice-mean correction M * beta subtracted before integrating
    offsets: tuple
    axis: int
    slice_mean_max: float

    def as_dict(self) -> dict:
        return {"axis": self.axis, "slice_mean_max": self.slice_mean_max,
                "g_linf": float(np.max(np.abs(self.g.values))),
                "product_linf": float(np.max(np.abs(self.product.values)))}


def _pad_bump(grid: Grid, axis: int, support: Box) -> np.ndarray:
    """Unit-integral bump along ``axis`` centred in the padding, away from ``support``."""
    x = grid.coords[axis]
    L = grid.lengths[axis]
    gap_lo, gap_hi = support.upper[axis], support.lower[axis] + L
    c = 0.5 * (gap_lo + gap_hi)
    r = 0.45 * (gap_hi - gap_lo)
    if r <= 2 * grid.spacing[axis]:
        raise ConfigurationError("padding too thin for the slice-mean compensation bump")
    dist = (x - c + L / 2) % L - L / 2
    u = 1.0 - (dist / r) ** 2
    b = _bump(u)
    return b / (b.sum() * grid.spacing[axis])


def localize(f_ext: Field, psi: Field, axis: int = 0, pad: float = 1 / 6) -> Localization:
    """``Psi f~`` on a zero-padded periodic box, and ``g = int_0^x Psi f~`` along ``axis``.

    ``Psi f~`` generally has nonzero line integrals, which the periodic
    antiderivative cannot absorb; the line integrals ``M`` are therefore
    moved into a unit bump ``beta`` placed in the padding outside the support
    of ``Psi``, and ``g`` is the antiderivative of ``Psi f~ - M beta``.  On the
    support of ``Psi`` this equals ``int_0^x Psi f~`` exactly.
    """
    if f_ext.grid != psi.grid:
        raise StructuralError("field and cutoff live on different grids")
    prod_closed = Field(f_ext.grid, f_ext.values * psi.values)
    prod, offsets = embed_periodic(prod_closed, pad)
    pg = prod.grid
    M = prod.values.sum(axis=axis, keepdims=True) * pg.spacing[axis]
    support = f_ext.grid.box
    beta = _pad_bump(pg, axis, support)
    shape = [1] * pg.ndim
    shape[axis] = len(beta)
    comp = Field(pg, M * beta.reshape(shape))
    g0 = antiderivative(prod - comp, axis, rtol=1e-9)
    # shift so that g vanishes on the hyperplane x_axis = 0
    k0 = int(round((0.0 - pg.box.lower[axis]) / pg.spacing[axis]))
    if not 0 <= k0 < pg.dims[axis] or abs(pg.box.lower[axis] + k0 * pg.spacing[axis]) > 1e-9:
        raise StructuralError("x = 0 is not a grid point of the embedding")
    base = np.take(g0.values, [k0], axis=axis)
    g = Field(pg, g0.values - base)
    return Localization(prod, g, comp, offsets, axis, float(np.max(np.abs(M))))
