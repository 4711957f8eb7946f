"""Anisotropic dyadic Fourier multipliers and the Littlewood-Paley split.

With a radial cutoff ``theta(xi) = chi(|xi|_a)`` (1 on ``|xi|_a <= 1``, 0 on
``|xi|_a >= 2``) the homogeneous symbols are

    psi_j(xi) = chi(2^{-j} |xi|_a) - chi(2^{1-j} |xi|_a),

supported in ``2^{j-1} < |xi|_a < 2^{j+1}``.  The inhomogeneous system
replaces ``psi_0`` by ``theta`` and drops ``j < 0``.  Block ``j`` of ``f`` is
``phi_j * f`` computed as ``ifft(psi_j * fft(f))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import ConfigurationError, StructuralError
from .field import Field, Grid, apply_multiplier

__all__ = [
    "CutoffProfile",
    "build_cutoff",
    "DyadicSymbolBank",
    "build_symbol_bank",
    "LPDecomposition",
    "lp_decompose",
    "KernelBank",
    "derivative_kernel_bank",
    "kernel_field",
    "padded_grid",
    "MajorantReport",
    "radial_majorant",
]


def _bump(u):
    u = np.asarray(u, dtype=float)
    pos = u > 0
    out = np.zeros_like(u)
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(s):
    """C-infinity step: 0 for ``s <= 0``, 1 for ``s >= 1``, ``1/2`` at ``s = 1/2``."""
    s = np.asarray(s, dtype=float)
    a, b = _bump(s), _bump(1.0 - s)
    return a / (a + b)


@dataclass(frozen=True)
class CutoffProfile:
    """Radial transition ``chi``: 1 on ``[0, 1]``, 0 on ``[2, inf)``.

    The default is the bump quotient ``B(2-r) / (B(2-r) + B(r-1))`` with
    ``B(u) = exp(-1/u)``, which is C-infinity; ``smoothness`` records the
    order the caller asked for.
    """

    smoothness: int = 1

    def __call__(self, r):
        return smooth_step(2.0 - np.asarray(r, dtype=float))


def build_cutoff(smoothness: int = 1) -> CutoffProfile:
    if smoothness < 1:
        raise ConfigurationError("cutoff smoothness order must be >= 1")
    return CutoffProfile(int(smoothness))


@dataclass(frozen=True, eq=False)
class DyadicSymbolBank:
    grid: Grid
    profile: CutoffProfile
    mode: str
    j_range: tuple[int, int]
    symbols: dict = field(repr=False)

    @property
    def js(self) -> list[int]:
        return list(range(self.j_range[0], self.j_range[1] + 1))

    def __getitem__(self, j: int) -> np.ndarray:
        return self.symbols[j]

    def partition_sum(self) -> np.ndarray:
        return sum(self.symbols[j] for j in self.js)

    def covered_region(self, interior: bool = False) -> np.ndarray:
        """Frequencies on which the truncated partition must equal one.

        ``interior=True`` shrinks to ``2^{j_min+1} <= |xi|_a <= 2^{j_max-1}``.
        """
        rho = self.grid.aniso_frequency_norm
        j0, j1 = self.j_range
        if interior:
            lo, hi = 2.0 ** (j0 + 1), 2.0 ** (j1 - 1)
        else:
            lo, hi = 2.0 ** j0, 2.0 ** j1
        if self.mode == "inhomogeneous":
            return rho <= hi
        return (rho >= lo) & (rho <= hi)

    def partition_residual(self, interior: bool = True) -> float:
        region = self.covered_region(interior)
        if not region.any():
            return 0.0
        return float(np.max(np.abs(self.partition_sum()[region] - 1.0)))


@lru_cache(maxsize=32)
def _cached_bank(grid: Grid, profile: CutoffProfile, mode: str) -> DyadicSymbolBank:
    j_min, j_max = grid.j_range
    if mode == "inhomogeneous":
        j_min = 0
    if j_min > j_max:
        raise ConfigurationError(
            f"grid {grid.dims} on box {grid.box.lower}..{grid.box.upper} resolves no dyadic scale "
            f"for the {mode} system")
    rho = grid.aniso_frequency_norm
    theta = {j: profile(rho * 2.0 ** (-j)) for j in range(j_min - 1, j_max + 1)}
    symbols = {}
    for j in range(j_min, j_max + 1):
        if mode == "inhomogeneous" and j == 0:
            s = theta[0]
        else:
            s = theta[j] - theta[j - 1]
        s.setflags(write=False)
        symbols[j] = s
    return DyadicSymbolBank(grid, profile, mode, (j_min, j_max), symbols)


def build_symbol_bank(grid: Grid, profile: CutoffProfile | None = None,
                      mode: str = "homogeneous") -> DyadicSymbolBank:
    """Dyadic symbols on every grid-resolvable scale.  Banks are cached per grid."""
    if mode not in ("homogeneous", "inhomogeneous"):
        raise ConfigurationError(f"unknown bank mode {mode!r}")
    if not grid.periodic:
        raise StructuralError("symbol banks need a periodic grid")
    return _cached_bank(grid, profile or CutoffProfile(), mode)


@dataclass(eq=False)
class LPDecomposition:
    source: Field
    bank: DyadicSymbolBank
    blocks: dict
    residual: Field
    dc: float

    @property
    def js(self) -> list[int]:
        return sorted(self.blocks)

    def block_array(self, js=None) -> np.ndarray:
        js = self.js if js is None else js
        return np.stack([self.blocks[j].values for j in js])

    def reconstruct(self, include_residual: bool = True) -> Field:
        vals = sum(self.blocks[j].values for j in self.js) + self.dc
        if include_residual:
            vals = vals + self.residual.values
        return Field(self.source.grid, vals)

    def residual_fraction(self) -> float:
        """Relative L2 energy outside the resolvable scales."""
        den = self.source.l2_physical()
        return 0.0 if den == 0 else self.residual.l2_physical() / den


def lp_decompose(f: Field, bank: DyadicSymbolBank) -> LPDecomposition:
    if f.grid != bank.grid:
        raise StructuralError("field and symbol bank live on different grids")
    F = f.spectrum
    blocks = {j: apply_multiplier(f, bank[j]) for j in bank.js}
    if bank.mode == "homogeneous":
        dc = float(F.flat[0].real / f.grid.size)
    else:
        dc = 0.0
    covered = bank.partition_sum()
    rest = 1.0 - covered
    if bank.mode == "homogeneous":
        rest = rest.copy()
        rest.flat[0] = 0.0
    residual = apply_multiplier(f, rest)
    return LPDecomposition(f, bank, blocks, residual, dc)


def kernel_field(grid: Grid, multiplier: np.ndarray) -> Field:
    """Samples of the (periodized) kernel whose Fourier transform is ``multiplier``."""
    phase = np.ones(grid.dims, dtype=complex)
    for ax, (lo, xi) in enumerate(zip(grid.box.lower, grid.frequencies)):
        shape = [1] * grid.ndim
        shape[ax] = len(xi)
        phase = phase * np.exp(1j * xi * lo).reshape(shape)
    vals = np.fft.ifftn(multiplier * phase).real / grid.cell_volume
    return Field(grid, vals)


def padded_grid(grid: Grid, factor: int = 4) -> Grid:
    """Same spacing, ``factor`` times the extent, centred on the original box."""
    c = grid.box.center
    half = grid.lengths * factor / 2
    return Grid(tuple(d * factor for d in grid.dims), type(grid.box)(tuple(c - half), tuple(c + half)),
                grid.anisotropy, True)


@dataclass
class KernelBank:
    axis: int
    kernels: dict
    scale_factors: dict
    l1_norms: dict
    scaling_residuals: dict


def _origin_index(grid: Grid) -> np.ndarray:
    o = -np.asarray(grid.box.lower) / grid.spacing
    if not np.allclose(o, np.round(o)):
        raise StructuralError("the origin is not a grid point")
    return np.round(o).astype(int)


def _scaling_residual(grid: Grid, phi_j: np.ndarray, phi_0: np.ndarray, j: int) -> float:
    """Max relative gap in ``Phi_j(z) = 2^{|a| j} Phi(2^{j a} z)`` over grid points where both sides are sampled."""
    w = grid.anisotropy.array
    if not np.allclose(w, np.round(w)):
        return float("nan")
    stride = (2 ** (abs(j) * np.round(w))).astype(int)
    o = _origin_index(grid)
    dims = np.asarray(grid.dims)
    idx_small, idx_big = [], []
    for ax in range(grid.ndim):
        kmax = (dims[ax] // 2 - 1) // stride[ax]
        k = np.arange(-kmax, kmax + 1)
        idx_small.append(o[ax] + k)
        idx_big.append(o[ax] + k * stride[ax])
    fine = np.ix_(*idx_small)
    coarse = np.ix_(*idx_big)
    hd = grid.anisotropy.homogeneous_dimension
    if j > 0:
        lhs, rhs = phi_j[fine], 2.0 ** (hd * j) * phi_0[coarse]
    else:
        lhs, rhs = phi_j[coarse], 2.0 ** (hd * j) * phi_0[fine]
    den = max(float(np.max(np.abs(phi_j))), np.finfo(float).tiny)
    return float(np.max(np.abs(lhs - rhs)) / den)


def derivative_kernel_bank(bank: DyadicSymbolBank, axis: int) -> KernelBank:
    """Kernels ``Phi_j`` with ``d_axis phi_j = 2^{j a_axis} Phi_j``.

    ``Phi_j`` has Fourier symbol ``i xi_axis psi_j(xi) / 2^{j a_axis}``, so
    ``Phi_0 = d_axis phi``.  When ``j = 0`` is resolvable and the origin is a
    grid point, the dilation identity ``Phi_j(z) = 2^{|a| j} Phi(2^{j a} z)``
    is checked by resampling and its relative gap recorded per ``j``.
    """
    if bank.mode != "homogeneous":
        raise ConfigurationError("derivative kernels are defined for the homogeneous bank")
    grid = bank.grid
    if not 0 <= axis < grid.ndim:
        raise ConfigurationError(f"axis {axis} out of range for a {grid.ndim}-dimensional grid")
    xi = grid.frequencies[axis].astype(complex)
    d1 = 1j * xi
    d1[grid.nyquist_masks[axis]] = 0
    shape = [1] * grid.ndim
    shape[axis] = len(xi)
    d1 = d1.reshape(shape)
    w = grid.anisotropy.weights[axis]
    kernels, factors, l1 = {}, {}, {}
    for j in bank.js:
        factors[j] = 2.0 ** (j * w)
        kernels[j] = kernel_field(grid, d1 * bank[j] / factors[j])
        l1[j] = float(np.sum(np.abs(kernels[j].values)) * grid.cell_volume)
    residuals = {}
    if 0 in kernels:
        try:
            _origin_index(grid)
        except StructuralError:
            pass
        else:
            for j in bank.js:
                if j != 0:
                    residuals[j] = _scaling_residual(grid, kernels[j].values, kernels[0].values, j)
    return KernelBank(axis, kernels, factors, l1, residuals)


@dataclass
class MajorantReport:
    r: np.ndarray
    h: np.ndarray
    h0: float
    r_max: float
    weighted_sup: float
    decay_exponent: float
    radial_integral: float
    integral_bound_constant: float

    def as_dict(self) -> dict:
        return {
            "h0": self.h0,
            "r_max": self.r_max,
            "weighted_sup": self.weighted_sup,
            "decay_exponent": self.decay_exponent,
            "radial_integral": self.radial_integral,
            "integral_bound_constant": self.integral_bound_constant,
        }


def euclidean_radius(grid: Grid) -> np.ndarray:
    """Distance of every grid point to the origin (minimal image on periodic grids)."""
    r2 = np.zeros(grid.dims)
    for ax, (x, L) in enumerate(zip(grid.coords, grid.lengths)):
        if grid.periodic:
            x = (x + L / 2) % L - L / 2
        shape = [1] * grid.ndim
        shape[ax] = len(x)
        r2 = r2 + (x ** 2).reshape(shape)
    return np.sqrt(r2)


def radial_majorant(kernel: Field, r_max: float = 8.0, n_r: int = 256) -> MajorantReport:
    """Tabulates ``h(r) = sup_{||z|| >= r} |Phi(z)|`` on a log grid of radii.

    Built as a reverse running maximum over points sorted by radius, so ``h``
    is nonincreasing by construction.  Reports ``h(0)``, the supremum of
    ``h(r) r^{n+2}`` over ``[1, r_max]``, the fitted log-log slope of ``h`` on
    that range, and the trapezoid value of ``int_0^{r_max} r^n h(r) dr``.
    """
    grid = kernel.grid
    n = grid.ndim - 1
    dist = euclidean_radius(grid).ravel()
    absval = np.abs(kernel.values).ravel()
    order = np.argsort(dist, kind="stable")
    d_sorted = dist[order]
    tail_max = np.maximum.accumulate(absval[order][::-1])[::-1]
    r_edge = float(d_sorted[-1])
    r_max = min(float(r_max), r_edge)
    r = np.concatenate([[0.0], np.geomspace(min(1e-2, r_max / 2), r_max, n_r)])
    r = np.unique(np.concatenate([r, [1.0]]) if r_max >= 1 else r)
    pos = np.searchsorted(d_sorted, r, side="left")
    h = np.where(pos < len(d_sorted), tail_max[np.minimum(pos, len(d_sorted) - 1)], 0.0)
    h0 = float(tail_max[0])
    far = r >= 1.0
    weighted = h[far] * r[far] ** (n + 2)
    weighted_sup = float(weighted.max()) if far.any() else float("nan")
    fit = far & (h > 0)
    if fit.sum() >= 2:
        slope = float(np.polyfit(np.log(r[fit]), np.log(h[fit]), 1)[0])
    else:
        slope = float("nan")
    integral = float(trapezoid(r ** n * h, r))
    return MajorantReport(r, h, h0, r_max, weighted_sup, slope, integral, integral / (h0 + 1.0))
