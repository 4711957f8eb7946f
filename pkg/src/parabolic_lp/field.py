"""Sampled space-time fields and their discrete Fourier calculus.

Arrays are indexed ``[x_1, ..., x_n, t]``.  A periodic grid samples the box
``[lo, hi)`` at ``lo + k h`` with ``h = L / N``; a closure grid (``periodic=False``)
samples ``[lo, hi]`` including both endpoints, ``h = L / (N - 1)``, and is only
used for fields living on a bounded domain such as ``Omega_T``.

Spectra use the unnormalized forward FFT; the inverse carries ``1/N``.
Frequencies are ``xi = 2 pi k / L`` with ``k`` in the signed Nyquist range.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConfigurationError, DataError, PreconditionError, StructuralError
from .geometry import Anisotropy, Box, aniso_distance

__all__ = [
    "Grid",
    "Field",
    "VectorField",
    "to_spectral",
    "spectral_derivative",
    "mean_subtract",
    "antiderivative",
    "gradient",
    "apply_multiplier",
]


@dataclass(frozen=True)
class Grid:
    dims: tuple[int, ...]
    box: Box
    anisotropy: Anisotropy
    periodic: bool = True

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not (len(dims) == self.box.dim == self.anisotropy.dim):
            raise StructuralError(
                f"grid dims {dims}, box dim {self.box.dim} and anisotropy dim "
                f"{self.anisotropy.dim} disagree")
        if any(d < 4 for d in dims):
            raise ConfigurationError(f"grid dims must be >= 4, got {dims}")
        if self.periodic and any(d % 2 for d in dims):
            raise ConfigurationError(f"periodic grid dims must be even, got {dims}")

    @classmethod
    def regular(cls, dims: Sequence[int], lower: Sequence[float], upper: Sequence[float],
                anisotropy: Anisotropy | str = "parabolic", periodic: bool = True) -> "Grid":
        if isinstance(anisotropy, str):
            anisotropy = Anisotropy.from_name(anisotropy, len(dims))
        return cls(tuple(dims), Box(tuple(lower), tuple(upper)), anisotropy, periodic)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def lengths(self) -> np.ndarray:
        return self.box.lengths

    @cached_property
    def spacing(self) -> np.ndarray:
        d = np.asarray(self.dims, dtype=float)
        return self.lengths / (d if self.periodic else d - 1)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(lo + h * np.arange(n) for lo, h, n in
                     zip(self.box.lower, self.spacing, self.dims))

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.coords, indexing="ij"))

    def points(self) -> np.ndarray:
        """All grid points, shape ``dims + (ndim,)``."""
        return np.stack(self.mesh(), axis=-1)

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        """Cell weights: ``h_1 ... h_d`` (periodic) or the trapezoid tensor rule (closure)."""
        if self.periodic:
            return np.full(self.dims, self.cell_volume)
        w = np.ones(self.dims)
        for ax, (n, h) in enumerate(zip(self.dims, self.spacing)):
            w1 = np.full(n, h)
            w1[0] = w1[-1] = h / 2
            shape = [1] * self.ndim
            shape[ax] = n
            w = w * w1.reshape(shape)
        return w

    # spectral side -------------------------------------------------------

    def _require_periodic(self):
        if not self.periodic:
            raise StructuralError("spectral operations need a periodic grid")

    @cached_property
    def frequencies(self) -> tuple[np.ndarray, ...]:
        self._require_periodic()
        return tuple(2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(self.dims, self.spacing))

    @cached_property
    def nyquist_masks(self) -> tuple[np.ndarray, ...]:
        """Per axis, True at the unpaired Nyquist index ``N/2``."""
        self._require_periodic()
        out = []
        for n in self.dims:
            m = np.zeros(n, dtype=bool)
            m[n // 2] = True
            out.append(m)
        return tuple(out)

    def frequency_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.frequencies, indexing="ij", sparse=True))

    @cached_property
    def aniso_frequency_norm(self) -> np.ndarray:
        """``|xi|_a`` at every grid frequency."""
        xi = np.stack(np.broadcast_arrays(*self.frequency_mesh()), axis=-1)
        return aniso_distance(xi, self.anisotropy)

    @cached_property
    def euclidean_frequency_norm(self) -> np.ndarray:
        return np.sqrt(sum(x ** 2 for x in self.frequency_mesh()))

    @cached_property
    def j_range(self) -> tuple[int, int]:
        """Resolvable dyadic scales ``(j_min, j_max)``.

        ``j_max`` keeps the annulus ``|xi|_a < 2^{j+1}`` inside the Nyquist box;
        ``j_min`` is the smallest ``j`` whose annulus reaches the lowest nonzero
        grid frequency.  ``j_min > j_max`` means no scale is resolvable.
        """
        self._require_periodic()
        w = self.anisotropy.array
        nyq = np.pi * np.asarray(self.dims) / self.lengths
        j_max = math.floor(min(math.log2(q) / wi for q, wi in zip(nyq, w))) - 1
        rho_min = min((2 * np.pi / L) ** (1.0 / wi) for L, wi in zip(self.lengths, w))
        j_min = math.floor(math.log2(rho_min))
        return j_min, j_max

    def dilate(self, mu: float) -> "Grid":
        """Grid of the same shape whose box is ``mu^{-a}`` times this one.

        Sampling ``f(mu^a .)`` on the returned grid reproduces the samples of
        ``f`` on this grid.
        """
        return Grid(self.dims, self.box.dilate(1.0 / mu, self.anisotropy), self.anisotropy, self.periodic)

    def refine(self, factor: int = 2) -> "Grid":
        if self.periodic:
            dims = tuple(d * factor for d in self.dims)
        else:
            dims = tuple((d - 1) * factor + 1 for d in self.dims)
        return Grid(dims, self.box, self.anisotropy, self.periodic)

    def header(self) -> dict:
        return {
            "dims": list(self.dims),
            "box": {"lower": list(self.box.lower), "upper": list(self.box.upper)},
            "anisotropy": list(self.anisotropy.weights),
            "periodic": self.periodic,
        }

    @classmethod
    def from_header(cls, h: dict) -> "Grid":
        try:
            return cls(tuple(h["dims"]), Box(tuple(h["box"]["lower"]), tuple(h["box"]["upper"])),
                       Anisotropy(tuple(h["anisotropy"])), bool(h.get("periodic", True)))
        except KeyError as exc:
            raise DataError(f"field header lacks {exc}") from None


class Field:
    """Real samples on a grid.  Immutable; the spectrum is computed lazily."""

    __slots__ = ("grid", "values", "_spectrum")

    def __init__(self, grid: Grid, values, check: bool = True):
        values = np.array(values, dtype=float, copy=True)
        if values.shape != grid.dims:
            raise StructuralError(f"values of shape {values.shape} do not match grid {grid.dims}")
        if check and not np.all(np.isfinite(values)):
            raise DataError("field values contain NaN or Inf")
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self._spectrum = None

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[..., np.ndarray]) -> "Field":
        """Sample ``func(*coords)`` where each coordinate is a broadcastable array."""
        return cls(grid, np.broadcast_to(func(*grid.mesh()), grid.dims))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.dims))

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "Field":
        vals = np.fft.ifftn(spectrum).real
        f = cls(grid, vals)
        return f

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            self.grid._require_periodic()
            s = np.fft.fftn(self.values)
            s.setflags(write=False)
            self._spectrum = s
        return self._spectrum

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c) -> "Field":
        if isinstance(c, Field):
            _same_grid(self, c)
            return Field(self.grid, self.values * c.values)
        return Field(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def __repr__(self):
        return f"Field(dims={self.grid.dims}, box={self.grid.box.lower}..{self.grid.box.upper})"

    def l2_physical(self) -> float:
        return float(np.sqrt(np.sum(self.grid.quadrature_weights * self.values ** 2)))

    def l2_spectral(self) -> float:
        """Parseval: ``int |f|^2 = (V / N^2) sum |F_k|^2``."""
        g = self.grid
        return float(np.sqrt(g.box.volume / g.size ** 2 * np.sum(np.abs(self.spectrum) ** 2)))

    def mean(self) -> float:
        g = self.grid
        return float(np.sum(g.quadrature_weights * self.values) / g.box.volume)


def _same_grid(*fields: Field):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise StructuralError("fields live on different grids")


class VectorField:
    """Components on a shared grid; norms reduce by max over components."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Field]):
        comps = tuple(components)
        if not comps:
            raise StructuralError("vector field needs at least one component")
        _same_grid(*comps)
        self.components = comps

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i) -> Field:
        return self.components[i]


def to_spectral(f: Field) -> Field:
    """Returns ``f`` with its spectrum materialized."""
    f.spectrum
    return f


def apply_multiplier(f: Field, multiplier: np.ndarray) -> Field:
    """Inverse transform of ``multiplier * f_hat`` (real part)."""
    return Field(f.grid, np.fft.ifftn(multiplier * f.spectrum).real)


def _derivative_multiplier(grid: Grid, orders: Sequence[int]) -> np.ndarray | None:
    mult = None
    for ax, (k, xi, nyq) in enumerate(zip(orders, grid.frequencies, grid.nyquist_masks)):
        if k == 0:
            continue
        m1 = (1j * xi) ** k
        m1[nyq] = 0.0
        shape = [1] * grid.ndim
        shape[ax] = len(xi)
        m1 = m1.reshape(shape)
        mult = m1 if mult is None else mult * m1
    return mult


def _check_band_limit(f: Field, tol: float = 1e-6):
    s2 = np.abs(f.spectrum) ** 2
    total = s2.sum()
    if total == 0:
        return
    edge = np.zeros(f.grid.dims, dtype=bool)
    for ax, nyq in enumerate(f.grid.nyquist_masks):
        shape = [1] * f.grid.ndim
        shape[ax] = len(nyq)
        edge |= nyq.reshape(shape)
    frac = s2[edge].sum() / total
    if frac > tol:
        warnings.warn(f"Nyquist modes carry {frac:.2e} of the spectral energy; "
                      "spectral derivatives may be inaccurate", RuntimeWarning, stacklevel=3)


def spectral_derivative(f: Field, orders: Sequence[int], check: bool = True) -> Field:
    """``prod_i d_i^{orders_i} f`` via the multiplier ``prod (i xi_i)^{orders_i}``.

    ``orders`` has one entry per axis (the time order is the last).  The
    unpaired Nyquist mode is dropped from every nonzero order.
    """
    orders = tuple(int(k) for k in orders)
    if len(orders) != f.grid.ndim:
        raise StructuralError(f"need {f.grid.ndim} derivative orders, got {len(orders)}")
    if any(k < 0 for k in orders):
        raise ConfigurationError("derivative orders must be nonnegative")
    mult = _derivative_multiplier(f.grid, orders)
    if mult is None:
        return f
    if check:
        _check_band_limit(f)
    return apply_multiplier(f, mult)


def gradient(g: Field) -> VectorField:
    """Space-time gradient ``(d_1 g, ..., d_{n+1} g)``."""
    d = g.grid.ndim
    return VectorField([spectral_derivative(g, tuple(int(i == ax) for i in range(d)))
                        for ax in range(d)])


def mean_subtract(f: Field) -> Field:
    """Zeroes the DC mode (the grid mean)."""
    return Field(f.grid, f.values - f.values.mean())


def antiderivative(f: Field, axis: int, rtol: float = 1e-10) -> Field:
    """``g`` with ``d_axis g = f``, normalized to zero mean along every ``axis`` line.

    Requires the mean of ``f`` along ``axis`` to vanish on every line.
    """
    g = f.grid
    if not 0 <= axis < g.ndim:
        raise ConfigurationError(f"axis {axis} out of range")
    slice_means = f.values.mean(axis=axis)
    scale = max(float(np.max(np.abs(f.values))), np.finfo(float).tiny)
    worst = float(np.max(np.abs(slice_means)))
    if worst > rtol * scale:
        idx = np.unravel_index(int(np.argmax(np.abs(slice_means))), slice_means.shape)
        raise PreconditionError(
            f"mean of f along axis {axis} does not vanish: worst line {tuple(int(i) for i in idx)} "
            f"has mean {worst:.3e} (tolerance {rtol * scale:.3e})")
    xi = g.frequencies[axis].astype(complex)
    inv = np.zeros_like(xi)
    nz = (xi != 0) & ~g.nyquist_masks[axis]
    inv[nz] = 1.0 / (1j * xi[nz])
    shape = [1] * g.ndim
    shape[axis] = len(xi)
    return apply_multiplier(f, inv.reshape(shape))


def multi_indices(dim: int, order: int):
    """All multi-indices of ``dim`` entries summing to ``order``."""
    for c in product(range(order + 1), repeat=dim):
        if sum(c) == order:
            yield c
