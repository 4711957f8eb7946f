"""Test-function families.

Every sample is a scalar potential ``g`` together with ``f = grad g``
computed spectrally, so the constraint ``f = grad g`` holds exactly on the
grid.  Parameters are drawn from ``default_rng([seed, index])`` and expressed
relative to the grid's box, so a sample is the *same function* on refined
grids and is carried to ``g(mu^a .)`` on ``grid.dilate(mu)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from ..exceptions import ConfigurationError
from ..field import Field, Grid, VectorField, gradient, mean_subtract
from ..geometry import aniso_distance
from ..littlewood_paley import CutoffProfile

__all__ = ["FunctionFamily", "Sample", "generate", "KINDS"]

KINDS = ("band-limited-random", "aniso-gaussian", "truncated-log", "constant", "single-mode",
         "mixed")
MIXED_CYCLE = ("band-limited-random", "aniso-gaussian", "truncated-log")


@dataclass(frozen=True)
class FunctionFamily:
    """Parameters of a family of ``(g, f)`` samples.

    ``band`` bounds ``|xi|_a`` for band-limited samples (in units of the
    box's base frequencies, i.e. ``xi = 2 pi k / L``); ``amplitude`` is the
    log-uniform range of the overall scale; ``sigma`` bounds the spatial width
    of anisotropic Gaussians (time width ``sigma^2``); ``radius`` and ``eps``
    are the cutoff radius and regularization of the truncated-log kind.
    ``normalize_l2`` rescales ``g`` to ``||g||_2 <= 1`` when set.
    """

    kind: str = "mixed"
    count: int = 200
    seed: int = 42
    band: tuple = (1.0, 4.0)
    modes: int = 12
    amplitude: tuple = (0.05, 50.0)
    sigma: tuple = (0.25, 0.6)
    radius: tuple = (0.4, 0.8)
    eps: tuple = (0.2, 0.4)
    constant: float = 1.0
    wavevector: tuple = (1, 1)
    normalize_l2: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown family kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.count < 1:
            raise ConfigurationError("family count must be >= 1")
        for name in ("band", "amplitude", "sigma", "radius", "eps"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ConfigurationError(f"{name} range must satisfy 0 < lo <= hi")

    def as_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


@dataclass(eq=False)
class Sample:
    g: Field
    f: VectorField
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.g.grid


def _loguniform(rng, lo, hi):
    return float(lo * (hi / lo) ** rng.random())


def _relative_point(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Point at fraction ``u`` of the box (dilation covariant)."""
    return np.asarray(grid.box.lower) + u * grid.lengths


def _band_limited(grid: Grid, fam: FunctionFamily, rng) -> tuple[np.ndarray, dict]:
    w = grid.anisotropy.array
    L = grid.lengths / _base_unit(grid) ** w    # box side in standard units
    # wave numbers k with |2 pi k / L|_a in the band, listed in a grid-independent order
    kmax = [int(math.ceil(fam.band[1] ** wi * Li / (2 * np.pi))) for wi, Li in zip(w, L)]
    ranges = [np.arange(-k, k + 1) for k in kmax]
    ks = np.stack([m.ravel() for m in np.meshgrid(*ranges, indexing="ij")], axis=1)
    xi = 2 * np.pi * ks / L
    rho = aniso_distance(xi, grid.anisotropy)
    ks = ks[(rho >= fam.band[0]) & (rho <= fam.band[1])]
    # keep one of each +-k pair
    first = ks[np.arange(len(ks)), np.argmax(ks != 0, axis=1)]
    ks = ks[first > 0]
    if len(ks) == 0:
        raise ConfigurationError("band contains no wave number of the box")
    nyq = np.asarray(grid.dims) // 2
    if np.any(np.abs(ks) >= nyq):
        raise ConfigurationError("band exceeds the grid's Nyquist frequency")
    pick = rng.choice(len(ks), size=min(fam.modes, len(ks)), replace=False)
    ks = ks[np.sort(pick)]
    coef = rng.normal(size=len(ks)) + 1j * rng.normal(size=len(ks))
    coef /= np.linalg.norm(coef)
    amp = _loguniform(rng, *fam.amplitude)
    spec = np.zeros(grid.dims, dtype=complex)
    N = grid.size
    for k, c in zip(ks, coef):
        idx = tuple(int(x) % n for x, n in zip(k, grid.dims))
        nidx = tuple(int(-x) % n for x, n in zip(k, grid.dims))
        spec[idx] += amp * c * N / 2
        spec[nidx] += amp * np.conj(c) * N / 2
    # spectrum is relative to the box's lower corner; fft phases are relative to index 0 = lower corner
    return np.fft.ifftn(spec).real, {"amplitude": amp, "modes": ks.tolist()}


def _gaussian(grid: Grid, fam: FunctionFamily, rng) -> tuple[np.ndarray, dict]:
    sx = float(fam.sigma[0] + (fam.sigma[1] - fam.sigma[0]) * rng.random())
    amp = _loguniform(rng, *fam.amplitude)
    c = _relative_point(grid, 0.25 + 0.5 * rng.random(grid.ndim))
    w = grid.anisotropy.array
    L0 = _base_unit(grid)
    sig = (sx * L0) ** w
    expo = sum(((x - ci) / si) ** 2 for x, ci, si in zip(grid.mesh(), c, sig))
    return amp * np.exp(-0.5 * expo), {"amplitude": amp, "sigma_x": sx, "center": c.tolist()}


def _base_unit(grid: Grid) -> float:
    """Length unit of the box: 1 on the standard box, ``1/mu`` on ``grid.dilate(mu)``.

    Defined as ``(prod L_i)^{1/|a|} / (prod L_i^std)^{1/|a|}`` with the standard box
    of side 16 in space and 4 in time, which keeps every parameter dilation covariant.
    """
    a = grid.anisotropy
    hd = a.homogeneous_dimension
    std = np.array([16.0] * (a.dim - 1) + [4.0])
    return float((np.prod(grid.lengths) / np.prod(std)) ** (1.0 / hd))


def _truncated_log(grid: Grid, fam: FunctionFamily, rng) -> tuple[np.ndarray, dict]:
    R = float(fam.radius[0] + (fam.radius[1] - fam.radius[0]) * rng.random())
    eps = float(fam.eps[0] + (fam.eps[1] - fam.eps[0]) * rng.random())
    amp = _loguniform(rng, *fam.amplitude)
    c = _relative_point(grid, 0.25 + 0.5 * rng.random(grid.ndim))
    unit = _base_unit(grid)
    w = grid.anisotropy.array
    d = [(x - ci) / unit ** wi for x, ci, wi in zip(grid.mesh(), c, w)]
    # smooth stand-in for log(1/max(|z|_a, eps)): -(1/4) log(|x|^4 + t^2 + eps^4)
    if grid.anisotropy.is_parabolic:
        r4 = sum(x ** 2 for x in d[:-1]) ** 2 + d[-1] ** 2
    else:
        r4 = sum(x ** 2 for x in d) ** 2
    core = -0.25 * np.log(r4 + eps ** 4)
    rho = aniso_distance(np.stack(d, axis=-1), grid.anisotropy)
    cut = CutoffProfile()(rho / R)
    vals = amp * cut * (core - (-0.25 * np.log((2 * R) ** 4 + eps ** 4)))
    return vals, {"amplitude": amp, "radius": R, "eps": eps, "center": c.tolist()}


def _single_mode(grid: Grid, fam: FunctionFamily, rng) -> tuple[np.ndarray, dict]:
    k = np.asarray(fam.wavevector, dtype=float)
    if len(k) != grid.ndim:
        raise ConfigurationError("wavevector length must match the grid dimension")
    if np.any(np.abs(k) >= np.asarray(grid.dims) // 2):
        raise ConfigurationError("wavevector exceeds the grid's Nyquist frequency")
    xi = 2 * np.pi * k / grid.lengths
    amp = float(fam.amplitude[0])
    phase = sum(x_i * (x - lo) for x_i, x, lo in zip(xi, grid.mesh(), grid.box.lower))
    return amp * np.sin(phase), {"amplitude": amp, "wavevector": k.tolist(), "xi": xi.tolist()}


_GENERATORS = {
    "band-limited-random": _band_limited,
    "aniso-gaussian": _gaussian,
    "truncated-log": _truncated_log,
    "single-mode": _single_mode,
}


def generate(family: FunctionFamily, grid: Grid, indices=None) -> list[Sample]:
    """Samples ``(g, f = grad g)`` of ``family`` on the periodic ``grid``.

    Deterministic in ``(family.seed, index)``; ``indices`` selects a subset.
    """
    if not grid.periodic:
        raise ConfigurationError("families are generated on periodic grids")
    out = []
    indices = range(family.count) if indices is None else indices
    for i in indices:
        rng = np.random.default_rng([family.seed, int(i)])
        kind = family.kind
        if kind == "mixed":
            kind = MIXED_CYCLE[int(i) % len(MIXED_CYCLE)]
        if kind == "constant":
            vals, meta = np.full(grid.dims, float(family.constant)), {"value": family.constant}
        else:
            vals, meta = _GENERATORS[kind](grid, family, rng)
        g = Field(grid, vals)
        if kind not in ("constant",):
            g = mean_subtract(g)
        if family.normalize_l2:
            n2 = g.l2_physical()
            if n2 > 1.0:
                g = g * (1.0 / n2)
                meta["l2_rescale"] = 1.0 / n2
        if kind == "constant":
            f = VectorField([Field.zeros(grid) for _ in range(grid.ndim)])
        else:
            f = gradient(g)
        meta.update({"kind": kind, "index": int(i), "seed": family.seed})
        out.append(Sample(g, f, meta))
    return out
