"""The bounded-domain inequality on ``Omega_T = (0,1)^n x (0,T)``.

Samples are scalar fields on the closure grid of ``Omega_T``.  The pipeline
extends them to the three-times larger box, localizes with the plateau
cutoff ``Psi``, builds ``g = int_0^x Psi f~`` on a periodic embedding and
evaluates ``||f||_inf <= C (1 + ||f||_barBMO (log+ ||f||_W)^{1/2})`` on
``Omega_T`` itself, together with the intermediate bounds of the
construction (``||f~||_W / ||f||_W``, ``||Psi f~||_W / ||f||_W`` and
``||g||_inf / ||f||_W``).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from ..exceptions import ConfigurationError, HypothesisError
from ..extension import build_plateau_cutoff, default_plateau_sets, extend_to_box, localize
from ..field import Field, Grid, VectorField
from ..geometry import Box, aniso_distance
from ..littlewood_paley import CutoffProfile
from ..norms import norm_bar_bmo, norm_bmo, norm_linf, norm_lp, norm_sobolev_parabolic
from .families import Sample
from .inequalities import LabOptions, _record, _thm11, log_plus

__all__ = ["DomainFamily", "DomainSample", "omega_grid", "generate_domain", "run_pipeline",
           "eval_theorem14", "DOMAIN_KINDS"]

DOMAIN_KINDS = ("smooth-random", "aniso-gaussian", "truncated-log", "constant", "mixed")
_CYCLE = ("smooth-random", "aniso-gaussian", "truncated-log")


@dataclass(frozen=True)
class DomainFamily:
    """Scalar test fields on ``Omega_T``.

    ``smooth-random``: random cosine series ``sum c_kl cos(pi k x + p) cos(pi l t / T + q)``
    with ``k <= modes_x``, ``l <= modes_t`` (not periodic on the box);
    ``aniso-gaussian`` and ``truncated-log`` are centred inside ``Omega_T``.
    """

    kind: str = "mixed"
    count: int = 50
    seed: int = 42
    n: int = 1
    T: float = 1.0
    amplitude: tuple = (0.05, 50.0)
    modes_x: int = 3
    modes_t: int = 2
    sigma: tuple = (0.12, 0.3)
    radius: tuple = (0.25, 0.45)
    eps: tuple = (0.06, 0.12)
    constant: float = 1.0

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ConfigurationError(f"unknown domain family kind {self.kind!r}")
        if self.n < 1 or self.T <= 0 or self.count < 1:
            raise ConfigurationError("need n >= 1, T > 0 and count >= 1")

    def as_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


@dataclass(eq=False)
class DomainSample:
    f: Field
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.f.grid


def omega_grid(n: int = 1, T: float = 1.0, points: int = 65, anisotropy="parabolic") -> Grid:
    """Closure grid of ``Omega_T`` with ``points`` samples per axis."""
    box = Box.omega_T(n, T)
    return Grid.regular((points,) * (n + 1), box.lower, box.upper, anisotropy, periodic=False)


def _loguniform(rng, lo, hi):
    return float(lo * (hi / lo) ** rng.random())


def _uniform(rng, lo, hi):
    return float(lo + (hi - lo) * rng.random())


def _smooth_random(grid, fam, rng):
    X = grid.mesh()
    amp = _loguniform(rng, *fam.amplitude)
    vals = np.zeros(grid.dims)
    ranges = [range(fam.modes_x + 1)] * (grid.ndim - 1) + [range(fam.modes_t + 1)]
    idx = np.stack(np.meshgrid(*[np.array(r) for r in ranges], indexing="ij"), -1).reshape(-1, grid.ndim)
    coef = rng.normal(size=len(idx)) / (1.0 + idx.sum(axis=1)) ** 2
    phase = rng.uniform(0, 2 * np.pi, size=(len(idx), grid.ndim))
    L = grid.lengths
    for c, k, p in zip(coef, idx, phase):
        term = np.ones(grid.dims)
        for ax in range(grid.ndim):
            term = term * np.cos(np.pi * k[ax] * X[ax] / L[ax] + p[ax])
        vals += c * term
    vals *= amp / max(np.max(np.abs(vals)), 1e-300)
    return vals, {"amplitude": amp}


def _centre(grid, rng):
    return np.asarray(grid.box.lower) + (0.2 + 0.6 * rng.random(grid.ndim)) * grid.lengths


def _gaussian(grid, fam, rng):
    sx = _uniform(rng, *fam.sigma)
    amp = _loguniform(rng, *fam.amplitude)
    c = _centre(grid, rng)
    sig = sx ** grid.anisotropy.array
    expo = sum(((x - ci) / si) ** 2 for x, ci, si in zip(grid.mesh(), c, sig))
    return amp * np.exp(-0.5 * expo), {"amplitude": amp, "sigma_x": sx, "center": c.tolist()}


def _truncated_log(grid, fam, rng):
    R = _uniform(rng, *fam.radius)
    eps = _uniform(rng, *fam.eps)
    amp = _loguniform(rng, *fam.amplitude)
    c = _centre(grid, rng)
    d = [x - ci for x, ci in zip(grid.mesh(), c)]
    if grid.anisotropy.is_parabolic:
        r4 = sum(x ** 2 for x in d[:-1]) ** 2 + d[-1] ** 2
    else:
        r4 = sum(x ** 2 for x in d) ** 2
    core = -0.25 * np.log(r4 + eps ** 4)
    rho = aniso_distance(np.stack(d, axis=-1), grid.anisotropy)
    cut = CutoffProfile()(rho / R)
    vals = amp * cut * (core + 0.25 * np.log((2 * R) ** 4 + eps ** 4))
    return vals, {"amplitude": amp, "radius": R, "eps": eps, "center": c.tolist()}


_GEN = {"smooth-random": _smooth_random, "aniso-gaussian": _gaussian, "truncated-log": _truncated_log}


def generate_domain(family: DomainFamily, grid: Grid, indices=None) -> list[DomainSample]:
    """Deterministic samples of ``family`` on the closure grid of ``Omega_T``."""
    if grid.periodic:
        raise ConfigurationError("domain samples live on closure grids (periodic=False)")
    out = []
    for i in (range(family.count) if indices is None else indices):
        rng = np.random.default_rng([family.seed, 7, int(i)])
        kind = _CYCLE[int(i) % len(_CYCLE)] if family.kind == "mixed" else family.kind
        if kind == "constant":
            vals, meta = np.full(grid.dims, float(family.constant)), {"value": family.constant}
        else:
            vals, meta = _GEN[kind](grid, family, rng)
        meta.update({"kind": kind, "index": int(i), "seed": family.seed})
        out.append(DomainSample(Field(grid, vals), meta))
    return out


def run_pipeline(f: Field, m: int = 1, axis: int = 0, pad: float = 1 / 6) -> dict:
    """Extension, ``Psi``-localization and antiderivative of a field on ``Omega_T``.

    Returns the extended field, the cutoff, the :class:`Localization` and the
    scalar local sample ``(g, d_x g)`` on the periodic embedding.
    """
    if f.grid.periodic:
        raise ConfigurationError("the pipeline expects a closure grid of Omega_T")
    f_ext = extend_to_box(f, m)
    Z1, Z2 = default_plateau_sets(f.grid.box)
    psi = build_plateau_cutoff(Z1, Z2, f_ext.grid)
    loc = localize(f_ext, psi, axis=axis, pad=pad)
    fx = Field(loc.g.grid, loc.product.values - loc.compensation.values, check=False)
    local = Sample(loc.g, VectorField([fx]), {})
    return {"extended": f_ext, "psi": psi, "localization": loc, "local_sample": local}


def eval_theorem14(sample: DomainSample, options: LabOptions | None = None,
                   pipeline: bool = True) -> dict:
    """Record of the bounded-domain inequality for one sample.

    ``rhs`` holds ``bar_bmo`` (with its ``bmo`` and ``l1`` parts), ``W`` and the
    square-root log factor.  With ``pipeline`` the extension chain runs and its
    ratios are attached under ``"pipeline"``.
    """
    options = options or LabOptions()
    if not isinstance(sample, DomainSample):
        raise ConfigurationError("thm1.4 expects a DomainSample on the closure of Omega_T")
    f = sample.f
    n = f.grid.ndim - 1
    if not 2 * options.m > (n + 2) / 2:
        raise HypothesisError(f"hypothesis 2m > (n+2)/2 fails for m={options.m}, n={n}")
    lhs = norm_linf(f)
    bar, diag = norm_bar_bmo(f, options.policy, return_diagnostics=True)
    l1 = norm_lp(f, 1)
    bmo = bar - l1
    W = norm_sobolev_parabolic(f, options.m)
    sq = log_plus(W) ** 0.5
    rec = _record("thm1.4", None, lhs, {"bar_bmo": bar, "bmo": bmo, "l1": l1, "W": W,
                                        "sqrt_log": sq}, 1.0 + bar * sq)
    rec["sample"] = {k: v for k, v in sample.meta.items() if k in ("kind", "index", "seed")}
    rec["cubes_used"] = diag.get("cubes_used")
    if pipeline:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            p = run_pipeline(f, options.m)
            loc = p["localization"]
            W_ext = norm_sobolev_parabolic(p["extended"], options.m)
            W_loc = norm_sobolev_parabolic(Field(loc.product.grid, loc.product.values, check=False),
                                           options.m)
            g_inf = norm_linf(loc.g)
            local = _thm11(p["local_sample"], options, n)
        ratio = (lambda a: a / W) if W > 0 else (lambda a: float("nan"))
        rec["pipeline"] = {"extension_ratio": ratio(W_ext), "localization_ratio": ratio(W_loc),
                           "g_ratio": ratio(g_inf), "local_C": local["C_sample"],
                           "slice_mean_max": loc.slice_mean_max,
                           "embedding_dims": list(loc.g.grid.dims)}
    return rec
