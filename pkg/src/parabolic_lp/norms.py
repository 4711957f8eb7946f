"""Grid evaluators for the function-space norms.

Every evaluator takes a :class:`~parabolic_lp.field.Field` (or a
:class:`~parabolic_lp.field.VectorField`, reduced by the max over components)
and returns a float.  Evaluators whose value is a sampled supremum accept
``return_diagnostics=True`` and then return ``(value, diagnostics)`` where the
diagnostics record the sampling budget.

Homogeneous norms act on the mean-zero representative: the DC mode is removed
before evaluation, since the only polynomial living on a torus is a constant.
"""
from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .exceptions import ConfigurationError, StructuralError
from .field import Field, Grid, VectorField, mean_subtract, multi_indices
from .geometry import SamplerPolicy, resolvable_lattice_scales
from .littlewood_paley import (CutoffProfile, LPDecomposition, build_symbol_bank,
                               lp_decompose)
from .regions import CubePlan, cube_plan

__all__ = [
    "NormSpec",
    "evaluate_norm",
    "norm_lp",
    "norm_linf",
    "norm_sobolev_parabolic",
    "sobolev_terms",
    "norm_bmo",
    "norm_bar_bmo",
    "norm_besov",
    "norm_triebel",
    "norm_triebel_infty_q",
    "norm_fplus",
    "norm_fminus",
    "square_function_sup",
    "norm_homogeneous_hs",
    "holder_seminorm",
]


def _vector_max(func):
    """Reduces vector-valued input by the max over components."""

    @functools.wraps(func)
    def wrapper(f, *args, **kwargs):
        if isinstance(f, VectorField):
            results = [func(c, *args, **kwargs) for c in f]
            if kwargs.get("return_diagnostics"):
                k = int(np.argmax([r[0] for r in results]))
                val, diag = results[k]
                return val, {**diag, "component": k}
            return max(results)
        return func(f, *args, **kwargs)

    return wrapper


def _check_p(p, name="p", allow_inf=True):
    p = float(p)
    if not (p >= 1 and (allow_inf or math.isfinite(p))):
        raise ConfigurationError(f"{name} must lie in [1, {'inf]' if allow_inf else 'inf)'}, got {p}")
    return p


def _lq(stack: np.ndarray, q: float, axis: int = 0) -> np.ndarray:
    """ℓ^q norm along ``axis`` (sup for ``q = inf``)."""
    a = np.abs(stack)
    if math.isinf(q):
        return a.max(axis=axis)
    return np.sum(a ** q, axis=axis) ** (1.0 / q)


# --- Lebesgue -------------------------------------------------------------


@_vector_max
def norm_lp(f: Field, p: float = 2.0) -> float:
    """Quadrature ``(sum w |f|^p)^{1/p}`` with the grid's cell or trapezoid weights."""
    p = _check_p(p)
    if math.isinf(p):
        return norm_linf(f)
    w = f.grid.quadrature_weights
    return float(np.sum(w * np.abs(f.values) ** p) ** (1.0 / p))


@_vector_max
def norm_linf(f: Field) -> float:
    """Grid maximum of ``|f|`` (a lower bound of the continuum sup)."""
    return float(np.max(np.abs(f.values)))


# --- parabolic Sobolev ----------------------------------------------------


def _derivative_orders(dim: int, m: int):
    """Yields ``(r, s, orders)`` over ``2r + |s| <= 2m``; ``orders`` lists x-orders then the t-order."""
    n = dim - 1
    for r in range(m + 1):
        for s in range(2 * m - 2 * r + 1):
            for alpha in multi_indices(n, s):
                yield r, s, tuple(alpha) + (r,)


def sobolev_terms(f: Field, m: int) -> dict:
    """``{orders: ||d^orders f||_2}`` for every term of the parabolic Sobolev norm.

    Periodic grids use exact spectral multipliers (Parseval, Nyquist dropped);
    closure grids use second-order finite differences and trapezoid weights.
    """
    if int(m) < 1:
        raise ConfigurationError("Sobolev order m must be >= 1")
    grid = f.grid
    out = {}
    if grid.periodic:
        F2 = np.abs(f.spectrum) ** 2
        scale = grid.lengths.prod() / grid.size ** 2
        for _, _, orders in _derivative_orders(grid.ndim, int(m)):
            mult = np.ones(grid.dims)
            for ax, (k, xi, nyq) in enumerate(zip(orders, grid.frequencies, grid.nyquist_masks)):
                if k == 0:
                    continue
                m1 = np.abs(xi) ** (2 * k)
                m1[nyq] = 0.0
                shape = [1] * grid.ndim
                shape[ax] = len(xi)
                mult = mult * m1.reshape(shape)
            out[orders] = float(np.sqrt(scale * np.sum(mult * F2)))
        return out
    w = grid.quadrature_weights
    cache = {(0,) * grid.ndim: f.values}

    def deriv(orders):
        if orders in cache:
            return cache[orders]
        ax = max(i for i, k in enumerate(orders) if k)
        prev = list(orders)
        prev[ax] -= 1
        d = np.gradient(deriv(tuple(prev)), grid.spacing[ax], axis=ax, edge_order=2)
        cache[orders] = d
        return d

    for _, _, orders in _derivative_orders(grid.ndim, int(m)):
        out[orders] = float(np.sqrt(np.sum(w * deriv(orders) ** 2)))
    return out


@_vector_max
def norm_sobolev_parabolic(f: Field, m: int = 1) -> float:
    """``sum_{2r+|s| <= 2m} ||d_t^r d_x^s f||_2`` over all spatial multi-indices ``s``."""
    return float(sum(sobolev_terms(f, m).values()))


# --- BMO ------------------------------------------------------------------


def _lower_median_rows(x: np.ndarray) -> np.ndarray:
    k = (x.shape[1] - 1) // 2
    return np.partition(x, k, axis=1)[:, k]


def _oscillation(values: np.ndarray, plan: CubePlan) -> tuple[float, dict]:
    """``max_Q mean_Q |f - median_Q f|`` over the cubes of ``plan``."""
    flat = values.ravel()
    best, per_scale = 0.0, {}
    for scale, idx in plan.stacks.items():
        stack = flat[idx]
        med = _lower_median_rows(stack)
        top = float(np.mean(np.abs(stack - med[:, None]), axis=1).max())
        per_scale[scale] = top
        best = max(best, top)
    single_top = 0.0
    for _, idx in plan.singles:
        s = flat[idx]
        med = _lower_median_rows(s[None, :])[0]
        single_top = max(single_top, float(np.mean(np.abs(s - med))))
    best = max(best, single_top)
    used = sum(len(i) for i in plan.stacks.values()) + len(plan.singles)
    return best, {"cubes_used": used, "cubes_skipped": plan.empty,
                  "lattice_sup_per_scale": per_scale, "ball_sup": single_top}


@_vector_max
def norm_bmo(f: Field, policy: SamplerPolicy | None = None, cubes=None,
             return_diagnostics: bool = False):
    """Sampled parabolic BMO norm ``sup_Q inf_c mean_Q |f - c|``.

    The infimum is attained at the (lower) median of the in-cube samples.
    Cubes come from ``cubes`` if given, else from ``cube_sampler`` over the
    grid's box with ``policy`` (the index plan is cached per grid and
    policy).  Cubes holding no grid point are skipped and counted.
    """
    grid = f.grid
    policy = policy or SamplerPolicy()
    if cubes is None:
        plan = cube_plan(grid, policy)
    else:
        cubes = list(cubes)
        if not cubes:
            raise ConfigurationError("BMO needs at least one cube")
        plan = CubePlan(grid, cubes)
    val, diag = _oscillation(f.values, plan)
    diag["budget"] = policy.budget() if cubes is None else {"explicit_cubes": len(cubes)}
    diag["cubes_requested"] = plan.n_cubes
    return (val, diag) if return_diagnostics else val


def norm_bar_bmo(f: Field, policy: SamplerPolicy | None = None, return_diagnostics: bool = False):
    """``||f||_BMO + ||f||_1`` on a bounded domain, with cubes contained in it."""
    policy = policy or SamplerPolicy(inside=True)
    if not policy.inside:
        policy = dataclasses.replace(policy, inside=True)
    bmo, diag = norm_bmo(f, policy, return_diagnostics=True)
    l1 = norm_lp(f, 1)
    diag.update({"bmo": bmo, "l1": l1})
    val = bmo + l1
    return (val, diag) if return_diagnostics else val


# --- Littlewood-Paley based norms ------------------------------------------


def _decompose(f: Field, mode: str, profile: CutoffProfile | None = None,
               lp: LPDecomposition | None = None) -> LPDecomposition:
    if lp is not None:
        if lp.bank.mode != mode or lp.source.grid != f.grid:
            raise StructuralError("supplied decomposition does not match the field or mode")
        return lp
    if mode == "homogeneous":
        f = mean_subtract(f)
    elif mode != "inhomogeneous":
        raise ConfigurationError(f"unknown mode {mode!r}")
    return lp_decompose(f, build_symbol_bank(f.grid, profile, mode))


@_vector_max
def norm_besov(f: Field, s: float = 0.0, p: float = 2.0, q: float = 2.0,
               mode: str = "inhomogeneous", lp: LPDecomposition | None = None) -> float:
    """``(sum_j 2^{sqj} ||phi_j * f||_p^q)^{1/q}``; sup over ``j`` for ``q = inf``."""
    p, q = _check_p(p), _check_p(q, "q")
    d = _decompose(f, mode, lp=lp)
    per_j = np.array([2.0 ** (s * j) * norm_lp(d.blocks[j], p) for j in d.js])
    return float(_lq(per_j, q))


def _weighted_blocks(d: LPDecomposition, s: float, js) -> np.ndarray:
    return np.stack([2.0 ** (s * j) * d.blocks[j].values for j in js])


@_vector_max
def norm_triebel(f: Field, s: float = 0.0, p: float = 2.0, q: float = 2.0,
                 mode: str = "homogeneous", lp: LPDecomposition | None = None) -> float:
    """``|| (sum_j 2^{sqj} |phi_j * f|^q)^{1/q} ||_p`` for finite ``p``."""
    p, q = _check_p(p, allow_inf=False), _check_p(q, "q")
    d = _decompose(f, mode, lp=lp)
    g = _lq(_weighted_blocks(d, s, d.js), q)
    return norm_lp(Field(f.grid, g, check=False), p)


def square_function_sup(f: Field, js, s: float = 0.0, q: float = 2.0,
                        lp: LPDecomposition | None = None) -> float:
    """``|| (sum_{j in js} 2^{sqj} |phi_j * f|^q)^{1/q} ||_inf`` with the homogeneous bank."""
    d = _decompose(f, "homogeneous", lp=lp)
    js = [j for j in js if j in d.blocks]
    if not js:
        return 0.0
    return float(np.max(_lq(_weighted_blocks(d, s, js), _check_p(q, "q"))))


def _side(f: Field, s: float, q: float, lp, sign: int) -> float:
    d = _decompose(f, "homogeneous", lp=lp)
    js = [j for j in d.js if sign * j >= 1]
    if not js:
        side = "j >= 1" if sign > 0 else "j <= -1"
        raise ConfigurationError(f"the grid resolves no dyadic block with {side}")
    return square_function_sup(f, js, s, q, lp=d)


@_vector_max
def norm_fplus(f: Field, s: float = 0.0, q: float = 2.0, lp: LPDecomposition | None = None) -> float:
    """High-frequency part: ℓ^q over ``j >= 1`` of ``2^{sj} |phi_j * f|``, then L-infinity."""
    return _side(f, s, q, lp, +1)


@_vector_max
def norm_fminus(f: Field, s: float = 0.0, q: float = 2.0, lp: LPDecomposition | None = None) -> float:
    """Low-frequency part: ℓ^q over ``j <= -1`` of ``2^{sj} |phi_j * f|``, then L-infinity."""
    return _side(f, s, q, lp, -1)


@_vector_max
def norm_triebel_infty_q(f: Field, q: float = 2.0, scales=None, min_points: int = 2,
                         lp: LPDecomposition | None = None, return_diagnostics: bool = False):
    """Dilated-cube form of the homogeneous ``F^0_{inf,q}`` norm.

    ``sup_P ( mean_P sum_{j >= -scale(P)} |phi_j * f|^q )^{1/q}`` over every
    lattice cube ``P`` of the periodic box at each resolvable scale.  The sum
    over ``j`` stops at the grid's ``j_max``; the energy beyond it is the
    decomposition residual and its sup norm is reported as ``tail_linf``.
    """
    q = _check_p(q, "q", allow_inf=False)
    grid = f.grid
    d = _decompose(f, "homogeneous", lp=lp)
    if scales is None:
        scales = resolvable_lattice_scales(grid.box, grid.anisotropy, grid.spacing, min_points)
    A = np.abs(d.block_array()) ** q
    js = np.asarray(d.js)
    # suffix sums: S[k] = sum_{i >= k} A[i]
    S = np.cumsum(A[::-1], axis=0)[::-1]
    policy = SamplerPolicy(lattice=True, lattice_scales=tuple(int(x) for x in scales), n_random=0)
    plan = cube_plan(grid, policy)
    tops = {}
    for scale, idx in plan.stacks.items():
        k = int(np.searchsorted(js, -scale))
        tops[scale] = float(S[k].ravel()[idx].mean(axis=1).max()) if k < len(js) else 0.0
    for cube, idx in plan.singles:
        k = int(np.searchsorted(js, -cube.scale))
        v = float(S[k].ravel()[idx].mean()) if k < len(js) else 0.0
        tops[cube.scale] = max(tops.get(cube.scale, 0.0), v)
    best = max(tops.values(), default=0.0)
    per_scale = {int(k): v ** (1.0 / q) for k, v in sorted(tops.items())}
    val = best ** (1.0 / q)
    if return_diagnostics:
        return val, {"scales": [int(x) for x in scales], "sup_per_scale": per_scale,
                     "j_range": list(d.bank.j_range), "tail_linf": norm_linf(d.residual)}
    return val


# --- Sobolev / Hoelder (isotropic, Euclidean) ------------------------------


@_vector_max
def norm_homogeneous_hs(g: Field, s: float = 1.0) -> float:
    """``(int ||xi||^{2s} |g_hat|^2 dxi)^{1/2}`` by Parseval on the grid.

    For ``s > 0`` the DC mode and the unpaired Nyquist modes are excluded, the
    same convention as the spectral derivatives, so ``s = 1`` reproduces
    ``||grad g||_2`` exactly.  ``s = 0`` gives ``||g||_2``.
    """
    grid = g.grid
    F2 = np.abs(g.spectrum) ** 2
    scale = grid.lengths.prod() / grid.size ** 2
    if s == 0:
        return float(np.sqrt(scale * F2.sum()))
    if s < 0:
        raise ConfigurationError("negative smoothness is not supported")
    w = np.zeros(grid.dims)
    for ax, (xi, nyq) in enumerate(zip(grid.frequencies, grid.nyquist_masks)):
        x2 = xi ** 2
        shape = [1] * grid.ndim
        shape[ax] = len(xi)
        w = w + x2.reshape(shape)
    mult = w ** s
    for ax, nyq in enumerate(grid.nyquist_masks):
        idx = [slice(None)] * grid.ndim
        idx[ax] = nyq
        mult[tuple(idx)] = 0.0
    return float(np.sqrt(scale * np.sum(mult * F2)))


def _shift_pairs(values: np.ndarray, grid: Grid, gamma: float) -> tuple[float, int]:
    """Max ratio over pairs differing by dyadic index shifts along ``{-1,0,1}^d`` directions."""
    d = grid.ndim
    dims = np.asarray(grid.dims)
    h = grid.spacing
    dirs = [np.array(v) for v in np.ndindex(*(3,) * d)]
    dirs = [v - 1 for v in dirs]
    # one representative per +/- pair
    dirs = [v for v in dirs if any(v) and v[np.flatnonzero(v)[0]] > 0]
    best, count = 0.0, 0
    kmax = int(math.floor(math.log2(dims.max())))
    for k in range(kmax + 1):
        for v in dirs:
            shift = v * 2 ** k
            if grid.periodic:
                if np.any(np.abs(shift) > dims // 2):
                    continue
                diff = values - np.roll(values, tuple(shift), axis=tuple(range(d)))
            else:
                if np.any(np.abs(shift) >= dims):
                    continue
                a_idx, b_idx = [], []
                for s, n in zip(shift, dims):
                    a_idx.append(slice(s, n) if s >= 0 else slice(0, n + s))
                    b_idx.append(slice(0, n - s) if s >= 0 else slice(-s, n))
                diff = values[tuple(a_idx)] - values[tuple(b_idx)]
            dist = float(np.sqrt(np.sum((shift * h) ** 2)))
            best = max(best, float(np.max(np.abs(diff))) / dist ** gamma)
            count += diff.size
    return best, count


def _pair_distance(p1: np.ndarray, p2: np.ndarray, grid: Grid) -> np.ndarray:
    delta = np.abs(p1 - p2)
    if grid.periodic:
        delta = np.minimum(delta, grid.lengths - delta)
    return np.sqrt(np.sum(delta ** 2, axis=-1))


@_vector_max
def holder_seminorm(g: Field, gamma: float = 0.5, n_random: int = 20000, seed: int = 42,
                    exhaustive_limit: int = 0, return_diagnostics: bool = False):
    """Sampled ``sup |g(z1) - g(z2)| / ||z1 - z2||^gamma`` (a lower bound of the true sup).

    Pairs: every grid point against its neighbours at dyadic index offsets in
    all ``{-1,0,1}^d`` directions, plus ``n_random`` seeded random pairs.  Grids
    with at most ``exhaustive_limit`` points use all pairs instead.  Periodic
    grids measure the minimal-image distance.
    """
    if not 0 < gamma < 1:
        raise ConfigurationError("gamma must lie in (0, 1)")
    grid = g.grid
    vals = g.values
    if grid.size <= exhaustive_limit:
        pts = grid.points().reshape(-1, grid.ndim)
        v = vals.ravel()
        iu = np.triu_indices(len(v), k=1)
        dist = _pair_distance(pts[iu[0]], pts[iu[1]], grid)
        val = float(np.max(np.abs(v[iu[0]] - v[iu[1]]) / dist ** gamma)) if len(dist) else 0.0
        diag = {"pairs": int(len(dist)), "method": "exhaustive"}
    else:
        val, count = _shift_pairs(vals, grid, gamma)
        rng = np.random.default_rng(seed)
        v = vals.ravel()
        i = rng.integers(0, v.size, n_random)
        j = rng.integers(0, v.size, n_random)
        keep = i != j
        i, j = i[keep], j[keep]
        pts = grid.points().reshape(-1, grid.ndim)
        dist = _pair_distance(pts[i], pts[j], grid)
        if len(dist):
            val = max(val, float(np.max(np.abs(v[i] - v[j]) / dist ** gamma)))
        diag = {"pairs": int(count + len(dist)), "shift_pairs": int(count),
                "random_pairs": int(len(dist)), "seed": seed, "method": "sampled"}
    return (val, diag) if return_diagnostics else val


# --- dispatch -------------------------------------------------------------

SPACES = ("Lp", "Linf", "SobolevParabolic", "BMOa", "BarBMOa", "Besov", "Triebel",
           "TriebelInftyQ", "FPlus", "FMinus", "HomogeneousHs", "HolderSemi")


@dataclass(frozen=True)
class NormSpec:
    """A norm and its parameters, as accepted by :func:`evaluate_norm`."""

    space: str
    s: float = 0.0
    p: float = 2.0
    q: float = 2.0
    m: int = 1
    gamma: float = 0.5
    mode: str = "homogeneous"
    policy: SamplerPolicy = dc_field(default_factory=SamplerPolicy)

    def __post_init__(self):
        if self.space not in SPACES:
            raise ConfigurationError(f"unknown space {self.space!r}; choose from {', '.join(SPACES)}")
        _check_p(self.p)
        _check_p(self.q, "q")
        if self.space == "Triebel":
            _check_p(self.p, allow_inf=False)
        if self.space == "TriebelInftyQ":
            _check_p(self.q, "q", allow_inf=False)
        if self.space == "HolderSemi" and not 0 < self.gamma < 1:
            raise ConfigurationError("gamma must lie in (0, 1)")
        if self.m < 1:
            raise ConfigurationError("m must be >= 1")
        if self.mode not in ("homogeneous", "inhomogeneous"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")


def evaluate_norm(f, spec: NormSpec) -> tuple[float, dict]:
    """Evaluates ``spec`` on ``f``; returns ``(value, diagnostics)``."""
    sp = spec.space
    if sp == "Lp":
        return norm_lp(f, spec.p), {}
    if sp == "Linf":
        return norm_linf(f), {}
    if sp == "SobolevParabolic":
        return norm_sobolev_parabolic(f, spec.m), {}
    if sp == "BMOa":
        return norm_bmo(f, spec.policy, return_diagnostics=True)
    if sp == "BarBMOa":
        return norm_bar_bmo(f, spec.policy, return_diagnostics=True)
    if sp == "Besov":
        return norm_besov(f, spec.s, spec.p, spec.q, spec.mode), {"mode": spec.mode}
    if sp == "Triebel":
        return norm_triebel(f, spec.s, spec.p, spec.q, spec.mode), {"mode": spec.mode}
    if sp == "TriebelInftyQ":
        return norm_triebel_infty_q(f, spec.q, return_diagnostics=True)
    if sp == "FPlus":
        return norm_fplus(f, spec.s, spec.q), {}
    if sp == "FMinus":
        return norm_fminus(f, spec.s, spec.q), {}
    if sp == "HomogeneousHs":
        return norm_homogeneous_hs(f, spec.s), {}
    return holder_seminorm(f, spec.gamma, seed=spec.policy.seed, return_diagnostics=True)
