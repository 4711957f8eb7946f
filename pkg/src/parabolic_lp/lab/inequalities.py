"""Inequalities as per-sample LHS / RHS records and fitted constants.

Each evaluator returns a record ``{"id", "lhs", "rhs", "rhs_shape", "C_sample",
...}`` where ``rhs`` holds the named right-hand-side ingredients and
``C_sample = lhs / rhs_shape`` is the smallest constant making the inequality
hold for that sample (0 when ``lhs = 0``).  Inequalities whose constants are
explicit (``mt2ato``, ``lemma5.1``) also carry ``passed`` and ``slack``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.optimize import brentq

from ..exceptions import ConfigurationError, HypothesisError
from ..field import Field, Grid, VectorField, mean_subtract
from ..geometry import Anisotropy, SamplerPolicy
from ..littlewood_paley import build_symbol_bank, lp_decompose
from ..norms import (norm_besov, norm_bmo, norm_fminus, norm_fplus, norm_homogeneous_hs,
                     norm_linf, norm_lp, norm_sobolev_parabolic, norm_triebel_infty_q)
from .families import Sample

__all__ = [
    "IDS",
    "LabOptions",
    "log_plus",
    "c_gamma",
    "eval_inequality",
    "mt2ato_terms",
    "step1_bound_curve",
    "optimize_dyadic_cut",
    "check_split_inequality",
    "cut_inputs",
    "split_inequality_scan",
    "case_split_theorem17",
    "fit_constant",
    "InequalityReport",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = "1.0"

IDS = ("thm1.1", "eqIM", "thm1.4", "thm1.7", "lemma3.1", "lemma3.2", "mt2ato", "lemma5.1",
       "lemma5.2", "embed2.12", "embed2.13", "bernstein")


@dataclass(frozen=True)
class LabOptions:
    """Parameters shared by the evaluators.

    ``embed`` is ``(s, p, q, t, r)`` for the Besov embedding
    ``B^s_{p,q} -> B^t_{r,q}``; ``None`` uses ``(2m, 2, inf, eta, inf)`` with
    ``eta = 2m - (n+2)/2``.  ``mt2ato_N`` lists the cut levels at which the
    explicit truncation bound is checked.
    """

    m: int = 1
    gamma: float = 0.25
    policy: SamplerPolicy = field(default_factory=SamplerPolicy)
    embed: tuple | None = None
    mt2ato_N: tuple = tuple(range(1, 17))
    mt2ato_gammas: tuple = (0.25, 0.5, 0.75)
    mt2ato_tol: float = 1e-8
    lemma51_tol: float = 1e-8
    l2_tol: float = 1e-12

    def as_dict(self) -> dict:
        d = asdict(self)
        d["policy"] = self.policy.budget()
        d["mt2ato_N"] = list(self.mt2ato_N)
        d["mt2ato_gammas"] = list(self.mt2ato_gammas)
        return d


def log_plus(x: float) -> float:
    """``max(log x, 0)``, with ``log_plus(0) = 0``."""
    return math.log(x) if x > 1.0 else 0.0


def c_gamma(gamma: float) -> float:
    """``(1 / (2^{2 gamma} - 1))^{1/2}``."""
    if gamma <= 0:
        raise ConfigurationError("gamma must be positive")
    return (1.0 / (2.0 ** (2 * gamma) - 1.0)) ** 0.5


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0:
        return 0.0
    return lhs / rhs if rhs > 0 else math.inf


def _eta(m: int, n: int) -> float:
    return 2 * m - (n + 2) / 2


def _require_sobolev(m: int, n: int):
    if not 2 * m > (n + 2) / 2:
        raise HypothesisError(f"hypothesis 2m > (n+2)/2 fails for m={m}, n={n}")


def _record(id_, sample, lhs, rhs, shape, **extra) -> dict:
    rec = {"id": id_, "lhs": float(lhs), "rhs": {k: float(v) for k, v in rhs.items()},
           "rhs_shape": float(shape), "C_sample": float(_ratio(lhs, shape))}
    if sample is not None:
        rec["sample"] = {k: v for k, v in sample.meta.items() if k in ("kind", "index", "seed", "mu")}
    rec.update(extra)
    return rec


# --- per-component Littlewood-Paley quantities ------------------------------


def _lp_components(f: VectorField):
    for c in f:
        c0 = mean_subtract(c)
        yield c0, lp_decompose(c0, build_symbol_bank(c.grid, mode="homogeneous"))


def mt2ato_terms(fc: Field, lp, gamma: float, N: int) -> dict:
    """Pointwise-L-infinity quantities of the explicit truncation split at cut ``N``.

    ``lhs = || sum_j |phi_j f| ||_inf``;
    ``middle = || (sum_{|j| <= N} |phi_j f|^2)^{1/2} ||_inf``;
    ``fplus`` / ``fminus`` as in the high/low truncation norms.  The bound is
    ``lhs <= sqrt(2N+1) middle + C_gamma 2^{-gamma N} (fplus + fminus)``.
    """
    return _mt2ato_table(lp, (gamma,), (N,))[0]


def _mt2ato_table(lp, gammas, Ns) -> list[dict]:
    js = np.asarray(lp.js)
    B = np.abs(lp.block_array())
    lhs = float(B.sum(axis=0).max())
    B2 = B ** 2
    hi, lo = js >= 1, js <= -1
    middles = {}
    for N in Ns:
        sel = np.abs(js) <= N
        middles[N] = float(np.sqrt(B2[sel].sum(axis=0)).max()) if sel.any() else 0.0
    out = []
    for gamma in gammas:
        w2 = 4.0 ** (gamma * js)
        fplus = float(np.sqrt(np.tensordot(w2[hi], B2[hi], axes=1)).max()) if hi.any() else 0.0
        fminus = float(np.sqrt(np.tensordot(1 / w2[lo], B2[lo], axes=1)).max()) if lo.any() else 0.0
        cg = c_gamma(gamma)
        for N in Ns:
            bound = math.sqrt(2 * N + 1) * middles[N] + cg * 2.0 ** (-gamma * N) * (fplus + fminus)
            out.append({"lhs": lhs, "middle": middles[N], "fplus": fplus, "fminus": fminus,
                        "C_gamma": cg, "bound": bound, "N": N, "gamma": gamma})
    return out


# --- evaluators -------------------------------------------------------------


def _thm11(sample: Sample, opt: LabOptions, n: int) -> dict:
    _require_sobolev(opt.m, n)
    f, g = sample.f, sample.g
    lhs = norm_linf(f)
    bmo = norm_bmo(f, opt.policy)
    W = norm_sobolev_parabolic(f, opt.m)
    gi = norm_linf(g)
    arg = W + gi
    sq = log_plus(arg) ** 0.5
    return _record("thm1.1", sample, lhs, {"bmo": bmo, "W": W, "g_linf": gi, "log_arg": arg,
                                           "sqrt_log": sq}, 1.0 + bmo * sq)


def _eqim(sample: Sample, opt: LabOptions, n: int) -> dict:
    _require_sobolev(opt.m, n)
    f = sample.f
    lhs = norm_linf(f)
    bmo = norm_bmo(f, opt.policy)
    W = norm_sobolev_parabolic(f, opt.m)
    return _record("eqIM", sample, lhs, {"bmo": bmo, "W": W, "log_plus_W": log_plus(W)},
                   1.0 + bmo * (1.0 + log_plus(W)))


def _check_l2(sample: Sample, opt: LabOptions):
    n2 = sample.g.l2_physical()
    if n2 > 1.0 + opt.l2_tol:
        raise HypothesisError(f"||g||_2 = {n2:.6g} > 1 (the comparison needs ||g||_2 <= 1)")
    return n2


def _require_low_dim(n: int):
    if n not in (1, 2, 3):
        raise HypothesisError(f"the comparison is stated for n in {{1,2,3}}, got n={n}")


def _thm17(sample: Sample, opt: LabOptions, n: int) -> dict:
    _require_low_dim(n)
    _require_sobolev(opt.m, n)
    n2 = _check_l2(sample, opt)
    W = norm_sobolev_parabolic(sample.f, opt.m)
    gi = norm_linf(sample.g)
    lhs = log_plus(W + gi) ** 0.5
    return _record("thm1.7", sample, lhs, {"W": W, "g_linf": gi, "g_l2": n2,
                                           "log_plus_W": log_plus(W)}, 1.0 + log_plus(W))


def _lemma31(sample: Sample, opt: LabOptions, n: int) -> dict:
    bmo = norm_bmo(sample.f, opt.policy)
    F2 = norm_triebel_infty_q(sample.f, 2.0)
    return _record("lemma3.1", sample, bmo, {"F0_inf2": F2}, F2, ratio=float(_ratio(bmo, F2)))


def _lemma32(sample: Sample, opt: LabOptions, n: int) -> dict:
    gam = opt.gamma
    F1 = F2 = fp = fm = 0.0
    for c0, lp in _lp_components(sample.f):
        F1 = max(F1, norm_triebel_infty_q(c0, 1.0, lp=lp))
        F2 = max(F2, norm_triebel_infty_q(c0, 2.0, lp=lp))
        fp = max(fp, norm_fplus(c0, gam, 2.0, lp=lp))
        fm = max(fm, norm_fminus(c0, -gam, 2.0, lp=lp))
    arg = fp + fm
    sq = log_plus(arg) ** 0.5
    return _record("lemma3.2", sample, F1, {"F0_inf2": F2, "fplus": fp, "fminus": fm,
                                            "log_arg": arg, "sqrt_log": sq}, 1.0 + F2 * sq,
                   gamma=gam)


def _mt2ato(sample: Sample, opt: LabOptions, n: int) -> dict:
    gammas = opt.mt2ato_gammas
    worst, passed, checks = -math.inf, True, 0
    lhs_max = 0.0
    for c0, lp in _lp_components(sample.f):
        for t in _mt2ato_table(lp, gammas, opt.mt2ato_N):
            checks += 1
            lhs_max = max(lhs_max, t["lhs"])
            tol = opt.mt2ato_tol * max(1.0, t["bound"])
            worst = max(worst, (t["lhs"] - t["bound"]) / max(t["bound"], 1e-300))
            if t["lhs"] > t["bound"] + tol:
                passed = False
    return _record("mt2ato", sample, lhs_max, {"checks": checks}, lhs_max,
                   passed=passed, worst_relative_excess=float(worst),
                   gammas=list(gammas), C_gamma={str(g): c_gamma(g) for g in gammas})


def _lemma51(sample: Sample, opt: LabOptions, n: int) -> dict:
    _require_low_dim(n)
    _require_sobolev(opt.m, n)
    s = (n + 1) / 2
    if not 1 <= s <= opt.m:
        raise HypothesisError(f"the exact-constant bound needs 1 <= s=(n+1)/2 <= m (s={s}, m={opt.m})")
    hs = norm_homogeneous_hs(sample.g, s)
    W = norm_sobolev_parabolic(sample.f, opt.m)
    return _record("lemma5.1", sample, hs, {"W": W}, W, s=s,
                   passed=bool(hs <= W * (1 + opt.lemma51_tol)))


def _lemma52(sample: Sample, opt: LabOptions, n: int) -> dict:
    _require_low_dim(n)
    _require_sobolev(opt.m, n)
    n2 = _check_l2(sample, opt)
    W = norm_sobolev_parabolic(sample.f, opt.m)
    gi = norm_linf(sample.g)
    if W == 0:
        return _record("lemma5.2", sample, gi, {"W": 0.0, "g_linf": gi, "g_l2": n2}, 1.0)
    lg = math.log(math.e + (W + gi) / W) ** 0.5
    return _record("lemma5.2", sample, gi, {"W": W, "g_linf": gi, "g_l2": n2, "sqrt_log": lg},
                   1.0 + W * lg)


def _embed_params(opt: LabOptions, n: int) -> tuple:
    if opt.embed is not None:
        s, p, q, t, r = map(float, opt.embed)
    else:
        s, p, q, t, r = 2.0 * opt.m, 2.0, math.inf, _eta(opt.m, n), math.inf
    hd = n + 2
    lhs = s - hd / p
    rhs = t - hd / r
    if abs(lhs - rhs) > 1e-12 or p > r:
        raise HypothesisError(f"Besov embedding needs s-(n+2)/p = t-(n+2)/r and p <= r; got "
                              f"(s,p,q,t,r)=({s},{p},{q},{t},{r})")
    return s, p, q, t, r


def _embed212(sample: Sample, opt: LabOptions, n: int) -> dict:
    s, p, q, t, r = _embed_params(opt, n)
    big = norm_besov(sample.f, s, p, q, mode="inhomogeneous")
    small = norm_besov(sample.f, t, r, q, mode="inhomogeneous")
    return _record("embed2.12", sample, small, {"besov_source": big}, big,
                   params={"s": s, "p": p, "q": q, "t": t, "r": r})


def _embed213(sample: Sample, opt: LabOptions, n: int) -> dict:
    _require_sobolev(opt.m, n)
    eta = _eta(opt.m, n)
    W = norm_sobolev_parabolic(sample.f, opt.m)
    b_mid = norm_besov(sample.f, 2.0 * opt.m, 2.0, math.inf, mode="inhomogeneous")
    b_top = norm_besov(sample.f, eta, math.inf, math.inf, mode="inhomogeneous")
    return _record("embed2.13", sample, b_top, {"W": W, "besov_2m_2_inf": b_mid}, W,
                   prop_ratio=float(_ratio(b_mid, W)), thm_ratio=float(_ratio(b_top, b_mid)),
                   eta=eta)


def _bernstein(sample: Sample, opt: LabOptions, n: int) -> dict:
    g = sample.g
    grid = g.grid
    iso = Grid(grid.dims, grid.box, Anisotropy.isotropic(grid.ndim), grid.periodic)
    gi = Field(iso, mean_subtract(g).values)
    d = lp_decompose(gi, build_symbol_bank(iso, mode="homogeneous"))
    s = (n + 1) / 2
    best, per_j = 0.0, {}
    for j in d.js:
        if j < 1:
            continue
        b = d.blocks[j]
        l2 = norm_lp(b, 2)
        if l2 == 0:
            continue
        per_j[j] = norm_linf(b) / (2.0 ** (s * j) * l2)
        best = max(best, per_j[j])
    if not per_j:
        raise ConfigurationError("the isotropic bank resolves no block with j >= 1")
    return _record("bernstein", sample, best, {}, 1.0, per_j={str(k): v for k, v in per_j.items()})


_EVAL = {
    "thm1.1": _thm11,
    "eqIM": _eqim,
    "thm1.7": _thm17,
    "lemma3.1": _lemma31,
    "lemma3.2": _lemma32,
    "mt2ato": _mt2ato,
    "lemma5.1": _lemma51,
    "lemma5.2": _lemma52,
    "embed2.12": _embed212,
    "embed2.13": _embed213,
    "bernstein": _bernstein,
}


def _as_sample(g, f) -> Sample:
    if isinstance(g, Sample):
        return g
    if f is None:
        raise ConfigurationError("pass a Sample or both g and f")
    if isinstance(f, Field):
        f = VectorField([f])
    return Sample(g, f, {})


def eval_inequality(id_: str, g, f=None, options: LabOptions | None = None) -> dict:
    """Record for inequality ``id_`` on one ``(g, f)`` pair.

    ``g`` may also be a :class:`Sample` (then ``f`` is omitted).  ``thm1.4``
    expects a bounded-domain sample and runs the extension pipeline
    (see :mod:`parabolic_lp.lab.domain`).
    """
    options = options or LabOptions()
    if id_ == "thm1.4":
        from .domain import eval_theorem14
        return eval_theorem14(g, options)
    if id_ not in _EVAL:
        raise ConfigurationError(f"unknown inequality id {id_!r}; choose from {', '.join(IDS)}")
    sample = _as_sample(g, f)
    n = sample.grid.ndim - 1
    return _EVAL[id_](sample, options, n)


# --- the dyadic cut ---------------------------------------------------------


def step1_bound_curve(S: float, F: float, gamma: float, N_max: int = 64) -> np.ndarray:
    """``(2N+1)^{1/2} F + 2^{-gamma N} S`` for ``N = 1..N_max``."""
    N = np.arange(1, N_max + 1)
    return np.sqrt(2 * N + 1) * F + 2.0 ** (-gamma * N) * S


def cut_inputs(f, gamma: float) -> tuple[float, float]:
    """``(S, F) = (||f_+|| + ||f_-||, ||f||_{F^0_{inf,2}})`` for a field (max over components)."""
    if isinstance(f, Field):
        f = VectorField([f])
    S = F = 0.0
    for c0, lp in _lp_components(f):
        S = max(S, norm_fplus(c0, gamma, 2.0, lp=lp) + norm_fminus(c0, -gamma, 2.0, lp=lp))
        F = max(F, norm_triebel_infty_q(c0, 2.0, lp=lp))
    return S, F


def _continuous_minimizer(S: float, F: float, gamma: float, N_max: int) -> float:
    """Stationary point of ``(2N+1)^{1/2} F + 2^{-gamma N} S`` on ``[1, N_max]``."""
    k = gamma * math.log(2.0)

    def slope(N):
        return F / math.sqrt(2 * N + 1) - k * 2.0 ** (-gamma * N) * S

    if slope(1.0) >= 0:
        return 1.0
    if slope(float(N_max)) <= 0:
        return float(N_max)
    return float(brentq(slope, 1.0, float(N_max), xtol=1e-12))


def optimize_dyadic_cut(f, gamma: float, N_max: int = 64) -> dict:
    """Analytic cut ``N(beta)`` versus the brute-force minimizer of the truncation bound.

    ``f`` is a field (its truncation norms are computed) or a pair ``(S, F)``
    with ``S = ||f_+|| + ||f_-||`` and ``F = ||f||_{F^0_{inf,2}}``.  The bound is
    ``(2N+1)^{1/2} F + 2^{-gamma N} S``.  The analytic rule takes ``N = 1`` when
    ``S <= 2^gamma F``; otherwise the integer ``N = log_{2^gamma}(beta S / F) - 1/2``
    reached by the ``beta in [1, 2^gamma)``, i.e. ``N = ceil(log_{2^gamma}(S/F) - 1/2)``.

    The rule balances the tail against ``F`` rather than minimizing the bound:
    the stationary point ``N_continuous`` solves
    ``2^{gamma N} = gamma log(2) (2N+1)^{1/2} S / F``, and for large ``S/F`` it
    sits several units above ``N(beta)``, so ``agree`` (``|gap| <= 1``) is a
    finding to report, not an invariant.
    """
    if isinstance(f, (Field, VectorField)):
        S, F = cut_inputs(f, gamma)
    else:
        S, F = map(float, f)
    if not 0 < gamma <= 1:
        raise ConfigurationError("gamma must lie in (0, 1]")
    if F <= 0 or S < 0:
        raise ConfigurationError("need F > 0 and S >= 0")
    curve = step1_bound_curve(S, F, gamma, N_max)
    brute = int(np.argmin(curve)) + 1
    if S <= 2.0 ** gamma * F:
        n_an, beta, branch = 1, None, "N=1"
    else:
        x = math.log(S / F) / (gamma * math.log(2.0)) - 0.5
        n_an = int(math.ceil(x - 1e-12))
        beta = 2.0 ** (gamma * (n_an - x))
        branch = "N(beta)"
    diffs = np.diff(curve)
    unimodal = bool(np.all(np.diff(np.sign(diffs[diffs != 0])) >= 0)) if diffs.size else True
    return {"N_analytic": n_an, "beta": beta, "branch": branch, "N_brute": brute,
            "N_continuous": _continuous_minimizer(S, F, gamma, N_max),
            "agree": abs(n_an - brute) <= 1, "gap": brute - n_an, "unimodal": unimodal,
            "curve": curve.tolist()}


# --- the splitting inequality -----------------------------------------------


def check_split_inequality(x: float, y: float, C: float = 1.0) -> dict:
    """Branch of the splitting inequality at ``(x, y)`` with constant ``C``.

    ``x (log(e + y/x))^{1/2} <= C (1 + x (log(e+y))^{1/2})`` for ``0 < x <= 1``
    and ``<= C x (log(e+y))^{1/2}`` for ``x > 1``.  Returns ``holds``, the
    ``slack`` ``C rhs - lhs`` and the minimal constant ``C_min`` of the branch.
    """
    if not x > 0 or y < 0:
        raise ConfigurationError("need x > 0 and y >= 0")
    lhs = x * math.sqrt(math.log(math.e + y / x))
    if x <= 1:
        rhs, branch = 1 + x * math.sqrt(math.log(math.e + y)), "x<=1"
    else:
        rhs, branch = x * math.sqrt(math.log(math.e + y)), "x>1"
    return {"holds": bool(lhs <= C * rhs), "slack": C * rhs - lhs, "C_min": lhs / rhs,
            "lhs": lhs, "rhs": rhs, "branch": branch}


def split_inequality_scan(nx: int = 400, ny: int = 400, x_max: float = 10.0,
                          y_max: float = 1e6) -> dict:
    """Grid scan of the minimal constant over ``(0, x_max] x [0, y_max]`` (log-spaced)."""
    xs = np.geomspace(1e-6, x_max, nx)
    ys = np.concatenate([[0.0], np.geomspace(1e-6, y_max, ny - 1)])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    lhs = X * np.sqrt(np.log(np.e + Y / X))
    low = 1 + X * np.sqrt(np.log(np.e + Y))
    high = X * np.sqrt(np.log(np.e + Y))
    C = np.where(X <= 1, lhs / low, lhs / high)
    k = np.unravel_index(int(np.argmax(C)), C.shape)
    return {"C_global": float(C.max()), "argmax": [float(X[k]), float(Y[k])],
            "C_x_le_1": float(C[xs <= 1].max()), "C_x_gt_1": float(C[xs > 1].max()),
            "grid": [nx, ny], "x_range": [float(xs[0]), x_max], "y_range": [0.0, y_max]}


def _self_bound_constant(X: float) -> float:
    """Minimal ``C`` with ``X <= C (1 + (log(e + 1 + X))^{1/2})``."""
    return X / (1.0 + math.sqrt(math.log(math.e + 1.0 + X)))


def case_split_theorem17(g, f=None, m: int = 1, n: int | None = None,
                         C_fit: float | None = None, l2_tol: float = 1e-12) -> dict:
    """Case analysis behind the log comparison.

    Case 1 (``||f||_W <= 1``): ``X = A = ||g||_inf``.  Case 2 (``||f||_W > 1``):
    ``X = B = ||g||_inf / ||f||_W``.  Reports the minimal ``C`` for the
    self-referential bound ``X <= C(1 + (log(e+1+X))^{1/2})`` and the final
    comparison with ``C_fit`` (if given) or the per-sample minimal constant.
    """
    sample = _as_sample(g, f)
    if n is not None and n != sample.grid.ndim - 1:
        raise ConfigurationError(f"n={n} does not match the grid dimension")
    n = sample.grid.ndim - 1
    _require_low_dim(n)
    _require_sobolev(m, n)
    opt = LabOptions(m=m, l2_tol=l2_tol)
    _check_l2(sample, opt)
    rec = _thm17(sample, opt, n)
    W, gi = rec["rhs"]["W"], rec["rhs"]["g_linf"]
    if W <= 1.0:
        case, X = 1, gi
    else:
        case, X = 2, gi / W
    c_self = _self_bound_constant(X)
    out = {"case": case, "A" if case == 1 else "B": X, "C_self": c_self,
           "lhs": rec["lhs"], "rhs_shape": rec["rhs_shape"], "C_sample": rec["C_sample"],
           "W": W, "g_linf": gi}
    if C_fit is not None:
        out["holds_with_C_fit"] = bool(rec["lhs"] <= C_fit * rec["rhs_shape"] * (1 + 1e-12))
    return out


# --- reports and fitted constants --------------------------------------------


@dataclass
class InequalityReport:
    id: str
    per_sample: list
    grid: dict
    seed: int
    config_echo: dict = field(default_factory=dict)
    runtime: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def constants(self) -> np.ndarray:
        return np.array([r["C_sample"] for r in self.per_sample], dtype=float)

    @property
    def summary(self) -> dict:
        return fit_constant(self.constants)

    def as_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "id": self.id, "config_echo": self.config_echo,
                "grid": self.grid, "seed": self.seed, "per_sample": self.per_sample,
                "summary": self.summary, "runtime": self.runtime, **self.extra}


def fit_constant(constants, reference=None) -> dict:
    """Max / median / quantiles of per-sample constants.

    ``constants`` is an array of ``C_sample`` values or an
    :class:`InequalityReport`.  With ``reference`` (another array or report),
    adds the relative drift of ``C_max`` against it.
    """
    if isinstance(constants, InequalityReport):
        constants = constants.constants
    c = np.asarray(constants, dtype=float)
    if c.size == 0:
        raise ConfigurationError("no samples to fit a constant to")
    finite = c[np.isfinite(c)]
    q = np.quantile(finite, [0.05, 0.25, 0.5, 0.75, 0.95]) if finite.size else [math.nan] * 5
    out = {"n": int(c.size), "C_max": float(np.max(c)), "C_median": float(np.median(c)),
           "C_min": float(np.min(c)), "spread": float(np.max(c) - np.min(c)),
           "quantiles": {k: float(v) for k, v in zip(("q05", "q25", "q50", "q75", "q95"), q)},
           "finite": bool(np.all(np.isfinite(c)))}
    if reference is not None:
        ref = fit_constant(reference)
        out["drift_vs_reference"] = relative_drift(out["C_max"], ref["C_max"])
    return out


def relative_drift(value: float, reference: float) -> float:
    """``|value - reference| / |reference|`` (0 when both vanish)."""
    if reference == 0:
        return 0.0 if value == 0 else math.inf
    return abs(value - reference) / abs(reference)
