"""Family evaluation and stability sweeps (resolution doubling, parabolic dilation)."""
from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from ..exceptions import ConfigurationError
from ..field import Grid
from .domain import DomainFamily, eval_theorem14, generate_domain
from .families import FunctionFamily, generate
from .inequalities import InequalityReport, LabOptions, eval_inequality, fit_constant, relative_drift

__all__ = ["evaluate_family", "resolution_sweep", "dilation_sweep", "held_out_check",
           "ratio_interval", "DEFAULT_MUS"]

DEFAULT_MUS = (0.25, 0.5, 1.0, 2.0, 4.0)

# inequalities stated under ||g||_2 <= 1
_L2_IDS = ("thm1.7", "lemma5.2")


def _family_for(id_: str, family):
    if id_ in _L2_IDS and isinstance(family, FunctionFamily) and not family.normalize_l2:
        return replace(family, normalize_l2=True)
    return family


def _indices(family, indices):
    return range(family.count) if indices is None else indices


def evaluate_family(id_: str, family, grid: Grid, options: LabOptions | None = None,
                    indices=None, pipeline: bool = True) -> InequalityReport:
    """Evaluates inequality ``id_`` on every sample of ``family`` over ``grid``.

    ``thm1.4`` takes a :class:`DomainFamily` on a closure grid of ``Omega_T``;
    every other id takes a :class:`FunctionFamily` on a periodic grid.  Families
    for the ``||g||_2 <= 1`` statements are normalized automatically.
    """
    options = options or LabOptions()
    t0 = time.perf_counter()
    if id_ == "thm1.4":
        if not isinstance(family, DomainFamily):
            raise ConfigurationError("thm1.4 needs a DomainFamily")
        recs = [eval_theorem14(generate_domain(family, grid, [i])[0], options, pipeline=pipeline)
                for i in _indices(family, indices)]
    else:
        if not isinstance(family, FunctionFamily):
            raise ConfigurationError(f"{id_} needs a FunctionFamily")
        family = _family_for(id_, family)
        # one sample at a time keeps the peak memory at a few fields
        recs = [eval_inequality(id_, generate(family, grid, [i])[0], options=options)
                for i in _indices(family, indices)]
    return InequalityReport(id=id_, per_sample=recs, grid=grid.header(), seed=family.seed,
                            config_echo={"family": family.as_dict(), "options": options.as_dict()},
                            runtime=time.perf_counter() - t0)


def _value(report: InequalityReport, key: str | None) -> np.ndarray:
    if key is None:
        return report.constants
    return np.array([r[key] for r in report.per_sample], dtype=float)


def ratio_interval(values) -> float:
    """Smallest ``K >= 1`` with every value in ``[1/K, K]``."""
    v = np.asarray(values, dtype=float)
    v = v[v > 0]
    if v.size == 0:
        raise ConfigurationError("no positive ratios")
    return float(max(v.max(), 1.0 / v.min(), 1.0))


def resolution_sweep(id_: str, family, grid: Grid, factors=(1, 2), options=None,
                     key: str | None = None, pipeline: bool = False) -> dict:
    """``C_max`` (or the max of record field ``key``) at each refinement factor and the
    relative drift against the coarsest grid."""
    out = {"id": id_, "factors": list(factors), "C_max": [], "K": [], "reports": []}
    for fac in factors:
        g = grid if fac == 1 else grid.refine(fac)
        rep = evaluate_family(id_, family, g, options, pipeline=pipeline)
        vals = _value(rep, key)
        out["reports"].append(rep)
        out["C_max"].append(float(vals.max()))
        out["K"].append(ratio_interval(vals) if np.any(vals > 0) else float("nan"))
    ref = out["C_max"][0]
    out["drift"] = [relative_drift(c, ref) for c in out["C_max"]]
    out["max_drift"] = max(out["drift"])
    return out


def dilation_sweep(id_: str, family, grid: Grid, mus=DEFAULT_MUS, options=None) -> dict:
    """``C_max`` on ``grid.dilate(mu)`` for each ``mu``.

    The family is dilation covariant, so the samples on ``grid.dilate(mu)`` are
    ``g(mu^a .)``.  ``drift_factor`` is ``max_mu max(C(mu)/C(1), C(1)/C(mu))``.
    """
    if 1.0 not in [float(m) for m in mus]:
        mus = tuple(mus) + (1.0,)
    out = {"id": id_, "mus": [float(m) for m in mus], "C_max": [], "summaries": []}
    for mu in mus:
        rep = evaluate_family(id_, family, grid.dilate(float(mu)), options)
        s = rep.summary
        out["C_max"].append(s["C_max"])
        out["summaries"].append(s)
    base = out["C_max"][out["mus"].index(1.0)]
    ratios = [c / base if base > 0 else float("nan") for c in out["C_max"]]
    out["ratio_to_mu1"] = ratios
    out["drift_factor"] = float(max(max(r, 1.0 / r) for r in ratios))
    out["max_over_min"] = float(max(out["C_max"]) / min(out["C_max"]))
    return out


def held_out_check(id_: str, family, grid: Grid, C_max: float, margin: float = 1.5,
                   count: int = 50, seed_offset: int = 1000, options=None) -> dict:
    """Re-generated family (seed shifted by ``seed_offset``) against ``margin * C_max``."""
    held = replace(family, seed=family.seed + seed_offset, count=count)
    rep = evaluate_family(id_, held, grid, options)
    worst = float(rep.constants.max())
    return {"C_bound": margin * C_max, "C_held_out_max": worst,
            "passed": bool(worst <= margin * C_max), "count": count, "seed": held.seed}
