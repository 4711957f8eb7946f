import json
import math

import numpy as np
import pytest

from helpers import std_grid
from parabolic_lp.exceptions import ConfigurationError, HypothesisError
from parabolic_lp.field import Field, Grid, VectorField, gradient
from parabolic_lp.geometry import SamplerPolicy
from parabolic_lp.lab.families import FunctionFamily, Sample, generate
from parabolic_lp.lab.inequalities import (IDS, InequalityReport, LabOptions, c_gamma,
                                           case_split_theorem17, check_split_inequality,
                                           eval_inequality, fit_constant, log_plus, mt2ato_terms,
                                           optimize_dyadic_cut, relative_drift,
                                           split_inequality_scan, step1_bound_curve)
from parabolic_lp.lab.report import dump_json
from parabolic_lp.littlewood_paley import build_symbol_bank, lp_decompose

FAST = LabOptions(policy=SamplerPolicy(n_random=32))
PERIODIC_IDS = [i for i in IDS if i != "thm1.4"]


@pytest.fixture(scope="module")
def grid():
    return std_grid(128)


@pytest.fixture(scope="module")
def samples(grid):
    return generate(FunctionFamily(count=3, normalize_l2=True), grid)


def test_elementary_helpers():
    assert c_gamma(0.5) == 1.0
    assert c_gamma(0.25) == pytest.approx(1 / math.sqrt(math.sqrt(2) - 1))
    assert log_plus(0.5) == 0.0 and log_plus(math.e) == 1.0 and log_plus(0.0) == 0.0
    with pytest.raises(ConfigurationError):
        c_gamma(0)


@pytest.mark.parametrize("id_", PERIODIC_IDS)
def test_record_structure(id_, samples):
    rec = eval_inequality(id_, samples[0], options=FAST)
    assert rec["id"] == id_
    assert rec["lhs"] <= rec["C_sample"] * rec["rhs_shape"] * (1 + 1e-12)
    assert np.isfinite(rec["C_sample"])
    assert rec["sample"]["index"] == 0
    json.dumps(rec)


@pytest.mark.parametrize("id_", ["thm1.1", "eqIM", "lemma3.2", "lemma5.1", "embed2.13"])
def test_zero_field_gives_zero_constant(id_, grid):
    z = Field.zeros(grid)
    rec = eval_inequality(id_, z, gradient(z), options=FAST)
    assert rec["lhs"] == 0.0 and rec["C_sample"] == 0.0


def test_unknown_id(samples):
    with pytest.raises(ConfigurationError):
        eval_inequality("thm9.9", samples[0])
    with pytest.raises(ConfigurationError):
        eval_inequality("thm1.1", samples[0].g)


def test_sobolev_hypothesis_rejected():
    g3 = Grid.regular((8, 8, 8), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    z = Field.zeros(g3)
    with pytest.raises(HypothesisError, match="2m > \\(n\\+2\\)/2"):
        eval_inequality("thm1.1", z, gradient(z))
    # m = 2 satisfies it
    eval_inequality("eqIM", z, gradient(z), options=LabOptions(m=2, policy=SamplerPolicy(n_random=8)))


def test_l2_hypothesis_rejected(grid):
    (s,) = generate(FunctionFamily(count=1, amplitude=(40.0, 50.0)), grid)
    assert s.g.l2_physical() > 1
    for id_ in ("thm1.7", "lemma5.2"):
        with pytest.raises(HypothesisError, match="L?\\|\\|g\\|\\|_2"):
            eval_inequality(id_, s)


def test_embedding_scaling_relation_enforced(samples):
    bad = LabOptions(embed=(2.0, 2.0, math.inf, 1.5, math.inf))
    with pytest.raises(HypothesisError):
        eval_inequality("embed2.12", samples[0], options=bad)
    ok = LabOptions(embed=(2.0, 2.0, 2.0, 1.25, 4.0))   # 2 - 3/2 = 1.25 - 3/4
    rec = eval_inequality("embed2.12", samples[0], options=ok)
    assert rec["params"]["r"] == 4.0


# --- the explicit truncation bound ---------------------------------------

def _mt2ato_brute(c, gamma, N):
    d = lp_decompose(c, build_symbol_bank(c.grid))
    B = {j: np.abs(d.blocks[j].values) for j in d.js}
    lhs = np.max(sum(B.values()))
    mid = np.max(np.sqrt(sum(B[j] ** 2 for j in d.js if abs(j) <= N)))
    fp = np.max(np.sqrt(sum((2 ** (gamma * j) * B[j]) ** 2 for j in d.js if j >= 1)))
    fm = np.max(np.sqrt(sum((2 ** (-gamma * j) * B[j]) ** 2 for j in d.js if j <= -1)))
    return lhs, math.sqrt(2 * N + 1) * mid + c_gamma(gamma) * 2 ** (-gamma * N) * (fp + fm)


def test_truncation_terms_match_direct_sums(samples):
    c = samples[1].f[0]
    c = Field(c.grid, c.values - c.values.mean())
    d = lp_decompose(c, build_symbol_bank(c.grid))
    for gamma in (0.25, 0.75):
        for N in (1, 3):
            t = mt2ato_terms(c, d, gamma, N)
            lhs, bound = _mt2ato_brute(c, gamma, N)
            assert t["lhs"] == pytest.approx(lhs, rel=1e-12)
            assert t["bound"] == pytest.approx(bound, rel=1e-12)


def test_truncation_bound_holds(samples):
    for s in samples:
        rec = eval_inequality("mt2ato", s)
        assert rec["passed"]
        assert rec["rhs"]["checks"] == 2 * 3 * 16
        assert rec["C_gamma"]["0.5"] == 1.0


# --- exact-constant H^s bound -------------------------------------------

def test_exact_h1_bound_holds_on_band_limited(grid):
    fam = FunctionFamily(kind="band-limited-random", count=5)
    for s in generate(fam, grid):
        assert eval_inequality("lemma5.1", s)["passed"]


def test_exact_h1_bound_low_frequency_counterexample():
    # ||grad g||_2 combines both components, the max-component Sobolev norm does not:
    # at low frequency the derivative terms are too small to make up the sqrt(2).
    g = Grid.regular((64, 64), (0.0, 0.0), (64.0, 64.0))
    x, t = g.mesh()
    k = 2 * np.pi / 64
    pot = Field(g, np.sin(k * x) + np.sin(k * t))
    rec = eval_inequality("lemma5.1", pot, gradient(pot))
    assert not rec["passed"]
    assert rec["lhs"] / rec["rhs"]["W"] == pytest.approx(math.sqrt(2) / (1 + k + k ** 2), rel=1e-10)


# --- the dyadic cut -----------------------------------------------------------

def test_cut_n1_branch():
    r = optimize_dyadic_cut((1.1, 1.0), gamma=0.5)
    assert r["branch"] == "N=1" and r["N_analytic"] == 1 and r["agree"]


def test_cut_synthetic_example():
    r = optimize_dyadic_cut((8.0, 1.0), gamma=1.0)
    assert r["N_analytic"] == 3
    assert 1 <= r["beta"] < 2
    assert abs(r["N_brute"] - 3) <= 1
    curve = step1_bound_curve(8.0, 1.0, 1.0)
    assert r["N_brute"] == int(np.argmin(curve)) + 1


def test_cut_brute_force_brackets_stationary_point():
    rng = np.random.default_rng(11)
    for _ in range(200):
        S = 10 ** rng.uniform(-2, 8)
        F = 10 ** rng.uniform(-2, 2)
        gamma = rng.uniform(0.05, 1.0)
        r = optimize_dyadic_cut((S, F), gamma)
        if r["unimodal"]:
            Nc = r["N_continuous"]
            assert math.floor(Nc) <= r["N_brute"] <= math.ceil(Nc)


def test_cut_curve_can_have_two_local_minima():
    # the second derivative -F (2N+1)^{-3/2} + (gamma log 2)^2 2^{-gamma N} S changes sign
    r = optimize_dyadic_cut((4.163411214361842, 1.0), 0.20778599076699056)
    c = np.array(r["curve"])
    assert not r["unimodal"]
    assert c[0] < c[1] and c[3] < c[2] and c[3] < c[4]
    assert r["N_brute"] == 1


def test_cut_rule_agrees_on_n1_branch():
    rng = np.random.default_rng(12)
    for _ in range(100):
        gamma = rng.uniform(0.05, 1.0)
        F = 10 ** rng.uniform(-2, 2)
        S = F * rng.uniform(0, 2 ** gamma)
        r = optimize_dyadic_cut((S, F), gamma)
        assert r["N_analytic"] == r["N_brute"] == 1


def test_cut_rule_lags_minimizer_at_large_ratio():
    # the rule balances the tail against F instead of minimizing the bound
    r = optimize_dyadic_cut((1e4, 1.0), 0.5)
    assert r["N_brute"] - r["N_analytic"] > 1


def test_cut_validation():
    with pytest.raises(ConfigurationError):
        optimize_dyadic_cut((1.0, 0.0), 0.5)
    with pytest.raises(ConfigurationError):
        optimize_dyadic_cut((1.0, 1.0), 1.5)


def test_cut_from_field(samples):
    r = optimize_dyadic_cut(samples[0].f, 0.25)
    assert r["agree"]


# --- the splitting inequality ---------------------------------------------------

def test_split_unit_point():
    r = check_split_inequality(1.0, 0.0)
    assert r["lhs"] == pytest.approx(1.0)
    assert r["C_min"] == pytest.approx(0.5)
    assert check_split_inequality(1.0, 0.0, C=0.5)["holds"]
    assert not check_split_inequality(1.0, 0.0, C=0.49)["holds"]


def test_split_large_x_forces_one():
    r = check_split_inequality(1e6, 0.0)
    assert r["branch"] == "x>1" and r["C_min"] == pytest.approx(1.0, rel=1e-12)


def test_split_scan_matches_pointwise():
    scan = split_inequality_scan(nx=60, ny=60)
    assert np.isfinite(scan["C_global"]) and 0.5 <= scan["C_global"] <= 1.0 + 1e-12
    x, y = scan["argmax"]
    assert check_split_inequality(x, y)["C_min"] == pytest.approx(scan["C_global"], rel=1e-12)
    with pytest.raises(ConfigurationError):
        check_split_inequality(0.0, 1.0)


# --- case split -----------------------------------------------------------------

def test_case_split_zero(grid):
    z = Field.zeros(grid)
    r = case_split_theorem17(z, gradient(z))
    assert r["case"] == 1 and r["A"] == 0 and r["C_self"] == 0


def test_case_split_threshold():
    g = Grid.regular((64, 64), (0.0, 0.0), (2 * np.pi, 2 * np.pi))
    x, t = g.mesh()
    for amp in (0.01, 0.2):
        pot = Field(g, amp * np.sin(x))
        r = case_split_theorem17(pot, gradient(pot), C_fit=1.0)
        assert r["case"] == (1 if r["W"] <= 1 else 2)
        X = r["A"] if r["case"] == 1 else r["B"]
        assert X <= r["C_self"] * (1 + math.sqrt(math.log(math.e + 1 + X))) * (1 + 1e-12)
        assert "holds_with_C_fit" in r
        assert r["case"] == (1 if amp == 0.01 else 2)


# --- fitted constants -----------------------------------------------------------

def test_fit_constant():
    s = fit_constant([2.0, 2.0, 2.0])
    assert s["spread"] == 0 and s["C_max"] == 2.0
    z = fit_constant(np.zeros(4))
    assert z["C_max"] == 0 and z["finite"]
    with pytest.raises(ConfigurationError):
        fit_constant([])
    d = fit_constant([1.0, 1.2], reference=[1.0, 1.0])
    assert d["drift_vs_reference"] == pytest.approx(0.2)
    assert relative_drift(0.0, 0.0) == 0.0


def test_report_schema(samples):
    recs = [eval_inequality("thm1.1", s, options=FAST) for s in samples]
    rep = InequalityReport("thm1.1", recs, samples[0].grid.header(), 42)
    d = json.loads(dump_json(rep.as_dict()))
    assert d["schema_version"] == "1.0"
    assert d["summary"]["n"] == 3
    assert d["summary"]["C_max"] == max(r["C_sample"] for r in recs)
