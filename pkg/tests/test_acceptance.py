"""Acceptance gate: ten criteria, one pass/fail line each.

Every test drives the public experiment runners at their stated seeds,
tolerances and runtime budgets, then emits a single summary line.  Grid
refinement criteria compare a run against its doubled-grid twin with the
same floored relative drift the command line uses.
"""

import math

import numpy as np
import pytest

import freqbench.experiments as ex

BUDGET = 0.2


def report(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    print(line)
    assert ok, line


def metrics(result):
    return {r.metric: r.value for r in result.records}


def drift(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-3)


def worst_drift(ma, mb, prefixes):
    keys = {k for k in ma if k.startswith(prefixes)}
    keys |= {k for k in mb if k.startswith(prefixes)}
    worst = 0.0
    for k in sorted(keys):
        if k not in ma or k not in mb:
            return math.inf
        worst = max(worst, drift(ma[k], mb[k]))
    return worst


def run_kind(kind, **tweaks):
    cfg = ex.default_config(kind)
    for key, value in tweaks.items():
        setattr(cfg, key, value)
    return ex.run(cfg)


@pytest.fixture(scope="module")
def partition_run():
    return run_kind("partition")


@pytest.fixture(scope="module")
def paraproduct_run():
    return run_kind("paraproduct")


@pytest.fixture(scope="module")
def oracle_run():
    return run_kind("hs-oracle")


@pytest.fixture(scope="module")
def tiles_run():
    return run_kind("tiles")


@pytest.fixture(scope="module")
def forest_pair():
    return (run_kind("forest-bessel", grid_n=512),
            run_kind("forest-bessel", grid_n=1024))


@pytest.fixture(scope="module")
def decay_runs():
    return {p: run_kind("size-decay", decay_power=p) for p in (2, 4, 6)}


@pytest.fixture(scope="module")
def model_pairs():
    pairs = {}
    for label, triple, flag in (("conjugate", (5 / 3, 4.0, 20 / 3), False),
                                ("offbalance", (1.5, 4.0, 4.0), True)):
        pairs[label] = tuple(
            run_kind("model-sum", grid_n=n, exponents=triple,
                     allow_non_conjugate=flag)
            for n in (1024, 2048))
    return pairs


@pytest.fixture(scope="module")
def polygon_pairs():
    pairs = {}
    for label, triple, flag in (("conjugate", (5 / 3, 4.0, 20 / 3), False),
                                ("offbalance", (1.5, 4.0, 4.0), True)):
        pairs[label] = tuple(
            run_kind("polygon-scan", grid_n=n, exponents=triple,
                     allow_non_conjugate=flag)
            for n in (128, 256))
    return pairs


def test_criterion_01_partition_unity(partition_run):
    m = metrics(partition_run)
    ok = (m["partition_residual"] <= 1e-9 and m["hypotheses_ok"] == 1.0
          and partition_run.elapsed <= 60.0)
    report(1, ok,
           f"unity residual {m['partition_residual']:.2e} at 10^4 interior "
           f"points, cover hypotheses verified, {partition_run.elapsed:.1f}s")


def test_criterion_02_telescoping(paraproduct_run):
    m = metrics(paraproduct_run)
    trials = paraproduct_run.config.trials
    ok = (m["telescope_rel_max"] <= 1e-10 and trials == 100
          and paraproduct_run.config.grid_n == 1024
          and paraproduct_run.elapsed <= 60.0)
    report(2, ok,
           f"telescoping residual {m['telescope_rel_max']:.2e} over "
           f"{trials} seeded triples at N=1024, "
           f"{paraproduct_run.elapsed:.1f}s")


def test_criterion_03_transform_oracle(oracle_run):
    m = metrics(oracle_run)
    worst = max(m[f"rel_err_s{s}_max"] for s in (1, 2, 5))
    ok = worst <= 1e-3 and oracle_run.elapsed <= 120.0
    report(3, ok,
           f"fast transform vs principal-value quadrature, worst relative "
           f"L2 error {worst:.2e} over slopes 1,2,5, "
           f"{oracle_run.elapsed:.1f}s")


def test_criterion_04_product_identity(oracle_run):
    m = metrics(oracle_run)
    ok = m["identity_rel_max"] <= 1e-12
    report(4, ok,
           f"constant symbol reproduces the pointwise product to "
           f"{m['identity_rel_max']:.2e}")


def test_criterion_05_chord_overlap(polygon_pairs):
    m = metrics(polygon_pairs["conjugate"][0])
    vals = set()
    ok = True
    for i in (1, 2, 3):
        a, b = m[f"overlap_mu10_i{i}"], m[f"overlap_mu20_i{i}"]
        ok = ok and a == b
        vals |= {a, b}
    report(5, ok,
           f"chord interval overlap at depth 20 equals depth 10; "
           f"recorded value {sorted(vals)}")


def test_criterion_06_selection_audits(tiles_run):
    m = metrics(tiles_run)
    ok = (m["violations"] == 0 and m["triples_checked"] > 0
          and m["tiles_max"] <= 200 and tiles_run.config.trials == 100
          and tiles_run.elapsed <= 300.0)
    report(6, ok,
           f"100 seeded collections (max {int(m['tiles_max'])} tiles): "
           f"{int(m['violations'])} violations over "
           f"{int(m['triples_checked'])} ordered triples, "
           f"{tiles_run.elapsed:.1f}s")


def test_criterion_07_threshold_sweep_stability(forest_pair):
    coarse, fine = forest_pair
    ma, mb = metrics(coarse), metrics(fine)
    w_level = worst_drift(ma, mb, ("bessel_",))
    w_global = worst_drift(ma, mb, ("global_",))
    ok = (math.isfinite(ma["bessel_max"]) and ma["bessel_max"] <= 1.0
          and w_level <= BUDGET and w_global <= BUDGET)
    report(7, ok,
           f"threshold-sweep bound {ma['bessel_max']:.3e} with drift "
           f"{w_level:.2e} (set-measure ratio drift {w_global:.2e}) "
           f"under 512->1024 doubling")


def test_criterion_08_layered_decay(decay_runs):
    rates = {p: metrics(decay_runs[p])["decay_rate"] for p in (2, 4, 6)}
    ok = all(r > 0 for r in rates.values()) \
        and rates[2] <= rates[4] <= rates[6] \
        and all(decay_runs[p].passed for p in rates)
    report(8, ok,
           "layered size decay rates "
           + ", ".join(f"{p}: {rates[p]:.2f}" for p in (2, 4, 6))
           + " bits/layer, positive and non-decreasing")


def test_criterion_09_tree_audit_stability(model_pairs):
    coarse, fine = model_pairs["conjugate"]
    ma, mb = metrics(coarse), metrics(fine)
    w = worst_drift(ma, mb, ("audit_ratio_",))
    ok = (math.isfinite(ma["audit_ratio_max"]) and ma["audit_ratio_max"] >= 0
          and coarse.config.trials == 50 and w <= BUDGET)
    report(9, ok,
           f"50 tree audits at exponents (1, 0.7, 0.7): max ratio "
           f"{ma['audit_ratio_max']:.3e}, drift {w:.2e} under "
           f"1024->2048 doubling")


def test_criterion_10_norm_scan_stability(polygon_pairs, model_pairs):
    details = []
    ok = True
    for label in ("conjugate", "offbalance"):
        pa, pb = (metrics(r) for r in polygon_pairs[label])
        w_poly = worst_drift(pa, pb, ("ratio_",))
        fa, fb = (metrics(r) for r in model_pairs[label])
        w_form = worst_drift(fa, fb, ("form_ratio_",))
        ok = ok and w_poly <= BUDGET and w_form <= BUDGET \
            and math.isfinite(pa["ratio_max"]) \
            and math.isfinite(fa["form_ratio_max"])
        details.append(f"{label}: polygon max {pa['ratio_max']:.3f} "
                       f"drift {w_poly:.1e}, form max "
                       f"{fa['form_ratio_max']:.2e} drift {w_form:.1e}")
    report(10, ok, "50-trial norm scans stable under doubling ("
           + "; ".join(details) + ")")
