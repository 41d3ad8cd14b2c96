import json
import math
import os

import numpy as np
import pytest
import scipy.stats

from skfluct import harness
from skfluct.stats import MomentSummary, format_g17, ks_distance_normal, ks_two_sample


def test_replica_streams_independent_and_deterministic():
    a = harness.replica_rng(5, 0).standard_normal(4)
    b = harness.replica_rng(5, 0).standard_normal(4)
    c = harness.replica_rng(5, 1).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_run_twice_byte_identical(tmp_path):
    cfg = harness.ExperimentConfig(kind="clt", n=9, beta=0.4, rho=1.0, alpha=0.5,
                                   replicas=40, master_seed=3, out_dir=str(tmp_path))
    r1 = harness.run_experiment(cfg)
    r2 = harness.run_experiment(cfg)
    p1 = harness.emit_report(r1, str(tmp_path / "a"))
    p2 = harness.emit_report(r2, str(tmp_path / "b"))
    for q1, q2 in zip(p1, p2):
        assert open(q1, "rb").read() == open(q2, "rb").read()


def test_thread_count_does_not_change_results():
    kwargs = dict(kind="clt", n=9, beta=0.4, rho=1.0, alpha=0.5, replicas=30, master_seed=9)
    r1 = harness.run_experiment(harness.ExperimentConfig(threads=1, **kwargs))
    r4 = harness.run_experiment(harness.ExperimentConfig(threads=4, **kwargs))
    np.testing.assert_array_equal(r1.raw, r4.raw)


def test_beta_zero_centered_statistic_vanishes():
    for alpha in (0.5, 0.25, 0.1):
        cfg = harness.ExperimentConfig(kind="clt", n=8, beta=0.0, rho=1.0, alpha=alpha,
                                       replicas=6, master_seed=1)
        r = harness.run_experiment(cfg)
        assert np.abs(r.centered).max() < 1e-9


def test_single_replica_variance_is_nan():
    cfg = harness.ExperimentConfig(kind="clt", n=8, beta=0.3, rho=1.0, alpha=0.5,
                                   replicas=1, master_seed=1)
    emp = harness.run_experiment(cfg).empirical()
    assert math.isnan(emp.variance)
    assert math.isnan(emp.se_mean)


def test_validation_errors():
    with pytest.raises(ValueError):
        harness.ExperimentConfig(kind="clt", beta=1.2, alpha=0.5).validate()
    with pytest.raises(ValueError):
        harness.ExperimentConfig(kind="clt", beta=0.5, alpha=0.1).validate()  # above beta0
    with pytest.raises(ValueError):
        harness.ExperimentConfig(kind="nope").validate()
    with pytest.raises(ValueError):
        harness.ExperimentConfig(kind="clt", replicas=0).validate()
    with pytest.raises(ValueError):
        harness.ExperimentConfig(kind="bipartite").validate()
    with pytest.raises(ValueError):
        harness.ExperimentConfig(kind="clt", n=30).validate()


def test_csv_layout(tmp_path):
    cfg = harness.ExperimentConfig(kind="clt", n=8, beta=0.3, rho=1.0, alpha=0.5,
                                   replicas=7, master_seed=2)
    result = harness.run_experiment(cfg)
    csv_path, json_path = harness.emit_report(result, str(tmp_path))
    lines = open(csv_path).read().strip().split("\n")
    assert lines[0] == "replica_index,raw_value,centered_value"
    assert len(lines) == 8
    first = lines[1].split(",")
    assert int(first[0]) == 0
    assert float(first[1]) == result.raw[0]


def test_json_round_trip_exact(tmp_path):
    cfg = harness.ExperimentConfig(kind="clt", n=8, beta=0.3, rho=1.0, alpha=0.5,
                                   replicas=25, master_seed=2)
    result = harness.run_experiment(cfg)
    _, json_path = harness.emit_report(result, str(tmp_path))
    summary = harness.load_summary(json_path)
    emp = result.empirical()
    assert summary["empirical"]["mean"] == emp.mean
    assert summary["empirical"]["variance"] == emp.variance
    assert summary["empirical"]["se_var"] == emp.se_var
    assert summary["predicted"]["mean"] == result.predicted_mean
    assert summary["predicted"]["variance"] == result.predicted_variance
    assert summary["predicted"]["regime"] == "sub_critical"
    assert summary["seed"] == 2
    assert summary["config_echo"]["n"] == 8
    assert "version" in summary


def test_format_g17_round_trip():
    rng = np.random.default_rng(0)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-8, 8, 200):
        assert float(format_g17(float(x))) == float(x)


def test_moment_summary_formulas():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    m = MomentSummary.from_samples(x)
    assert m.mean == pytest.approx(3.5)
    assert m.variance == pytest.approx(np.var(x, ddof=1))
    assert m.se_mean == pytest.approx(math.sqrt(m.variance / 4))
    assert m.se_var == pytest.approx(m.variance * math.sqrt(2 / 3))


def test_ks_helpers_against_scipy():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(400) * 1.3 + 0.2
    got = ks_distance_normal(x, 0.2, 1.3)
    want = scipy.stats.kstest(x, "norm", args=(0.2, 1.3)).statistic
    assert got == pytest.approx(want, abs=1e-12)
    y = rng.standard_normal(300)
    z = rng.standard_normal(500) + 0.1
    assert ks_two_sample(y, z) == pytest.approx(scipy.stats.ks_2samp(y, z).statistic, abs=1e-12)


def test_ks_pvalue_uniformity_self_check():
    # feed the harness statistics a known normal generator: p-values of the
    # KS test should look uniform over repeated runs
    rng = np.random.default_rng(2)
    pvals = []
    for _ in range(200):
        x = rng.standard_normal(100)
        pvals.append(scipy.stats.kstest(x, "norm").pvalue)
    pvals = np.array(pvals)
    assert 0.35 < pvals.mean() < 0.65
    assert scipy.stats.kstest(pvals, "uniform").pvalue > 1e-3


def test_empty_report_guard(tmp_path):
    cfg = harness.ExperimentConfig(kind="clt", n=8, beta=0.3, rho=1.0, alpha=0.5,
                                   replicas=1, master_seed=2)
    result = harness.run_experiment(cfg)
    result.raw = np.array([])
    result.centered = np.array([])
    with pytest.raises(ValueError):
        harness.emit_report(result, str(tmp_path))


def test_atomic_write_no_leftover_temp(tmp_path):
    cfg = harness.ExperimentConfig(kind="clt", n=8, beta=0.3, rho=1.0, alpha=0.5,
                                   replicas=3, master_seed=2)
    result = harness.run_experiment(cfg)
    harness.emit_report(result, str(tmp_path))
    names = os.listdir(tmp_path)
    assert not [n for n in names if n.startswith(".tmp-")]
    assert sorted(names) == ["clt_replicas.csv", "clt_summary.json"]
