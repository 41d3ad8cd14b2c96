import itertools
import math

import numpy as np
import pytest

from skfluct import clusters, model
from skfluct import fixed_point as fp


def make_field(n, beta, rho, alpha, dist, seed):
    g = model.CompleteGraph(n)
    params = model.ModelParams(n=n, beta=beta, rho=rho, alpha=alpha)
    sample = model.sample_disorder(dist, g, np.random.default_rng(seed))
    return model.edge_weights(sample, params, dist), params


def test_counts_in_cluster_stats():
    dist = model.DisorderDistribution.gaussian()
    field, params = make_field(10, 0.5, 1.0, 0.25, dist, 0)
    cs = clusters.cluster_stats(field, params.h_hat, 4)
    assert cs.loop_counts[3] == 120  # C(10, 3) triangles
    assert cs.path_counts[1] == 45
    assert cs.path_counts[2] == 360


def test_rademacher_q_vanishes_identically():
    dist = model.DisorderDistribution.rademacher()
    field, params = make_field(12, 0.8, 1.0, 0.25, dist, 1)
    cs = clusters.cluster_stats(field, params.h_hat, 3)
    assert cs.q_stat == 0.0


def test_cluster_means_vanish():
    # E L = E P = E Q = 0 under the symmetric law: empirical check
    dist = model.DisorderDistribution.gaussian()
    g = model.CompleteGraph(12)
    params = model.ModelParams(n=12, beta=0.8, rho=1.0, alpha=0.25)
    zeta2 = dist.weight_moment(0.8 / math.sqrt(12), 2)
    rng = np.random.default_rng(3)
    iu, ju = g.edge_endpoints()
    w = np.zeros((800, 12, 12))
    for i in range(800):
        om = np.tanh(0.8 / math.sqrt(12) * dist.sample(rng, g.num_edges))
        w[i, iu, ju] = om
        w[i, ju, iu] = om
    stats = clusters.cluster_stats_batch(w, zeta2, params.h_hat, 4)
    for name, x in stats.items():
        se = x.std(ddof=1) / math.sqrt(len(x))
        assert abs(x.mean()) < 4.5 * se, name


def test_finite_size_variance_targets():
    # empirical Var within 4 SE of the exact finite-n identities
    dist = model.DisorderDistribution.gaussian()
    n, beta, m, reps = 14, 0.8, 4, 2500
    params = model.ModelParams(n=n, beta=beta, rho=1.0, alpha=0.25)
    zeta2 = dist.weight_moment(beta / math.sqrt(n), 2)
    g = model.CompleteGraph(n)
    iu, ju = g.edge_endpoints()
    rng = np.random.default_rng(4)
    w = np.zeros((reps, n, n))
    for i in range(reps):
        om = np.tanh(beta / math.sqrt(n) * dist.sample(rng, g.num_edges))
        w[i, iu, ju] = om
        w[i, ju, iu] = om
    stats = clusters.cluster_stats_batch(w, zeta2, params.h_hat, m)
    e4 = dist.weight_moment(beta / math.sqrt(n), 4)
    targets = {"Q": clusters.q_variance_target(n, e4 - zeta2**2)}
    for l in range(3, m + 1):
        targets[f"L{l}"] = clusters.loop_variance_target(n, zeta2, l)
    for l in range(1, m + 1):
        targets[f"P{l}"] = clusters.path_variance_target(n, zeta2, params.h_hat, l)
    for name, target in targets.items():
        emp = stats[name].var(ddof=1)
        se = emp * math.sqrt(2.0 / (reps - 1))
        assert abs(emp - target) < 4 * se, (name, emp, target)


def test_ztilde_trivial_cases():
    dist = model.DisorderDistribution.gaussian()
    field, params = make_field(6, 0.7, 1.0, 0.25, dist, 5)
    zero = model.EdgeWeightField(field.graph, np.zeros_like(field.omega),
                                 field.zeta2, field.betaN2, field.rhoN4)
    assert clusters.ztilde(zero, params.h_hat, 4) == 0.0
    g3 = model.CompleteGraph(3)
    p3 = model.ModelParams(n=3, beta=0.9)
    s3 = model.sample_disorder(dist, g3, np.random.default_rng(6))
    f3 = model.edge_weights(s3, p3, dist)
    assert clusters.ztilde(f3, 0.0, 3) == pytest.approx(
        math.log1p(float(np.prod(f3.omega))), abs=1e-14
    )


def brute_cluster_log_sum(w, h_hat, m):
    n = w.shape[0]
    total = 0.0
    for k in range(1, m + 1):
        for seq in itertools.permutations(range(n), k + 1):
            if seq[0] < seq[-1]:
                prod = math.prod(w[seq[t], seq[t + 1]] for t in range(k))
                total += math.log1p(h_hat**2 * prod)
    for length in range(3, m + 1):
        for seq in itertools.permutations(range(n), length):
            if seq[0] == min(seq) and seq[1] < seq[-1]:
                prod = w[seq[-1], seq[0]] * math.prod(w[seq[t], seq[t + 1]] for t in range(length - 1))
                total += math.log1p(prod)
    return total


def test_ztilde_against_per_cluster_logs():
    dist = model.DisorderDistribution.gaussian()
    for n, beta, m, seed in [(6, 0.7, 5, 7), (7, 1.2, 4, 8), (5, 0.4, 4, 9)]:
        field, params = make_field(n, beta, 1.0, 0.25, dist, seed)
        got = clusters.ztilde(field, params.h_hat, m)
        want = brute_cluster_log_sum(field.matrix(), params.h_hat, m)
        assert got == pytest.approx(want, abs=1e-12)


def test_truncation_bound_value_and_guard():
    got = clusters.truncation_bound(0.25, 0.0, 10)
    want = 2 * 10 ** (1 / 8) * 0.5**10 * math.exp(math.sqrt(5.0))
    assert got == pytest.approx(want, abs=1e-15)
    assert got == pytest.approx(0.024369, abs=1e-5)
    with pytest.raises(ValueError):
        clusters.truncation_bound(0.25, 0.0, 3)  # 3 < 2 / 0.75**2
    with pytest.raises(ValueError):
        clusters.truncation_bound(1.1, 0.0, 30)


def test_truncation_bound_decreasing_in_m():
    prev = clusters.truncation_bound(0.25, 0.0, 10)
    for m in range(11, 20):
        cur = clusters.truncation_bound(0.25, 0.0, m)
        assert cur < prev
        prev = cur


def test_limit_constants():
    loop_const, path_const, sigma = clusters.limit_constants(0.5, 0.0, 3)
    assert loop_const == pytest.approx(-0.5 * 0.5**6 / 6, abs=1e-16)
    assert loop_const == pytest.approx(-0.0013021, abs=1e-7)
    # m -> infinity limit equals -v1^2 / 2 (tail of the geometric series)
    loop8, _, _ = clusters.limit_constants(0.5, 0.0, 8)
    assert loop8 == pytest.approx(-fp.v1_squared(0.5) / 2, abs=2e-7)
    # path constant with the one-edge cluster included
    _, path2, _ = clusters.limit_constants(0.5, 1.0, 3)
    assert path2 == pytest.approx(-0.25 * (0.25 + 0.0625 + 0.015625), abs=1e-16)
    # sigma diagonal ordering: L3..Lm, P1..Pm, Q
    _, _, sigma = clusters.limit_constants(0.8, 1.0, 3, var_j2=2.0)
    assert sigma[0] == pytest.approx(0.8**6 / 6, abs=1e-15)
    assert sigma[0] == pytest.approx(0.0436907, abs=5e-8)
    assert sigma[1] == pytest.approx(0.8**2 / 2, abs=1e-15)
    assert sigma[-1] == pytest.approx(0.8**4, abs=1e-15)
    assert sigma[-1] == pytest.approx(0.4096, abs=1e-12)
    # summed path variances reproduce rho^4 v2^2 as m grows
    _, _, sigma8 = clusters.limit_constants(0.5, 1.3, 8)
    path_total = sigma8[len(range(3, 9)):-1].sum()
    # geometric tail beyond m = 8 is ~5e-6 relative at beta = 0.5
    assert path_total == pytest.approx(1.3**4 * fp.v2_squared(0.5), rel=2e-5)


def test_truncation_report_bundle():
    dist = model.DisorderDistribution.gaussian()
    field, params = make_field(16, 0.4, 0.5, 0.5, dist, 11)
    rep = clusters.truncation_report(field, params.h_hat, 5, params.beta, params.rho)
    assert rep.m == 5
    assert rep.l2_bound > 0.0
    assert rep.l2_bound == pytest.approx(
        clusters.truncation_bound(field.betaN2, field.rhoN4, 5), abs=1e-15
    )
    assert math.isfinite(rep.ztilde_log)
    loop_const, path_const, _ = clusters.limit_constants(0.4, 0.5, 5)
    assert rep.limit_constant == pytest.approx(loop_const + path_const, abs=1e-16)


def test_zbar_shift_values():
    assert clusters.zbar_shift(0.0, 3.0) == 0.0
    assert clusters.zbar_shift(0.5, 3.0) == pytest.approx(0.0234375, abs=1e-15)
    assert clusters.zbar_shift(0.5, 1.0) == pytest.approx(0.0078125, abs=1e-15)


def test_zbar_shift_empirical():
    # mean of log Zbar - (1/2) sum omega^2 approaches beta^4 m4 / 8 as n grows
    dist = model.DisorderDistribution.gaussian()
    beta = 0.5
    gaps = []
    for n in (10, 24, 48):
        rng = np.random.default_rng(100 + n)
        vals = []
        for _ in range(400):
            j = dist.sample(rng, n * (n - 1) // 2)
            scaled = beta / math.sqrt(n) * j
            vals.append(np.log(np.cosh(scaled)).sum() - 0.5 * (np.tanh(scaled) ** 2).sum())
        gaps.append(abs(np.mean(vals) - clusters.zbar_shift(beta, 3.0)))
    assert gaps[-1] < 0.002
    assert gaps[-1] < gaps[0]


def test_work_budget_guard():
    with pytest.raises(ValueError):
        clusters.cluster_stats_batch(np.zeros((4, 4)), 0.01, 0.1, 2)
    with pytest.raises(ValueError):
        clusters.cluster_stats_batch(np.zeros((4, 4)), 0.01, 0.1, 9)
    with pytest.raises(clusters.WorkBudgetExceeded):
        clusters.cluster_stats_batch(np.zeros((500, 220, 220)), 0.01, 0.1, 8)


def test_empirical_cluster_correlations_vanish():
    dist = model.DisorderDistribution.gaussian()
    n, beta, reps = 12, 0.8, 2000
    params = model.ModelParams(n=n, beta=beta, rho=1.0, alpha=0.25)
    zeta2 = dist.weight_moment(beta / math.sqrt(n), 2)
    g = model.CompleteGraph(n)
    iu, ju = g.edge_endpoints()
    rng = np.random.default_rng(17)
    w = np.zeros((reps, n, n))
    for i in range(reps):
        om = np.tanh(beta / math.sqrt(n) * dist.sample(rng, g.num_edges))
        w[i, iu, ju] = om
        w[i, ju, iu] = om
    stats = clusters.cluster_stats_batch(w, zeta2, params.h_hat, 3)
    names = sorted(stats)
    x = np.column_stack([stats[k] for k in names])
    corr = np.corrcoef(x, rowvar=False)
    off = np.abs(corr[~np.eye(len(names), dtype=bool)])
    assert off.max() < 5.0 / math.sqrt(reps)
