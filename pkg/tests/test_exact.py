import itertools
import math

import numpy as np
import pytest

from skfluct import exact, model


def naive_log_partition(sample, params):
    n = sample.graph.num_vertices
    z = 0.0
    for bits in itertools.product([-1.0, 1.0], repeat=n):
        z += math.exp(model.hamiltonian(np.array(bits), sample, params))
    return math.log(z)


def test_single_spin():
    g = model.CompleteGraph(1)
    sample = model.DisorderSample(g, np.zeros(0))
    params = model.ModelParams(n=1, beta=3.7)
    assert exact.log_partition(sample, params) == pytest.approx(math.log(2.0), abs=1e-14)


def test_two_spin_example():
    g = model.CompleteGraph(2)
    sample = model.DisorderSample(g, np.array([1.0]))
    params = model.ModelParams(n=2, beta=1.0)
    want = math.log(4 * math.cosh(1 / math.sqrt(2)))
    assert exact.log_partition(sample, params) == pytest.approx(want, abs=1e-13)
    assert want == pytest.approx(1.6178756833282364, abs=1e-12)


def test_beta_zero_independent_spins():
    g = model.CompleteGraph(9)
    params = model.ModelParams(n=9, beta=0.0, rho=0.7, alpha=0.3)
    sample = model.sample_disorder(model.DisorderDistribution.gaussian(), g, np.random.default_rng(0))
    want = 9 * math.log(2 * math.cosh(params.h))
    assert exact.log_partition(sample, params) == pytest.approx(want, abs=1e-12)


def test_gray_code_and_vectorized_match_naive():
    rng = np.random.default_rng(12)
    dist = model.DisorderDistribution.gaussian()
    for n in (3, 6, 9, 12):
        g = model.CompleteGraph(n)
        params = model.ModelParams(n=n, beta=1.3, rho=1.0, alpha=0.25)
        sample = model.sample_disorder(dist, g, rng)
        want = naive_log_partition(sample, params)
        assert exact.log_partition(sample, params) == pytest.approx(want, rel=1e-10)
        assert exact.log_partition_gray(sample, params) == pytest.approx(want, rel=1e-10)


def test_large_beta_stability():
    g = model.CompleteGraph(12)
    params = model.ModelParams(n=12, beta=60.0, rho=1.0, alpha=0.0)
    sample = model.sample_disorder(model.DisorderDistribution.gaussian(), g, np.random.default_rng(3))
    val = exact.log_partition(sample, params)
    assert math.isfinite(val) and val > 0


def test_enumeration_cap():
    g = model.CompleteGraph(25)
    sample = model.sample_disorder(model.DisorderDistribution.gaussian(), g, np.random.default_rng(0))
    with pytest.raises(exact.EnumerationCap):
        exact.log_partition(sample, model.ModelParams(n=25, beta=0.5))


def test_gibbs_two_spin_example():
    g = model.CompleteGraph(2)
    sample = model.DisorderSample(g, np.array([1.0]))
    params = model.ModelParams(n=2, beta=1.0)
    summary = exact.gibbs_summary(sample, params)
    t = math.tanh(1 / math.sqrt(2))
    assert summary.pair_corr[0, 1] == pytest.approx(t, abs=1e-13)
    assert t == pytest.approx(0.6088593650139138, abs=1e-12)
    assert summary.overlap_second == pytest.approx(0.5 * (1 + t * t), abs=1e-13)
    assert summary.overlap_second == pytest.approx(0.68535486, abs=1e-8)


def test_gibbs_product_measure():
    g = model.CompleteGraph(7)
    params = model.ModelParams(n=7, beta=0.0, rho=1.0, alpha=0.4)
    sample = model.sample_disorder(model.DisorderDistribution.gaussian(), g, np.random.default_rng(1))
    summary = exact.gibbs_summary(sample, params)
    th = math.tanh(params.h)
    np.testing.assert_allclose(summary.magnetizations, th, atol=1e-13)
    off = summary.pair_corr[~np.eye(7, dtype=bool)]
    np.testing.assert_allclose(off, th * th, atol=1e-13)


def test_gibbs_moment_inequalities():
    g = model.CompleteGraph(8)
    params = model.ModelParams(n=8, beta=0.9, rho=1.0, alpha=0.25)
    sample = model.sample_disorder(model.DisorderDistribution.gaussian(), g, np.random.default_rng(2))
    s = exact.gibbs_summary(sample, params, q=0.2)
    assert np.all(np.abs(s.magnetizations) <= 1.0)
    assert np.all(np.abs(s.pair_corr) <= 1.0 + 1e-12)
    assert s.overlap_second >= s.overlap_mean**2 >= 0.0
    assert s.overlap_centered_second == pytest.approx(
        s.overlap_second - 2 * 0.2 * s.overlap_mean + 0.04, abs=1e-14
    )


def test_field_derivative_identity():
    # d(log Z)/dh = sum_i <s_i> by central differences at step 1e-4
    g = model.CompleteGraph(8)
    dist = model.DisorderDistribution.gaussian()
    sample = model.sample_disorder(dist, g, np.random.default_rng(7))
    beta, h0 = 0.8, 0.17
    step = 1e-4

    def logz_at(h):
        b = np.full(8, h)
        return exact.log_partition_core(exact.coupling_matrix(sample, model.ModelParams(n=8, beta=beta)), b)

    params = model.ModelParams(n=8, beta=beta, rho=h0, alpha=0.0)
    summary = exact.gibbs_summary(sample, params)
    derivative = (logz_at(h0 + step) - logz_at(h0 - step)) / (2 * step)
    assert derivative == pytest.approx(float(summary.magnetizations.sum()), abs=1e-6)


def test_decomposition_identity_and_parity_examples():
    rng = np.random.default_rng(21)
    dist = model.DisorderDistribution.gaussian()
    for n in (2, 3, 6, 11):
        g = model.CompleteGraph(n)
        params = model.ModelParams(n=n, beta=0.7, rho=1.0, alpha=0.25)
        sample = model.sample_disorder(dist, g, rng)
        d = exact.decompose(sample, params)
        assert d.log_z == pytest.approx(exact.log_partition(sample, params), abs=1e-12)
    # n = 2, h = 0: a single edge has two odd-degree endpoints, so Zhat = 1
    g2 = model.CompleteGraph(2)
    s2 = model.DisorderSample(g2, np.array([0.83]))
    d2 = exact.decompose(s2, model.ModelParams(n=2, beta=1.1))
    assert d2.log_zhat == pytest.approx(0.0, abs=1e-13)
    # n = 3, h = 0: the triangle is the only boundaryless subgraph
    g3 = model.CompleteGraph(3)
    s3 = model.DisorderSample(g3, np.array([0.4, -0.9, 1.3]))
    p3 = model.ModelParams(n=3, beta=1.1)
    omega = np.tanh(1.1 / math.sqrt(3) * s3.values)
    d3 = exact.decompose(s3, p3)
    assert d3.log_zhat == pytest.approx(math.log1p(float(np.prod(omega))), abs=1e-12)


def brute_force_zhat(sample, params):
    n = sample.graph.num_vertices
    iu, ju = sample.graph.edge_endpoints()
    omega = np.tanh(params.beta / math.sqrt(n) * sample.values)
    total = 0.0
    for mask in range(1 << len(omega)):
        deg = np.zeros(n, dtype=int)
        prod = 1.0
        for e in range(len(omega)):
            if mask >> e & 1:
                deg[iu[e]] += 1
                deg[ju[e]] += 1
                prod *= omega[e]
        total += params.h_hat ** int((deg % 2).sum()) * prod
    return total


def test_zhat_subset_sum_against_brute_force():
    rng = np.random.default_rng(30)
    dist = model.DisorderDistribution.gaussian()
    for n in (3, 4, 5):
        g = model.CompleteGraph(n)
        params = model.ModelParams(n=n, beta=0.9, rho=1.0, alpha=0.3)
        sample = model.sample_disorder(dist, g, rng)
        assert exact.zhat_subset_sum(sample, params) == pytest.approx(
            brute_force_zhat(sample, params), abs=1e-13
        )


def test_zhat_subset_sum_matches_product_route():
    rng = np.random.default_rng(31)
    dist = model.DisorderDistribution.gaussian()
    for n in (6, 8, 10):
        g = model.CompleteGraph(n)
        params = model.ModelParams(n=n, beta=0.5, rho=1.0, alpha=0.25)
        sample = model.sample_disorder(dist, g, rng)
        d = exact.decompose(sample, params)
        assert exact.zhat_subset_sum(sample, params) == pytest.approx(
            math.exp(d.log_zhat), rel=1e-9
        )
