"""Disorder-replica experiment runner with deterministic seeding and reports.

Every replica draws its randomness from an independent generator keyed by
(master_seed, replica_index) through numpy's SeedSequence, so results are
bit-identical across repeat runs and independent of worker scheduling.
Reference samplers (for two-sample comparisons) use the disjoint key
(master_seed, REFERENCE_STREAM, index).

Reports: a per-replica CSV with header `replica_index,raw_value,centered_value`
and a JSON summary with fields {config_echo, predicted, empirical, seed,
version}; every float is written with 17 significant digits and files are
written atomically (temp file + rename).
"""
from __future__ import annotations

import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from . import clusters, exact, interpolation, motifs, stein, variants
from . import fixed_point as fp
from .model import (
    CompleteBipartiteGraph,
    CompleteGraph,
    DisorderDistribution,
    ModelParams,
    sample_disorder,
)
from .stats import MomentSummary, format_g17, ks_distance_normal, ks_two_sample

KIND_CLT = "clt"
KIND_CLUSTER_VAR = "cluster_var"
KIND_STEIN = "stein"
KIND_INTERP = "interp"
KIND_BIPARTITE = "bipartite"
KIND_DILUTED = "diluted"
KINDS = (KIND_CLT, KIND_CLUSTER_VAR, KIND_STEIN, KIND_INTERP, KIND_BIPARTITE, KIND_DILUTED)

REFERENCE_STREAM = 1 << 20


def replica_rng(master_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Deterministic per-replica generator keyed by (seed, stream, index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, stream, index))))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int = 16
    beta: float = 0.4
    rho: float = 1.0
    alpha: float = 0.25
    disorder: str = "gaussian"
    replicas: int = 100
    master_seed: int = 0
    m: int = 3
    threads: int = 1
    out_dir: str | None = None
    # bipartite extras
    n1: int | None = None
    n2: int | None = None
    # diluted extras
    p: float = 2.0
    k_max: int = 8
    # interpolation extras
    s: float = 0.1
    t_grid: tuple[float, ...] = (0.0, 0.5, 1.0)
    beta0: float = fp.DEFAULT_BETA0

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        DisorderDistribution.from_name(self.disorder)
        if self.kind == KIND_CLT:
            regime = fp.classify_regime(self.alpha)
            if regime in (fp.SUB_CRITICAL, fp.CRITICAL) and not self.beta < 1.0:
                raise ValueError("clt in the sub-critical and critical regimes requires beta < 1")
            if regime == fp.SUPER_CRITICAL and not self.beta < self.beta0:
                raise ValueError(f"clt in the super-critical regime requires beta < beta0 = {self.beta0:.6g}")
            if self.n > exact.MAX_EXACT_SPINS:
                raise ValueError(f"exact enumeration caps the clt experiment at n = {exact.MAX_EXACT_SPINS}")
        if self.kind == KIND_INTERP and self.n > exact.MAX_EXACT_SPINS:
            raise ValueError("interpolation experiment needs exact enumeration (n <= 24)")
        if self.kind == KIND_BIPARTITE and (self.n1 is None or self.n2 is None):
            raise ValueError("bipartite experiment needs n1 and n2")

    def model_params(self) -> ModelParams:
        return ModelParams(n=self.n, beta=self.beta, rho=self.rho, alpha=self.alpha)

    def distribution(self) -> DisorderDistribution:
        return DisorderDistribution.from_name(self.disorder)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    raw: np.ndarray
    centered: np.ndarray
    predicted_mean: float
    predicted_variance: float
    regime: str
    ks: float
    details: dict = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def empirical(self) -> MomentSummary:
        return MomentSummary.from_samples(self.centered)


# ---------------------------------------------------------------------------
# Experiment bodies


def _map_replicas(cfg: ExperimentConfig, worker):
    out = [None] * cfg.replicas
    if cfg.threads == 1:
        for i in range(cfg.replicas):
            out[i] = worker(i)
        return out
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for i, val in enumerate(pool.map(worker, range(cfg.replicas))):
            out[i] = val
    return out


def _run_clt(cfg: ExperimentConfig) -> ExperimentResult:
    params = cfg.model_params()
    dist = cfg.distribution()
    law = fp.predicted_law(params, dist, beta0=cfg.beta0)
    graph = CompleteGraph(cfg.n)

    def worker(i: int) -> float:
        sample = sample_disorder(dist, graph, replica_rng(cfg.master_seed, i))
        return exact.log_partition(sample, params)

    raw = np.array(_map_replicas(cfg, worker))
    centered = (raw - law.centering) / law.scale
    sd = math.sqrt(law.variance) if law.variance > 0 else 0.0
    ks = ks_distance_normal(centered, law.mean, sd) if sd > 0 else math.nan
    details = {
        "h": params.h,
        "centering": law.centering,
        "scale": law.scale,
        "v1_sq": law.v1_sq,
        "v2_sq": law.v2_sq,
    }
    return ExperimentResult(cfg, raw, centered, law.mean, law.variance, law.regime, ks, details)


def _batched_weight_matrices(cfg: ExperimentConfig, graph) -> np.ndarray:
    """(R, n, n) tanh weight matrices, one independent stream per replica."""
    params = cfg.model_params()
    dist = cfg.distribution()
    n = graph.num_vertices
    iu, ju = graph.edge_endpoints()
    scale = cfg.beta / math.sqrt(n)
    w = np.zeros((cfg.replicas, n, n))
    for i in range(cfg.replicas):
        values = np.tanh(scale * dist.sample(replica_rng(cfg.master_seed, i), graph.num_edges))
        w[i, iu, ju] = values
        w[i, ju, iu] = values
    return w


def _cluster_details(cfg: ExperimentConfig, stats: dict, zeta2: float, h_hat: float, n: int) -> dict:
    dist = cfg.distribution()
    names = stein.coordinate_names(cfg.m)
    e_omega4 = dist.weight_moment(cfg.beta / math.sqrt(n), 4)
    var_omega2 = e_omega4 - zeta2**2
    _, _, sigma_limit = clusters.limit_constants(cfg.beta, cfg.rho, cfg.m, dist.var_j_squared)
    targets = {}
    for idx, name in enumerate(names):
        length = int(name[1:]) if name != "Q" else 0
        if name.startswith("L"):
            target = clusters.loop_variance_target(n, zeta2, length)
        elif name.startswith("P"):
            target = clusters.path_variance_target(n, zeta2, h_hat, length)
        else:
            target = clusters.q_variance_target(n, var_omega2)
        summary = MomentSummary.from_samples(stats[name])
        targets[name] = {
            "empirical_var": summary.variance,
            "se_var": summary.se_var,
            "empirical_mean": summary.mean,
            "se_mean": summary.se_mean,
            "target_var": target,
            "limit_var": float(sigma_limit[idx]),
        }
    details = {"coordinates": targets, "zeta2": zeta2, "h_hat": h_hat}
    try:
        details["truncation_l2_bound"] = clusters.truncation_bound(
            n * zeta2, n * h_hat**4, cfg.m
        )
    except ValueError:
        details["truncation_l2_bound"] = None  # cutoff below the bound's hypothesis
    return details


def _run_cluster_like(cfg: ExperimentConfig, with_stein: bool) -> ExperimentResult:
    params = cfg.model_params()
    dist = cfg.distribution()
    graph = CompleteGraph(cfg.n)
    zeta2 = dist.weight_moment(cfg.beta / math.sqrt(cfg.n), 2)
    h_hat = params.h_hat
    w = _batched_weight_matrices(cfg, graph)
    stats = clusters.cluster_stats_batch(w, zeta2, h_hat, cfg.m)
    details = _cluster_details(cfg, stats, zeta2, h_hat, cfg.n)
    target_l3 = clusters.loop_variance_target(cfg.n, zeta2, 3)
    raw = stats["L3"]
    centered = raw / math.sqrt(target_l3)
    ks = ks_distance_normal(raw, 0.0, math.sqrt(target_l3))
    if with_stein:
        names = stein.coordinate_names(cfg.m)
        samples = np.column_stack([stats[name] for name in names])
        sigma = np.array([details["coordinates"][name]["target_var"] for name in names])
        cov_check = stein.empirical_cov_check(samples, sigma, cfg.m) if cfg.replicas >= 500 else None
        lin = stein.linearity_check(w, zeta2, h_hat, cfg.m)
        details["lambda_values"] = lin.lambda_values
        details["linearity_residual"] = lin.linearity_residual
        details["residual_per_coord"] = lin.residual_per_coord
        if cov_check is not None:
            details["max_abs_correlation"] = cov_check.max_abs_correlation
            details["ks_per_coord"] = {
                name: float(cov_check.ks_per_coord[k]) for k, name in enumerate(names)
            }
    return ExperimentResult(cfg, raw, centered, 0.0, target_l3, "cluster", ks, details)


def _run_interp(cfg: ExperimentConfig) -> ExperimentResult:
    params = cfg.model_params()
    dist = cfg.distribution()
    graph = CompleteGraph(cfg.n)
    q = fp.solve_q(cfg.beta, params.h).q
    t_grid = tuple(cfg.t_grid)

    def worker(i: int):
        rng = replica_rng(cfg.master_seed, i)
        sample = sample_disorder(dist, graph, rng)
        g_cavity = rng.standard_normal(cfg.n)
        prof = interpolation.overlap_profile(sample, g_cavity, params, q, t_grid)
        row = [v for _, v in prof]
        if cfg.n <= interpolation.MAX_TWO_REPLICA_SPINS:
            for t in t_grid:
                lhs, _ = interpolation.mgf_bound_check(sample, g_cavity, params, q, cfg.s, t)
                row.append(lhs)
        return row

    rows = np.array(_map_replicas(cfg, worker))
    profile_mean = rows[:, : len(t_grid)].mean(axis=0)
    # primary statistic: the overlap fluctuation at the last grid time
    c1 = interpolation.c_target(cfg.beta, t_grid[-1])
    raw = rows[:, len(t_grid) - 1]
    centered = raw - c1
    details = {
        "q": q,
        "t_grid": list(t_grid),
        "profile_mean": [float(x) for x in profile_mean],
        "c_targets": [interpolation.c_target(cfg.beta, t) for t in t_grid],
    }
    if rows.shape[1] > len(t_grid):
        mgf = rows[:, len(t_grid):]
        details["mgf_s"] = cfg.s
        details["mgf_lhs_mean"] = [float(x) for x in mgf.mean(axis=0)]
        details["mgf_lhs_se"] = [float(x) for x in mgf.std(ddof=1, axis=0) / math.sqrt(cfg.replicas)]
        details["mgf_rhs"] = [
            1.0 / math.sqrt(1.0 - 2.0 * cfg.s - 4.0 * t * cfg.beta**2) for t in t_grid
        ]
    return ExperimentResult(cfg, raw, centered, c1, math.nan, "interpolation", math.nan, details)


def _run_bipartite(cfg: ExperimentConfig) -> ExperimentResult:
    bp = variants.BipartiteParams(n1=cfg.n1, n2=cfg.n2, beta=cfg.beta, rho=cfg.rho, alpha=cfg.alpha)
    dist = cfg.distribution()
    graph = CompleteBipartiteGraph(cfg.n1, cfg.n2)
    n = bp.n
    zeta2 = dist.weight_moment(cfg.beta / math.sqrt(n), 2)
    iu, ju = graph.edge_endpoints()
    scale = cfg.beta / math.sqrt(n)
    w = np.zeros((cfg.replicas, n, n))
    for i in range(cfg.replicas):
        values = np.tanh(scale * dist.sample(replica_rng(cfg.master_seed, i), graph.num_edges))
        w[i, iu, ju] = values
        w[i, ju, iu] = values
    raw = motifs.simple_cycle_sum(w, 4)
    target = variants.bipartite_loop_variance_target(cfg.n1, cfg.n2, zeta2, 4)
    centered = raw / math.sqrt(target)
    loops_lim, even_lim, odd_lim = variants.bipartite_predicted_variance(cfg.beta, cfg.rho, bp.p1, bp.p2)
    v1, v2 = variants.bipartite_v1_v2(cfg.beta, bp.p1, bp.p2)
    enum_counts = variants.bipartite_counts(cfg.n1, cfg.n2, min(cfg.m + 3, 6))
    closed_counts = variants.bipartite_count_closed_forms(cfg.n1, cfg.n2, min(cfg.m + 3, 6))
    details = {
        "zeta2": zeta2,
        "target_var_loop4": target,
        "limit_var_loop4": cfg.beta**8 * (bp.p1 * bp.p2) ** 2 / 4.0,
        "variance_contributions": {"loops": loops_lim, "even_paths": even_lim, "odd_paths": odd_lim},
        "v1_sq": v1,
        "v2_sq": v2,
        "beta_critical": bp.beta_critical,
        "counts_match_closed_forms": enum_counts == closed_counts,
    }
    ks = ks_distance_normal(raw, 0.0, math.sqrt(target))
    return ExperimentResult(cfg, raw, centered, 0.0, target, "bipartite", ks, details)


def _run_diluted(cfg: ExperimentConfig) -> ExperimentResult:
    dist = cfg.distribution()
    dpar = variants.DilutedParams(n=cfg.n, p=cfg.p, beta=cfg.beta, rho=cfg.rho, alpha=cfg.alpha)
    law = variants.compound_poisson_law(dpar, dist, max(cfg.k_max, 3))

    def worker(i: int):
        rng = replica_rng(cfg.master_seed, i)
        for attempt in range(3):
            sample = variants.sample_diluted(dpar, dist, rng)
            try:
                cyc, pth, counts = variants.diluted_cycle_statistic(sample, cfg.beta, dpar.h_hat, cfg.k_max)
                return cyc + pth, counts, attempt
            except variants.DilutedBudgetExceeded:
                continue
        raise variants.DilutedBudgetExceeded("3 consecutive samples exceeded the path budget")

    results = _map_replicas(cfg, worker)
    raw = np.array([r[0] for r in results])
    count_means = {
        k: float(np.mean([r[1].get(k, 0) for r in results])) for k in range(3, cfg.k_max + 1)
    }
    retries = int(sum(r[2] for r in results))
    ref_rng = replica_rng(cfg.master_seed, 0, stream=REFERENCE_STREAM)
    reference = variants.compound_poisson_reference(law, ref_rng, cfg.replicas)
    mean_atoms = [variants.compound_atom_moments(dist, cfg.beta, k) for k in range(3, law.k_max + 1)]
    pred_mean = sum(law.lambdas[j] * m1 for j, (m1, _) in enumerate(mean_atoms)) - 0.5 * law.gaussian_var
    pred_var = sum(law.lambdas[j] * m2 for j, (_, m2) in enumerate(mean_atoms)) + law.gaussian_var
    centered = raw - pred_mean
    ks = ks_two_sample(raw, reference)
    details = {
        "p_hat": dpar.p_hat(dist),
        "gaussian_var": law.gaussian_var,
        "expected_cycle_counts": {k: variants.expected_cycle_count(cfg.p, k) for k in range(3, cfg.k_max + 1)},
        "empirical_cycle_counts": count_means,
        "reference_mean": float(reference.mean()),
        "budget_retries": retries,
    }
    return ExperimentResult(cfg, raw, centered, pred_mean, pred_var, "diluted", ks, details)


_RUNNERS = {
    KIND_CLT: _run_clt,
    KIND_CLUSTER_VAR: lambda cfg: _run_cluster_like(cfg, with_stein=False),
    KIND_STEIN: lambda cfg: _run_cluster_like(cfg, with_stein=True),
    KIND_INTERP: _run_interp,
    KIND_BIPARTITE: _run_bipartite,
    KIND_DILUTED: _run_diluted,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run all replicas of one experiment; deterministic given (config, seed)."""
    cfg.validate()
    start = time.perf_counter()
    result = _RUNNERS[cfg.kind](cfg)
    result.elapsed_seconds = time.perf_counter() - start
    return result


# ---------------------------------------------------------------------------
# Reports


def _json_default(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def _format_json(obj, indent: int = 0) -> str:
    """JSON text with every float rendered at 17 significant digits."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {_format_json(v, indent + 1)}' for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_format_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        if math.isnan(obj):
            return "null"
        return format_g17(obj)
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def summary_dict(result: ExperimentResult) -> dict:
    emp = result.empirical()
    cfg = asdict(result.config)
    return {
        "config_echo": cfg,
        "predicted": {
            "mean": result.predicted_mean,
            "variance": result.predicted_variance,
            "regime": result.regime,
        },
        "empirical": {
            "mean": emp.mean,
            "variance": emp.variance,
            "se_mean": emp.se_mean,
            "se_var": emp.se_var,
            "ks": result.ks,
            "ks_scaled": result.ks * math.sqrt(result.config.replicas)
            if not math.isnan(result.ks)
            else math.nan,
        },
        # wall-clock time stays in the in-memory result only: report files
        # must be byte-identical across reruns of (config, master_seed)
        "seed": result.config.master_seed,
        "version": __version__,
        "details": json.loads(json.dumps(result.details, default=_json_default)),
    }


def emit_report(result: ExperimentResult, out_dir: str) -> tuple[str, str]:
    """Write per-replica CSV and JSON summary; returns (csv_path, json_path)."""
    if len(result.raw) < 1:
        raise ValueError("refusing to write a report with no replicas")
    os.makedirs(out_dir, exist_ok=True)
    rows = ["replica_index,raw_value,centered_value"]
    for i, (r, c) in enumerate(zip(result.raw, result.centered)):
        rows.append(f"{i},{format_g17(float(r))},{format_g17(float(c))}")
    csv_path = os.path.join(out_dir, f"{result.config.kind}_replicas.csv")
    _atomic_write(csv_path, "\n".join(rows) + "\n")
    json_path = os.path.join(out_dir, f"{result.config.kind}_summary.json")
    _atomic_write(json_path, _format_json(summary_dict(result)) + "\n")
    return csv_path, json_path


def load_summary(json_path: str) -> dict:
    with open(json_path) as handle:
        return json.load(handle)
