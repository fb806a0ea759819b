"""Monte Carlo harness for the random dot product graph simulations.

Every trial samples a graph, embeds it with ASE and LSE, draws ``K``
``(q, S)`` pairs whose similar sets come from per-query blends of the two
distances, fits the three estimators and scores them on the target query.

Randomness: each trial owns a numpy ``PCG64`` generator seeded from
``SeedSequence(master_seed, spawn_key=(setting, grid_index, trial))``, so any
trial can be replayed alone and results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .estimators import EstimatorKind, estimate_all
from .graphs import sample_rdpg
from .metrics import normalized_mrr, recall_at_k
from .ranking import DissimilarityStack, rank
from .solvers import MultiQueryTask, QueryTask
from .spectral import ase_embed, lse_embed, pairwise_dissimilarity

SETTINGS = ("pointmass", "variance", "sizeS")
_SETTING_KEY = {name: i for i, name in enumerate(SETTINGS)}
_SHARED_GRAPH_KEY = 2**31
MAX_GRAPH_DRAWS = 1000

CSV_COLUMNS = (
    "setting",
    "grid_value",
    "trial",
    "estimator",
    "normalized_mrr",
    "recall_at_1",
    "recall_at_5",
    "recall_at_10",
    "alpha_ase",
    "alpha_true",
    "seed",
    "engine",
    "objective",
    "solver_nodes",
)
RECALL_KS = (1, 5, 10)


@dataclass(frozen=True)
class AlphaDistribution:
    """Distribution of the ASE weight for each query.

    ``kind`` is ``"point"`` (all mass at ``param``) or ``"beta"``
    (``Beta(param, param)``).
    """

    kind: str
    param: float

    def __post_init__(self):
        if self.kind == "point":
            if not 0.0 <= self.param <= 1.0:
                raise ValueError(f"point mass must lie in [0, 1], got {self.param}")
        elif self.kind == "beta":
            if not self.param > 0:
                raise ValueError(f"beta parameter must be positive, got {self.param}")
        else:
            raise ValueError(f"unknown alpha distribution {self.kind!r}")

    @classmethod
    def point_mass(cls, value: float = 0.5) -> "AlphaDistribution":
        return cls("point", float(value))

    @classmethod
    def beta_symmetric(cls, beta: float) -> "AlphaDistribution":
        return cls("beta", float(beta))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "point":
            return np.full(size, self.param)
        return rng.beta(self.param, self.param, size=size)

    @property
    def variance(self) -> float:
        if self.kind == "point":
            return 0.0
        return 1.0 / (4.0 * (2.0 * self.param + 1.0))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 200
    latent_dim: int = 2
    embed_dim: int = 2
    K: int = 10
    size_s: int = 3
    size_sk: int = 3
    alpha_dist: AlphaDistribution = field(default_factory=AlphaDistribution.point_mass)
    top_pool: int = 10
    eval_size: int = 5
    trials: int = 100
    master_seed: int = 0
    engine: str = "sweep2d"
    shared_graph: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if not 1 <= self.size_s <= self.top_pool or not 1 <= self.size_sk <= self.top_pool:
            raise ValueError("similar-set sizes must lie in 1..top_pool")
        if self.eval_size < 1:
            raise ValueError("eval_size must be >= 1")
        if self.n - 1 < max(self.top_pool, self.size_s + self.eval_size, max(RECALL_KS) + self.size_s):
            raise ValueError(
                f"n={self.n} is too small for top_pool={self.top_pool}, "
                f"|S|={self.size_s} and eval_size={self.eval_size}"
            )
        if self.K > self.n:
            raise ValueError(f"cannot draw K={self.K} distinct queries from n={self.n}")


@dataclass(frozen=True)
class SampledTask:
    task: MultiQueryTask
    alphas: np.ndarray  # true ASE weight per query
    evalset: tuple[int, ...]


@dataclass
class EstimatorRecord:
    kind: EstimatorKind
    alpha: np.ndarray
    normalized_mrr: float
    recall: dict[int, float]
    objective: int | None
    nodes: int | None


@dataclass
class TrialResult:
    setting: str
    grid_value: float
    trial: int
    seed: int
    alpha_true: float
    records: list[EstimatorRecord]

    def record(self, kind: EstimatorKind | str) -> EstimatorRecord:
        kind = EstimatorKind(kind)
        return next(r for r in self.records if r.kind is kind)


def blend(alpha: float) -> np.ndarray:
    """Weights ``(alpha, 1 - alpha)`` on the (ASE, LSE) layers."""
    return np.array([alpha, 1.0 - alpha])


def simulate_stack(config: ExperimentConfig, rng: np.random.Generator) -> DissimilarityStack:
    """Sample a graph without isolated vertices and embed it twice."""
    for _ in range(MAX_GRAPH_DRAWS):
        _, A = sample_rdpg(config.n, config.latent_dim, rng)
        if A.sum(axis=1).min() > 0:
            break
    else:
        raise RuntimeError(f"no graph without isolated vertices in {MAX_GRAPH_DRAWS} draws")
    d_ase = pairwise_dissimilarity(ase_embed(A, config.embed_dim))
    d_lse = pairwise_dissimilarity(lse_embed(A, config.embed_dim))
    return DissimilarityStack.from_matrices([d_ase, d_lse], ("ASE", "LSE"))


def sample_task(stack: DissimilarityStack, config: ExperimentConfig, rng: np.random.Generator) -> SampledTask:
    """Draw ``K`` queries, their weights, similar sets, and the evaluation set.

    Each similar set is a uniform subset of the query's ``top_pool`` nearest
    candidates under its own blend.  The evaluation set is the
    ``eval_size`` nearest candidates to ``v*`` under ``v*``'s blend once its
    similar set is removed.
    """
    if stack.J != 2:
        raise ValueError("simulated tasks need exactly two layers (ASE, LSE)")
    queries = rng.choice(stack.n, size=config.K, replace=False)
    alphas = config.alpha_dist.sample(rng, config.K)
    tasks = []
    for k, (q, a) in enumerate(zip(queries, alphas)):
        ranked = rank(blend(a) @ stack.rows(int(q)), int(q))
        pool = ranked.order[: config.top_pool]
        size = config.size_s if k == 0 else config.size_sk
        S = rng.choice(pool, size=size, replace=False)
        tasks.append(QueryTask(int(q), tuple(int(s) for s in S)))
    target = tasks[0]
    rest = rank(blend(alphas[0]) @ stack.rows(target.q), target.q, exclude=target.S)
    evalset = tuple(int(v) for v in rest.order[: config.eval_size])
    return SampledTask(MultiQueryTask(tuple(tasks)), alphas, evalset)


def trial_seed(config: ExperimentConfig, setting: str, grid_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(config.master_seed, spawn_key=(_SETTING_KEY[setting], grid_index, trial))


def run_trial(config: ExperimentConfig, setting: str, grid_value: float, grid_index: int, trial: int) -> TrialResult:
    seq = trial_seed(config, setting, grid_index, trial)
    rng = np.random.default_rng(seq)
    if config.shared_graph:
        graph_seq = np.random.SeedSequence(config.master_seed, spawn_key=(_SETTING_KEY[setting], _SHARED_GRAPH_KEY))
        stack = simulate_stack(config, np.random.default_rng(graph_seq))
    else:
        stack = simulate_stack(config, rng)
    sampled = sample_task(stack, config, rng)
    target = sampled.task.target
    est = estimate_all(stack, sampled.task, config.engine)
    row = stack.rows(target.q)
    records = []
    for kind in EstimatorKind:
        alpha = est.alpha(kind)
        ranked = rank(alpha @ row, target.q, exclude=target.S)
        report = {EstimatorKind.SINGLE: est.single, EstimatorKind.MULTI: est.multi}.get(kind)
        records.append(
            EstimatorRecord(
                kind=kind,
                alpha=alpha,
                normalized_mrr=normalized_mrr(ranked, sampled.evalset),
                recall={k: recall_at_k(ranked, sampled.evalset, k) for k in RECALL_KS},
                objective=None if report is None else report.objective,
                nodes=None if report is None else max(report.nodes, report.breakpoints),
            )
        )
    return TrialResult(
        setting=setting,
        grid_value=float(grid_value),
        trial=trial,
        seed=int(seq.generate_state(1, np.uint64)[0]),
        alpha_true=float(sampled.alphas[0]),
        records=records,
    )


def setting_config(setting: str, base: ExperimentConfig, value: float) -> ExperimentConfig:
    """The configuration for one grid point of one of the three settings."""
    if setting == "pointmass":
        return replace(base, K=int(value))
    if setting == "variance":
        return replace(base, alpha_dist=AlphaDistribution.beta_symmetric(value))
    if setting == "sizeS":
        return replace(base, size_s=int(value))
    raise ValueError(f"unknown setting {setting!r}; expected one of {SETTINGS}")


def default_base(setting: str, **overrides) -> ExperimentConfig:
    """Base configuration of each setting as used for the published figures."""
    if setting == "pointmass":
        base = ExperimentConfig(alpha_dist=AlphaDistribution.point_mass(0.5), size_s=3, size_sk=3)
    elif setting == "variance":
        base = ExperimentConfig(K=10, size_s=3, size_sk=3)
    elif setting == "sizeS":
        base = ExperimentConfig(K=10, size_sk=3, alpha_dist=AlphaDistribution.beta_symmetric(0.1))
    else:
        raise ValueError(f"unknown setting {setting!r}; expected one of {SETTINGS}")
    return replace(base, **overrides)


def _run_job(job):
    return run_trial(*job)


def run_setting(
    setting: str,
    grid: Sequence[float],
    base: ExperimentConfig,
    workers: int = 1,
) -> Iterator[TrialResult]:
    """Stream ``base.trials`` results per grid value, in (grid, trial) order."""
    jobs = [
        (setting_config(setting, base, value), setting, value, gi, t)
        for gi, value in enumerate(grid)
        for t in range(base.trials)
    ]
    if workers <= 1:
        yield from map(_run_job, jobs)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (8 * workers)))


def run_setting_pointmass(K_grid: Iterable[int], base: ExperimentConfig | None = None, workers: int = 1):
    return run_setting("pointmass", list(K_grid), base or default_base("pointmass"), workers)


def run_setting_variance(beta_grid: Iterable[float], base: ExperimentConfig | None = None, workers: int = 1):
    return run_setting("variance", list(beta_grid), base or default_base("variance"), workers)


def run_setting_sizeS(size_grid: Iterable[int], base: ExperimentConfig | None = None, workers: int = 1):
    return run_setting("sizeS", list(size_grid), base or default_base("sizeS"), workers)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def result_rows(result: TrialResult, engine: str) -> list[list[str]]:
    rows = []
    for rec in result.records:
        rows.append([
            result.setting,
            _fmt(result.grid_value),
            str(result.trial),
            rec.kind.value,
            _fmt(rec.normalized_mrr),
            *(_fmt(rec.recall[k]) for k in RECALL_KS),
            _fmt(float(rec.alpha[0])),
            _fmt(result.alpha_true),
            str(result.seed),
            engine,
            _fmt(rec.objective),
            _fmt(rec.nodes),
        ])
    return rows


def write_csv(results: Iterable[TrialResult], stream: io.TextIOBase, engine: str) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    count = 0
    for result in results:
        for row in result_rows(result, engine):
            writer.writerow(row)
            count += 1
    return count


@dataclass(frozen=True)
class Summary:
    mean: float
    se: float
    count: int


def summarize(values: Sequence[float]) -> Summary:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("nan")
    return Summary(float(v.mean()), se, int(v.size))


def compare(results: Sequence[TrialResult], better: str, worse: str) -> tuple[float, float]:
    """Mean normalized-MRR gap ``better - worse`` and its pooled standard error."""
    a = summarize([r.record(better).normalized_mrr for r in results])
    b = summarize([r.record(worse).normalized_mrr for r in results])
    return a.mean - b.mean, math.sqrt(a.se**2 + b.se**2)
