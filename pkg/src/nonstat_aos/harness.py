"""Trajectories, the replicate/selection protocol, sweeps and result files.

Randomness is derived, never shared: every trajectory gets its own stream
from ``SeedSequence(master_seed, spawn_key=(policy tag, N_1, wsize,
replicate, run))``, so results do not depend on execution order or on the
number of worker threads.
"""
from __future__ import annotations

import csv
import json
import logging
import statistics
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _purepy, kernels
from .island import IslandModel, run_population, top_mean
from .policies import Policy, UniformStream
from .roster import TABLE_ORDER, make_policy
from .scenario import BINARY, ScenarioConfig, binary_scenario, binary_total

log = logging.getLogger(__name__)

PROTOCOL_NOTE = ("per replicate: `pool` independent runs (or one island-model population of "
                 "`pool` individuals); replicate value = mean of the `top` best totals; "
                 "mean/std (ddof=1) over replicates")
SEED_SCHEME = "SeedSequence(master, spawn_key=(crc32(policy), N1, wsize, replicate, run, stream))"


@dataclass
class RunTrace:
    operators: np.ndarray
    gains: np.ndarray
    total: float
    restarts: int = 0

    def __len__(self):
        return len(self.operators)


@dataclass
class ExperimentResult:
    policy: str
    n1: int
    wsize: int
    mean: float
    std: float
    replicate_values: list[float]
    seeds: dict = field(default_factory=dict)
    n_op: int = 8
    horizon: int = 1000

    def to_dict(self) -> dict:
        return asdict(self)


def policy_tag(name: str) -> int:
    return zlib.crc32(name.encode())


def stream(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


def seq_sum(values) -> float:
    s = 0.0
    for v in values:
        s += float(v)
    return s


def _draws(seed, horizon: int) -> np.ndarray:
    if isinstance(seed, np.random.SeedSequence):
        rng = np.random.default_rng(seed)
    else:
        rng = stream(int(seed), 0)
    return rng.random(kernels.DRAWS_PER_STEP * horizon)


def _scenario_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed.spawn(1)[0])
    return stream(int(seed), 1)


def run_trajectory(policy: Policy, cfg: ScenarioConfig, seed=0,
                   use_kernel: bool = True) -> RunTrace:
    """One run of ``policy`` (state reset first) on ``cfg`` for ``cfg.horizon`` steps.

    Binary scenarios go through the compiled kernels unless ``use_kernel``
    is false; both paths give identical traces for the same seed.
    """
    draws = _draws(seed, cfg.horizon)
    if use_kernel and cfg.kind == BINARY and policy.kernel_code is not None:
        ops, gains, restarts = kernels.run_binary(
            policy.kernel_code, policy.kernel_params(), cfg.n_op, cfg.n1, cfg.wsize,
            cfg.horizon, draws)
        return RunTrace(ops, gains, binary_total(gains, cfg.wsize), restarts)
    policy.reset(cfg)
    ops, gains = _purepy.play(policy, cfg, UniformStream(draws), _scenario_rng(seed))
    total = binary_total(gains, cfg.wsize) if cfg.kind == BINARY else seq_sum(gains)
    return RunTrace(np.array(ops, dtype=np.int64), np.array(gains), total,
                    getattr(policy, "restarts", 0))


def run_island(model: IslandModel, cfg: ScenarioConfig, seed=0, psize: int | None = None,
               use_kernel: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """One island-model population; returns ``(individual totals, final matrix)``."""
    psize = model.psize if psize is None else psize
    rng = np.random.default_rng(seed) if isinstance(seed, np.random.SeedSequence) \
        else stream(int(seed), 0)
    if cfg.kind == BINARY:
        draws = rng.random((cfg.horizon, psize))
        if use_kernel:
            return kernels.run_island(cfg.n_op, cfg.n1, cfg.wsize, cfg.horizon, psize,
                                      model.inertia, model.beta, model.credit == "mean", draws)
        return _purepy.run_island(cfg.n_op, cfg.n1, cfg.wsize, cfg.horizon, psize,
                                  model.inertia, model.beta, model.credit == "mean", draws)
    pop = run_population(cfg, psize, model.inertia, model.beta, rng, model.credit)
    return pop.totals(), pop.matrix


def _replicate_value(policy, cfg: ScenarioConfig, master_seed: int, rep: int, pool: int,
                     top: int) -> float:
    tag = policy_tag(policy.name)
    key = (tag, cfg.n1 or 0, cfg.wsize, rep)
    if isinstance(policy, IslandModel):
        seed = np.random.SeedSequence(master_seed, spawn_key=key)
        totals, _ = run_island(policy, cfg, seed)
        return top_mean(totals, top)
    seeds = [np.random.SeedSequence(master_seed, spawn_key=key + (run,)) for run in range(pool)]
    if cfg.kind == BINARY and policy.kernel_code is not None:
        draws = np.stack([_draws(s, cfg.horizon) for s in seeds]) if pool else \
            np.empty((0, kernels.DRAWS_PER_STEP * cfg.horizon))
        totals = kernels.run_binary_totals(policy.kernel_code, policy.kernel_params(),
                                           cfg.n_op, cfg.n1, cfg.wsize, cfg.horizon, draws)
    else:
        totals = [run_trajectory(_fresh(policy), cfg, s).total for s in seeds]
    return top_mean(totals, top)


def _fresh(policy):
    # policies carry per-run state after reset(); give each worker its own copy
    return type(policy)(**policy.params())


def replicate_protocol(policy, cfg: ScenarioConfig, reps: int = 20, pool: int = 80,
                       top: int = 20, master_seed: int = 0,
                       threads: int = 1) -> ExperimentResult:
    """``reps`` replicate values, each the mean of the ``top`` best of ``pool`` runs.

    The island model replaces the ``pool`` independent runs by one population
    of its own ``psize`` individuals.
    """
    if isinstance(policy, str):
        policy = make_policy(policy)
    size = policy.psize if isinstance(policy, IslandModel) else pool
    if not 1 <= top <= size:
        raise ValueError(f"need 1 <= top <= {size} (runs per replicate), got top={top}")
    if reps < 1:
        raise ValueError("reps must be >= 1")

    def one(rep):
        return _replicate_value(_fresh(policy), cfg, master_seed, rep, pool, top)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            values = list(ex.map(one, range(reps)))
    else:
        values = [one(r) for r in range(reps)]
    # exact rational arithmetic: identical replicates give std 0.0 and their common value
    mean = statistics.mean(values)
    std = statistics.stdev(values, mean) if reps > 1 else 0.0
    return ExperimentResult(
        policy.name, cfg.n1 if cfg.n1 is not None else 0, cfg.wsize, mean, std, values,
        seeds={"master": master_seed, "scheme": SEED_SCHEME, "tag": policy_tag(policy.name),
               "reps": reps, "pool": size, "top": top, "protocol": PROTOCOL_NOTE},
        n_op=cfg.n_op, horizon=cfg.horizon,
    )


def sweep(policies: Sequence, n1_range: Iterable[int] = range(1, 9),
          wsize_range: Iterable[int] = range(1, 9), n_op: int = 8, horizon: int = 1000,
          reps: int = 20, pool: int = 80, top: int = 20, master_seed: int = 0,
          threads: int = 1, progress=None) -> list[ExperimentResult]:
    """Every (policy, N_1, wsize) cell of a binary-scenario grid."""
    pols = [make_policy(p) if isinstance(p, str) else p for p in policies]
    n1s, ws = list(n1_range), list(wsize_range)
    results = []
    for w in ws:
        for n1 in n1s:
            cfg = binary_scenario(n_op, n1, w, horizon)
            for pol in pols:
                res = replicate_protocol(pol, cfg, reps, pool, top, master_seed, threads)
                results.append(res)
                if progress:
                    progress(res)
    return results


# -- output --------------------------------------------------------------------

def _order(name: str) -> int:
    return TABLE_ORDER.index(name) if name in TABLE_ORDER else len(TABLE_ORDER)


def write_csv_per_wsize(results: Sequence[ExperimentResult], outdir) -> list[Path]:
    """One ``results_wsize<w>.csv`` per window size with header ``policy,N1,mean,std``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for w in sorted({r.wsize for r in results}):
        rows = sorted((r for r in results if r.wsize == w), key=lambda r: (_order(r.policy), r.n1))
        path = outdir / f"results_wsize{w}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["policy", "N1", "mean", "std"])
            for r in rows:
                writer.writerow([r.policy, r.n1, f"{r.mean:.2f}", f"{r.std:.2f}"])
        paths.append(path)
    return paths


def write_json_summary(results: Sequence[ExperimentResult], path, metadata: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "metadata": {"protocol": PROTOCOL_NOTE, "seed_scheme": SEED_SCHEME,
                     "backend": kernels.BACKEND, **(metadata or {})},
        "results": [r.to_dict() for r in results],
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def format_table(results: Sequence[ExperimentResult]) -> str:
    """Plain-text summary, one block per window size, policies as rows."""
    lines = []
    for w in sorted({r.wsize for r in results}):
        cell = [r for r in results if r.wsize == w]
        n1s = sorted({r.n1 for r in cell})
        pols = sorted({r.policy for r in cell}, key=_order)
        lines.append(f"wsize = {w}")
        lines.append("policy " + "".join(f"{'N1=' + str(n):>18}" for n in n1s))
        for p in pols:
            vals = {r.n1: r for r in cell if r.policy == p}
            lines.append(f"{p:<7}" + "".join(
                f"{vals[n].mean:>10.2f} ± {vals[n].std:<5.2f}" if n in vals else " " * 18
                for n in n1s))
        lines.append("")
    return "\n".join(lines)
