"""Seeded Monte Carlo estimation of the strategy's success probability.

Trials are grouped into fixed-size blocks; block b draws all its randomness
from a Philox stream keyed by SeedSequence(seed, spawn_key=(b,)), and the walk
inside a block is vectorized across episodes.  Because the block layout
depends only on the trial count, results are a pure function of
(spec, thresholds, trials, seed) at any parallelism level, and aggregation is
exact integer addition.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import ProblemSpec, ResponseModel, ValidationError
from .policy import Genie, HorizonMismatch
from .solver import ThresholdSet

BLOCK_TRIALS = 8192


@dataclass(frozen=True)
class SimConfig:
    trials: int
    seed: int
    parallelism: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.parallelism < 1:
            raise ValidationError(f"parallelism must be >= 1, got {self.parallelism}")


@dataclass(frozen=True)
class SimResult:
    estimate: float
    stderr: float
    trials: int
    mean_queries: float


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed & (2**64 - 1), spawn_key=(block_index,))
    return np.random.Generator(np.random.Philox(ss))


def sample_permutation(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform random permutation of 1..n (Fisher-Yates with bounded ints)."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return rng.permutation(np.arange(1, n + 1, dtype=np.int64))


def sample_response(rng: np.random.Generator, model: ResponseModel, is_best: bool) -> int:
    """One expert response level, drawn from p if is_best else from q."""
    u = rng.random()
    dist = model.p if is_best else model.q
    cum = 0.0
    for m, prob in enumerate(dist, start=1):
        cum += float(prob)
        if u < cum:
            return m
    return model.M


def model_genie(rng: np.random.Generator, model: ResponseModel) -> Genie:
    """Genie callable for run_strategy, backed by sample_response."""
    return lambda t, is_best: sample_response(rng, model, is_best)


def _simulate_block(args: tuple) -> tuple[int, int, int]:
    (n, K, M, r_f, r, s, p, q, seed, block_index, block_size) = args
    rng = _block_rng(seed, block_index)
    B = block_size
    perms = np.tile(np.arange(1, n + 1, dtype=np.int64), (B, 1))
    rng.permuted(perms, axis=1, out=perms)
    is_rec = perms == np.minimum.accumulate(perms, axis=1)
    best_pos = np.argmin(perms, axis=1) + 1

    r_arr = np.asarray(r, dtype=np.int64)
    s_arr = np.asarray(s, dtype=np.int64).reshape(K, M) if K else np.zeros((0, M), np.int64)
    cp = np.cumsum(np.asarray(p, dtype=np.float64))
    cq = np.cumsum(np.asarray(q, dtype=np.float64))

    k = np.ones(B, dtype=np.int64)  # index of the next query; K+1 once spent
    alive = np.ones(B, dtype=bool)
    successes = 0
    queries = 0
    for t in range(1, n + 1):
        rec = alive & is_rec[:, t - 1]
        if not rec.any():
            continue
        fin = rec & (k > K) if t >= r_f else None
        if K:
            cand = np.flatnonzero(rec & (k <= K))
            if cand.size:
                qidx = cand[t >= r_arr[k[cand] - 1]]
                if qidx.size:
                    ib = best_pos[qidx] == t
                    u = rng.random(qidx.size)
                    lev = np.where(
                        ib,
                        np.searchsorted(cp, u, side="right"),
                        np.searchsorted(cq, u, side="right"),
                    )
                    np.clip(lev, 0, M - 1, out=lev)
                    stop = t >= s_arr[k[qidx] - 1, lev]
                    successes += int(np.count_nonzero(stop & ib))
                    queries += int(qidx.size)
                    alive[qidx[stop]] = False
                    k[qidx[~stop]] += 1
        if fin is not None:
            fidx = np.flatnonzero(fin)
            if fidx.size:
                successes += int(np.count_nonzero(best_pos[fidx] == t))
                alive[fidx] = False
    return successes, queries, B


def _block_args(spec: ProblemSpec, thresholds: ThresholdSet, cfg: SimConfig) -> list[tuple]:
    p = tuple(float(x) for x in spec.model.p)
    q = tuple(float(x) for x in spec.model.q)
    args = []
    remaining = cfg.trials
    block_index = 0
    while remaining > 0:
        size = min(BLOCK_TRIALS, remaining)
        args.append(
            (
                spec.n,
                spec.K,
                spec.model.M,
                thresholds.r_f,
                thresholds.r,
                thresholds.s,
                p,
                q,
                cfg.seed,
                block_index,
                size,
            )
        )
        remaining -= size
        block_index += 1
    return args


def monte_carlo(spec: ProblemSpec, thresholds: ThresholdSet, cfg: SimConfig) -> SimResult:
    """Estimate the success probability over cfg.trials independent episodes."""
    if thresholds.n != spec.n:
        raise HorizonMismatch(f"thresholds for n={thresholds.n}, spec has n={spec.n}")
    args = _block_args(spec, thresholds, cfg)
    if cfg.parallelism == 1 or len(args) == 1:
        results = [_simulate_block(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            results = list(pool.map(_simulate_block, args))
    successes = sum(r[0] for r in results)
    queries = sum(r[1] for r in results)
    estimate = successes / cfg.trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / cfg.trials)
    return SimResult(
        estimate=estimate,
        stderr=stderr,
        trials=cfg.trials,
        mean_queries=queries / cfg.trials,
    )
