"""Bootstrap standard deviations and Monte Carlo permutation tests over
per-unit (hits, tokens) records.

The score of a set of units is the micro average ``sum(hits) / sum(tokens)``.

Replicates are generated in fixed blocks; block ``b`` draws from
``SeedSequence([seed, b])`` and the block size depends only on the number of
units. The random stream of any replicate is therefore a function of the
master seed, the input size and its index, so results are bit-identical
whatever the number of workers.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

BLOCK = 4096
# cap on the number of index cells materialized per block
BLOCK_CELLS = 1 << 22
DEFAULT_SAMPLES = 1_000_000
# equal rational score differences can round to different floats; closer
# than this counts as a tie
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SentenceStat:
    unit_id: str
    hits: int
    tokens: int

    def __post_init__(self):
        if self.tokens < 1 or not 0 <= self.hits <= self.tokens:
            raise ValueError(f"invalid unit {self.unit_id!r}: hits={self.hits}, tokens={self.tokens}")


@dataclass(frozen=True)
class BootstrapResult:
    statistic: float
    stddev: float
    samples: int
    seed: int
    replicate_mean: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass(frozen=True)
class PermutationResult:
    observed_diff: float
    p_value: float
    samples: int
    seed: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def _arrays(stats: Sequence[SentenceStat]) -> tuple[np.ndarray, np.ndarray]:
    hits = np.fromiter((s.hits for s in stats), dtype=np.int64, count=len(stats))
    tokens = np.fromiter((s.tokens for s in stats), dtype=np.int64, count=len(stats))
    return hits, tokens


def score(stats: Sequence[SentenceStat]) -> float:
    hits, tokens = _arrays(stats)
    return hits.sum() / tokens.sum()


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, block]))


def block_size(n_units: int) -> int:
    return max(1, min(BLOCK, BLOCK_CELLS // n_units))


def _run_blocks(fn: Callable[[int, int], np.ndarray], samples: int, n_units: int,
                workers: int) -> np.ndarray:
    size = block_size(n_units)
    sizes = [min(size, samples - start) for start in range(0, samples, size)]
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    else:
        parts = [fn(b, m) for b, m in jobs]
    return np.concatenate(parts)


def _check_args(samples: int, seed: int):
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")


def bootstrap_replicates(stats: Sequence[SentenceStat], samples: int, seed: int,
                         workers: int = 1) -> np.ndarray:
    """Micro-averaged score of each bootstrap replicate (units drawn with replacement)."""
    if not stats:
        raise ValueError("bootstrap needs at least one unit")
    _check_args(samples, seed)
    hits, tokens = _arrays(stats)
    n = len(hits)

    def block(b: int, m: int) -> np.ndarray:
        idx = block_rng(seed, b).integers(0, n, size=(m, n))
        return hits[idx].sum(axis=1) / tokens[idx].sum(axis=1)

    return _run_blocks(block, samples, n, workers)


def bootstrap_stddev(stats: Sequence[SentenceStat], samples: int = DEFAULT_SAMPLES,
                     seed: int = 0, workers: int = 1) -> BootstrapResult:
    reps = bootstrap_replicates(stats, samples, seed, workers)
    # constant replicates would otherwise pick up summation round-off
    stddev = float(reps.std(ddof=1)) if samples > 1 and np.ptp(reps) > 0 else 0.0
    return BootstrapResult(float(score(stats)), stddev, samples, seed, float(reps.mean()))


def permutation_test(group_a: Sequence[SentenceStat], group_b: Sequence[SentenceStat],
                     samples: int = DEFAULT_SAMPLES, seed: int = 0,
                     workers: int = 1) -> PermutationResult:
    """One-sided test that group A scores higher than group B.

    Each replicate reassigns the pooled units to groups of the original sizes.
    ``p = (1 + #{replicate diff >= observed}) / (1 + samples)``.
    """
    if not group_a or not group_b:
        raise ValueError("both groups must be non-empty")
    _check_args(samples, seed)
    observed = float(score(group_a) - score(group_b))

    # canonical pool order: the null distribution depends only on the pooled multiset
    pooled = sorted(((s.tokens, s.hits) for s in (*group_a, *group_b)))
    tokens = np.array([p[0] for p in pooled], dtype=np.int64)
    hits = np.array([p[1] for p in pooled], dtype=np.int64)
    total_h, total_t = hits.sum(), tokens.sum()
    n, na = len(pooled), len(group_a)

    def block(b: int, m: int) -> np.ndarray:
        perm = block_rng(seed, b).permuted(np.tile(np.arange(n), (m, 1)), axis=1)[:, :na]
        ha = hits[perm].sum(axis=1)
        ta = tokens[perm].sum(axis=1)
        diff = ha / ta - (total_h - ha) / (total_t - ta)
        return diff >= observed - TIE_TOLERANCE

    extreme = int(_run_blocks(block, samples, n, workers).sum())
    return PermutationResult(observed, (1 + extreme) / (1 + samples), samples, seed)
