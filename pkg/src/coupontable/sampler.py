"""Monte Carlo sampling of the coupon-collector table.

Replications are grouped into fixed-size blocks and block ``b`` draws
from its own Philox stream keyed by ``(seed, b)``.  Results therefore do
not depend on how many worker processes share the blocks.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ResourceLimit
from .exact import hypergeom_rows, hypergeom_support
from .model import MarginVector, validate_margins

BLOCK_SIZE = 4096
BIRTHDAY_BLOCK_SIZE = 512
# numpy's hypergeometric sampler needs both urn counts below this
_NUMPY_URN_LIMIT = 10**9
FULL_TABLE_CAP = 2 * 10**8


def stream(seed: int, block: int = 0) -> np.random.Generator:
    """Independent counter-based generator for replication block ``block``."""
    if seed is None:
        raise DomainError("a seed is required")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed)


def run_blocks(fn: Callable, reps: int, block_size: int, workers: int, *args) -> list:
    """Evaluate ``fn(block, size, *args)`` for every block, in block order."""
    if reps < 1:
        raise DomainError(f"reps must be positive, got {reps}")
    jobs = []
    for b, start in enumerate(range(0, reps, block_size)):
        jobs.append((b, min(block_size, reps - start)))
    if workers <= 1 or len(jobs) == 1:
        return [fn(b, size, *args) for b, size in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, b, size, *args) for b, size in jobs]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# hypergeometric chain


def hypergeometric(rng: np.random.Generator, n: int, good, draws: int) -> np.ndarray:
    """Marked items among ``draws`` taken without replacement from ``n``, ``good`` of them marked."""
    good = np.asarray(good, dtype=np.int64)
    if n < _NUMPY_URN_LIMIT:
        return rng.hypergeometric(good, n - good, draws).astype(np.int64)
    # inverse-CDF over the exact conditional pmf of each distinct urn
    out = np.empty_like(good)
    u = rng.random(good.shape)
    for x in np.unique(good):
        lo, hi = hypergeom_support(n, int(x), draws)
        cdf = np.cumsum(hypergeom_rows(n, np.array([x]), draws, lo, hi)[0])
        mask = good == x
        out[mask] = lo + np.minimum(np.searchsorted(cdf, u[mask], side="right"), hi - lo)
    return out


def _chain(mv: MarginVector, rng: np.random.Generator, size: int) -> np.ndarray:
    x = np.full(size, mv.a[0], dtype=np.int64)
    for ak in mv.a[1:]:
        x = hypergeometric(rng, mv.n, x, ak)
    return x


def sample_cell(mv: MarginVector, seed, size: int | None = None):
    """Cell value(s) from ``m - 1`` sequential hypergeometric draws; no n-sized arrays."""
    mv = validate_margins(mv)
    rng = _as_rng(seed)
    if size is None:
        return int(_chain(mv, rng, 1)[0])
    return _chain(mv, rng, size)


def _cell_block(block: int, size: int, mv: MarginVector, seed: int) -> np.ndarray:
    return _chain(mv, stream(seed, block), size)


def sample_cells(mv: MarginVector, reps: int, seed: int, workers: int = 1) -> np.ndarray:
    """``reps`` independent cell values, identical for any worker count."""
    mv = validate_margins(mv)
    parts = run_blocks(_cell_block, reps, BLOCK_SIZE, workers, mv, seed)
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# full tables


@dataclass(frozen=True, eq=False)
class IndicatorMatrix:
    """``bits[i, j]`` is True when collector i holds coupon j."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] < 2:
            raise DomainError("indicator matrix must be m x n with m >= 2")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_sets(cls, n: int, sets: Sequence[Sequence[int]]) -> "IndicatorMatrix":
        """Build from 1-based coupon sets, one per collector."""
        bits = np.zeros((len(sets), n), dtype=bool)
        for i, s in enumerate(sets):
            bits[i, np.asarray(list(s), dtype=int) - 1] = True
        return cls(bits)

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    @property
    def n(self) -> int:
        return self.bits.shape[1]

    @property
    def margins(self) -> tuple[int, ...]:
        return tuple(int(s) for s in self.bits.sum(axis=1))

    @property
    def J(self) -> np.ndarray:
        return ~self.bits


def sample_indicators(mv: MarginVector, seed) -> IndicatorMatrix:
    """One draw: every collector takes a uniform ``a_i``-subset (partial shuffle)."""
    mv = validate_margins(mv)
    if mv.n * mv.m > FULL_TABLE_CAP:
        raise ResourceLimit(f"full table needs {mv.n * mv.m} indicators, cap is {FULL_TABLE_CAP}")
    rng = _as_rng(seed)
    bits = np.zeros((mv.m, mv.n), dtype=bool)
    for i, ai in enumerate(mv.a):
        bits[i, rng.choice(mv.n, size=ai, replace=False)] = True
    return IndicatorMatrix(bits)


def sample_indicator_batch(mv: MarginVector, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent indicator matrices stacked as ``(size, m, n)`` booleans."""
    mv = validate_margins(mv)
    keys = rng.random((size, mv.m, mv.n))
    ranks = np.argsort(np.argsort(keys, axis=2), axis=2)
    return ranks < np.asarray(mv.a)[None, :, None]


def cell_counts(bits: np.ndarray) -> np.ndarray:
    """All ``2^m`` cell counts; axis i index 0 means collected by i, 1 means missed."""
    bits = np.asarray(bits, dtype=bool)
    m = bits.shape[-2]
    weights = 1 << np.arange(m - 1, -1, -1)
    codes = np.tensordot(weights, (~bits).astype(np.int64), axes=([0], [-2]))
    if bits.ndim == 2:
        return np.bincount(codes, minlength=1 << m).reshape((2,) * m)
    flat = codes + (np.arange(codes.shape[0]) << m)[:, None]
    counts = np.bincount(flat.ravel(), minlength=codes.shape[0] << m)
    return counts.reshape((codes.shape[0],) + (2,) * m)


def sample_table(mv: MarginVector, seed) -> np.ndarray:
    """Counts of all ``2^m`` cells; ``table[v_1-1, ..., v_m-1]`` is cell ``v``."""
    return cell_counts(sample_indicators(mv, seed).bits)


@dataclass(frozen=True)
class DecompositionSums:
    Y: int
    Yp: int
    Ypp: int


def _decompose_bits(bits: np.ndarray):
    I = np.asarray(bits, dtype=bool)
    J = ~I
    Y = I.all(axis=-2).sum(axis=-1)
    Yp = (I[..., 0, :] & J[..., 1:, :].any(axis=-2)).sum(axis=-1)
    Ypp = np.maximum(J.sum(axis=-2) - 1, 0).sum(axis=-1)
    return Y, Yp, Ypp


def decompose(im: IndicatorMatrix) -> DecompositionSums:
    """Per-coupon indicator sums for ``X``, ``a_1 - X`` and ``X + (m-1)n - sum(a)``.

    Row 0 plays the role of the first collector.
    """
    Y, Yp, Ypp = _decompose_bits(im.bits)
    return DecompositionSums(int(Y), int(Yp), int(Ypp))


def decompose_batch(bits: np.ndarray):
    """Vectorised :func:`decompose` over a ``(size, m, n)`` stack."""
    return _decompose_bits(bits)


# ---------------------------------------------------------------------------
# birthday scenario


@dataclass(frozen=True)
class BirthdaySummary:
    n: int
    m: int
    reps: int
    seed: int
    mean: float
    var: float
    exact_mean: float
    histogram: dict

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "reps": self.reps,
            "seed": self.seed,
            "mean": self.mean,
            "var": self.var,
            "exact_mean": self.exact_mean,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def _birthday_block(block: int, size: int, n: int, m: int, seed: int) -> np.ndarray:
    rng = stream(seed, block)
    slots = np.sort(rng.integers(0, n, size=(size, m)), axis=1)
    distinct = 1 + (np.diff(slots, axis=1) != 0).sum(axis=1)
    return m - distinct


def birthday_scenario(n: int, m: int, reps: int, seed: int, workers: int = 1) -> BirthdaySummary:
    """Every collector misses one uniform coupon; summarise ``m - n + X``.

    ``X = n - #(coupons missed by someone)``, so ``m - n + X`` counts
    repeated misses.
    """
    if m < 2:
        raise DomainError(f"need m >= 2 collectors, got {m}")
    if n < 2:
        raise DomainError(f"need n >= 2 coupons, got {n}")
    values = np.concatenate(run_blocks(_birthday_block, reps, BIRTHDAY_BLOCK_SIZE, workers, n, m, seed))
    hist = Counter(int(v) for v in values)
    exact = m + n * math.expm1(m * math.log1p(-1 / n))
    return BirthdaySummary(
        n=n,
        m=m,
        reps=reps,
        seed=seed,
        mean=float(values.mean()),
        var=float(values.var(ddof=1)) if reps > 1 else 0.0,
        exact_mean=float(exact),
        histogram=dict(hist),
    )


def histogram(values: np.ndarray) -> dict[int, int]:
    vals, counts = np.unique(np.asarray(values), return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}
