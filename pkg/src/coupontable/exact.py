"""Exact finite-n law and moments of the all-collected cell.

Given the running intersection ``X^(k-1) = x`` of the first ``k-1``
collectors, the next collector's random ``a_k``-subset hits
``X^(k) ~ Hypergeometric(n, x, a_k)`` of those coupons.  Propagating this
chain from ``X^(1) = a_1`` gives the law of the cell.  Sorting the margins
first keeps the support inside ``[0, a_1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceLimit
from .model import MarginVector, validate_margins

EXACT = "exact"
LOGFLOAT = "logfloat"
MODES = (EXACT, LOGFLOAT)

# auto mode switches to floating point above this grand total
EXACT_MAX_N = 10**4
DEFAULT_SUPPORT_CAP = 10**6
UNDERFLOW = 1e-300
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function on ``offset, offset+1, ...``.

    ``probs`` is a tuple of Fractions in exact mode and a float array in
    log-float mode.  ``truncated_mass`` is the probability dropped from
    the tails because it underflowed.
    """

    offset: int
    probs: Sequence
    mode: str = EXACT
    truncated_mass: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown arithmetic mode {self.mode!r}")
        if self.mode == EXACT:
            probs = [Fraction(p) for p in self.probs]
            lo, hi = _trim_bounds([p != 0 for p in probs])
            probs = tuple(probs[lo:hi])
        else:
            arr = np.asarray(self.probs, dtype=float)
            keep = arr >= UNDERFLOW
            lo, hi = _trim_bounds(keep)
            dropped = float(arr[:lo].sum() + arr[hi:].sum())
            probs = arr[lo:hi].copy()
            probs.setflags(write=False)
            object.__setattr__(self, "truncated_mass", float(self.truncated_mass) + dropped)
        if len(probs) == 0:
            raise DomainError("a pmf needs at least one support point")
        if any(p < 0 for p in probs):
            raise DomainError("negative probability")
        object.__setattr__(self, "offset", int(self.offset) + lo)
        object.__setattr__(self, "probs", probs)

    # basic accessors
    def __len__(self) -> int:
        return len(self.probs)

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    @property
    def lo(self) -> int:
        return self.offset

    @property
    def hi(self) -> int:
        return self.offset + len(self.probs) - 1

    def support(self) -> range:
        return range(self.lo, self.hi + 1)

    def prob(self, x: int):
        if self.lo <= x <= self.hi:
            return self.probs[x - self.offset]
        return Fraction(0) if self.exact else 0.0

    def as_float(self) -> np.ndarray:
        if self.exact:
            return np.array([float(p) for p in self.probs])
        return np.asarray(self.probs, dtype=float)

    def total(self):
        return sum(self.probs, Fraction(0)) if self.exact else float(np.sum(self.probs))

    def mean(self):
        if self.exact:
            return self.offset + sum((i * p for i, p in enumerate(self.probs)), Fraction(0))
        p = self.as_float()
        return self.offset + float(np.dot(np.arange(len(p)), p) / p.sum())

    def var(self):
        if self.exact:
            mu = self.mean() - self.offset
            return sum(((i - mu) ** 2 * p for i, p in enumerate(self.probs)), Fraction(0))
        p = self.as_float()
        p = p / p.sum()
        i = np.arange(len(p))
        mu = np.dot(i, p)
        return float(np.dot((i - mu) ** 2, p))

    def cdf_values(self) -> np.ndarray:
        """CDF at each support point, as floats."""
        return np.cumsum(self.as_float())

    def transform(self, sign: int, shift: int = 0) -> "Pmf":
        """Law of ``sign * X + shift``."""
        if sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        if sign == 1:
            return Pmf(self.offset + shift, self.probs, self.mode, self.truncated_mass)
        probs = self.probs[::-1]
        return Pmf(shift - self.hi, probs, self.mode, self.truncated_mass)

    def to_float(self) -> "Pmf":
        if not self.exact:
            return self
        return Pmf(self.offset, self.as_float(), LOGFLOAT)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pmf):
            return NotImplemented
        if self.mode != other.mode or self.offset != other.offset or len(self) != len(other):
            return False
        if self.exact:
            return tuple(self.probs) == tuple(other.probs)
        return bool(np.array_equal(self.probs, other.probs))

    def __repr__(self) -> str:
        head = ", ".join(str(p) for p in list(self.probs)[:6])
        tail = ", ..." if len(self) > 6 else ""
        return f"Pmf(offset={self.offset}, mode={self.mode}, probs=[{head}{tail}])"


def _trim_bounds(nonzero) -> tuple[int, int]:
    idx = [i for i, nz in enumerate(nonzero) if nz]
    if not idx:
        return 0, 0
    return idx[0], idx[-1] + 1


@dataclass(frozen=True)
class MomentSequence:
    """Means ``E_k`` and variances ``V_k`` of the running intersection, k = 1..m."""

    E: tuple[Fraction, ...]
    V: tuple[Fraction, ...]
    n: int = field(default=0)

    @property
    def mean(self) -> Fraction:
        return self.E[-1]

    @property
    def variance(self) -> Fraction:
        return self.V[-1]


def _resolve_mode(mode: str | None, n: int) -> str:
    if mode is None:
        return EXACT if n <= EXACT_MAX_N else LOGFLOAT
    if mode not in MODES:
        raise DomainError(f"unknown arithmetic mode {mode!r}; use {EXACT!r} or {LOGFLOAT!r}")
    return mode


def _check_hypergeom_args(n: int, successes: int, draws: int) -> None:
    for name, v in (("n", n), ("successes", successes), ("draws", draws)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise DomainError(f"{name} must be an integer, got {v!r}")
    if n < 0 or successes < 0 or draws < 0:
        raise DomainError(f"negative argument in hypergeometric({n}, {successes}, {draws})")
    if successes > n or draws > n:
        raise DomainError(f"successes={successes} and draws={draws} must not exceed n={n}")


def hypergeom_support(n: int, successes: int, draws: int) -> tuple[int, int]:
    return max(0, draws + successes - n), min(successes, draws)


def hypergeom_pmf(n: int, successes: int, draws: int, mode: str = EXACT) -> Pmf:
    """Number of marked items in ``draws`` draws without replacement.

    >>> hypergeom_pmf(4, 2, 2).probs
    (Fraction(1, 6), Fraction(2, 3), Fraction(1, 6))
    """
    _check_hypergeom_args(n, successes, draws)
    lo, hi = hypergeom_support(n, successes, draws)
    if _resolve_mode(mode, n) == EXACT:
        total = math.comb(n, draws)
        counts = [math.comb(successes, x) * math.comb(n - successes, draws - x) for x in range(lo, hi + 1)]
        return Pmf(lo, [Fraction(c, total) for c in counts], EXACT)
    rows = hypergeom_rows(n, np.array([successes]), draws, lo, hi)
    return Pmf(lo, rows[0], LOGFLOAT)


def hypergeom_rows(n: int, successes: np.ndarray, draws: int, ylo: int, yhi: int) -> np.ndarray:
    """Float hypergeometric pmfs, one row per entry of ``successes``, on columns ``ylo..yhi``.

    Rows are built from consecutive pmf ratios accumulated in log space and
    normalised, which avoids the cancellation of log-gamma differences at
    large ``n``.  The caller guarantees every row's support lies inside the
    column range.
    """
    x = np.asarray(successes, dtype=np.int64)[:, None].astype(float)
    y = np.arange(ylo, yhi + 1, dtype=float)[None, :]
    lower = np.maximum(0.0, x + draws - n)
    upper = np.minimum(x, float(draws))
    step = (y > lower) & (y <= upper)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (
            np.log(np.where(step, x - y + 1, 1.0))
            + np.log(np.where(step, draws - y + 1, 1.0))
            - np.log(np.where(step, y, 1.0))
            - np.log(np.where(step, n - x - draws + y, 1.0))
        )
    logp = np.cumsum(r, axis=1)
    valid = (y >= lower) & (y <= upper)
    logp = np.where(valid, logp, -np.inf)
    logp -= logp.max(axis=1, keepdims=True)
    p = np.exp(logp)
    p /= p.sum(axis=1, keepdims=True)
    return p


def variance_m2(n: int, a1: int, a2: int) -> Fraction:
    """Variance of the two-collector cell, ``a1 a2 (n-a1)(n-a2) / (n^2 (n-1))``."""
    for a in (a1, a2):
        if isinstance(a, bool) or not isinstance(a, int) or not 1 <= a <= n - 1:
            raise DomainError(f"margin {a!r} outside [1, n-1] for n={n}")
    return Fraction(a1 * a2 * (n - a1) * (n - a2), n * n * (n - 1))


def moments_recursive(mv: MarginVector) -> MomentSequence:
    """``E_k`` and ``V_k`` by the law of total variance along the chain."""
    mv = validate_margins(mv)
    n = mv.n
    E = [Fraction(mv.a[0])]
    V = [Fraction(0)]
    for ak in mv.a[1:]:
        e_prev, v_prev = E[-1], V[-1]
        first = Fraction(ak * (n - ak)) * e_prev * (n - e_prev) / (n * n * (n - 1))
        second = Fraction(ak * (ak - 1), n * (n - 1)) * v_prev
        E.append(Fraction(ak, n) * e_prev)
        V.append(first + second)
    return MomentSequence(tuple(E), tuple(V), n)


def cell_pmf(mv: MarginVector, mode: str | None = None, support_cap: int = DEFAULT_SUPPORT_CAP) -> Pmf:
    """Exact law of the all-collected cell.

    ``mode`` is ``"exact"`` (rationals), ``"logfloat"``, or None to pick
    exact arithmetic for ``n <= 10**4``; the returned Pmf records the mode.
    """
    mv = validate_margins(mv)
    mode = _resolve_mode(mode, mv.n)
    lo, hi = mv.support
    if hi - lo + 1 > support_cap:
        raise ResourceLimit(f"cell support of size {hi - lo + 1} exceeds the cap {support_cap}")
    if mode == EXACT:
        return _cell_pmf_exact(mv)
    return _cell_pmf_float(mv)


def _cell_pmf_exact(mv: MarginVector) -> Pmf:
    n = mv.n
    counts = {mv.a[0]: 1}
    denom = 1
    for ak in mv.a[1:]:
        nxt: dict[int, int] = {}
        for x, cx in counts.items():
            ylo, yhi = hypergeom_support(n, x, ak)
            # C(x, y) and C(n-x, ak-y) updated incrementally from y = ylo
            c1 = math.comb(x, ylo)
            c2 = math.comb(n - x, ak - ylo)
            for y in range(ylo, yhi + 1):
                nxt[y] = nxt.get(y, 0) + cx * c1 * c2
                if y < yhi:
                    c1 = c1 * (x - y) // (y + 1)
                    c2 = c2 * (ak - y) // (n - x - ak + y + 1)
        counts = nxt
        denom *= math.comb(n, ak)
    lo = min(counts)
    hi = max(counts)
    return Pmf(lo, [Fraction(counts.get(y, 0), denom) for y in range(lo, hi + 1)], EXACT)


def _cell_pmf_float(mv: MarginVector) -> Pmf:
    n = mv.n
    lo, hi = mv.a[0], mv.a[0]
    p = np.ones(1)
    truncated = 0.0
    for ak in mv.a[1:]:
        nlo, nhi = max(0, lo + ak - n), min(hi, ak)
        width = nhi - nlo + 1
        xs = np.arange(lo, hi + 1)
        out = np.zeros(width)
        rows_per_chunk = max(1, _CHUNK_ELEMENTS // width)
        for start in range(0, len(xs), rows_per_chunk):
            sl = slice(start, start + rows_per_chunk)
            H = hypergeom_rows(n, xs[sl], ak, nlo, nhi)
            out += p[sl] @ H
        keep = np.nonzero(out >= UNDERFLOW)[0]
        i0, i1 = keep[0], keep[-1] + 1
        truncated += float(out[:i0].sum() + out[i1:].sum())
        p = out[i0:i1]
        lo, hi = nlo + i0, nlo + i1 - 1
    return Pmf(lo, p, LOGFLOAT, truncated)
