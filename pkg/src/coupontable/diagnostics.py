"""Finite-n certificates: total variation to Poisson, Stein-Chen bounds,
KS distance to the normal, and the per-coupon miss-count law."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import special, stats

from .errors import DomainError, EmptyInput
from .exact import EXACT, LOGFLOAT, Pmf, cell_pmf, moments_recursive
from .model import MarginVector, validate_margins

Real = Union[float, Fraction]


@dataclass(frozen=True)
class PoissonLaw:
    """Poisson reference law; ``rate == 0`` is the point mass at 0."""

    rate: float

    def __post_init__(self):
        if not self.rate >= 0 or not math.isfinite(self.rate):
            raise DomainError(f"Poisson rate must be finite and >= 0, got {self.rate}")

    def pmf(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs)
        if self.rate == 0:
            return (xs == 0).astype(float)
        return stats.poisson.pmf(xs, self.rate)

    def mass_below(self, lo: int) -> float:
        """P(Y < lo)."""
        if lo <= 0:
            return 0.0
        if self.rate == 0:
            return 1.0
        return float(special.pdtr(lo - 1, self.rate))

    def mass_above(self, hi: int) -> float:
        """P(Y > hi)."""
        if hi < 0:
            return 1.0
        if self.rate == 0:
            return 0.0
        return float(special.pdtrc(hi, self.rate))


def _pmf_on(p: Pmf, lo: int, hi: int) -> np.ndarray:
    out = np.zeros(hi - lo + 1)
    vals = p.as_float()
    out[p.lo - lo : p.hi - lo + 1] = vals
    return out


def tv_distance(p1: Union[Pmf, PoissonLaw], p2: Union[Pmf, PoissonLaw]) -> Real:
    """Total variation distance ``(1/2) sum |p1 - p2|``.

    Exact (Fraction) when both arguments are exact pmfs.  Against a
    Poisson law the mass outside the finite support is added from the
    regularized incomplete gamma function.
    """
    if isinstance(p1, PoissonLaw) and isinstance(p2, PoissonLaw):
        raise DomainError("at least one argument must be a finite pmf")
    if isinstance(p1, PoissonLaw):
        p1, p2 = p2, p1
    if isinstance(p2, PoissonLaw):
        lo, hi = p1.lo, p1.hi
        xs = np.arange(lo, hi + 1)
        inside = np.abs(p1.as_float() - p2.pmf(xs)).sum()
        outside = p2.mass_below(lo) + p2.mass_above(hi)
        return float(min(1.0, 0.5 * (inside + outside)))
    lo, hi = min(p1.lo, p2.lo), max(p1.hi, p2.hi)
    if p1.exact and p2.exact:
        return sum((abs(p1.prob(x) - p2.prob(x)) for x in range(lo, hi + 1)), Fraction(0)) / 2
    diff = np.abs(_pmf_on(p1, lo, hi) - _pmf_on(p2, lo, hi)).sum()
    return float(min(1.0, 0.5 * diff))


def stein_chen_bound_I_II(E: Real, V: Real) -> Real:
    """``1 - V/E``: TV bound to ``Pois(E)`` for a sum of negatively related indicators."""
    if not E > 0:
        raise DomainError(f"mean must be positive, got {E}")
    if V < 0:
        raise DomainError(f"variance must be non-negative, got {V}")
    if V > E:
        raise DomainError(f"variance {V} exceeds mean {E}: not a negatively related indicator sum")
    return 1 - V / E


def poisson_binomial(qs: Sequence, exact: bool = True) -> Pmf:
    """Law of a sum of independent Bernoulli(q_i), by iterative convolution."""
    if exact:
        dist = [Fraction(1)]
        for q in qs:
            q = Fraction(q)
            if not 0 <= q <= 1:
                raise DomainError(f"probability {q} outside [0, 1]")
            nxt = [Fraction(0)] * (len(dist) + 1)
            for k, w in enumerate(dist):
                nxt[k] += w * (1 - q)
                nxt[k + 1] += w * q
            dist = nxt
        return Pmf(0, dist, EXACT)
    dist = np.ones(1)
    for q in qs:
        q = float(q)
        if not 0 <= q <= 1:
            raise DomainError(f"probability {q} outside [0, 1]")
        nxt = np.zeros(len(dist) + 1)
        nxt[:-1] += dist * (1 - q)
        nxt[1:] += dist * q
        dist = nxt
    return Pmf(0, dist, LOGFLOAT)


def miss_count_dist(mv: MarginVector, exact: bool = True) -> Pmf:
    """Number of collectors that miss one fixed coupon; collector i misses it w.p. ``(n - a_i)/n``."""
    mv = validate_margins(mv)
    return poisson_binomial([Fraction(mv.n - a, mv.n) for a in mv.a], exact=exact)


@dataclass(frozen=True)
class MissCountParams:
    theta: Fraction
    p: Fraction
    miss_probs: tuple[Fraction, ...]


def miss_count_params(mv: MarginVector) -> MissCountParams:
    """``theta = E(X) + (m-1)n - sum(a)`` and the share ``p`` of it carried by double misses."""
    mv = validate_margins(mv)
    mom = moments_recursive(mv)
    theta = mom.mean + (mv.m - 1) * mv.n - sum(mv.a)
    if theta <= 0:
        raise DomainError(f"theta={theta} must be positive")
    misses = miss_count_dist(mv)
    p = mv.n * misses.prob(2) / theta
    return MissCountParams(theta, p, tuple(Fraction(mv.n - a, mv.n) for a in mv.a))


def theta_from_misses(mv: MarginVector) -> Fraction:
    """``n * sum_k (k-1) P(k misses)``: the mean of the case (iii) sum, coupon by coupon."""
    misses = miss_count_dist(mv)
    return mv.n * sum(((k - 1) * misses.prob(k) for k in range(2, misses.hi + 1)), Fraction(0))


def stein_chen_bound_III(mv: MarginVector) -> Fraction:
    """``1 + theta + (1 - 2p)(V/theta + theta)``, evaluated exactly as written.

    The value can exceed 1, in which case it certifies nothing.
    """
    params = miss_count_params(mv)
    V = moments_recursive(mv).variance
    theta, p = params.theta, params.p
    return 1 + theta + (1 - 2 * p) * (V / theta + theta)


def ks_to_normal(p: Pmf, center: float, scale: float) -> float:
    """Continuity-corrected Kolmogorov distance to ``N(center, scale^2)``.

    Compares ``F(x)`` with ``Phi((x + 1/2 - center)/scale)`` at every
    support point and at the point just below the support.
    """
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    xs = np.arange(p.lo - 1, p.hi + 1)
    cdf = np.concatenate(([0.0], p.cdf_values()))
    phi = special.ndtr((xs + 0.5 - float(center)) / float(scale))
    return float(np.max(np.abs(cdf - phi)))


def empirical_pmf(samples: Iterable[int]) -> Pmf:
    """Normalised histogram as an exact pmf."""
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples)
    if arr.size == 0:
        raise EmptyInput("no samples")
    lo, hi = int(arr.min()), int(arr.max())
    counts = np.bincount(arr - lo, minlength=hi - lo + 1)
    total = int(arr.size)
    return Pmf(lo, [Fraction(int(c), total) for c in counts], EXACT)


def histogram_pmf(counts: dict[int, int]) -> Pmf:
    """Exact pmf from a ``value -> count`` histogram."""
    if not counts:
        raise EmptyInput("empty histogram")
    total = sum(counts.values())
    lo, hi = min(counts), max(counts)
    return Pmf(lo, [Fraction(counts.get(x, 0), total) for x in range(lo, hi + 1)], EXACT)


def diagnose(classification, n: int, mode: str | None = None) -> dict:
    """Finite-n report for a classified growth spec evaluated at ``n``."""
    from .asymptotics import PoissonCase, Regime, limit_statement
    from .model import eval_growth

    c = classification
    st = limit_statement(c)
    mv = eval_growth(c.spec, n)
    pmf = cell_pmf(mv, mode)
    mom = moments_recursive(mv)
    report = {
        "regime": c.regime.value,
        "n": n,
        "margins": list(mv.a),
        "mode": pmf.mode,
        "transform": st.describe(),
        "rho": c.rho,
        "theta": None,
        "tv_exact": None,
        "tv_limit": None,
        "tv_bound": None,
        "ks": None,
        "notes": [],
    }
    if c.regime is Regime.NORMAL:
        center = float(mom.mean)
        scale = math.sqrt(mom.variance)
        report["ks"] = ks_to_normal(pmf, center, scale)
        report["center"] = center
        report["scale"] = scale
        return report

    z = st.apply(pmf, n)
    V = mom.variance
    if c.case is PoissonCase.III:
        theta = mom.mean + (mv.m - 1) * mv.n - sum(mv.a)
    elif c.case is PoissonCase.II:
        theta = mv.a[0] - mom.mean
    else:
        theta = mom.mean
    report["theta"] = float(theta)
    report["tv_limit"] = tv_distance(z, PoissonLaw(c.rho))
    if theta <= 0:
        report["notes"].append("matching mean is zero; the shifted cell is identically 0")
        report["tv_exact"] = tv_distance(z, PoissonLaw(0.0))
        return report
    report["tv_exact"] = tv_distance(z, PoissonLaw(float(theta)))
    if c.case is PoissonCase.III:
        bound = stein_chen_bound_III(mv)
        report["p"] = float(miss_count_params(mv).p)
    else:
        try:
            bound = stein_chen_bound_I_II(theta, V)
        except DomainError as exc:
            bound = None
            report["notes"].append(str(exc))
    if bound is not None:
        report["tv_bound"] = float(bound)
        if bound > 1:
            report["notes"].append("bound exceeds 1 and is vacuous at this n")
        elif report["tv_exact"] > bound + 1e-12:
            report["notes"].append("exact TV exceeds the bound")
    if pmf.truncated_mass:
        report["truncated_mass"] = pmf.truncated_mass
    if c.regime is Regime.DEGENERATE:
        report["notes"].append("limit is the point mass at 0")
    return report
