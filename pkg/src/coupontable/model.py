"""Margin specifications: concrete margin vectors, symbolic growth specs and
general ``r_1 x ... x r_m`` margin tables, plus the reduction of a table
cell to the coupon-collector model."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    CellOutOfRange,
    DimensionError,
    DomainError,
    MarginOutOfRange,
    MarginSumError,
    SpecError,
)
from .powersum import PowerSum, compare, to_fraction

# float exponents in JSON are snapped to the nearest fraction with this bound
GAMMA_MAX_DENOMINATOR = 1000


@dataclass(frozen=True)
class MarginVector:
    """Grand total ``n`` and collector margins ``a``, stored sorted ascending.

    ``permutation[k]`` is the 1-based position, in the caller's ordering,
    of the k-th smallest margin.
    """

    n: int
    a: tuple[int, ...]
    permutation: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        n = _as_int(self.n, "n")
        a = tuple(_as_int(x, "margin") for x in self.a)
        if len(a) < 2:
            raise DimensionError(f"need at least two collectors, got m={len(a)}")
        if n < 2:
            raise MarginOutOfRange(f"n={n} leaves no admissible margin in [1, n-1]")
        for i, ai in enumerate(a, start=1):
            if not 1 <= ai <= n - 1:
                raise MarginOutOfRange(f"a_{i}={ai} outside [1, {n - 1}] for n={n}")
        if self.permutation:
            perm = tuple(self.permutation)
            if sorted(perm) != list(range(1, len(a) + 1)):
                raise DimensionError(f"bad permutation tag {perm}")
            if list(a) != sorted(a):
                raise DimensionError("margins with an explicit permutation must be sorted")
        else:
            order = sorted(range(len(a)), key=lambda i: a[i])
            perm = tuple(i + 1 for i in order)
            a = tuple(a[i] for i in order)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "permutation", perm)

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def original(self) -> tuple[int, ...]:
        """Margins in the order the caller supplied them."""
        out = [0] * self.m
        for k, pos in enumerate(self.permutation):
            out[pos - 1] = self.a[k]
        return tuple(out)

    @property
    def support(self) -> tuple[int, int]:
        """Smallest and largest possible value of the all-collected cell."""
        lo = max(0, sum(self.a) - (self.m - 1) * self.n)
        return lo, self.a[0]

    def to_dict(self) -> dict:
        return {"n": self.n, "a": list(self.original)}

    @classmethod
    def from_dict(cls, d: dict) -> "MarginVector":
        try:
            return cls(d["n"], tuple(d["a"]))
        except KeyError as exc:
            raise SpecError(f"margin vector JSON is missing {exc}") from None


def _as_int(x, what: str) -> int:
    if isinstance(x, bool):
        raise DomainError(f"{what} must be an integer, got {x!r}")
    if isinstance(x, int):
        return x
    if isinstance(x, float) and x.is_integer():
        return int(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    raise DomainError(f"{what} must be an integer, got {x!r}")


def validate_margins(mv: MarginVector) -> MarginVector:
    """Re-check ``mv`` and return its canonical (sorted) form.

    >>> validate_margins(MarginVector(10, (5, 4, 6))).permutation
    (2, 1, 3)
    """
    return MarginVector(mv.n, mv.a, mv.permutation)


@dataclass(frozen=True)
class MarginTable:
    """Concrete margins ``b_i(j)`` of an ``r_1 x ... x r_m`` table with total ``n``."""

    shape: tuple[int, ...]
    n: int
    margins: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        shape = tuple(_as_int(r, "shape entry") for r in self.shape)
        margins = tuple(tuple(_as_int(x, "margin") for x in row) for row in self.margins)
        n = _as_int(self.n, "n")
        if len(shape) < 2:
            raise DimensionError("a table needs at least two dimensions")
        if len(margins) != len(shape):
            raise DimensionError(f"{len(margins)} margin rows for a {len(shape)}-way table")
        for i, (r, row) in enumerate(zip(shape, margins), start=1):
            if r < 2:
                raise DimensionError(f"r_{i}={r} must be at least 2")
            if len(row) != r:
                raise DimensionError(f"margin {i} has {len(row)} entries, expected {r}")
            if any(x < 0 for x in row):
                raise MarginOutOfRange(f"margin {i} has a negative entry: {row}")
            if sum(row) != n:
                raise MarginSumError(f"margin {i} sums to {sum(row)}, expected n={n}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "margins", margins)
        object.__setattr__(self, "n", n)

    @property
    def m(self) -> int:
        return len(self.shape)

    def cells(self):
        """All cell references in row-major order."""
        import itertools

        for v in itertools.product(*(range(1, r + 1) for r in self.shape)):
            yield CellRef(v)

    def to_dict(self) -> dict:
        return {"shape": list(self.shape), "n": self.n, "margins": [list(r) for r in self.margins]}

    @classmethod
    def from_dict(cls, d: dict) -> "MarginTable":
        try:
            return cls(tuple(d["shape"]), d["n"], tuple(tuple(r) for r in d["margins"]))
        except KeyError as exc:
            raise SpecError(f"margin table JSON is missing {exc}") from None


@dataclass(frozen=True)
class CellRef:
    """1-based cell position ``v = (v_1, ..., v_m)``."""

    v: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(_as_int(x, "cell index") for x in self.v))

    @classmethod
    def parse(cls, text: str) -> "CellRef":
        try:
            return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))
        except ValueError:
            raise CellOutOfRange(f"cannot parse cell {text!r}") from None

    def label(self) -> str:
        return "".join(str(x) for x in self.v) if all(x < 10 for x in self.v) else ",".join(map(str, self.v))

    def __str__(self) -> str:
        return "(" + ",".join(str(x) for x in self.v) + ")"


def _check_cell(shape: Sequence[int], v) -> CellRef:
    if not isinstance(v, CellRef):
        v = CellRef(tuple(v))
    if len(v.v) != len(shape):
        raise CellOutOfRange(f"cell {v} has {len(v.v)} indices for a {len(shape)}-way table")
    for i, (vi, r) in enumerate(zip(v.v, shape), start=1):
        if not 1 <= vi <= r:
            raise CellOutOfRange(f"index v_{i}={vi} outside [1, {r}]")
    return v


def reduce_cell(t: MarginTable, v: CellRef) -> MarginVector:
    """Margin vector of the coupon model whose all-collected cell has the law of cell ``v``."""
    v = _check_cell(t.shape, v)
    a = tuple(t.margins[i][vi - 1] for i, vi in enumerate(v.v))
    for i, ai in enumerate(a, start=1):
        if ai in (0, t.n):
            raise MarginOutOfRange(
                f"margin b_{i}({v.v[i - 1]})={ai} is degenerate for n={t.n}; the cell is deterministic"
            )
    return MarginVector(t.n, a)


# ---------------------------------------------------------------------------
# symbolic margins


def power_sum_from_dict(d: dict) -> PowerSum:
    terms = d.get("terms") if isinstance(d, dict) else None
    if terms is None:
        raise SpecError(f"power sum needs a 'terms' list: {d!r}")
    acc = []
    for t in terms:
        try:
            c, g = t["c"], t["gamma"]
        except (KeyError, TypeError):
            raise SpecError(f"term needs 'c' and 'gamma': {t!r}") from None
        try:
            gamma = to_fraction(g, GAMMA_MAX_DENOMINATOR if isinstance(g, float) else None)
            coeff = to_fraction(c)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SpecError(f"bad term {t!r}: {exc}") from None
        acc.append((gamma, coeff))
    return PowerSum(acc)


def power_sum_to_dict(p: PowerSum) -> dict:
    return {"terms": [{"c": _frac_json(c), "gamma": _frac_json(g)} for g, c in p.items_desc()]}


def _frac_json(x: Fraction):
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _check_power_sum(p: PowerSum, label: str) -> None:
    for g in p.terms:
        if not 0 <= g <= 1:
            raise SpecError(f"{label}: exponent {g} outside [0, 1]")
    alpha = p.coefficient(1)
    if not 0 <= alpha <= 1:
        raise SpecError(f"{label}: n-coefficient {alpha} outside [0, 1]")
    # round-half-up stays in [1, n-1] for all large n
    if compare(p, PowerSum.constant(Fraction(1, 2))) < 0:
        raise SpecError(f"{label}: {p} eventually rounds below 1")
    if compare(PowerSum.n() - Fraction(1, 2), p) <= 0:
        raise SpecError(f"{label}: {p} eventually rounds to n or above")


@dataclass(frozen=True)
class GrowthSpec:
    """Collector margins as power sums in ``n``, valid for ``n >= n_min``."""

    collectors: tuple[PowerSum, ...]
    n_min: int = 2

    def __post_init__(self):
        cols = tuple(PowerSum.coerce(c) for c in self.collectors)
        if len(cols) < 2:
            raise DimensionError(f"need at least two collectors, got m={len(cols)}")
        for i, p in enumerate(cols, start=1):
            _check_power_sum(p, f"collector {i}")
        object.__setattr__(self, "collectors", cols)
        object.__setattr__(self, "n_min", _as_int(self.n_min, "n_min"))

    @property
    def m(self) -> int:
        return len(self.collectors)

    def alphas(self) -> tuple[Fraction, ...]:
        return tuple(p.coefficient(1) for p in self.collectors)

    def permuted(self, order: Sequence[int]) -> "GrowthSpec":
        return GrowthSpec(tuple(self.collectors[i] for i in order), self.n_min)

    def to_dict(self) -> dict:
        return {"n_min": self.n_min, "collectors": [power_sum_to_dict(p) for p in self.collectors]}

    @classmethod
    def from_dict(cls, d: dict) -> "GrowthSpec":
        if "collectors" not in d:
            raise SpecError("growth spec JSON is missing 'collectors'")
        return cls(tuple(power_sum_from_dict(c) for c in d["collectors"]), d.get("n_min", 2))

    def describe(self) -> str:
        return "(" + "; ".join(str(p) for p in self.collectors) + ")"


def eval_growth(g: GrowthSpec, n: int) -> MarginVector:
    """Concrete margins ``round_half_up(a_i(n))``.

    >>> eval_growth(GrowthSpec((PowerSum({0.5: 1}), PowerSum({1: 1, 0.5: -1}))), 10**4).a
    (100, 9900)
    """
    n = _as_int(n, "n")
    if n < g.n_min:
        raise DomainError(f"n={n} is below the spec's validity threshold n_min={g.n_min}")
    return MarginVector(n, tuple(p.round_half_up(n) for p in g.collectors))


@dataclass(frozen=True)
class GrowthTable:
    """A margin table whose entries ``b_i(j)`` are power sums in ``n``.

    Each row must add up to exactly ``n`` as a power sum.  Evaluation
    rounds entries independently; an ``n`` where rounding breaks a row
    sum is rejected rather than patched.
    """

    shape: tuple[int, ...]
    margins: tuple[tuple[PowerSum, ...], ...]
    n_min: int = 2

    def __post_init__(self):
        margins = tuple(tuple(PowerSum.coerce(x) for x in row) for row in self.margins)
        shape = tuple(self.shape)
        if len(margins) != len(shape) or len(shape) < 2:
            raise DimensionError("margin rows do not match the table shape")
        for i, (r, row) in enumerate(zip(shape, margins), start=1):
            if len(row) != r or r < 2:
                raise DimensionError(f"margin {i} has {len(row)} entries, expected {r} >= 2")
            total = sum(row, PowerSum())
            if total != PowerSum.n():
                raise MarginSumError(f"margin {i} sums to {total}, expected n")
        object.__setattr__(self, "margins", margins)
        object.__setattr__(self, "shape", shape)

    @property
    def m(self) -> int:
        return len(self.shape)

    def cells(self):
        import itertools

        for v in itertools.product(*(range(1, r + 1) for r in self.shape)):
            yield CellRef(v)

    def cell_growth(self, v: CellRef) -> GrowthSpec:
        v = _check_cell(self.shape, v)
        return GrowthSpec(tuple(self.margins[i][vi - 1] for i, vi in enumerate(v.v)), self.n_min)

    def evaluate(self, n: int) -> MarginTable:
        if n < self.n_min:
            raise DomainError(f"n={n} is below n_min={self.n_min}")
        rows = tuple(tuple(p.round_half_up(n) for p in row) for row in self.margins)
        return MarginTable(self.shape, n, rows)

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "n_min": self.n_min,
            "margins": [[power_sum_to_dict(p) for p in row] for row in self.margins],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GrowthTable":
        try:
            rows = tuple(tuple(power_sum_from_dict(p) for p in row) for row in d["margins"])
            return cls(tuple(d["shape"]), rows, d.get("n_min", 2))
        except KeyError as exc:
            raise SpecError(f"growth table JSON is missing {exc}") from None
