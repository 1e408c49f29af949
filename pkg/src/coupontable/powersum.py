"""Exact arithmetic on generalized power sums ``sum_k c_k * n**g_k``.

Coefficients and exponents are :class:`fractions.Fraction`, so sums,
products and cancellations are exact.  Exponents may be negative, which
lets ratios such as ``a_i / n`` stay inside the algebra.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Union

import mpmath

Number = Union[int, Fraction]


def to_fraction(value, max_denominator: int | None = None) -> Fraction:
    """Coerce an int, Fraction, decimal string, ``"p/q"`` string or float.

    Floats go through their shortest repr, so ``0.25`` becomes ``1/4``;
    ``max_denominator`` optionally snaps them to a nearby simple fraction.
    """
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, bool):
        raise TypeError("boolean is not a number")
    elif isinstance(value, int):
        frac = Fraction(value)
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        frac = Fraction(repr(value))
    elif isinstance(value, str):
        frac = Fraction(value.strip())
    else:
        raise TypeError(f"cannot convert {type(value).__name__} to Fraction")
    if max_denominator is not None:
        frac = frac.limit_denominator(max_denominator)
    return frac


def _integer_root(value: int, q: int) -> int | None:
    """Return ``r`` with ``r**q == value`` or None."""
    if value < 0:
        return None
    if q == 1:
        return value
    guess = int(mpmath.nint(mpmath.root(mpmath.mpf(value), q)))
    for r in (guess - 1, guess, guess + 1):
        if r >= 0 and r**q == value:
            return r
    return None


class PowerSum:
    """Immutable finite sum of terms ``c * n**g``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict[Fraction, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for gamma, coeff in items:
            g = to_fraction(gamma)
            c = to_fraction(coeff)
            acc[g] = acc.get(g, Fraction(0)) + c
        self._terms = {g: c for g, c in acc.items() if c != 0}

    # construction helpers
    @classmethod
    def constant(cls, c: Number) -> "PowerSum":
        return cls({0: c})

    @classmethod
    def monomial(cls, c: Number, gamma: Number) -> "PowerSum":
        return cls({gamma: c})

    @classmethod
    def n(cls) -> "PowerSum":
        return cls({1: 1})

    @classmethod
    def coerce(cls, other) -> "PowerSum":
        if isinstance(other, PowerSum):
            return other
        return cls.constant(to_fraction(other))

    # container protocol
    @property
    def terms(self) -> dict[Fraction, Fraction]:
        return dict(self._terms)

    def items_desc(self):
        return sorted(self._terms.items(), key=lambda t: t[0], reverse=True)

    def coefficient(self, gamma: Number) -> Fraction:
        return self._terms.get(to_fraction(gamma), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        try:
            other = PowerSum.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def leading(self) -> tuple[Fraction, Fraction]:
        """``(exponent, coefficient)`` of the dominant term as n grows."""
        if not self._terms:
            raise ValueError("zero power sum has no leading term")
        g = max(self._terms)
        return g, self._terms[g]

    def max_exponent(self) -> Fraction | None:
        return max(self._terms) if self._terms else None

    def truncate_below(self, gamma: Number) -> "PowerSum":
        """Drop every term with exponent strictly below ``gamma``."""
        g0 = to_fraction(gamma)
        return PowerSum({g: c for g, c in self._terms.items() if g >= g0})

    def exponent_denominators(self) -> set[int]:
        return {g.denominator for g in self._terms}

    # arithmetic
    def __add__(self, other):
        other = PowerSum.coerce(other)
        merged = dict(self._terms)
        for g, c in other._terms.items():
            merged[g] = merged.get(g, Fraction(0)) + c
        return PowerSum(merged)

    __radd__ = __add__

    def __neg__(self):
        return PowerSum({g: -c for g, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-PowerSum.coerce(other))

    def __rsub__(self, other):
        return PowerSum.coerce(other) - self

    def __mul__(self, other):
        other = PowerSum.coerce(other)
        out: dict[Fraction, Fraction] = {}
        for g1, c1 in self._terms.items():
            for g2, c2 in other._terms.items():
                g = g1 + g2
                out[g] = out.get(g, Fraction(0)) + c1 * c2
        return PowerSum(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = PowerSum.constant(1)
        for _ in range(k):
            result = result * self
        return result

    def scale_exponent(self, shift: Number) -> "PowerSum":
        """Multiply by ``n**shift``."""
        s = to_fraction(shift)
        return PowerSum({g + s: c for g, c in self._terms.items()})

    # evaluation
    def evaluate(self, n, prec: int | None = None) -> mpmath.mpf:
        """Real value at ``n`` in multiprecision arithmetic."""
        n = int(n) if not isinstance(n, mpmath.mpf) else n
        bits = prec or max(200, 4 * int(mpmath.log(max(n, 2), 2)) + 128)
        with mpmath.workprec(bits):
            nn = mpmath.mpf(n)
            total = mpmath.mpf(0)
            for g, c in self._terms.items():
                term = mpmath.mpf(c.numerator) / c.denominator
                if g != 0:
                    term *= mpmath.power(nn, mpmath.mpf(g.numerator) / g.denominator)
                total += term
            return +total

    def exact_value(self, n: int) -> Fraction | None:
        """Value at integer ``n`` as a Fraction when every power is rational."""
        total = Fraction(0)
        for g, c in self._terms.items():
            p, q = g.numerator, g.denominator
            if p >= 0:
                root = _integer_root(n**p, q)
                if root is None:
                    return None
                total += c * root
            else:
                root = _integer_root(n ** (-p), q)
                if root is None:
                    return None
                total += c / root
        return total

    def round_half_up(self, n: int) -> int:
        """``floor(value + 1/2)``, exact when possible, otherwise multiprecision."""
        exact = self.exact_value(n)
        if exact is not None:
            return math.floor(exact + Fraction(1, 2))
        bits = max(256, 8 * int(n).bit_length() + 128)
        with mpmath.workprec(bits):
            val = self.evaluate(n, prec=bits)
            return int(mpmath.floor(val + mpmath.mpf(1) / 2))

    def __call__(self, n):
        return self.evaluate(n)

    # rendering
    def __repr__(self) -> str:
        return f"PowerSum({self})"

    def __str__(self) -> str:
        return self.format()

    def format(self, var: str = "n") -> str:
        if not self._terms:
            return "0"
        pieces = []
        for g, c in self.items_desc():
            if g == 0:
                body = _fmt_num(abs(c))
            else:
                base = var if g == 1 else f"{var}^({g})"
                mag = abs(c)
                body = base if mag == 1 else f"{_fmt_num(mag)}*{base}"
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out


def _fmt_num(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"({c})"


def compare(a: PowerSum, b: PowerSum) -> int:
    """Asymptotic comparison: sign of ``a(n) - b(n)`` for all large n."""
    diff = a - b
    if diff.is_zero():
        return 0
    return 1 if diff.leading()[1] > 0 else -1


class RationalPowerSum:
    """Quotient of two power sums, used to carry exact variance recursions."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        self.num = PowerSum.coerce(num)
        self.den = PowerSum.coerce(den)
        if self.den.is_zero():
            raise ZeroDivisionError("zero denominator")

    def __add__(self, other):
        other = other if isinstance(other, RationalPowerSum) else RationalPowerSum(other)
        if self.den == other.den:
            return RationalPowerSum(self.num + other.num, self.den)
        return RationalPowerSum(self.num * other.den + other.num * self.den, self.den * other.den)

    def __mul__(self, other):
        other = other if isinstance(other, RationalPowerSum) else RationalPowerSum(other)
        return RationalPowerSum(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        other = other if isinstance(other, RationalPowerSum) else RationalPowerSum(other)
        return RationalPowerSum(self.num * other.den, self.den * other.num)

    def leading(self) -> tuple[Fraction, Fraction] | None:
        if self.num.is_zero():
            return None
        gn, cn = self.num.leading()
        gd, cd = self.den.leading()
        return gn - gd, cn / cd
