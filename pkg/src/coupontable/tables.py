"""The two 3x2x2 example tables with power-sum margins.

Both share ``b_1 = (n^(1/4), n^(1/2), n - n^(1/4) - n^(1/2))`` and
``b_2 = (n^(1/2), n - n^(1/2))``; the first uses ``b_3 = b_2`` and the
second ``b_3 = (n/2, n/2)``.
"""

from __future__ import annotations

from fractions import Fraction

from .model import GrowthTable
from .powersum import PowerSum

N = PowerSum.n()
N14 = PowerSum.monomial(1, Fraction(1, 4))
N12 = PowerSum.monomial(1, Fraction(1, 2))

_B1 = (N14, N12, N - N14 - N12)
_B2 = (N12, N - N12)
_HALF = (PowerSum.monomial(Fraction(1, 2), 1), PowerSum.monomial(Fraction(1, 2), 1))

# n^(1/4) >= 1 and every row stays inside [1, n-1] from here on
N_MIN = 16

TABLES = {
    2: GrowthTable((3, 2, 2), (_B1, _B2, _B2), N_MIN),
    3: GrowthTable((3, 2, 2), (_B1, _B2, _HALF), N_MIN),
}

DEFAULT_N_GRID = (10**4, 10**6, 10**8)


def table(which: int) -> GrowthTable:
    try:
        return TABLES[which]
    except KeyError:
        raise ValueError(f"no example table {which!r}; choose from {sorted(TABLES)}") from None
