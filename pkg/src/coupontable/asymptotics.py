"""Limit classification of the all-collected cell from symbolic margins.

The variance of the cell has the same order as
``(n - a_1)(n - a_2)/n * prod(a_i/n)``.  If that diverges the cell is
asymptotically normal.  Otherwise the two smallest margin fractions
select one of three Poisson forms (``X``, ``a_1 - X`` or
``X + (m-1)n - sum(a_i)``), whose mean converges to the Poisson rate;
rate zero means the shifted cell collapses to a point mass at 0.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import NoConvergence, SpecError, Unclassifiable
from .exact import Pmf, moments_recursive
from .model import GrowthSpec, eval_growth
from .powersum import PowerSum, RationalPowerSum, compare

RHO_TOL = 1e-6
RHO_AGREEMENT = 1e-4
RHO_MAX_DOUBLINGS = 480
RHO_STABLE_STEPS = 3


class Regime(str, enum.Enum):
    DEGENERATE = "Degenerate"
    POISSON_I = "PoissonI"
    POISSON_II = "PoissonII"
    POISSON_III = "PoissonIII"
    NORMAL = "Normal"


class PoissonCase(str, enum.Enum):
    I = "I"  # noqa: E741
    II = "II"
    III = "III"


_CASE_REGIME = {
    PoissonCase.I: Regime.POISSON_I,
    PoissonCase.II: Regime.POISSON_II,
    PoissonCase.III: Regime.POISSON_III,
}
_ALPHA_CASE = {(0, 0): PoissonCase.I, (0, 1): PoissonCase.II, (1, 1): PoissonCase.III}


def canonical_order(g: GrowthSpec) -> list[int]:
    """Indices of the collectors sorted by asymptotic size (stable on ties)."""
    key = functools.cmp_to_key(lambda i, j: compare(g.collectors[i], g.collectors[j]))
    return sorted(range(g.m), key=key)


def canonical(g: GrowthSpec) -> GrowthSpec:
    return g.permuted(canonical_order(g))


def alpha_limits(g: GrowthSpec) -> list[Fraction]:
    """Limits ``a_i/n``, in canonical order."""
    alphas = [p.coefficient(1) for p in canonical(g).collectors]
    for i, a in enumerate(alphas, start=1):
        if not 0 <= a <= 1:
            raise SpecError(f"alpha_{i}={a} outside [0, 1]")
    return alphas


def _order_expression(g: GrowthSpec) -> PowerSum:
    c = canonical(g).collectors
    n = PowerSum.n()
    expr = (n - c[0]) * (n - c[1])
    for p in c:
        expr = expr * p
    return expr.scale_exponent(-(g.m + 1))


def variance_order(g: GrowthSpec) -> tuple[Fraction, Fraction]:
    """Leading ``(exponent, coefficient)`` of ``(n-a_1)(n-a_2)/n * prod(a_i/n)``.

    This fixes the growth order of the cell variance; the coefficient is
    that of the order expression, not of the variance itself.
    """
    expr = _order_expression(g)
    if expr.is_zero():
        raise SpecError("order expression vanishes identically")
    return expr.leading()


def mean_power_sum(g: GrowthSpec) -> PowerSum:
    """``E_m = n * prod(a_i / n)`` as a power sum."""
    out = PowerSum.n()
    for p in g.collectors:
        out = out * p.scale_exponent(-1)
    return out


def variance_rational(g: GrowthSpec) -> RationalPowerSum:
    """``V_m`` from the variance recursion, carried symbolically."""
    c = canonical(g).collectors
    n = PowerSum.n()
    one = PowerSum.constant(1)
    e_prev = c[0]
    v_prev = RationalPowerSum(PowerSum())
    for ak in c[1:]:
        first = RationalPowerSum(ak * (n - ak) * e_prev * (n - e_prev), n * n * (n - one))
        second = RationalPowerSum(ak * (ak - one), n * (n - one)) * v_prev
        v_prev = first + second
        e_prev = ak * e_prev.scale_exponent(-1)
    return v_prev


def matching_shift(g: GrowthSpec, case: PoissonCase) -> tuple[int, PowerSum]:
    """``(sign, shift)`` such that ``sign * X + shift`` has the Poisson limit."""
    c = canonical(g).collectors
    if case is PoissonCase.I:
        return 1, PowerSum()
    if case is PoissonCase.II:
        return -1, c[0]
    total = sum(c, PowerSum())
    return 1, PowerSum.monomial(g.m - 1, 1) - total


def matching_mean(g: GrowthSpec, case: PoissonCase) -> PowerSum:
    sign, shift = matching_shift(g, case)
    return mean_power_sum(g) * sign + shift


def rho_convergence(g: GrowthSpec, case: PoissonCase, tol: float = RHO_TOL,
                    max_doublings: int = RHO_MAX_DOUBLINGS):
    """Evaluate the matching mean along ``n = n_min * 2**j`` in multiprecision.

    Returns ``(estimate, trace)`` once ``RHO_STABLE_STEPS`` successive
    differences fall below ``tol``; raises NoConvergence otherwise.
    """
    g = canonical(g)
    sign, shift = matching_shift(g, case)
    n0 = max(g.n_min, 2)
    trace: list[tuple[int, float]] = []
    prev = None
    stable = 0
    for j in range(max_doublings + 1):
        n = n0 * 2**j
        bits = max(200, 2 * n.bit_length() + 128)
        with mpmath.workprec(bits):
            nn = mpmath.mpf(n)
            mean = nn
            for p in g.collectors:
                mean *= p.evaluate(n, prec=bits) / nn
            value = sign * mean + shift.evaluate(n, prec=bits)
        trace.append((n, float(value)))
        if prev is not None and abs(value - prev) < tol:
            stable += 1
            if stable >= RHO_STABLE_STEPS:
                return float(value), trace
        else:
            stable = 0
        prev = value
    raise NoConvergence(f"matching mean did not stabilise within {max_doublings} doublings", trace)


def rho_estimate(g: GrowthSpec, case: PoissonCase) -> float:
    """Numerical limit of the matching mean for the given Poisson case."""
    return rho_convergence(g, PoissonCase(case))[0]


@dataclass(frozen=True)
class Classification:
    regime: Regime
    rho: float | None
    alphas: tuple[Fraction, ...]
    case: PoissonCase | None
    spec: GrowthSpec
    rho_exact: Fraction | None = None
    evidence: dict = field(default_factory=dict, compare=False)

    @property
    def is_poisson(self) -> bool:
        return self.regime is not Regime.NORMAL

    def to_dict(self) -> dict:
        out = {
            "regime": self.regime.value,
            "rho": self.rho,
            "rho_exact": _frac_str(self.rho_exact),
            "case": self.case.value if self.case else None,
            "alphas": [_frac_str(a) for a in self.alphas],
            "margins": [str(p) for p in self.spec.collectors],
            "variance_order": {
                "exponent": _frac_str(self.evidence.get("order_exponent")),
                "coefficient": _frac_str(self.evidence.get("order_coefficient")),
            },
        }
        if "rho_numeric" in self.evidence:
            out["rho_numeric"] = self.evidence["rho_numeric"]
        out["transform"] = limit_statement(self).describe()
        return out


def _frac_str(x):
    if x is None:
        return None
    return str(x)


def _check_growth_assumptions(g: GrowthSpec) -> None:
    n = PowerSum.n()
    for i, p in enumerate(g.collectors, start=1):
        if p.leading()[0] <= 0:
            raise SpecError(f"collector {i} margin {p} does not grow with n")
        rest = n - p
        if rest.is_zero() or rest.leading()[0] <= 0:
            raise SpecError(f"collector {i} complement n - ({p}) does not grow with n")


def classify(g: GrowthSpec, numeric_check: bool = True) -> Classification:
    """Classify the limit law of the cell for the margins ``g``."""
    g = canonical(g)
    _check_growth_assumptions(g)
    alphas = tuple(alpha_limits(g))
    exponent, coeff = variance_order(g)
    evidence = {"order_exponent": exponent, "order_coefficient": coeff}
    if exponent > 0:
        return Classification(Regime.NORMAL, None, alphas, None, g, None, evidence)

    key = (alphas[0], alphas[1])
    if key not in _ALPHA_CASE:
        raise Unclassifiable(f"bounded variance order with alpha_1, alpha_2 = {key} outside {{0, 1}}")
    case = _ALPHA_CASE[key]
    mean = matching_mean(g, case)
    top = mean.max_exponent()
    if top is not None and top > 0:
        raise Unclassifiable(f"matching mean {mean} diverges although the variance order is bounded")
    rho = mean.coefficient(0)
    evidence["matching_mean"] = mean
    var_lead = variance_rational(g).leading()
    evidence["variance_leading"] = var_lead
    var_limit = Fraction(0) if var_lead is None or var_lead[0] < 0 else var_lead[1]
    if var_lead is not None and var_lead[0] > 0:
        raise Unclassifiable("exact variance diverges although the order expression is bounded")
    if var_limit != rho or (exponent == 0) != (rho > 0):
        raise Unclassifiable(f"matching mean limit {rho} disagrees with variance limit {var_limit}")
    if numeric_check:
        numeric, trace = rho_convergence(g, case)
        evidence["rho_numeric"] = numeric
        evidence["rho_trace"] = trace
        if abs(numeric - float(rho)) > RHO_AGREEMENT:
            raise Unclassifiable(f"numerical rate {numeric} disagrees with exact limit {rho}")
    regime = Regime.DEGENERATE if rho == 0 else _CASE_REGIME[case]
    return Classification(regime, float(rho), alphas, case, g, rho, evidence)


@dataclass(frozen=True)
class LimitStatement:
    """``sign * X + shift(n)``, divided by ``scale(n)``, converges to ``law``.

    For Poisson-type limits ``shift`` is exact at each n and ``scale`` is 1.
    For normal limits ``center`` and ``scale_squared`` hold the leading
    asymptotic terms, while ``shift(n)``/``scale(n)`` use the exact moments.
    """

    sign: int
    law: str
    rho: float | None
    spec: GrowthSpec
    case: PoissonCase | None
    shift_sum: PowerSum
    scale_squared: tuple[Fraction, Fraction] | None = None

    def shift(self, n: int) -> int | float:
        if self.law == "StandardNormal":
            return -float(moments_recursive(eval_growth(self.spec, n)).mean)
        mv = eval_growth(self.spec, n)
        if self.case is PoissonCase.II:
            return mv.a[0]
        if self.case is PoissonCase.III:
            return (mv.m - 1) * mv.n - sum(mv.a)
        return 0

    def scale(self, n: int) -> float:
        if self.law == "StandardNormal":
            return math.sqrt(moments_recursive(eval_growth(self.spec, n)).variance)
        return 1.0

    def center(self) -> PowerSum:
        """Leading-order centering of the normal limit (``-shift``)."""
        return -self.shift_sum

    def apply(self, pmf: Pmf, n: int) -> Pmf:
        """Law of ``sign * X + shift(n)`` for Poisson-type statements."""
        if self.law == "StandardNormal":
            raise ValueError("normal statements are not lattice transforms")
        return pmf.transform(self.sign, self.shift(n))

    def law_label(self) -> str:
        if self.law == "PointMass":
            return "PointMass(0)"
        if self.law == "Poisson":
            return f"Pois({self.rho:g})"
        return "N(0,1)"

    def describe(self) -> str:
        if self.law == "StandardNormal":
            g, c = self.scale_squared
            sd = PowerSum.monomial(1, g / 2).format()
            return f"(X - ({self.center()})) / (sqrt({c})*{sd}) -> {self.law_label()}"
        lhs = "X" if self.sign == 1 else "-X"
        if not self.shift_sum.is_zero():
            tail = self.shift_sum.format()
            lhs += f" - {tail[1:]}" if tail.startswith("-") else f" + {tail}"
        return f"{lhs} -> {self.law_label()}"


def limit_statement(c: Classification, g: GrowthSpec | None = None) -> LimitStatement:
    """Affine transform of the cell and its limit law.

    ``g`` is optional; if given it must be a reordering of the classified spec.
    """
    if g is not None and canonical(g).collectors != c.spec.collectors:
        raise SpecError("growth spec does not match the classification")
    g = c.spec
    if c.regime is Regime.NORMAL:
        mean = mean_power_sum(g)
        lead = variance_rational(g).leading()
        keep = mean.truncate_below(lead[0] / 2)
        return LimitStatement(1, "StandardNormal", None, g, None, -keep, lead)
    sign, shift = matching_shift(g, c.case)
    law = "PointMass" if c.regime is Regime.DEGENERATE else "Poisson"
    return LimitStatement(sign, law, c.rho, g, c.case, shift)
