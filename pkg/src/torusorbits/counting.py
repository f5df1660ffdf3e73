"""Integer-polynomial bookkeeping for critical-point count bounds.

The target Poincare polynomial of the trapping-region pair is the torus
binomial row shifted by the expanding-block dimension.  A multiset of Morse
indices passes the Morse inequalities when its generating polynomial
exceeds the target by (1+t) times a polynomial with nonnegative integer
coefficients; the division is exact integer algebra with explicit failure
certificates, no floating point anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

__all__ = [
    "IntPolynomial",
    "poly_from_indices",
    "target_polynomial",
    "divide_by_one_plus_t",
    "MorseInequalityResult",
    "verify_morse_inequalities",
    "cup_length_bound",
    "Verdict",
    "adjudicate",
]


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial with integer coefficients; index = degree, trailing zeros trimmed."""

    coefficients: tuple

    def __post_init__(self):
        c = tuple(int(v) for v in self.coefficients)
        while c and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1 if self.coefficients else -1

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, k: int) -> int:
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return 0

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coefficients), len(other.coefficients))
        return IntPolynomial(
            tuple(self.coefficient(k) + other.coefficient(k) for k in range(n))
        )

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coefficients), len(other.coefficients))
        return IntPolynomial(
            tuple(self.coefficient(k) - other.coefficient(k) for k in range(n))
        )

    def shifted(self, n: int) -> "IntPolynomial":
        """Multiply by t^n."""
        if self.is_zero:
            return self
        return IntPolynomial((0,) * n + self.coefficients)

    def __call__(self, t: int) -> int:
        total = 0
        for c in reversed(self.coefficients):
            total = total * t + c
        return total

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            elif k == 1:
                parts.append(f"{c}t" if c != 1 else "t")
            else:
                parts.append(f"{c}t^{k}" if c != 1 else f"t^{k}")
        return " + ".join(parts)


def poly_from_indices(indices: Sequence[int]) -> IntPolynomial:
    """Generating polynomial sum_j t^{m_j} of an index multiset."""
    if not indices:
        return IntPolynomial(())
    top = max(indices)
    if min(indices) < 0:
        raise ValueError("Morse indices must be nonnegative")
    coeffs = [0] * (top + 1)
    for m in indices:
        coeffs[m] += 1
    return IntPolynomial(tuple(coeffs))


def target_polynomial(half_dim: int, positive_dim: int) -> IntPolynomial:
    """Torus binomial row shifted by the expanding-block dimension.

    Coefficient binom(2n, j) at degree j + positive_dim; the coefficients
    sum to 2^{2n}, the total Betti number of the 2n-torus.
    """
    if half_dim < 1:
        raise ValueError("half_dim must be >= 1")
    if positive_dim < 0:
        raise ValueError("positive_dim must be >= 0")
    row = tuple(comb(2 * half_dim, j) for j in range(2 * half_dim + 1))
    return IntPolynomial(row).shifted(positive_dim)


def divide_by_one_plus_t(poly: IntPolynomial):
    """Exact synthetic division: poly = (1 + t) * quotient + remainder.

    The remainder is the integer poly(-1).
    """
    if poly.is_zero:
        return IntPolynomial(()), 0
    coeffs = poly.coefficients
    q = [0] * max(len(coeffs) - 1, 0)
    carry = coeffs[-1]
    for i in range(len(coeffs) - 2, -1, -1):
        q[i] = carry
        carry = coeffs[i] - carry
    return IntPolynomial(tuple(q)), int(carry)


@dataclass(frozen=True)
class MorseInequalityResult:
    passed: bool
    surplus: Optional[IntPolynomial]  # Q with nonneg coefficients when passed
    remainder: int
    difference: IntPolynomial
    reason: str = ""


def verify_morse_inequalities(indices: Sequence[int],
                              target: IntPolynomial) -> MorseInequalityResult:
    """Check sum_j t^{m_j} = target + (1 + t) Q with Q >= 0 coefficientwise.

    Failure returns a certificate: the nonzero remainder or the offending
    negative coefficient of the would-be surplus Q.
    """
    difference = poly_from_indices(indices) - target
    q, remainder = divide_by_one_plus_t(difference)
    if remainder != 0:
        return MorseInequalityResult(
            passed=False, surplus=None, remainder=remainder, difference=difference,
            reason=f"difference is not divisible by (1+t): remainder {remainder}",
        )
    negatives = [c for c in q.coefficients if c < 0]
    if negatives:
        return MorseInequalityResult(
            passed=False, surplus=None, remainder=0, difference=difference,
            reason=f"surplus polynomial has negative coefficient {negatives[0]}",
        )
    return MorseInequalityResult(
        passed=True, surplus=q, remainder=0, difference=difference,
    )


def cup_length_bound(half_dim: int) -> int:
    """Degenerate-case lower bound for critical points on the 2n-torus: 2n+1."""
    if half_dim < 1:
        raise ValueError("half_dim must be >= 1")
    return 2 * half_dim + 1


@dataclass(frozen=True)
class Verdict:
    """Structured outcome of the count-bound checks for one search."""

    count: int
    cup_length_bound: int
    betti_sum_bound: int
    cup_length_pass: bool
    all_nondegenerate: bool
    betti_sum_pass: Optional[bool]  # None when skipped (degenerate orbits present)
    morse_surplus: Optional[IntPolynomial]
    morse_pass: Optional[bool]
    degenerate_family: bool

    @property
    def all_pass(self) -> bool:
        checks = [self.cup_length_pass]
        if self.betti_sum_pass is not None:
            checks.append(self.betti_sum_pass)
        if self.morse_pass is not None:
            checks.append(self.morse_pass)
        return all(checks)

    def lines(self):
        yield (f"count {self.count} >= cup length {self.cup_length_bound}: "
               f"{'pass' if self.cup_length_pass else 'FAIL'}"
               + (" (degenerate continuum)" if self.degenerate_family else ""))
        if self.betti_sum_pass is None:
            yield "count >= Betti sum: skipped (degenerate orbits present)"
        else:
            yield (f"count {self.count} >= Betti sum {self.betti_sum_bound}: "
                   f"{'pass' if self.betti_sum_pass else 'FAIL'}")
        if self.morse_pass is None:
            yield "Morse inequalities: skipped"
        else:
            yield (f"Morse inequalities (surplus {self.morse_surplus}): "
                   f"{'pass' if self.morse_pass else 'FAIL'}")


def adjudicate(report, records) -> Verdict:
    """Apply the count bounds and Morse inequalities to a search outcome.

    Args:
        report: a SearchReport.
        records: IndexRecord per oscillation (supplies the index multiset
            and the degree shift for the target polynomial).
    """
    count = report.count
    cup = cup_length_bound(report.arnold_degenerate_bound // 2)
    assert cup == report.arnold_degenerate_bound
    cup_pass = True if report.degenerate_family else count >= cup

    nondeg = report.all_nondegenerate and not report.degenerate_family
    betti_pass = None
    morse_pass = None
    surplus = None
    if nondeg:
        betti_pass = count >= report.arnold_nondegenerate_bound
        shifts = {r.positive_dim for r in records}
        halves = {r.half_dim for r in records}
        if len(shifts) != 1 or len(halves) != 1:
            raise ValueError("index records come from different reductions")
        target = target_polynomial(halves.pop(), shifts.pop())
        result = verify_morse_inequalities([r.morse_index for r in records], target)
        morse_pass = result.passed
        surplus = result.surplus
    return Verdict(
        count=count,
        cup_length_bound=cup,
        betti_sum_bound=report.arnold_nondegenerate_bound,
        cup_length_pass=cup_pass,
        all_nondegenerate=nondeg,
        betti_sum_pass=betti_pass,
        morse_surplus=surplus,
        morse_pass=morse_pass,
        degenerate_family=report.degenerate_family,
    )
