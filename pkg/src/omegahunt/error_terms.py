"""Exact error terms and their truncated oscillating-series counterparts.

The two remainders are

    delta(y) = sum_{n<=y} d(n) - y (log y + 2*gamma - 1)
    p(y)     = sum_{n<=y} r(n) - pi y

evaluated exactly through the O(sqrt y) summatory functions, and the
series forms approximate delta(x^2) and p(x^2):

    delta(x^2) ~  x^(1/2)/(pi sqrt 2) * sum_{n<=N} d(n) n^(-3/4) cos(4 pi sqrt(n) x - pi/4)
    p(x^2)     ~ -x^(1/2)/pi          * sum_{n<=N} r(n) n^(-3/4) cos(2 pi sqrt(n) x + pi/4)

Phases are reduced mod 2 in 80-bit precision before multiplying by pi, so
phase error stays ~1e-12 throughout the supported range (plain double
would already be sufficient for the 0.5-level residual tolerances, but the
extended path removes that caveat).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, RangeError
from .sieve import ArithmeticTable, circle_summatory, divisor_summatory, to_fraction

# Euler-Mascheroni constant to 40 significant digits; the float64 value is
# its correctly rounded truncation.
EULER_GAMMA_STR = "0.5772156649015328606065120900824024310422"
EULER_GAMMA = float(EULER_GAMMA_STR)

PI_STR = "3.141592653589793238462643383279502884197"

KINDS = ("divisor", "circle")

# epsilon used in the scaled-residual statistic |residual| / x^(1/2 - eps)
RESIDUAL_EPSILON = 1.0 / 1000.0


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}, got {kind!r}")
    return kind


def delta_exact(y) -> float:
    """Exact divisor error term at y >= 1.

    The summatory part is an exact integer; the smooth part is evaluated in
    float64, whose ~1e-16 relative rounding is far below the 1e-9 relative
    accuracy target against the main term for y <= 1e12.
    """
    yf = to_fraction(y)
    if yf < 1:
        raise DomainError(f"delta_exact requires y >= 1, got {y!r}")
    yy = float(yf)
    return divisor_summatory(yf) - yy * (math.log(yy) + 2.0 * EULER_GAMMA - 1.0)


def p_exact(y) -> float:
    """Exact circle error term at y >= 1 (sum over n >= 1, origin excluded)."""
    yf = to_fraction(y)
    if yf < 1:
        raise DomainError(f"p_exact requires y >= 1, got {y!r}")
    return circle_summatory(yf) - math.pi * float(yf)


class VoronoiSeries:
    """Truncated series evaluator over a fixed arithmetic table.

    Precomputes sqrt(n) in extended precision and the weights w(n) once, so
    repeated evaluations cost one pass over the first `n_terms` entries.
    kind 'divisor' uses w(n) = d(n) n^(-3/4) with frequency 2 sqrt(n) and
    phase -pi/4; kind 'circle' uses w(n) = r(n) n^(-3/4) with frequency
    sqrt(n) and phase +pi/4 plus a global minus sign.
    """

    def __init__(self, kind: str, table: ArithmeticTable):
        self.kind = _check_kind(kind)
        self.table = table
        n = np.arange(1, table.limit + 1, dtype=np.int64)
        base = table.d if kind == "divisor" else table.r
        self._weights = base[1:].astype(np.float64) * np.power(
            n.astype(np.float64), -0.75
        )
        self._sqrt_n = np.sqrt(n.astype(np.longdouble))
        # 4 sqrt(n) x for the divisor phase, 2 sqrt(n) x for the circle
        self._freq_scale = 4.0 if kind == "divisor" else 2.0
        self._phase_offset = -math.pi / 4.0 if kind == "divisor" else math.pi / 4.0
        self._sign = 1.0 if kind == "divisor" else -1.0
        self._amp = 1.0 / (math.pi * math.sqrt(2.0)) if kind == "divisor" else 1.0 / math.pi

    def _require_terms(self, n_terms: int) -> int:
        n_terms = int(n_terms)
        if n_terms < 1:
            raise DomainError(f"n_terms must be >= 1, got {n_terms}")
        if n_terms > self.table.limit:
            raise RangeError(
                f"series needs {n_terms} sieved terms, table holds {self.table.limit}"
            )
        return n_terms

    def phase_sum(self, x, n_terms: int) -> float:
        """sum_{n<=N} w(n) cos(2 pi c sqrt(n) x + phase), the x^(1/2)-free part."""
        n_terms = self._require_terms(n_terms)
        if isinstance(x, Fraction):
            xl = np.longdouble(x.numerator) / np.longdouble(x.denominator)
        elif isinstance(x, str):
            xl = np.longdouble(x)
        else:
            xl = np.longdouble(float(x))
        ph = np.mod(self._freq_scale * self._sqrt_n[:n_terms] * xl, 2.0).astype(
            np.float64
        )
        return float(
            np.sum(self._weights[:n_terms] * np.cos(np.pi * ph + self._phase_offset))
        )

    def value(self, x, n_terms: int) -> float:
        """Series approximation to the error term at x^2."""
        x = float(x)
        if x <= 1.0:
            raise DomainError(f"series variable must exceed 1, got {x}")
        return self._sign * self._amp * math.sqrt(x) * self.phase_sum(x, n_terms)

    def envelope(self, n_terms: int) -> float:
        """Triangle-inequality bound sum_{n<=N} w(n) on |phase_sum|."""
        n_terms = self._require_terms(n_terms)
        return float(np.sum(self._weights[:n_terms]))

    def exact(self, x) -> float:
        """The matching exact error term at x^2."""
        y = to_fraction(x) ** 2
        return delta_exact(y) if self.kind == "divisor" else p_exact(y)


def voronoi_delta(x, n_terms: int, table: ArithmeticTable) -> float:
    """Truncated series for delta(x^2) with n_terms terms."""
    return VoronoiSeries("divisor", table).value(x, n_terms)


def voronoi_p(x, n_terms: int, table: ArithmeticTable) -> float:
    """Truncated series for p(x^2); note the global minus sign."""
    return VoronoiSeries("circle", table).value(x, n_terms)


@dataclass(frozen=True)
class ErrorTermSample:
    """One comparison of the exact error term with its truncated series."""

    kind: str
    x: float              # series variable; the error term lives at x^2
    exact_value: float
    series_value: float
    residual: float       # exact_value - series_value
    terms_used: int


@dataclass(frozen=True)
class ScanResult:
    samples: tuple
    max_abs_residual: float
    max_scaled_residual: float   # max |residual| / x^(1/2 - eps), eps = 1/1000


def residual_scan(
    kind: str,
    x_samples: Sequence,
    n_terms: int,
    table: ArithmeticTable,
) -> ScanResult:
    """Exact-vs-series residuals at each sample point.

    Samples should satisfy x^2 not an integer (at integers the series
    converges to the jump midpoint) and stay loosely inside the uniform
    range (X^(1/2), X^3) implied by N = floor(X^(3.1)); violations only
    warn, they do not abort the scan.
    """
    _check_kind(kind)
    xs = [float(v) for v in x_samples]
    if not xs:
        return ScanResult(samples=(), max_abs_residual=0.0, max_scaled_residual=0.0)
    implied_x = float(n_terms) ** (1.0 / 3.1)
    lo, hi = math.sqrt(implied_x), implied_x**3
    out_of_range = [x for x in xs if not lo < x < hi]
    if out_of_range:
        warnings.warn(
            f"{len(out_of_range)} sample(s) outside the nominal range "
            f"({lo:.3g}, {hi:.3g}) for N={n_terms}; residual bounds are "
            f"uncalibrated there",
            stacklevel=2,
        )
    series = VoronoiSeries(kind, table)
    samples = []
    for x in xs:
        if (to_fraction(x) ** 2).denominator == 1:
            warnings.warn(
                f"x={x!r} has integer square; series hits a jump midpoint",
                stacklevel=2,
            )
        exact = series.exact(x)
        approx = series.value(x, n_terms)
        samples.append(
            ErrorTermSample(
                kind=kind,
                x=x,
                exact_value=exact,
                series_value=approx,
                residual=exact - approx,
                terms_used=int(n_terms),
            )
        )
    max_abs = max(abs(s.residual) for s in samples)
    max_scaled = max(
        abs(s.residual) / s.x ** (0.5 - RESIDUAL_EPSILON) for s in samples
    )
    return ScanResult(
        samples=tuple(samples),
        max_abs_residual=max_abs,
        max_scaled_residual=max_scaled,
    )
