"""Order statistics of the sequences d(n) n^(-3/4) and r(n) n^(-3/4).

S(M) and L(M) are the sums of the M largest sequence values (the circle
sequence restricted to r(n) > 0); N(y) counts members with
n^(3/4)/w(n) <= y.  Exponent fits regress log(N(y) / y^(4/3)) on
log log y, whose asymptotic slopes are 2^(4/3)-1 (divisor) and
2^(1/3)-1 (circle).

Completeness beyond the sieve range is certified with the explicit bound
d(n) <= n^(C / log log n) (and r(n) <= 4 d(n)); the certificate is
conservative and fails long before the scanned top-M set actually loses
members, so every operation takes `strict`: strict=True raises RangeError
when the certificate cannot be established, strict=False documents the
result as exact over the scanned range only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DomainError, RangeError
from .sieve import (
    DIVISOR_BOUND_C,
    ArithmeticTable,
    _count_ratio_le,
    to_fraction,
)

KINDS = ("divisor", "circle")

# (3/4)(2^(4/3) - 1) and (3/4)(2^(1/3) - 1): log-power of the predicted
# growth of S(M) and L(M)
DIVISOR_SUM_EXPONENT = 0.75 * (2.0 ** (4.0 / 3.0) - 1.0)
CIRCLE_SUM_EXPONENT = 0.75 * (2.0 ** (1.0 / 3.0) - 1.0)

# 2^(4/3) - 1 and 2^(1/3) - 1: log-power in the counting asymptotics
DIVISOR_COUNT_EXPONENT = 2.0 ** (4.0 / 3.0) - 1.0
CIRCLE_COUNT_EXPONENT = 2.0 ** (1.0 / 3.0) - 1.0


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}, got {kind!r}")
    return kind


def sequence_values(kind: str, table: ArithmeticTable) -> np.ndarray:
    """w(n) n^(-3/4) for n = 1..limit (0 where the circle sequence is
    undefined); index 0 of the returned array is unused."""
    _check_kind(kind)
    w = table.d if kind == "divisor" else table.r
    n = np.arange(0, table.limit + 1, dtype=np.float64)
    n[0] = 1.0
    return w.astype(np.float64) * n**-0.75


def certificate_floor(kind: str, limit: int) -> float:
    """Certified upper bound for w(n) n^(-3/4) over all n > limit.

    Uses d(n) <= n^(C/loglog n) (valid for n >= 3) and r(n) <= 4 d(n); the
    bound function decreases beyond the limit once C/loglog(limit) < 3/4,
    so its value at `limit` dominates the tail.  Returns +inf when the
    limit is too small to certify anything.
    """
    _check_kind(kind)
    if limit < 100:
        return math.inf
    expo = DIVISOR_BOUND_C / math.log(math.log(limit)) - 0.75
    if expo >= 0.0:
        return math.inf
    scale = 1.0 if kind == "divisor" else 4.0
    return scale * limit**expo


def largest_terms(
    kind: str, M: int, table: ArithmeticTable, strict: bool = True
) -> List[Tuple[int, float]]:
    """The M largest sequence values as (n, value), ties broken to smaller n.

    strict=True additionally requires the M-th value to exceed the
    certified tail bound, making the multiset provably complete over all
    of N, not just the scanned range.
    """
    _check_kind(kind)
    M = int(M)
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    vals = sequence_values(kind, table)
    eligible = int(np.count_nonzero(vals[1:] > 0.0))
    if M > eligible:
        raise RangeError(
            f"only {eligible} sequence members in the scanned range, need {M}"
        )
    take = min(table.limit, 4 * M + 64)
    idx = np.argpartition(-vals[1:], take - 1)[:take] + 1
    order = sorted((float(-vals[i]), int(i)) for i in idx)
    top = [(n, -negv) for negv, n in order[:M]]
    if strict:
        floor = certificate_floor(kind, table.limit)
        if not top[-1][1] >= floor:
            raise RangeError(
                f"completeness not certifiable: {M}-th value {top[-1][1]:.6g} "
                f"is below the tail bound {floor:.6g} for limit {table.limit}; "
                f"enlarge the sieve or pass strict=False for scan-range results"
            )
    return top


def extremal_sum(kind: str, M: int, table: ArithmeticTable, strict: bool = True) -> float:
    """S(M) (divisor) or L(M) (circle): exactly-rounded sum of the top M
    values, accumulated with compensated summation."""
    return math.fsum(v for _, v in largest_terms(kind, M, table, strict=strict))


@dataclass(frozen=True)
class ExtremalSumTable:
    """S(M)/L(M) rows: (M, sum, n_M, y_M) with y_M = n_M^(3/4) / w(n_M)."""

    kind: str
    entries: Tuple[Tuple[int, float, int, float], ...]
    scan_limit: int
    certified: Tuple[bool, ...]    # per entry: complete over all of N

    def sums(self) -> List[float]:
        return [e[1] for e in self.entries]


def sum_table(
    kind: str, Ms: Sequence[int], table: ArithmeticTable, strict: bool = False
) -> ExtremalSumTable:
    """Batch S(M)/L(M) over increasing M with per-entry certificates."""
    _check_kind(kind)
    Ms = [int(M) for M in Ms]
    if Ms != sorted(Ms) or len(set(Ms)) != len(Ms):
        raise DomainError("Ms must be strictly increasing")
    top = largest_terms(kind, max(Ms), table, strict=strict)
    floor = certificate_floor(kind, table.limit)
    entries = []
    certified = []
    values = [v for _, v in top]
    for M in Ms:
        n_M, v_M = top[M - 1]
        entries.append((M, math.fsum(values[:M]), n_M, 1.0 / v_M))
        certified.append(v_M >= floor)
    return ExtremalSumTable(
        kind=kind,
        entries=tuple(entries),
        scan_limit=table.limit,
        certified=tuple(certified),
    )


def count_below(kind: str, y, table: ArithmeticTable, strict: bool = True) -> int:
    """N(y) = |{n : n^(3/4) / w(n) <= y}| decided exactly (n^3 <= y^4 w^4).

    Equivalent to the weighted count at threshold x = y^(4/3).  strict=True
    certifies that no n beyond the table can satisfy the inequality, i.e.
    y < 1 / certificate_floor; strict=False counts the scanned range.
    """
    _check_kind(kind)
    yf = to_fraction(y)
    if yf <= 0:
        return 0
    if strict:
        floor = certificate_floor(kind, table.limit)
        if not float(yf) < 1.0 / floor:
            raise RangeError(
                f"count at y={float(yf):g} not certifiable with limit "
                f"{table.limit} (certified up to y < {1.0 / floor:g}); "
                f"enlarge the sieve or pass strict=False"
            )
    w = table.d if kind == "divisor" else table.r
    return _count_ratio_le(w, yf, power_num=3, power_thresh=4)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    counts: Tuple[int, ...]


def fit_log_exponent(y_grid: Sequence[float], counts: Sequence[int]) -> FitResult:
    """Least-squares slope of log(count / y^(4/3)) against log log y.

    The intercept absorbs the unknown leading constant; only the slope is
    compared with the theoretical log-power.
    """
    ys = np.asarray([float(y) for y in y_grid], dtype=np.float64)
    cs = np.asarray([int(c) for c in counts], dtype=np.float64)
    if len(ys) != len(cs):
        raise DomainError("grid and counts must align")
    _validate_grid(ys)
    if np.any(cs < 1):
        raise DomainError("counts must be >= 1 for the log fit")
    lx = np.log(np.log(ys))
    ly = np.log(cs / ys ** (4.0 / 3.0))
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        counts=tuple(int(c) for c in counts),
    )


def _validate_grid(ys: np.ndarray) -> None:
    if len(ys) < 8:
        raise DomainError(f"need >= 8 grid points, got {len(ys)}")
    if not np.all(np.diff(ys) > 0):
        raise DomainError("grid must be strictly increasing")
    if ys[0] <= 1.0:
        raise DomainError("grid must exceed 1 (log log must exist)")
    if ys[-1] / ys[0] < 100.0:
        raise DomainError("grid must span at least two decades")


def exponent_fit(
    kind: str, y_grid: Sequence[float], table: ArithmeticTable
) -> FitResult:
    """Fit the counting exponent on real counts over the scanned range.

    Counts use strict=False: beyond y ~ 1/certificate_floor they are lower
    bounds (members past the sieve limit are not seen), which flattens the
    fit at the top of wide grids; interpret slopes accordingly.
    """
    _check_kind(kind)
    ys = np.asarray([float(y) for y in y_grid], dtype=np.float64)
    _validate_grid(ys)
    counts = [count_below(kind, to_fraction(float(y)), table, strict=False) for y in ys]
    if any(c < 1 for c in counts):
        raise DomainError("grid extends below the smallest sequence value")
    return fit_log_exponent(ys, counts)


def predicted_order(kind: str, M: int) -> float:
    """Normalization M^(1/4) (log M)^e with the kind's log-power, constant 1."""
    _check_kind(kind)
    M = int(M)
    if M < 3:
        raise DomainError(f"predicted_order needs M >= 3, got {M}")
    e = DIVISOR_SUM_EXPONENT if kind == "divisor" else CIRCLE_SUM_EXPONENT
    return M**0.25 * math.log(M) ** e
