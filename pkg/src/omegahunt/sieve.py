"""Exact arithmetic tables and O(sqrt x) summatory functions.

Provides:
- a linear sieve computing d(n) (divisor count) and r(n) (representations
  as a sum of two squares, counting signs and order) exactly,
- divisor_summatory via the Dirichlet hyperbola identity,
- circle_summatory via the quarter-disc character identity, in O(sqrt x),
- weighted counts |{n : n * g(n) <= x}| for multiplicative weights g.

All counts are exact integers; real thresholds are handled as exact
rationals so that floor/comparison never suffers float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import numpy as np
from numba import njit

from .errors import DomainError, RangeError, SizeError

Real = Union[int, float, Fraction, str]

# Default allocation budget for build_table.  Transient sieve state costs
# ~14 bytes/entry, the retained table ~24 bytes/entry (d,r int32 + two
# int64 prefix arrays).
MAX_SIEVE_LIMIT = 100_000_000

# d(n) <= n^(DIVISOR_BOUND_C / log log n) for n >= 3 (Nicolas-Robin, with
# C = 1.5379 * log 2 rounded up).  Used for scan-completeness certificates.
DIVISOR_BOUND_C = 1.06602


def to_fraction(x: Real) -> Fraction:
    """Convert an exact numeric input to Fraction.

    Accepts int, Fraction, decimal strings ("12.25"), and float (converted
    via its exact binary value).  The CLI always passes strings, so decimal
    inputs near an integer floor correctly.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        if not math.isfinite(f):
            raise DomainError(f"non-finite argument {x!r}")
        return Fraction(f)
    raise DomainError(f"unsupported numeric type {type(x).__name__}")


def floor_exact(x: Real) -> int:
    """Floor of an exact numeric input, never through float rounding."""
    return math.floor(to_fraction(x))


@njit(cache=True)
def _sieve_d_rho(limit):  # pragma: no cover - exercised via build_table
    """Linear (Euler) sieve for d(n) and rho(n) = r(n)/4.

    rho is multiplicative with rho(2^m) = 1, rho(p^m) = m + 1 for
    p = 1 mod 4, and rho(p^m) = (1 + (-1)^m)/2 for p = 3 mod 4.
    `core[n]` holds n with its smallest prime power divided out, which
    keeps every update a pure integer multiplication.
    """
    d = np.ones(limit + 1, np.int32)
    rho = np.ones(limit + 1, np.int32)
    d[0] = 0
    rho[0] = 0
    cnt = np.zeros(limit + 1, np.int8)
    core = np.ones(limit + 1, np.int32)
    is_comp = np.zeros(limit + 1, np.bool_)
    max_primes = int(1.3 * limit / np.log(limit + 2.0)) + 100
    primes = np.zeros(max_primes, np.int32)
    npr = 0
    for i in range(2, limit + 1):
        if not is_comp[i]:
            primes[npr] = i
            npr += 1
            d[i] = 2
            cnt[i] = 1
            core[i] = 1
            if i == 2:
                rho[i] = 1
            elif i % 4 == 1:
                rho[i] = 2
            else:
                rho[i] = 0
        for j in range(npr):
            p = primes[j]
            ip = i * p
            if ip > limit:
                break
            is_comp[ip] = True
            if i % p == 0:
                m = cnt[i] + 1
                cnt[ip] = m
                core[ip] = core[i]
                d[ip] = d[core[i]] * (m + 1)
                if p == 2:
                    rpp = 1
                elif p % 4 == 1:
                    rpp = m + 1
                else:
                    rpp = (1 + (-1) ** m) // 2
                rho[ip] = rho[core[i]] * rpp
                break
            else:
                cnt[ip] = 1
                core[ip] = i
                d[ip] = d[i] * 2
                if p == 2:
                    rpp = 1
                elif p % 4 == 1:
                    rpp = 2
                else:
                    rpp = 0
                rho[ip] = rho[i] * rpp
    return d, rho


@dataclass(frozen=True)
class ArithmeticTable:
    """Sieved values of d(n) and r(n) for 1 <= n <= limit, with prefix sums.

    Arrays are indexed by n (index 0 unused, set to 0) and marked read-only,
    so a built table is immutable and safe to share.
    """

    limit: int
    d: np.ndarray          # int32, d[n] = number of divisors of n
    r: np.ndarray          # int32, r[n] = #{(a,b) in Z^2 : a^2+b^2 = n}
    d_prefix: np.ndarray   # int64, d_prefix[n] = sum_{k<=n} d(k)
    r_prefix: np.ndarray   # int64, analogous for r

    def __post_init__(self):
        for arr in (self.d, self.r, self.d_prefix, self.r_prefix):
            arr.setflags(write=False)


def build_table(limit: int, max_limit: int = MAX_SIEVE_LIMIT) -> ArithmeticTable:
    """Sieve d(n) and r(n) up to `limit` and attach exact prefix sums.

    r(n) is computed as 4 * rho(n) from the multiplicative prime-power rule
    for rho; d(n) from the same factorization sieve.

    Raises SizeError for limit < 1 or beyond the allocation budget.
    """
    limit = int(limit)
    if limit < 1:
        raise SizeError(f"sieve limit must be >= 1, got {limit}")
    if limit > max_limit:
        raise SizeError(
            f"sieve limit {limit} exceeds budget {max_limit} "
            f"(~38 bytes/entry peak; raise max_limit explicitly if intended)"
        )
    d, rho = _sieve_d_rho(limit)
    r = (rho.astype(np.int32)) * 4
    d_prefix = np.cumsum(d, dtype=np.int64)
    r_prefix = np.cumsum(r, dtype=np.int64)
    return ArithmeticTable(limit=limit, d=d, r=r, d_prefix=d_prefix, r_prefix=r_prefix)


# n below which the int64 vectorized summatory paths are safe from overflow:
# sum_{a <= sqrt n} floor(n/a) <= n (log n / 2 + 1) < 2^63 for n <= 1e15.
_VECTOR_SUMMATORY_MAX = 10**15


def divisor_summatory(x: Real) -> int:
    """Exact sum of d(n) for n <= x, via the hyperbola identity.

    sum_{n<=x} d(n) = 2 * sum_{a<=sqrt x} floor(x/a) - floor(sqrt x)^2,
    O(sqrt x) integer operations.  Python integers are unbounded, so there
    is no overflow to guard; the vectorized int64 path is range-checked.
    """
    n = floor_exact(x)
    if n < 1:
        raise DomainError(f"divisor_summatory requires x >= 1, got {x!r}")
    s = math.isqrt(n)
    if n <= _VECTOR_SUMMATORY_MAX:
        a = np.arange(1, s + 1, dtype=np.int64)
        total = int(np.sum(n // a, dtype=np.int64))
    else:
        total = sum(n // a for a in range(1, s + 1))
    return 2 * total - s * s


def _chi4_prefix(t: int) -> int:
    # sum_{k<=t} chi_4(k) for the non-principal character mod 4: 1 when
    # t mod 4 in {1, 2}, else 0.
    return (t + 3) // 4 - (t + 1) // 4


def circle_summatory(x: Real) -> int:
    """Exact sum of r(n) for 1 <= n <= x, in O(sqrt x).

    Uses r(n) = 4 * sum_{k | n} chi_4(k) and the hyperbola split
    sum_{k<=n} chi_4(k) floor(n/k) =
        sum_{k<=s} chi_4(k) floor(n/k) + sum_{m<=s} C(floor(n/m)) - C(s)*s
    with s = floor(sqrt n) and C the chi_4 prefix sum (period 4, so C is
    O(1)).  The n = 0 lattice point (the origin) is excluded; add 1 to the
    returned value for the convention that counts it.
    """
    n = floor_exact(x)
    if n < 1:
        raise DomainError(f"circle_summatory requires x >= 1, got {x!r}")
    s = math.isqrt(n)
    if n <= _VECTOR_SUMMATORY_MAX:
        k = np.arange(1, s + 1, dtype=np.int64)
        chi = np.zeros(s, dtype=np.int64)
        chi[k % 4 == 1] = 1
        chi[k % 4 == 3] = -1
        term1 = int(np.sum(chi * (n // k), dtype=np.int64))
        q = n // k
        qm = q % 4
        term2 = int(np.count_nonzero((qm == 1) | (qm == 2)))
    else:
        term1 = sum(
            (1 if a % 4 == 1 else -1) * (n // a) for a in range(1, s + 1) if a % 2
        )
        term2 = sum(_chi4_prefix(n // m) for m in range(1, s + 1))
    return 4 * (term1 + term2 - _chi4_prefix(s) * s)


@dataclass(frozen=True)
class MultiplicativeWeightSpec:
    """A positive multiplicative weight g with constant generic prime value.

    `kappa` is g at a generic prime of the support.  `base` names the table
    column ('d' or 'r') with g(n) = base(n)^(-4/3); for base 'r' the support
    is restricted to r(n) > 0 and kappa = g(p) holds at the primes
    p = 1 mod 4 that generate the support (g is not constant on the rare
    ramified primes; the counting asymptotics are driven by the generic
    ones).  `prime_power` gives g(p^m) for reference and testing.
    """

    name: str
    kappa: float
    base: str
    prime_power: Callable[[int, int], float]

    def certificate_scale(self) -> float:
        # lower bound n*g(n) >= scale * n^(1 - (4/3) C / loglog n) beyond a
        # scanned range; r(n) <= 4 d(n) costs the extra 4^(-4/3) for base 'r'
        return 1.0 if self.base == "d" else 4.0 ** (-4.0 / 3.0)


def _d_prime_power(p: int, m: int) -> float:
    return float(m + 1) ** (-4.0 / 3.0)


def _r_prime_power(p: int, m: int) -> float:
    if p == 2:
        rpp = 4
    elif p % 4 == 1:
        rpp = 4 * (m + 1)
    else:
        rpp = 4 if m % 2 == 0 else 0
    if rpp == 0:
        raise DomainError(f"g(p^m) undefined outside the support: p={p}, m={m}")
    return float(rpp) ** (-4.0 / 3.0)


DIVISOR_WEIGHT = MultiplicativeWeightSpec(
    name="divisor",
    kappa=2.0 ** (-4.0 / 3.0),
    base="d",
    prime_power=_d_prime_power,
)

CIRCLE_WEIGHT = MultiplicativeWeightSpec(
    name="circle",
    kappa=8.0 ** (-4.0 / 3.0),
    base="r",
    prime_power=_r_prime_power,
)

WEIGHT_SPECS = {"divisor": DIVISOR_WEIGHT, "circle": CIRCLE_WEIGHT}


def scan_certificate_floor(spec: MultiplicativeWeightSpec, limit: int) -> float:
    """Certified lower bound for n*g(n) over all n > limit.

    Monotonicity of n^(1 - (4/3) C / loglog n) holds for n >= 16, and the
    divisor bound needs loglog headroom, so limits below 100 never certify.
    """
    if limit < 100:
        return 0.0
    expo = 1.0 - (4.0 / 3.0) * DIVISOR_BOUND_C / math.log(math.log(limit))
    if expo <= 0.0:
        return 0.0
    return spec.certificate_scale() * limit**expo


def count_weighted(
    spec: MultiplicativeWeightSpec, x: Real, table: ArithmeticTable
) -> int:
    """Exact |{n >= 1 : n in support of g and n * g(n) <= x}|.

    The scan runs over the table; completeness beyond the table is certified
    through the explicit divisor bound (RangeError when the certificate
    fails, never a silent truncation).  The comparison n * w(n)^(-4/3) <= x
    is decided exactly as n^3 * den(x)^3 <= num(x)^3 * w(n)^4.
    """
    xf = to_fraction(x)
    if xf <= 0:
        return 0
    floor = scan_certificate_floor(spec, table.limit)
    if not floor > float(xf):
        raise RangeError(
            f"table limit {table.limit} cannot certify completeness for "
            f"x={float(xf):g} (certified floor {floor:g}); enlarge the sieve"
        )
    w = table.d if spec.base == "d" else table.r
    return _count_ratio_le(w, xf, power_num=3, power_thresh=3)


def _count_ratio_le(w: np.ndarray, thresh: Fraction, power_num: int, power_thresh: int) -> int:
    """Count n >= 1 with w[n] > 0 and n^power_num <= thresh^power_thresh * w[n]^4.

    Float log prefilter with an exact big-integer decision on the boundary
    band, so the returned count is exact.
    """
    limit = len(w) - 1
    n = np.arange(1, limit + 1, dtype=np.float64)
    wv = w[1:].astype(np.float64)
    support = wv > 0
    lhs = power_num * np.log(n)
    with np.errstate(divide="ignore"):
        rhs = 4.0 * np.log(wv)
    target = power_thresh * math.log(float(thresh))
    diff = lhs - rhs - target
    band = 1e-8 * np.maximum(1.0, np.abs(lhs))
    sure = support & (diff < -band)
    unsure = support & (np.abs(diff) <= band)
    count = int(np.count_nonzero(sure))
    if np.any(unsure):
        num = thresh.numerator
        den = thresh.denominator
        for idx in np.nonzero(unsure)[0]:
            nn = int(idx) + 1
            wn = int(w[nn])
            if nn**power_num * den**power_thresh <= num**power_thresh * wn**4:
                count += 1
    return count
