"""Product resonator with fixed weight and its coefficient expansion.

R(t) = prod_{m} (1 - r e(lambda_m t))^(-1) with 0 < r < 1 concentrates
mass where the chosen phases align, without any localization of the
frequencies or linear-independence assumption.  Expanding the product
gives R(t) = sum_{v} a_r(v) e(v t) over the semigroup of non-negative
integer combinations v = sum b(m) lambda_m, where

    a_r(v) = sum over distinct representations of v of r^(sum_m b(m)).

Truncation is by total degree sum(b) <= B, matching the weight structure
r^sum(b) and giving an exact multinomial tail bound for the dropped mass.

Rational (Fraction) frequencies take an exact-key path where colliding
combinations merge exactly; float frequencies merge within a relative
tolerance, which can only blur nearly-equal combination values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Tuple, Union

import numpy as np

from .errors import DomainError, SizeError

Frequency = Union[int, Fraction, float]

DEFAULT_MERGE_TOL = 1e-9
DEFAULT_MAX_TERMS = 2_000_000


def _is_exact(value) -> bool:
    return isinstance(value, (int, Fraction, np.integer))


@dataclass(frozen=True)
class FrequencySet:
    """Positive frequencies lambda_m (m in a finite index set) and weight r."""

    frequencies: Tuple[Frequency, ...]
    r: Union[float, Fraction]

    def __post_init__(self):
        if len(self.frequencies) < 1:
            raise DomainError("need at least one frequency")
        for lam in self.frequencies:
            if not lam > 0:
                raise DomainError(f"frequencies must be positive, got {lam}")
        if not 0 < self.r < 1:
            raise DomainError(f"r must lie in (0,1), got {self.r}")
        object.__setattr__(self, "frequencies", tuple(self.frequencies))

    @property
    def size(self) -> int:
        return len(self.frequencies)

    @property
    def exact(self) -> bool:
        """True when every frequency (and r) supports exact-key expansion."""
        return all(_is_exact(lam) for lam in self.frequencies)

    def float_frequencies(self) -> np.ndarray:
        return np.array([float(lam) for lam in self.frequencies], dtype=np.float64)


def tail_mass(r, M: int, B: int) -> float:
    """(1-r)^(-M) minus the degree-<=B part of the coefficient mass.

    sum over b-vectors with sum(b) = j of r^j equals C(M+j-1, j) r^j, so the
    tail is exact combinatorics; with rational r it is evaluated in exact
    arithmetic before conversion.
    """
    if isinstance(r, Fraction):
        full = (1 - r) ** (-M)
        part = sum(Fraction(math.comb(M + j - 1, j)) * r**j for j in range(B + 1))
        return float(full - part)
    rf = float(r)
    full = (1.0 - rf) ** (-M)
    part = math.fsum(math.comb(M + j - 1, j) * rf**j for j in range(B + 1))
    return max(full - part, 0.0)


@dataclass(frozen=True)
class ResonatorExpansion:
    """Truncated coefficient map of the resonator.

    keys are ascending combination values (Fraction on the exact path,
    float otherwise); coeffs[i] = a_r(keys[i]) restricted to combinations
    of total degree <= degree_bound; max_depths[i] is the largest total
    degree among the merged representations of keys[i], used to recognize
    keys whose shifts stay inside the truncation.
    """

    keys: tuple
    coeffs: Tuple[float, ...]
    max_depths: Tuple[int, ...]
    degree_bound: int
    dropped_mass: float
    exact: bool
    merge_tol: float

    def __len__(self) -> int:
        return len(self.keys)

    def index_of(self, v) -> int:
        """Index of the key equal to v (within merge_tol on floats), or -1."""
        if self.exact and _is_exact(v):
            try:
                return self._exact_index[Fraction(v)]
            except KeyError:
                return -1
        keys = self._float_keys
        i = int(np.searchsorted(keys, float(v)))
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(keys) and abs(keys[j] - float(v)) <= self.merge_tol * max(
                1.0, abs(float(v))
            ):
                return j
        return -1

    def coefficient(self, v) -> float:
        """a_r(v), or 0.0 when v is outside the truncated key set."""
        i = self.index_of(v)
        return self.coeffs[i] if i >= 0 else 0.0

    @property
    def _exact_index(self):
        # frozen dataclass: cache through __dict__ to bypass __setattr__
        cache = self.__dict__.get("_exact_index_cache")
        if cache is None:
            cache = {Fraction(k): i for i, k in enumerate(self.keys)}
            self.__dict__["_exact_index_cache"] = cache
        return cache

    @property
    def _float_keys(self) -> np.ndarray:
        cache = self.__dict__.get("_float_keys_cache")
        if cache is None:
            cache = np.array([float(k) for k in self.keys], dtype=np.float64)
            self.__dict__["_float_keys_cache"] = cache
        return cache

    def coefficient_sum(self) -> float:
        return math.fsum(self.coeffs)


def expand(
    fs: FrequencySet,
    degree_bound: int,
    merge_tol: float = DEFAULT_MERGE_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ResonatorExpansion:
    """Enumerate all combinations of total degree <= degree_bound and merge.

    The enumeration visits C(M+B, B) multisets (SizeError beyond
    max_terms).  Keys within merge_tol * max(1, |v|) of each other are the
    same combination value; exact (rational) frequency sets bypass the
    tolerance entirely.
    """
    B = int(degree_bound)
    if B < 1:
        raise DomainError(f"degree_bound must be >= 1, got {B}")
    if merge_tol < 0:
        raise DomainError("merge_tol must be >= 0")
    M = fs.size
    n_comb = math.comb(M + B, B)
    if n_comb > max_terms:
        raise SizeError(
            f"expansion would enumerate C({M + B},{B}) = {n_comb} combinations "
            f"(budget {max_terms})"
        )
    rf = float(fs.r)
    powers = [rf**j for j in range(B + 1)]

    if fs.exact:
        freqs = [Fraction(lam) for lam in fs.frequencies]
        acc = {}
        for j in range(B + 1):
            for combo in combinations_with_replacement(range(M), j):
                v = sum((freqs[i] for i in combo), Fraction(0))
                entry = acc.get(v)
                if entry is None:
                    acc[v] = [powers[j], j]
                else:
                    entry[0] += powers[j]
                    entry[1] = max(entry[1], j)
        items = sorted(acc.items())
        keys = tuple(k for k, _ in items)
        coeffs = tuple(e[0] for _, e in items)
        depths = tuple(e[1] for _, e in items)
        exact = True
    else:
        freqs = fs.float_frequencies()
        raw = []
        for j in range(B + 1):
            for combo in combinations_with_replacement(range(M), j):
                v = float(freqs[list(combo)].sum()) if combo else 0.0
                raw.append((v, powers[j], j))
        raw.sort()
        keys_l, coeffs_l, depths_l = [], [], []
        for v, c, j in raw:
            if keys_l and abs(v - keys_l[-1]) <= merge_tol * max(1.0, abs(v)):
                coeffs_l[-1] += c
                depths_l[-1] = max(depths_l[-1], j)
            else:
                keys_l.append(v)
                coeffs_l.append(c)
                depths_l.append(j)
        keys, coeffs, depths = tuple(keys_l), tuple(coeffs_l), tuple(depths_l)
        exact = False

    return ResonatorExpansion(
        keys=keys,
        coeffs=coeffs,
        max_depths=depths,
        degree_bound=B,
        dropped_mass=tail_mass(fs.r, M, B),
        exact=exact,
        merge_tol=float(merge_tol),
    )


def eval_product(fs: FrequencySet, t: float) -> complex:
    """R(t) from the product form; |1 - r e(theta)| >= 1 - r, so no pole."""
    rf = float(fs.r)
    value = 1.0 + 0.0j
    for lam in fs.frequencies:
        value /= 1.0 - rf * np.exp(2j * math.pi * float(lam) * t)
    return complex(value)


def eval_product_grid(fs: FrequencySet, ts: np.ndarray) -> np.ndarray:
    """Vectorized R over a grid of real points."""
    ts = np.asarray(ts, dtype=np.float64)
    rf = float(fs.r)
    value = np.ones(ts.shape, dtype=np.complex128)
    for lam in fs.frequencies:
        value /= 1.0 - rf * np.exp(2j * math.pi * float(lam) * ts)
    return value


def peak_value(fs: FrequencySet) -> float:
    """sup_t |R(t)| = (1-r)^(-M), attained where all phases align."""
    return (1.0 - float(fs.r)) ** (-fs.size)


def shift_inequality_check(exp: ResonatorExpansion, fs: FrequencySet, slack: float = 1e-14) -> bool:
    """a_r(v + lambda_n) >= r a_r(v) for every key v whose representations
    all fit below the truncation degree (so the shifted combinations are
    still enumerated) and every n.
    """
    if exp.degree_bound < 2:
        raise DomainError("shift check needs an expansion with degree_bound >= 2")
    r = float(fs.r)
    for i, v in enumerate(exp.keys):
        if exp.max_depths[i] > exp.degree_bound - 1:
            continue
        av = exp.coeffs[i]
        for lam in fs.frequencies:
            shifted = (v + lam) if exp.exact else float(v) + float(lam)
            if exp.coefficient(shifted) < r * av - slack:
                return False
    return True


def square_bound_check(
    fs: FrequencySet,
    degree_bound: int,
    merge_tol: float = DEFAULT_MERGE_TOL,
    slack: float = 1e-12,
) -> bool:
    """a_r(v)^2 >= a_{r^2}(v) per key, and the truncated mass of a_{r^2}
    stays below (1-r^2)^(-M) with a gap equal to the exact multinomial tail.
    """
    r = fs.r
    r2 = r * r
    fs2 = FrequencySet(frequencies=fs.frequencies, r=r2)
    exp_r = expand(fs, degree_bound, merge_tol=merge_tol)
    exp_r2 = expand(fs2, degree_bound, merge_tol=merge_tol)
    for v, a in zip(exp_r.keys, exp_r.coeffs):
        a2 = exp_r2.coefficient(v)
        if a * a < a2 - slack:
            return False
    total2 = exp_r2.coefficient_sum()
    closed = (1.0 - float(r2)) ** (-fs.size)
    if total2 > closed + slack:
        return False
    gap = closed - total2
    return gap <= tail_mass(r2, fs.size, degree_bound) + slack
