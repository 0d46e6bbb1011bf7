"""Certification of the phase-twisted resonance inequality at desk scale.

For a non-negative trigonometric target F(x) = sum_n f(n) e(lambda_n x),
a resonant subset M of its support, the product resonator R built on the
frequencies of M, and a one-sided kernel K_alpha satisfying the sector
property for (beta, delta), the certified inequality is

    I2 >= delta * r * (sum_{m in M} f(m)) * I1,

    I1 = int_0^inf |R(x)|^2 K_alpha(x/T) dx,
    I2 = int_0^inf Re(e^(i beta) F(x)) |R(x)|^2 K_alpha(x/T) dx.

Both integrals are evaluated by frequency-aware Gauss-Kronrod quadrature;
on exact-rational frequency sets they are recomputed independently through
the spectral identities

    I1 = T sum_{u,w} a(u) a(w) Re K^((w-u) T)
    I2 = T sum_n f(n) sum_{u,v} a(u) a(v) Re(e^(i beta) K^((v-u-lambda_n) T))

over the truncated resonator expansion, with an explicit truncation slack.
The lower-bound statement max Re(e^(i beta) F) >= delta r sum_M f(m) + error
is checked against a budgeted grid maximization; the reported error term
uses implied constant 1 (the asymptotic constant is not claimed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, HypothesisError
from .kernel import SectorReport, SectorialKernel, default_sector_grid, fourier_grid, sector_check
from .resonator import FrequencySet, ResonatorExpansion, expand, eval_product_grid, tail_mass
from .quadrature import gamma_weighted_integral
from .sieve import ArithmeticTable


@dataclass(frozen=True)
class TargetSum:
    """Finite-support target: labels n, weights f(n) >= 0, frequencies lambda_n > 0."""

    indices: Tuple[int, ...]
    weights: Tuple[float, ...]
    frequencies: tuple
    tag: str = "custom"

    def __post_init__(self):
        k = len(self.indices)
        if not (len(self.weights) == len(self.frequencies) == k) or k == 0:
            raise DomainError("indices, weights, frequencies must align and be nonempty")
        if any(w < 0 for w in self.weights):
            raise DomainError("weights must be non-negative")
        if any(not lam > 0 for lam in self.frequencies):
            raise DomainError("frequencies must be positive")

    @property
    def total_weight(self) -> float:
        """F(0) = sum of all weights."""
        return math.fsum(self.weights)

    def float_frequencies(self) -> np.ndarray:
        return np.array([float(g) for g in self.frequencies], dtype=np.float64)

    def phase_rotated(self, beta: float, xs: np.ndarray) -> np.ndarray:
        """Re(e^(i beta) F(x)) on a grid."""
        xs = np.asarray(xs, dtype=np.float64)
        out = np.zeros_like(xs)
        for w, lam in zip(self.weights, self.float_frequencies()):
            out += w * np.cos(2.0 * math.pi * lam * xs + beta)
        return out


def divisor_target(n_terms: int, table: ArithmeticTable) -> TargetSum:
    """f(n) = d(n) n^(-3/4), lambda_n = 2 sqrt(n), n <= n_terms."""
    if n_terms > table.limit:
        raise DomainError(f"table holds {table.limit} < {n_terms} entries")
    ns = np.arange(1, n_terms + 1)
    weights = table.d[1 : n_terms + 1] * np.power(ns.astype(np.float64), -0.75)
    freqs = 2.0 * np.sqrt(ns.astype(np.float64))
    return TargetSum(
        indices=tuple(int(n) for n in ns),
        weights=tuple(float(w) for w in weights),
        frequencies=tuple(float(f) for f in freqs),
        tag="divisor",
    )


def circle_target(n_terms: int, table: ArithmeticTable) -> TargetSum:
    """f(n) = r(n) n^(-3/4) restricted to r(n) > 0, lambda_n = sqrt(n)."""
    if n_terms > table.limit:
        raise DomainError(f"table holds {table.limit} < {n_terms} entries")
    ns = np.arange(1, n_terms + 1)
    keep = table.r[1 : n_terms + 1] > 0
    ns = ns[keep]
    weights = table.r[ns] * np.power(ns.astype(np.float64), -0.75)
    freqs = np.sqrt(ns.astype(np.float64))
    return TargetSum(
        indices=tuple(int(n) for n in ns),
        weights=tuple(float(w) for w in weights),
        frequencies=tuple(float(f) for f in freqs),
        tag="circle",
    )


@dataclass(frozen=True)
class QuadratureSettings:
    """Knobs for the certification quadrature.

    amp_floor: resonator harmonics with weight below this are not resolved
    by the panel grid; their frequency content is provably above the panel
    cutoff only with mass O(amp_floor-tail), which the error estimate
    absorbs.
    """

    rel_tol: float = 1e-8
    panels_per_cycle: float = 2.0
    amp_floor: float = 1e-8
    max_nodes: int = 8_000_000


@dataclass(frozen=True)
class ResonanceInstance:
    """Everything verify_proposition needs; immutable."""

    target: TargetSum
    resonant: Tuple[int, ...]       # positions into the target arrays
    kernel: SectorialKernel
    r: float
    T: float
    quad: QuadratureSettings = QuadratureSettings()
    expansion_degree: Optional[int] = None   # None = choose from tail mass

    def __post_init__(self):
        if not self.resonant:
            raise DomainError("resonant set must be nonempty")
        n = len(self.target.indices)
        if any(not 0 <= i < n for i in self.resonant):
            raise DomainError("resonant positions out of range")
        if not 0.0 < self.r < 1.0:
            raise DomainError(f"r must lie in (0,1), got {self.r}")
        if self.T <= 0:
            raise DomainError(f"T must be positive, got {self.T}")

    def frequency_set(self) -> FrequencySet:
        freqs = tuple(self.target.frequencies[i] for i in self.resonant)
        return FrequencySet(frequencies=freqs, r=self.r)

    @property
    def resonant_weight(self) -> float:
        """sum_{m in M} f(m)."""
        return math.fsum(self.target.weights[i] for i in self.resonant)

    @property
    def M(self) -> int:
        return len(self.resonant)


def resonant_positions_by_weight(target: TargetSum, count: int) -> Tuple[int, ...]:
    """Positions of the `count` largest weights (ties to the smaller index)."""
    order = sorted(range(len(target.weights)), key=lambda i: (-target.weights[i], i))
    if count < 1 or count > len(order):
        raise DomainError(f"resonant count {count} outside 1..{len(order)}")
    return tuple(order[:count])


def _harmonic_cutoff(inst: ResonanceInstance) -> int:
    # resonator factor harmonics r^k drop below amp_floor at this order
    return max(2, int(math.ceil(math.log(1.0 / inst.quad.amp_floor) / math.log(1.0 / inst.r))))


def _resonator_osc_freq(inst: ResonanceInstance) -> float:
    lam_max = max(float(f) for f in inst.frequency_set().frequencies)
    return _harmonic_cutoff(inst) * lam_max


def compute_I1(inst: ResonanceInstance) -> Tuple[float, float]:
    """Quadrature of |R(x)|^2 K_alpha(x/T); returns (value, error estimate)."""
    fs = inst.frequency_set()
    sup_g = (1.0 - inst.r) ** (-2 * inst.M)

    def g(x):
        return np.abs(eval_product_grid(fs, x)) ** 2

    return gamma_weighted_integral(
        g,
        alpha=inst.kernel.alpha,
        T=inst.T,
        osc_freq=_resonator_osc_freq(inst),
        sup_g=sup_g,
        rel_tol=inst.quad.rel_tol,
        panels_per_cycle=inst.quad.panels_per_cycle,
        max_nodes=inst.quad.max_nodes,
    )


def compute_I2(inst: ResonanceInstance) -> Tuple[float, float]:
    """Quadrature of Re(e^(i beta) F(x)) |R(x)|^2 K_alpha(x/T)."""
    fs = inst.frequency_set()
    beta = inst.kernel.beta
    target = inst.target
    sup_g = target.total_weight * (1.0 - inst.r) ** (-2 * inst.M)
    lam_target = max(float(f) for f in target.frequencies)

    def g(x):
        return target.phase_rotated(beta, x) * np.abs(eval_product_grid(fs, x)) ** 2

    return gamma_weighted_integral(
        g,
        alpha=inst.kernel.alpha,
        T=inst.T,
        osc_freq=_resonator_osc_freq(inst) + lam_target,
        sup_g=sup_g,
        rel_tol=inst.quad.rel_tol,
        panels_per_cycle=inst.quad.panels_per_cycle,
        max_nodes=inst.quad.max_nodes,
    )


def _auto_degree(inst: ResonanceInstance, budget: int = 200_000) -> int:
    target_mass = 1e-9 * (1.0 - inst.r) ** (-inst.M)
    B = 4
    while B < 80:
        if tail_mass(inst.r, inst.M, B) <= target_mass:
            break
        if math.comb(inst.M + B + 1, B + 1) > budget:
            break
        B += 1
    return B


def _expansion(inst: ResonanceInstance) -> ResonatorExpansion:
    B = inst.expansion_degree or _auto_degree(inst)
    return expand(inst.frequency_set(), B)


def _truncation_slack(inst: ResonanceInstance, exp: ResonatorExpansion) -> float:
    # | |R|^2 - |R_B|^2 | <= dm (2 S + dm) pointwise, S = full coefficient
    # mass; integrating the kernel contributes a factor T
    dm = exp.dropped_mass
    S = (1.0 - inst.r) ** (-inst.M)
    return inst.T * dm * (2.0 * S + dm)


def _difference_spectrum(exp: ResonatorExpansion) -> Tuple[np.ndarray, np.ndarray]:
    """All pairwise key differences s = w - u with weights sum a(u) a(w).

    Exact-rational expansions go through an integer lattice and a dense
    autocorrelation; float expansions fall back to an outer product.
    """
    coeffs = np.asarray(exp.coeffs, dtype=np.float64)
    if exp.exact:
        fracs = [Fraction(k) for k in exp.keys]
        den = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
        lattice = np.array([int(f * den) for f in fracs], dtype=np.int64)
        size = int(lattice.max()) + 1
        dense = np.zeros(size, dtype=np.float64)
        np.add.at(dense, lattice, coeffs)
        corr = np.correlate(dense, dense, mode="full")
        lags = np.arange(-(size - 1), size, dtype=np.float64)
        keep = np.abs(corr) > 0.0
        return lags[keep] / den, corr[keep]
    keys = np.asarray([float(k) for k in exp.keys], dtype=np.float64)
    if len(keys) > 4000:
        raise DomainError(
            f"float-key spectral route with {len(keys)} keys would need "
            f"{len(keys)**2} pairs; use rational frequencies or lower the degree"
        )
    diffs = (keys[None, :] - keys[:, None]).ravel()
    weights = (coeffs[None, :] * coeffs[:, None]).ravel()
    return diffs, weights


def spectral_I1(inst: ResonanceInstance) -> Tuple[float, float]:
    """Spectral-identity evaluation of I1 over the truncated expansion.

    Returns (value, slack) where slack bounds the truncation error against
    the exact I1; the kernel transform is exact, so no quadrature enters.
    """
    exp = _expansion(inst)
    diffs, weights = _difference_spectrum(exp)
    K = fourier_grid(inst.kernel.alpha, diffs * inst.T)
    value = inst.T * float(np.sum(weights * K.real))
    return value, _truncation_slack(inst, exp)


def spectral_I2(inst: ResonanceInstance) -> Tuple[float, float]:
    """Spectral-identity evaluation of I2; slack additionally scales by F(0)."""
    exp = _expansion(inst)
    diffs, weights = _difference_spectrum(exp)
    beta = inst.kernel.beta
    rot = complex(math.cos(beta), math.sin(beta))
    total = 0.0
    for w, lam in zip(inst.target.weights, inst.target.float_frequencies()):
        if w == 0.0:
            continue
        K = fourier_grid(inst.kernel.alpha, (diffs - lam) * inst.T)
        total += w * float(np.sum(weights * (rot * K).real))
    value = inst.T * total
    slack = inst.target.total_weight * _truncation_slack(inst, exp)
    return value, slack


@dataclass(frozen=True)
class ResonanceReport:
    """Outcome of one certification run."""

    I1: float
    I2: float
    rhs: float                      # delta * r * sum_M f(m) * I1
    margin: float                   # I2 - rhs
    j1_bound: float                 # T (1 - r^2)^(-M), lower bound for I1
    quadrature_error_estimate: float
    passed: bool
    sector: SectorReport
    spectral_i1: Optional[float] = None
    spectral_i2: Optional[float] = None
    spectral_slack_i1: Optional[float] = None
    spectral_slack_i2: Optional[float] = None


def verify_proposition(
    inst: ResonanceInstance,
    spectral: bool = False,
    sector_grid: Optional[Sequence[float]] = None,
) -> ResonanceReport:
    """Certify I2 >= delta r sum_M f(m) I1 with explicit error accounting.

    Raises HypothesisError when the kernel fails its sector inequality (the
    certified statement assumes it); numerical non-convergence raises
    AccuracyError from the quadrature layer instead.
    """
    grid = sector_grid if sector_grid is not None else default_sector_grid(points=4001)
    sector = sector_check(inst.kernel, grid)
    if not sector.passed:
        raise HypothesisError(
            f"kernel (alpha={inst.kernel.alpha:.6g}, beta={inst.kernel.beta:.6g}, "
            f"delta={inst.kernel.delta:.6g}) violates the sector inequality: "
            f"min margin {sector.min_margin:.3g}"
        )
    i1, e1 = compute_I1(inst)
    i2, e2 = compute_I2(inst)
    factor = inst.kernel.delta * inst.r * inst.resonant_weight
    rhs = factor * i1
    margin = i2 - rhs
    quad_err = e2 + factor * e1
    j1 = inst.T * (1.0 - inst.r**2) ** (-inst.M)
    report = ResonanceReport(
        I1=i1,
        I2=i2,
        rhs=rhs,
        margin=margin,
        j1_bound=j1,
        quadrature_error_estimate=quad_err,
        passed=margin >= -quad_err,
        sector=sector,
    )
    if spectral:
        s1, sl1 = spectral_I1(inst)
        s2, sl2 = spectral_I2(inst)
        report = replace(
            report,
            spectral_i1=s1,
            spectral_i2=s2,
            spectral_slack_i1=sl1,
            spectral_slack_i2=sl2,
        )
    return report


@dataclass(frozen=True)
class TheoremBound:
    """Grid check of the lower-bound statement on [Y, X]."""

    bound: float                   # delta r sum_M f(m)
    error_term: float              # F(0) ((1+r)/(1-r))^M (Y log X / X)^alpha, constant 1
    grid_max: float
    argmax: float
    satisfied: bool                # grid_max >= bound - error_term
    proof_T: float                 # X / (2 log X), the T the argument would use


def theorem_lower_bound(
    inst: ResonanceInstance,
    Y: float,
    X: float,
    grid_budget: int = 1_000_000,
    refine_top: int = 12,
) -> TheoremBound:
    """Check max_{x in [Y, X]} Re(e^(i beta) F(x)) >= bound - error_term.

    The maximum is lower-bounded by a budgeted uniform grid (capped at
    grid_budget points, aiming for 8 points per cycle of the fastest
    frequency) plus golden-section refinement around the best grid points;
    the reported error magnitude takes the unstated asymptotic constant
    as 1.
    """
    Y, X = float(Y), float(X)
    if not 3.0 < Y < X:
        raise DomainError(f"need 3 < Y < X, got Y={Y}, X={X}")
    target = inst.target
    beta = inst.kernel.beta
    main = inst.kernel.delta * inst.r * inst.resonant_weight
    err = (
        target.total_weight
        * ((1.0 + inst.r) / (1.0 - inst.r)) ** inst.M
        * (Y * math.log(X) / X) ** inst.kernel.alpha
    )
    lam_max = max(float(f) for f in target.frequencies)
    npts = int(min(grid_budget, max(1000, 8.0 * lam_max * (X - Y))))
    xs = np.linspace(Y, X, npts)
    step = (X - Y) / (npts - 1)
    best_val = -math.inf
    best_x = Y
    chunk = 2_000_000 // max(1, len(target.weights))
    chunk = max(chunk, 1024)
    order_candidates = []
    for start in range(0, npts, chunk):
        vals = target.phase_rotated(beta, xs[start : start + chunk])
        i = int(np.argmax(vals))
        order_candidates.append((float(vals[i]), float(xs[start + i])))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_x = float(xs[start + i])
    order_candidates.sort(reverse=True)

    def f_scalar(x):
        return float(target.phase_rotated(beta, np.array([x]))[0])

    gr = (math.sqrt(5.0) - 1.0) / 2.0
    for _, x0 in order_candidates[:refine_top]:
        a, b = max(Y, x0 - step), min(X, x0 + step)
        c, d = b - gr * (b - a), a + gr * (b - a)
        fc, fd = f_scalar(c), f_scalar(d)
        for _ in range(40):
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - gr * (b - a)
                fc = f_scalar(c)
            else:
                a, c, fc = c, d, fd
                d = a + gr * (b - a)
                fd = f_scalar(d)
        for x in (a, (a + b) / 2, b):
            v = f_scalar(x)
            if v > best_val:
                best_val, best_x = v, x
    return TheoremBound(
        bound=main,
        error_term=err,
        grid_max=best_val,
        argmax=best_x,
        satisfied=best_val >= main - err,
        proof_T=X / (2.0 * math.log(X)),
    )


def random_instance(rng: np.random.Generator) -> ResonanceInstance:
    """Small random instance with exact-rational frequencies.

    Frequencies may collide or be rationally dependent on purpose; the
    certified inequality requires no independence.
    """
    n = int(rng.integers(3, 7))
    freqs = tuple(
        Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5))) for _ in range(n)
    )
    weights = tuple(float(w) for w in rng.uniform(0.05, 1.5, n))
    target = TargetSum(
        indices=tuple(range(1, n + 1)),
        weights=weights,
        frequencies=freqs,
        tag="random",
    )
    beta = float(rng.uniform(0.2, 1.3)) * (1 if rng.random() < 0.5 else -1)
    delta = float(rng.uniform(0.05, 0.7)) * math.cos(beta)
    kernel = SectorialKernel.for_angle(beta, delta)
    k = int(rng.integers(1, min(3, n) + 1))
    resonant = tuple(
        int(i) for i in rng.choice(n, size=k, replace=False)
    )
    return ResonanceInstance(
        target=target,
        resonant=resonant,
        kernel=kernel,
        r=float(rng.uniform(0.15, 0.45)),
        T=float(rng.uniform(2.0, 5.0)),
    )
