"""The one-sided Gamma kernel, its closed-form Fourier transform, and the
sector property that lets a phase-twisted resonance argument stay positive.

K_alpha is the Gamma(alpha, 1) density, supported on [0, inf).  Its Fourier
transform (convention K^(xi) = int K(x) e(-xi x) dx) is the principal-branch
power (1 + 2 pi i xi)^(-alpha), whose values lie in the sector
|arg z| < alpha pi / 2.  Picking

    alpha = (2/pi) arctan((cos beta - delta) / |sin beta|)

makes Re(e^(i beta) K^(xi)) >= delta Re(K^(xi)) >= 0 for every xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .quadrature import gamma_weighted_integral

TWO_PI = 2.0 * math.pi

# tolerances for the defining relations of a matched kernel
ALPHA_MATCH_TOL = 1e-12
TAN_RELATION_TOL = 1e-10
SECTOR_MARGIN_TOL = 1e-12


def choose_alpha(beta: float, delta: float) -> float:
    """Kernel exponent for phase angle beta and positivity margin delta.

    Requires beta in (-pi/2, pi/2) excluding 0, and 0 < delta < cos(beta).
    beta = 0 needs no phase correction at all (any alpha works with margin
    delta < 1), so it is rejected here rather than given an arbitrary value.
    """
    beta = float(beta)
    delta = float(delta)
    if beta == 0.0:
        raise DomainError("beta = 0 has no unique exponent; any alpha in (0,1) works")
    if not -math.pi / 2 < beta < math.pi / 2:
        raise DomainError(f"beta must lie in (-pi/2, pi/2), got {beta}")
    if not 0.0 < delta < math.cos(beta):
        raise DomainError(
            f"delta must lie in (0, cos(beta)) = (0, {math.cos(beta):.6g}), got {delta}"
        )
    return (2.0 / math.pi) * math.atan((math.cos(beta) - delta) / abs(math.sin(beta)))


@dataclass(frozen=True)
class SectorialKernel:
    """Gamma kernel parameters (alpha, beta, delta).

    Construction checks ranges only, so deliberately mismatched exponents
    can be probed with sector_check; `matched` reports whether alpha equals
    the canonical choice.  Use `for_angle` for the canonical kernel.
    """

    alpha: float
    beta: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0,1), got {self.alpha}")
        if not -math.pi / 2 < self.beta < math.pi / 2:
            raise DomainError(f"beta must lie in (-pi/2, pi/2), got {self.beta}")
        if not 0.0 < self.delta < math.cos(self.beta):
            raise DomainError(
                f"delta must lie in (0, cos(beta)), got delta={self.delta}"
            )

    @classmethod
    def for_angle(cls, beta: float, delta: float) -> "SectorialKernel":
        return cls(alpha=choose_alpha(beta, delta), beta=beta, delta=delta)

    @property
    def matched(self) -> bool:
        """True when alpha satisfies the defining relations for (beta, delta)."""
        if self.beta == 0.0:
            return self.delta < 1.0
        target = choose_alpha(self.beta, self.delta)
        if abs(self.alpha - target) > ALPHA_MATCH_TOL:
            return False
        lhs = math.tan(self.alpha * math.pi / 2.0) * abs(math.sin(self.beta))
        return abs(lhs - (math.cos(self.beta) - self.delta)) <= TAN_RELATION_TOL


def density(alpha: float, x) -> float:
    """Gamma(alpha, 1) density: x^(alpha-1) e^(-x) / Gamma(alpha), 0 for x <= 0.

    math.gamma is a Lanczos-class implementation with relative error well
    below 1e-12 on (0, 1).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    x = float(x)
    if x <= 0.0:
        return 0.0
    return x ** (alpha - 1.0) * math.exp(-x) / math.gamma(alpha)


def fourier(alpha: float, xi: float) -> complex:
    """(1 + 2 pi i xi)^(-alpha) on the principal branch.

    The base has positive real part, so modulus and argument decompose as
    (1 + 4 pi^2 xi^2)^(-alpha/2) and -alpha arctan(2 pi xi) with no branch
    cut to cross.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    t = TWO_PI * float(xi)
    mod = (1.0 + t * t) ** (-alpha / 2.0)
    arg = -alpha * math.atan(t)
    return complex(mod * math.cos(arg), mod * math.sin(arg))


def fourier_grid(alpha: float, xi: np.ndarray) -> np.ndarray:
    """Vectorized `fourier` over an array of frequencies."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    t = TWO_PI * np.asarray(xi, dtype=np.float64)
    mod = (1.0 + t * t) ** (-alpha / 2.0)
    arg = -alpha * np.arctan(t)
    return mod * (np.cos(arg) + 1j * np.sin(arg))


def fourier_by_quadrature(alpha: float, xi: float, rel_tol: float = 1e-9) -> complex:
    """Independent evaluation of the transform by direct numerical integration.

    Referee for `fourier`: integrates K_alpha(x) e(-xi x) with the
    x = u^(1/alpha) substitution killing the endpoint singularity.  Shares
    no code path with the closed form beyond the Gamma function.
    """
    xi = float(xi)

    def g(x):
        return np.exp(-2j * math.pi * xi * x)

    value, _err = gamma_weighted_integral(
        g, alpha=alpha, T=1.0, osc_freq=abs(xi), sup_g=1.0, rel_tol=rel_tol
    )
    return complex(value)


@dataclass(frozen=True)
class SectorReport:
    """Grid minima for the two sector inequalities."""

    min_margin: float      # min of Re(e^(i beta) K^) - delta Re(K^)
    min_real: float        # min of Re(K^)
    passed: bool
    grid_size: int


def sector_check(kernel: SectorialKernel, grid: Sequence[float]) -> SectorReport:
    """Verify Re(e^(i beta) K^(xi)) >= delta Re(K^(xi)) >= 0 on a grid."""
    xi = np.asarray(list(grid), dtype=np.float64)
    if xi.size == 0:
        raise DomainError("sector_check needs a nonempty grid")
    K = fourier_grid(kernel.alpha, xi)
    rot = complex(math.cos(kernel.beta), math.sin(kernel.beta))
    margin = (rot * K).real - kernel.delta * K.real
    min_margin = float(margin.min())
    min_real = float(K.real.min())
    passed = min_margin >= -SECTOR_MARGIN_TOL and min_real >= -SECTOR_MARGIN_TOL
    return SectorReport(
        min_margin=min_margin, min_real=min_real, passed=passed, grid_size=xi.size
    )


def default_sector_grid(lo: float = -1000.0, hi: float = 1000.0, points: int = 10**4) -> np.ndarray:
    """Symmetric check grid; includes 0 and the far tails where arg K^ saturates."""
    lin = np.linspace(lo, hi, points)
    return np.unique(np.concatenate([lin, [0.0]]))
