"""Guided search for large-value witnesses of the error terms.

A witness is an x where delta(x^2) is large and positive (divisor) or
p(x^2) is large and negative (circle).  The search maximizes the rotated
series objective

    divisor: sum_{n<=N} d(n) n^(-3/4) cos(4 pi sqrt(n) x - pi/4)
    circle:  sum_{n<=N} r(n) n^(-3/4) cos(2 pi sqrt(n) x + pi/4)

whose large positive values force delta(x^2) > 0 respectively
p(x^2) < 0 (the circle series enters the error term with a minus sign).
Every recorded candidate is revalidated against the exact O(sqrt)
summatory value; the series is never trusted alone.

Grid scoring runs through a compiled cosine-recurrence kernel (two
multiply-adds per term per point); refinement and final scoring use the
extended-precision series evaluator, so recurrence drift never reaches a
record.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from numba import njit

from .errors import DomainError, StoreError, ValidationError
from .error_terms import VoronoiSeries, delta_exact, p_exact
from .extremal import CIRCLE_SUM_EXPONENT, DIVISOR_SUM_EXPONENT, largest_terms
from .resonator import FrequencySet, eval_product_grid
from .serialize import canonical_json, content_hash
from .sieve import ArithmeticTable, to_fraction

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STRATEGIES = ("grid", "resonator-guided", "hybrid")

NORMALIZATION_EXPONENT = {
    "divisor": DIVISOR_SUM_EXPONENT,   # (3/4)(2^(4/3) - 1)
    "circle": CIRCLE_SUM_EXPONENT,     # (3/4)(2^(1/3) - 1)
}


def objective(kind: str, x: float, n_terms: int, table: ArithmeticTable) -> float:
    """Rotated series sum at a single x (the x^(1/2)-free part).

    Relates to the series error terms by
    delta-series(x) = x^(1/2)/(pi sqrt 2) * objective and
    p-series(x) = -x^(1/2)/pi * objective.
    """
    return VoronoiSeries(kind, table).phase_sum(x, n_terms)


def normalized_value(kind: str, exact_value: float, y: float) -> float:
    """exact / [(y log y)^(1/4) (log log y)^e]; needs y > e for log log."""
    if kind not in NORMALIZATION_EXPONENT:
        raise DomainError(f"unknown kind {kind!r}")
    if y <= math.e:
        raise DomainError(f"normalization needs y > e, got {y}")
    e = NORMALIZATION_EXPONENT[kind]
    return exact_value / ((y * math.log(y)) ** 0.25 * math.log(math.log(y)) ** e)


@dataclass(frozen=True)
class WitnessRecord:
    """A located large value with its search provenance."""

    kind: str
    x: float
    y: float                  # x^2, where the error term is evaluated
    exact_value: float
    series_value: float
    normalized: float
    sign_ok: bool             # > 0 for divisor, < 0 for circle
    strategy: str
    budget: int
    seed: int
    n_terms: int
    config_hash: str
    schema_version: int = SCHEMA_VERSION
    timestamp: Optional[str] = None

    def payload(self) -> dict:
        d = asdict(self)
        if d.get("timestamp") is None:
            d.pop("timestamp", None)
        return d

    def record_id(self) -> str:
        # volatile metadata stays out of the identity
        d = self.payload()
        d.pop("timestamp", None)
        return content_hash(d)


@njit(cache=True)
def _score_grid(theta0, dtheta, weights, npts):  # pragma: no cover
    """sum_n w_n cos(theta0_n + k dtheta_n) for k = 0..npts-1.

    Chebyshev two-term recurrence per frequency; drift over npts steps is
    O(npts^2 * eps) in the worst case, fine for ranking (records are
    rescored precisely).
    """
    out = np.zeros(npts)
    for i in range(len(weights)):
        w = weights[i]
        c_cur = math.cos(theta0[i])
        c_prev = math.cos(theta0[i] - dtheta[i])
        two_c = 2.0 * math.cos(dtheta[i])
        out[0] += w * c_cur
        for k in range(1, npts):
            c_next = two_c * c_cur - c_prev
            c_prev = c_cur
            c_cur = c_next
            out[k] += w * c_cur
    return out


def _grid_scores(
    series: VoronoiSeries, n_terms: int, x0: float, step: float, npts: int
) -> np.ndarray:
    # starting phases and increments reduced mod 2 in extended precision
    sq = series._sqrt_n[:n_terms]
    scale = series._freq_scale
    theta0 = (
        np.mod(scale * sq * np.longdouble(x0), 2.0).astype(np.float64) * math.pi
        + series._phase_offset
    )
    dtheta = np.mod(scale * sq * np.longdouble(step), 2.0).astype(np.float64) * math.pi
    return _score_grid(theta0, dtheta, series._weights[:n_terms], npts)


def _golden_refine(fun, a: float, b: float, iters: int) -> Tuple[float, float]:
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max(0, iters - 2)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = fun(d)
    return (c, fc) if fc > fd else (d, fd)


def _dedupe(cands: List[Tuple[float, float]], min_sep: float) -> List[Tuple[float, float]]:
    # cands: (x, score); keep the best of each min_sep-cluster
    cands = sorted(cands)
    out: List[Tuple[float, float]] = []
    for x, s in cands:
        if out and x - out[-1][0] < min_sep:
            if s > out[-1][1]:
                out[-1] = (x, s)
        else:
            out.append((x, s))
    return out


def _grid_candidates(
    series: VoronoiSeries,
    n_terms: int,
    x_min: float,
    x_max: float,
    budget: int,
) -> List[Tuple[float, float]]:
    n_grid = max(1000, int(budget * 0.85))
    refine_budget = max(200, budget - n_grid)
    step = (x_max - x_min) / (n_grid - 1)
    scores = _grid_scores(series, n_terms, x_min, step, n_grid)
    k_top = max(8, n_grid // 100)
    top_idx = np.argpartition(-scores, k_top - 1)[:k_top]
    iters = max(6, refine_budget // k_top)

    def precise(x):
        return series.phase_sum(x, n_terms)

    cands = []
    for i in sorted(int(j) for j in top_idx):
        x0 = x_min + i * step
        a, b = max(x_min, x0 - step), min(x_max, x0 + step)
        x_best, s_best = _golden_refine(precise, a, b, iters)
        cands.append((x_best, s_best))
    return _dedupe(cands, min_sep=step / 4.0)


def _resonator_candidates(
    series: VoronoiSeries,
    n_terms: int,
    x_min: float,
    x_max: float,
    budget: int,
    table: ArithmeticTable,
    resonator_m: Optional[int],
    resonator_r: float,
) -> List[Tuple[float, float]]:
    M = resonator_m if resonator_m is not None else max(1, int(math.log(x_max) / 4.0))
    top = largest_terms(series.kind, M, table, strict=False)
    scale = 2.0 if series.kind == "divisor" else 1.0
    freqs = tuple(scale * math.sqrt(n) for n, _ in top)
    fs = FrequencySet(frequencies=freqs, r=resonator_r)

    n_coarse = max(1000, int(budget * 0.3))
    xs = np.linspace(x_min, x_max, n_coarse)
    guide = np.abs(eval_product_grid(fs, xs)) ** 2
    k_peaks = max(6, n_coarse // 250)
    peak_idx = np.argpartition(-guide, k_peaks - 1)[:k_peaks]
    coarse_step = (x_max - x_min) / (n_coarse - 1)

    local_budget = max(200, int(budget * 0.55) // k_peaks)
    refine_iters = max(6, int(budget * 0.15) // k_peaks)

    def precise(x):
        return series.phase_sum(x, n_terms)

    cands = []
    for i in sorted(int(j) for j in peak_idx):
        a = max(x_min, xs[i] - coarse_step)
        b = min(x_max, xs[i] + coarse_step)
        npts = max(16, local_budget)
        step = (b - a) / (npts - 1)
        local = _grid_scores(series, n_terms, a, step, npts)
        j = int(np.argmax(local))
        xa, xb = max(a, a + (j - 1) * step), min(b, a + (j + 1) * step)
        x_best, s_best = _golden_refine(precise, xa, xb, refine_iters)
        cands.append((x_best, s_best))
    return _dedupe(cands, min_sep=coarse_step / 4.0)


def hunt(
    kind: str,
    x_range: Tuple[float, float],
    budget: int,
    n_terms: int,
    table: ArithmeticTable,
    strategy: str = "grid",
    seed: int = 0,
    max_records: int = 5,
    resonator_m: Optional[int] = None,
    resonator_r: float = 1.0 / 3.0,
    record_time: Optional[str] = None,
) -> List[WitnessRecord]:
    """Search x_range for sign-correct large values; return validated records.

    Strategies: 'grid' (uniform scoring plus golden-section refinement of
    the top percentile), 'resonator-guided' (pre-score by |R(x)|^2 built on
    the top-M sequence frequencies, then local grids around resonator
    peaks), 'hybrid' (the full grid pass plus an extra resonator pass at a
    quarter of the budget, so it dominates 'grid' by construction at the
    cost of up to 1.25x the nominal evaluation budget).

    An empty result means no sign-correct candidate surfaced (diagnostic
    logged), not an error.  Fixed (seed, config) reproduces the record list
    exactly; `record_time`, when given, is stored as the timestamp of every
    record (pass a fixed string for byte-stable stores).
    """
    x_min, x_max = float(x_range[0]), float(x_range[1])
    if kind not in NORMALIZATION_EXPONENT:
        raise DomainError(f"unknown kind {kind!r}")
    if strategy not in STRATEGIES:
        raise DomainError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    if x_min < 10.0 or x_max <= x_min:
        raise DomainError(f"need 10 <= x_min < x_max, got [{x_min}, {x_max}]")
    budget = int(budget)
    if budget < 10**3:
        raise DomainError(f"budget must be >= 1000 evaluations, got {budget}")
    series = VoronoiSeries(kind, table)
    series._require_terms(n_terms)

    if strategy == "grid":
        cands = _grid_candidates(series, n_terms, x_min, x_max, budget)
    elif strategy == "resonator-guided":
        cands = _resonator_candidates(
            series, n_terms, x_min, x_max, budget, table, resonator_m, resonator_r
        )
    else:
        cands = _grid_candidates(series, n_terms, x_min, x_max, budget)
        extra = _resonator_candidates(
            series, n_terms, x_min, x_max, max(1000, budget // 4), table,
            resonator_m, resonator_r,
        )
        cands = _dedupe(cands + extra, min_sep=(x_max - x_min) / (4.0 * budget))

    cands.sort(key=lambda c: (-c[1], c[0]))
    config = {
        "kind": kind,
        "x_min": x_min,
        "x_max": x_max,
        "budget": budget,
        "n_terms": int(n_terms),
        "strategy": strategy,
        "seed": int(seed),
        "table_limit": int(table.limit),
        "schema_version": SCHEMA_VERSION,
    }
    cfg_hash = content_hash(config)

    want_positive = kind == "divisor"
    records: List[WitnessRecord] = []
    for x, _score in cands:
        if len(records) >= max_records:
            break
        exact = series.exact(x)
        ok = exact > 0 if want_positive else exact < 0
        if not ok:
            continue
        records.append(
            WitnessRecord(
                kind=kind,
                x=float(x),
                y=float(x) ** 2,
                exact_value=exact,
                series_value=series.value(x, n_terms),
                normalized=normalized_value(kind, exact, float(x) ** 2),
                sign_ok=True,
                strategy=strategy,
                budget=budget,
                seed=int(seed),
                n_terms=int(n_terms),
                config_hash=cfg_hash,
                timestamp=record_time,
            )
        )
    if not records:
        log.warning(
            "hunt(%s, [%g, %g], budget=%d) found no sign-correct candidate "
            "among %d refined points",
            kind, x_min, x_max, budget, len(cands),
        )
    records.sort(key=lambda rec: (-abs(rec.normalized), rec.x))
    return records


def validate_record(record: WitnessRecord, tol: float = 1e-9) -> None:
    """Recompute the exact error term and normalization; raise on mismatch."""
    if record.kind not in NORMALIZATION_EXPONENT:
        raise ValidationError(f"unknown kind {record.kind!r}")
    y = to_fraction(record.x) ** 2
    exact = delta_exact(y) if record.kind == "divisor" else p_exact(y)
    if not math.isclose(exact, record.exact_value, rel_tol=0.0, abs_tol=tol):
        raise ValidationError(
            f"exact value mismatch at x={record.x!r}: recomputed {exact!r}, "
            f"stored {record.exact_value!r}"
        )
    want_positive = record.kind == "divisor"
    if record.sign_ok != (exact > 0 if want_positive else exact < 0):
        raise ValidationError(f"sign flag inconsistent at x={record.x!r}")
    norm = normalized_value(record.kind, record.exact_value, record.y)
    if not math.isclose(norm, record.normalized, rel_tol=0.0, abs_tol=tol):
        raise ValidationError(f"normalization mismatch at x={record.x!r}")


class WitnessStore:
    """Append-only JSON-lines store of witness records, deduplicated by id."""

    def __init__(self, path):
        self.path = Path(path)

    def append(self, record: WitnessRecord) -> str:
        """Validate, then persist; returns the content id.  Duplicate ids
        leave the store untouched."""
        validate_record(record)
        rec_id = record.record_id()
        existing = {rid for rid, _ in self._iter_valid()}
        if rec_id in existing:
            return rec_id
        line = canonical_json({"id": rec_id, **record.payload()})
        try:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
        except OSError as exc:
            raise StoreError(f"cannot append to {self.path}: {exc}") from exc
        return rec_id

    def _iter_valid(self):
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    rid = obj.pop("id")
                    rec = WitnessRecord(**obj)
                except (ValueError, TypeError, KeyError) as exc:
                    log.warning("%s:%d: skipping corrupt record (%s)", self.path, lineno, exc)
                    yield None, lineno
                    continue
                yield rid, rec

    def load(self) -> Tuple[List[WitnessRecord], List[int]]:
        """All well-formed records plus the line numbers that were skipped."""
        records, skipped = [], []
        for rid, payload in self._iter_valid():
            if rid is None:
                skipped.append(payload)
            else:
                records.append(payload)
        return records, skipped

    def best_normalized(self, kind: str) -> Optional[float]:
        """Largest |normalized| among sign-correct records of this kind."""
        best = None
        for rid, rec in self._iter_valid():
            if rid is None or rec.kind != kind or not rec.sign_ok:
                continue
            if best is None or abs(rec.normalized) > abs(best):
                best = rec.normalized
        return best

    def __len__(self) -> int:
        return sum(1 for rid, _ in self._iter_valid() if rid is not None)
