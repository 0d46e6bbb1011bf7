"""Acceptance gate: one test per criterion (split into sub-checks where a
criterion bundles several assertions).  Each test prints a PASS/FAIL line
with the measured quantities so the run log doubles as a report.

Heavy fixtures are module-scoped; the full module is sized to finish in a
few minutes on one core.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from omegahunt.error_terms import VoronoiSeries, delta_exact, p_exact
from omegahunt.extremal import (
    exponent_fit,
        predicted_order,
    sequence_values,
    sum_table,
)
from omegahunt.hunter import WitnessStore, hunt, validate_record
from omegahunt.kernel import (
    SectorialKernel,
    choose_alpha,
    default_sector_grid,
    fourier,
    fourier_by_quadrature,
    sector_check,
)
from omegahunt.quadrature import gamma_weighted_integral
from omegahunt.resonator import (
    FrequencySet,
    expand,
        shift_inequality_check,
    square_bound_check,
    tail_mass,
)
from omegahunt.sieve import build_table, circle_summatory, divisor_summatory
from omegahunt.verifier import (
    ResonanceInstance,
    TargetSum,
    circle_target,
    divisor_target,
    random_instance,
    resonant_positions_by_weight,
    theorem_lower_bound,
    verify_proposition,
)


@pytest.fixture(scope="module")
def table_1e7():
    return build_table(10**7)


def report(criterion, passed, detail):
    print(f"CRITERION {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


# --------------------------------------------------------------- criterion 1


def test_criterion_1_summatory_oracle_equivalence(table_med):
    t0 = time.time()
    limit = table_med.limit
    for x in range(1, limit + 1):
        assert divisor_summatory(x) == int(table_med.d_prefix[x])
        assert circle_summatory(x) == int(table_med.r_prefix[x])
    elapsed = time.time() - t0
    report(1, elapsed < 10.0, f"all x <= 1e5 exact, {elapsed:.1f}s (< 10s required)")
    assert elapsed < 10.0


# --------------------------------------------------------------- criterion 2


def test_criterion_2_unit_values():
    d6 = delta_exact(6)
    p5 = p_exact(5)
    p3 = p_exact(3)
    ok = (
        abs(d6 - 2.322855) <= 1e-6
        and abs(p5 - 4.292037) <= 1e-6
        and abs(p3 - (-1.424778)) <= 1e-6
    )
    report(2, ok, f"delta(6)={d6:.9f} p(5)={p5:.9f} p(3)={p3:.9f}")
    assert ok


# --------------------------------------------------------------- criterion 3

N_HI = 10**6
N_LO = 10**4


@pytest.fixture(scope="module")
def residual_data(table_1e6):
    # 20 deterministic samples with half-integer squares, spread over
    # [100, 1000]: x = sqrt(k + 1/2) stays maximally far from the jumps
    ks = np.linspace(10**4, 10**6 - 1, 20).astype(np.int64)
    xs = [math.sqrt(int(k) + 0.5) for k in ks]
    out = {}
    for kind in ("divisor", "circle"):
        series = VoronoiSeries(kind, table_1e6)
        res_hi = [series.exact(x) - series.value(x, N_HI) for x in xs]
        res_lo = [series.exact(x) - series.value(x, N_LO) for x in xs]
        out[kind] = (res_hi, res_lo)
    return out


def test_criterion_3a_divisor_residual_tolerance(residual_data):
    res_hi, _ = residual_data["divisor"]
    worst = max(abs(r) for r in res_hi)
    ok = worst <= 0.5
    report(
        "3a",
        ok,
        f"divisor max |residual| at N=1e6 over 20 samples in [100,1000]: "
        f"{worst:.3f} (required <= 0.5; series-vs-jump constant +1/4 plus "
        f"truncation fluctuation ~ x^(1/2) N^(-1/4) exceeds it at large x)",
    )
    assert ok, f"max divisor residual {worst:.3f} > 0.5"


def test_criterion_3b_circle_residual_tolerance(residual_data):
    res_hi, _ = residual_data["circle"]
    worst = max(abs(r) for r in res_hi)
    offsets = [r + 1.0 for r in res_hi]
    ok = worst <= 0.5
    report(
        "3b",
        ok,
        f"circle max |residual| at N=1e6: {worst:.3f} (required <= 0.5; the "
        f"series represents the lattice count including the origin, so the "
        f"n>=1 remainder sits at -1 + o(1): max |residual + 1| = "
        f"{max(abs(o) for o in offsets):.3f})",
    )
    assert ok, f"max circle residual {worst:.3f} > 0.5"


def test_criterion_3c_residual_shrinks_with_n(residual_data):
    ok = True
    detail = []
    for kind in ("divisor", "circle"):
        res_hi, res_lo = residual_data[kind]
        hi, lo = max(map(abs, res_hi)), max(map(abs, res_lo))
        detail.append(f"{kind}: max|res| N=1e6 {hi:.3f} < N=1e4 {lo:.3f}")
        ok = ok and hi < lo
    report("3c", ok, "; ".join(detail))
    assert ok


# --------------------------------------------------------------- criterion 4

ALPHAS = (0.25, 0.45139, 0.75)
XIS = (0.0, 0.1, -0.1, 1.0, -1.0, 10.0, -10.0)


def test_criterion_4_kernel_closed_form():
    worst = 0.0
    for alpha in ALPHAS:
        for xi in XIS:
            diff = abs(fourier(alpha, xi) - fourier_by_quadrature(alpha, xi))
            worst = max(worst, diff)
    norm_worst = 0.0
    for alpha in ALPHAS:
        val, _ = gamma_weighted_integral(
            lambda x: np.ones_like(x), alpha=alpha, T=1.0, osc_freq=0.0, sup_g=1.0
        )
        norm_worst = max(norm_worst, abs(val - 1.0))
    ok = worst <= 1e-6 and norm_worst <= 1e-8
    report(
        4,
        ok,
        f"21 transform pairs max |closed - quadrature| = {worst:.2e} (<= 1e-6); "
        f"normalization max |int K - 1| = {norm_worst:.2e} (<= 1e-8)",
    )
    assert ok


# --------------------------------------------------------------- criterion 5


def test_criterion_5_reference_alpha_and_sector():
    a = choose_alpha(-math.pi / 4, Fraction(1, 10))
    # exact value (2/pi) arctan(1 - sqrt(2)/10) = 0.4516520454..., strictly
    # above 0.45
    formula = (2 / math.pi) * math.atan(1 - math.sqrt(2) / 10)
    kernel = SectorialKernel.for_angle(-math.pi / 4, 0.1)
    rep = sector_check(kernel, default_sector_grid(-1000.0, 1000.0, 10**4))
    ok = (
        0.45 < a < 0.452
        and abs(a - formula) < 1e-12
        and rep.passed
        and rep.min_margin >= -1e-12
    )
    report(
        5,
        ok,
        f"alpha={a:.10f} (>0.45, formula match {abs(a - formula):.1e}); "
        f"sector margin on 1e4-point grid: {rep.min_margin:.3e} >= -1e-12",
    )
    assert ok


# --------------------------------------------------------------- criterion 6


def test_criterion_6_resonator_combinatorics():
    # hand expansion 1: single frequency, geometric coefficients
    fs1 = FrequencySet(frequencies=(Fraction(2),), r=Fraction(1, 2))
    e1 = expand(fs1, 3)
    ok1 = e1.keys == (Fraction(0), Fraction(2), Fraction(4), Fraction(6)) and all(
        abs(c - t) <= 1e-12 for c, t in zip(e1.coeffs, (1, 0.5, 0.25, 0.125))
    )
    # hand expansion 2: {1, sqrt 2}, six distinct keys
    fs2 = FrequencySet(frequencies=(1.0, math.sqrt(2)), r=0.5)
    e2 = expand(fs2, 2)
    s2 = math.sqrt(2)
    targets = {0.0: 1.0, 1.0: 0.5, s2: 0.5, 2.0: 0.25, 1 + s2: 0.25, 2 * s2: 0.25}
    ok2 = len(e2) == 6 and all(
        abs(e2.coefficient(v) - t) <= 1e-12 for v, t in targets.items()
    )
    # hand expansion 3: collision {1, 2}: a(2) = r^2 + r
    fs3 = FrequencySet(frequencies=(1, 2), r=Fraction(1, 2))
    e3 = expand(fs3, 2)
    ok3 = abs(e3.coefficient(2) - 0.75) <= 1e-12

    rng = np.random.default_rng(606)
    ok_props = True
    for trial in range(100):
        M = int(rng.integers(1, 5))
        B = int(rng.integers(2, 6))
        if trial % 2 == 0:
            freqs = tuple(
                Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 5)))
                for _ in range(M)
            )
            r = Fraction(int(rng.integers(1, 6)), int(rng.integers(6, 10)))
        else:
            freqs = tuple(float(f) for f in rng.uniform(0.1, 4.0, M))
            r = float(rng.uniform(0.15, 0.6))
        fs = FrequencySet(frequencies=freqs, r=r)
        ok_props = ok_props and shift_inequality_check(expand(fs, B), fs)
        ok_props = ok_props and square_bound_check(fs, B)

    # partial sums of a_{r^2} approach the closed form from below
    fsq = FrequencySet(frequencies=(1, Fraction(7, 2)), r=Fraction(1, 2))
    ok_mass = True
    prev_gap = None
    for B in (2, 5, 10, 20):
        er2 = expand(FrequencySet(fsq.frequencies, Fraction(1, 4)), B)
        closed = (1 - 0.25) ** (-2)
        gap = closed - er2.coefficient_sum()
        ok_mass = ok_mass and -1e-12 <= gap <= tail_mass(Fraction(1, 4), 2, B) + 1e-12
        if prev_gap is not None:
            ok_mass = ok_mass and gap <= prev_gap
        prev_gap = gap
    ok = ok1 and ok2 and ok3 and ok_props and ok_mass
    report(
        6,
        ok,
        f"hand expansions {ok1}/{ok2}/{ok3}, 100 random shift+square suites "
        f"{ok_props}, mass gap closes within the exact tail {ok_mass}",
    )
    assert ok


# --------------------------------------------------------------- criterion 7


def test_criterion_7_proposition_certification(table_small):
    t0 = time.time()
    margins = []
    for tgt, beta in (
        (divisor_target(50, table_small), -math.pi / 4),
        (circle_target(50, table_small), math.pi / 4),
    ):
        inst = ResonanceInstance(
            target=tgt,
            resonant=resonant_positions_by_weight(tgt, 5),
            kernel=SectorialKernel.for_angle(beta, 0.1),
            r=1.0 / 3.0,
            T=10.0,
        )
        rep = verify_proposition(inst)
        assert rep.passed and rep.margin >= -rep.quadrature_error_estimate
        assert rep.I1 + rep.quadrature_error_estimate >= rep.j1_bound
        margins.append(rep.margin)

    rng = np.random.default_rng(707)
    worst_rel = 0.0
    for i in range(100):
        inst = random_instance(rng)
        rep = verify_proposition(inst, spectral=True)
        assert rep.passed, f"instance {i}: margin {rep.margin} < -{rep.quadrature_error_estimate}"
        assert rep.I1 + rep.quadrature_error_estimate >= rep.j1_bound
        cushion = 1e-9 * max(1.0, abs(rep.I1), abs(rep.I2))
        d1 = abs(rep.I1 - rep.spectral_i1)
        d2 = abs(rep.I2 - rep.spectral_i2)
        b1 = rep.quadrature_error_estimate + rep.spectral_slack_i1 + cushion
        b2 = rep.quadrature_error_estimate + rep.spectral_slack_i2 + cushion
        assert d1 <= b1, f"instance {i}: spectral I1 off by {d1:.2e} > {b1:.2e}"
        assert d2 <= b2, f"instance {i}: spectral I2 off by {d2:.2e} > {b2:.2e}"
        worst_rel = max(worst_rel, d1 / b1, d2 / b2)
    elapsed = time.time() - t0
    ok = elapsed < 300.0
    report(
        7,
        ok,
        f"2 reference configs (margins {margins[0]:.1f}, {margins[1]:.1f}) and "
        f"100 random instances certified; worst spectral/quadrature gap at "
        f"{worst_rel:.2f} of its combined bound; {elapsed:.0f}s (< 300s)",
    )
    assert ok


# --------------------------------------------------------------- criterion 8


def _toy_targets():
    rng = np.random.default_rng(808)
    toys = []
    for i in range(10):
        n = int(rng.integers(3, 7))
        freqs = tuple(
            Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 4))) for _ in range(n)
        )
        weights = tuple(float(w) for w in rng.uniform(0.1, 1.2, n))
        beta = float(rng.uniform(0.25, 1.2)) * (1 if i % 2 else -1)
        delta = 0.3 * math.cos(beta)
        toys.append(
            ResonanceInstance(
                target=TargetSum(
                    indices=tuple(range(1, n + 1)), weights=weights, frequencies=freqs
                ),
                resonant=(0, 1),
                kernel=SectorialKernel.for_angle(beta, delta),
                r=1.0 / 3.0,
                T=5.0,
            )
        )
    return toys


def test_criterion_8_theorem_desk_check():
    worst_slack = math.inf
    for inst in _toy_targets():
        tb = theorem_lower_bound(inst, 10.0, 10**5, grid_budget=600_000)
        assert tb.satisfied, (
            f"grid max {tb.grid_max:.4f} < bound {tb.bound:.4f} - error {tb.error_term:.4f}"
        )
        worst_slack = min(worst_slack, tb.grid_max - (tb.bound - tb.error_term))
    report(
        8,
        True,
        f"10 toy targets: grid maximum exceeds bound - error with slack >= "
        f"{worst_slack:.4f}",
    )


# --------------------------------------------------------------- criterion 9

M_GRID = [2**k for k in range(4, 17)]


@pytest.fixture(scope="module")
def extremal_tables(table_1e7):
    out = {}
    for kind in ("divisor", "circle"):
        st = sum_table(kind, M_GRID, table_1e7, strict=False)
        vals = sequence_values(kind, table_1e7)[1:]
        order = np.argsort(-vals, kind="stable")
        prefix = np.cumsum(vals[order[: max(M_GRID)]])
        oracle = {M: math.fsum(float(v) for v in vals[order[:M]]) for M in M_GRID}
        out[kind] = (st, oracle)
    return out


def test_criterion_9a_sums_match_sort_all_oracle(extremal_tables):
    ok = True
    for kind in ("divisor", "circle"):
        st, oracle = extremal_tables[kind]
        for M, s, n_M, y_M in st.entries:
            ok = ok and s == oracle[M]
    report("9a", ok, f"S(M), L(M) equal the sort-all oracle exactly for M in 2^4..2^16")
    assert ok


def _decade_ratios(ratios):
    # max/min of the ratio within each factor-10 window of M
    worst = 1.0
    for i, Mi in enumerate(M_GRID):
        window = [
            ratios[j] for j, Mj in enumerate(M_GRID) if Mi <= Mj < 10 * Mi
        ]
        if len(window) > 1:
            worst = max(worst, max(window) / min(window))
    return worst


def test_criterion_9b_divisor_ratio_window(extremal_tables):
    st, _ = extremal_tables["divisor"]
    ratios = [s / predicted_order("divisor", M) for M, s, _, _ in st.entries]
    in_window = all(0.5 <= r <= 5.0 for r in ratios)
    decade = _decade_ratios(ratios)
    ok = in_window and decade <= 1.6
    report(
        "9b",
        ok,
        f"S(M)/prediction in [{min(ratios):.3f}, {max(ratios):.3f}] "
        f"(window [0.5, 5]); per-decade max/min {decade:.3f} (<= 1.6)",
    )
    assert ok


def test_criterion_9c_circle_ratio_window(extremal_tables):
    st, _ = extremal_tables["circle"]
    ratios = [s / predicted_order("circle", M) for M, s, _, _ in st.entries]
    in_window = all(0.5 <= r <= 5.0 for r in ratios)
    decade = _decade_ratios(ratios)
    ok = in_window and decade <= 1.6
    report(
        "9c",
        ok,
        f"L(M)/prediction in [{min(ratios):.3f}, {max(ratios):.3f}] (window "
        f"[0.5, 5] fails: the sequence r(n) n^(-3/4) carries the factor 4 of "
        f"r(1) = 4, so the constant-1 normalization sits ~4x high; "
        f"L/(4*prediction) would lie in [{min(ratios) / 4:.3f}, {max(ratios) / 4:.3f}]); "
        f"per-decade max/min {decade:.3f} (<= 1.6 holds)",
    )
    assert ok, f"L(M) ratio window [0.5, 5] violated: {min(ratios):.2f}..{max(ratios):.2f}"


def test_criterion_9d_exponent_fits(table_1e7):
    t0 = time.time()
    grid = np.logspace(2, 5, 12)
    targets = {"divisor": 2 ** (4 / 3) - 1, "circle": 2 ** (1 / 3) - 1}
    slopes = {}
    for kind in ("divisor", "circle"):
        slopes[kind] = exponent_fit(kind, grid, table_1e7).slope
    ok = all(abs(slopes[k] - targets[k]) <= 0.3 for k in slopes)
    elapsed = time.time() - t0
    report(
        "9d",
        ok,
        f"fit slopes over y in [1e2, 1e5] at sieve 1e7: divisor "
        f"{slopes['divisor']:.3f} (target 1.520 +- 0.3), circle "
        f"{slopes['circle']:.3f} (target 0.260 +- 0.3); fails because exact "
        f"counts at y = 1e5 need n up to ~1e12 (members with large d(n) "
        f"beyond the sieve), so range-limited counts saturate and bend the "
        f"fit; {elapsed:.0f}s",
    )
    assert ok, f"slopes {slopes} outside +-0.3 of {targets}"


def test_criterion_9_runtime(extremal_tables, table_1e7):
    # table build + sums covered by fixtures; spot-check the budget with a
    # fresh timing of the dominant pieces
    t0 = time.time()
    sum_table("divisor", [2**16], table_1e7, strict=False)
    sum_table("circle", [2**16], table_1e7, strict=False)
    elapsed = time.time() - t0
    report("9e", elapsed < 180.0, f"top-2^16 selection pass in {elapsed:.0f}s (< 180s)")
    assert elapsed < 180.0


# -------------------------------------------------------------- criterion 10


def test_criterion_10_hunter_discipline(table_med, tmp_path):
    t0 = time.time()
    stores = []
    for name in ("one.jsonl", "two.jsonl"):
        store = WitnessStore(tmp_path / name)
        for kind in ("divisor", "circle"):
            records = hunt(
                kind,
                (100.0, 1000.0),
                10**5,
                10**4,
                table_med,
                strategy="grid",
                seed=1234,
                record_time="2026-08-10T00:00:00Z",
            )
            assert records, f"{kind} hunt produced no sign-correct record"
            if kind == "divisor":
                assert all(r.exact_value > 0 for r in records)
            else:
                assert all(r.exact_value < 0 for r in records)
            for rec in records:
                validate_record(rec)  # exact revalidation
                store.append(rec)
        stores.append(store)
    loaded, skipped = stores[0].load()
    assert skipped == []
    for rec in loaded:
        validate_record(rec)
    identical = stores[0].path.read_bytes() == stores[1].path.read_bytes()
    elapsed = time.time() - t0
    ok = identical
    report(
        10,
        ok,
        f"both kinds produced sign-correct validated records; store "
        f"byte-identical across reruns: {identical}; {elapsed:.0f}s",
    )
    assert ok
