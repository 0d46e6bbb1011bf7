import math
from fractions import Fraction

import numpy as np
import pytest

from omegahunt.errors import DomainError, RangeError
from omegahunt.extremal import (
    CIRCLE_SUM_EXPONENT,
    DIVISOR_SUM_EXPONENT,
    certificate_floor,
    count_below,
    exponent_fit,
    extremal_sum,
    fit_log_exponent,
    largest_terms,
    predicted_order,
    sequence_values,
    sum_table,
)
from omegahunt.sieve import DIVISOR_WEIGHT, build_table, count_weighted


def sort_all_oracle(kind, M, table):
    vals = sequence_values(kind, table)[1:]
    order = np.argsort(-vals, kind="stable")
    return math.fsum(float(vals[i]) for i in order[:M])


def test_exponent_constants():
    assert DIVISOR_SUM_EXPONENT == pytest.approx(1.1398815748, abs=1e-9)
    assert CIRCLE_SUM_EXPONENT == pytest.approx(0.1949407874, abs=1e-9)


def test_largest_terms_divisor_reference(table_med):
    top = largest_terms("divisor", 4, table_med)
    ns = [n for n, _ in top]
    vs = [v for _, v in top]
    assert ns == [2, 4, 6, 1]
    assert vs[0] == pytest.approx(2 * 2**-0.75, abs=1e-12)       # 2^(1/4)
    assert vs[1] == pytest.approx(3 * 4**-0.75, abs=1e-12)
    assert vs[2] == pytest.approx(4 * 6**-0.75, abs=1e-12)
    assert vs[3] == pytest.approx(1.0, abs=1e-12)
    assert vs[0] == pytest.approx(1.18921, abs=1e-5)
    assert vs[1] == pytest.approx(1.06066, abs=1e-5)
    assert vs[2] == pytest.approx(1.04339, abs=1e-5)


def test_largest_terms_circle_reference(table_med):
    top = largest_terms("circle", 3, table_med)
    assert [n for n, _ in top] == [1, 5, 2]
    assert top[0][1] == pytest.approx(4.0, abs=1e-12)
    assert top[1][1] == pytest.approx(8 * 5**-0.75, abs=1e-12)
    assert top[2][1] == pytest.approx(4 * 2**-0.75, abs=1e-12)
    assert top[1][1] == pytest.approx(2.39256, abs=1e-5)
    assert top[2][1] == pytest.approx(2.37841, abs=1e-5)


def test_largest_terms_global_max(table_med):
    assert largest_terms("divisor", 1, table_med)[0][0] == 2


def test_extremal_sum_reference_values(table_med):
    assert extremal_sum("divisor", 2, table_med) == pytest.approx(2.24987, abs=1e-5)
    assert extremal_sum("divisor", 4, table_med) == pytest.approx(4.29326, abs=1e-5)
    assert extremal_sum("circle", 1, table_med) == pytest.approx(4.0, abs=1e-12)


def test_extremal_sum_matches_sort_all_oracle(table_med):
    for kind in ("divisor", "circle"):
        for M in (1, 2, 16, 100, 500):
            mine = extremal_sum(kind, M, table_med, strict=False)
            assert mine == sort_all_oracle(kind, M, table_med)


def test_sums_strictly_increasing_with_nonincreasing_increments(table_med):
    st = sum_table("divisor", [1, 2, 4, 8, 16, 32], table_med)
    sums = st.sums()
    assert all(b > a for a, b in zip(sums, sums[1:]))
    # increments between consecutive Ms average the next block of values,
    # which are nonincreasing
    tops = largest_terms("divisor", 32, table_med)
    vals = [v for _, v in tops]
    assert all(vals[i] >= vals[i + 1] - 1e-15 for i in range(len(vals) - 1))


def test_certificate_blocks_uncertifiable_requests():
    tiny = build_table(200)
    with pytest.raises(RangeError):
        largest_terms("divisor", 150, tiny, strict=True)
    # same request is answered (as a scan-range result) without the certificate
    top = largest_terms("divisor", 150, tiny, strict=False)
    assert len(top) == 150


def test_certificate_floor_values():
    assert certificate_floor("divisor", 50) == math.inf
    f7 = certificate_floor("divisor", 10**7)
    assert 0.002 < f7 < 0.003
    assert certificate_floor("circle", 10**7) == pytest.approx(4 * f7, abs=1e-12)


def test_more_members_than_range_is_range_error(table_small):
    with pytest.raises(RangeError):
        largest_terms("circle", table_small.limit, table_small, strict=False)


def test_count_below_reference(table_med):
    # n in {1, 2, 4, 6} all have n^(3/4)/d(n) <= 1
    assert count_below("divisor", 1, table_med) >= 4
    # y below 1 excludes n = 1
    c_low = count_below("divisor", Fraction(99, 100), table_med)
    c_one = count_below("divisor", 1, table_med)
    assert c_one == c_low + 1


def test_count_below_duality(table_med):
    for kind, M in (("divisor", 37), ("circle", 23)):
        top = largest_terms(kind, M, table_med)
        n_M, v_M = top[-1]
        y_M = Fraction(n_M) ** 3  # compare via y^4 w^4 with exact y=y_M: use rationals bracketing
        y = 1.0 / v_M
        y_plus = Fraction(float(y)).limit_denominator(10**12) + Fraction(1, 10**9)
        y_minus = Fraction(float(y)).limit_denominator(10**12) - Fraction(1, 10**9)
        assert count_below(kind, y_plus, table_med) >= M
        assert count_below(kind, y_minus, table_med) < M


def test_count_below_consistent_with_weighted_count(table_med):
    # y = 8 corresponds exactly to x = y^(4/3) = 16
    assert count_below("divisor", 8, table_med) == count_weighted(
        DIVISOR_WEIGHT, 16, table_med
    )


def test_count_below_strict_range_error(table_small):
    with pytest.raises(RangeError):
        count_below("divisor", 10**6, table_small, strict=True)


def test_fit_recovers_synthetic_exponent():
    ys = np.logspace(2, 5, 12)
    target = 1.51984
    counts = np.rint(0.37 * ys ** (4.0 / 3.0) * np.log(ys) ** target).astype(int)
    fit = fit_log_exponent(ys, counts)
    assert fit.slope == pytest.approx(target, abs=1e-3)
    assert fit.r_squared > 0.999999


def test_fit_grid_validation(table_med):
    with pytest.raises(DomainError):
        fit_log_exponent([10, 20, 30], [1, 2, 3])  # too few points
    bad = np.linspace(10, 50, 10)  # under two decades
    with pytest.raises(DomainError):
        fit_log_exponent(bad, np.arange(1, 11))
    with pytest.raises(DomainError):
        exponent_fit("divisor", np.linspace(5, 20, 10), table_med)


def test_exponent_fit_runs_on_real_counts(table_med):
    ys = np.logspace(1.0001, 3.05, 9)
    fit = exponent_fit("divisor", ys, table_med)
    assert math.isfinite(fit.slope)
    assert len(fit.counts) == 9
    assert all(c >= 1 for c in fit.counts)


def test_predicted_order():
    with pytest.raises(DomainError):
        predicted_order("divisor", 2)
    v = predicted_order("divisor", 16)
    assert v == pytest.approx(16**0.25 * math.log(16) ** DIVISOR_SUM_EXPONENT, abs=1e-12)
    assert v == pytest.approx(6.39539, abs=2e-5)
    vc = predicted_order("circle", 16)
    assert vc == pytest.approx(16**0.25 * math.log(16) ** CIRCLE_SUM_EXPONENT, abs=1e-12)


def test_y_m_matches_definition(table_med):
    st = sum_table("divisor", [4], table_med)
    M, s, n_M, y_M = st.entries[0]
    assert n_M == 1  # 4th largest is n = 1
    assert y_M == pytest.approx(float(n_M) ** 0.75 / table_med.d[n_M], abs=1e-12)
