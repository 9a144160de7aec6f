import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

scipy_stats = pytest.importorskip("scipy.stats")

from inclusive_coref.errors import DataError  # noqa: E402
from inclusive_coref.stats import (  # noqa: E402
    Proportion,
    certainty_summary,
    chi2_sf_1df,
    chisq_n_minus_1,
    wilson_interval,
    z_for,
)


def test_wilson_reference_values():
    assert wilson_interval(50, 100) == pytest.approx((0.40383, 0.59617), abs=5e-5)
    assert wilson_interval(7, 10) == pytest.approx((0.39678, 0.89221), abs=5e-5)


@pytest.mark.parametrize("k, n", [(0, 1), (1, 1), (0, 12), (12, 12), (3, 7), (50, 100), (999, 1000)])
@pytest.mark.parametrize("conf", [0.9, 0.95, 0.99])
def test_wilson_matches_scipy(k, n, conf):
    ci = scipy_stats.binomtest(k, n).proportion_ci(confidence_level=conf, method="wilson")
    assert wilson_interval(k, n, conf) == pytest.approx((ci.low, ci.high), abs=1e-9)


@given(st.integers(1, 500).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_wilson_contains_estimate(kn):
    k, n = kn
    lo, hi = wilson_interval(k, n)
    assert 0.0 <= lo <= k / n <= hi <= 1.0


def test_wilson_narrower_with_more_trials():
    widths = [wilson_interval(n // 2, n)[1] - wilson_interval(n // 2, n)[0] for n in (10, 100, 1000)]
    assert widths == sorted(widths, reverse=True)


def test_wilson_errors():
    with pytest.raises(ValueError):
        wilson_interval(0, 0)
    with pytest.raises(ValueError):
        wilson_interval(5, 4)
    with pytest.raises(ValueError):
        z_for(1.0)


def test_chisq_worked_value():
    # 2x2 table [[18, 2], [12, 8]]: Pearson = 40 * (18*8 - 2*12)^2 / (20*20*30*10) = 4.8
    res = chisq_n_minus_1(Proportion(18, 20), Proportion(12, 20))
    assert res.pearson == pytest.approx(4.8)
    assert res.statistic == pytest.approx(4.8 * 39 / 40)
    assert res.statistic == pytest.approx(4.68, abs=0.01)


def random_table(rng):
    n1, n2 = rng.randint(1, 200), rng.randint(1, 200)
    return Proportion(rng.randint(0, n1), n1), Proportion(rng.randint(0, n2), n2)


def test_chisq_matches_scipy_and_is_below_pearson():
    rng = random.Random(1)
    checked = 0
    while checked < 300:
        p1, p2 = random_table(rng)
        table = [[p1.successes, p1.trials - p1.successes], [p2.successes, p2.trials - p2.successes]]
        if 0 in (sum(table[0]), sum(table[1]), table[0][0] + table[1][0], table[0][1] + table[1][1]):
            continue
        res = chisq_n_minus_1(p1, p2)
        pearson, p_pearson, _, _ = scipy_stats.chi2_contingency(table, correction=False)
        assert res.pearson == pytest.approx(pearson, rel=1e-9)
        assert res.statistic <= res.pearson
        assert res.p_value == pytest.approx(scipy_stats.chi2.sf(res.statistic, 1), rel=1e-9, abs=1e-300)
        assert res.p_value >= p_pearson - 1e-15
        checked += 1


@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.841458820694124, 10.0, 40.0])
def test_chi2_tail_matches_scipy(x):
    assert chi2_sf_1df(x) == pytest.approx(scipy_stats.chi2.sf(x, 1), rel=1e-12)


def test_chi2_critical_value():
    assert chi2_sf_1df(3.841458820694124) == pytest.approx(0.05, abs=1e-12)
    assert chi2_sf_1df(0.0) == 1.0


def test_chisq_degenerate_margin_warns():
    with pytest.warns(RuntimeWarning, match="margin"):
        res = chisq_n_minus_1(Proportion(5, 5), Proportion(7, 7))
    assert res.degenerate and res.p_value == 1.0 and not res.significant()


def test_chisq_symmetric():
    a, b = Proportion(30, 57), Proportion(41, 60)
    assert chisq_n_minus_1(a, b).statistic == pytest.approx(chisq_n_minus_1(b, a).statistic)


def test_proportion_validation():
    with pytest.raises(ValueError):
        Proportion(3, 2)
    with pytest.raises(ValueError):
        Proportion(0, 0).value
    assert (Proportion(1, 2) + Proportion(2, 3)) == Proportion(3, 5)


def test_certainty_summary():
    recs = [("Zero", "definitely"), ("Zero", "unsure"), ("Orig", "definitely"), ("Zero", "definitely")]
    out = certainty_summary(recs)
    assert out["Zero"].counts == {"definitely": 2, "probably": 0, "unsure": 1}
    assert out["Zero"].distribution["definitely"] == pytest.approx(2 / 3)
    assert math.isclose(sum(out["Orig"].distribution.values()), 1.0)
    with pytest.raises(DataError, match="record 2"):
        certainty_summary([("Zero", "definitely"), ("Zero", "maybe")])
