import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stochpension.fpe import Grid1D
from stochpension.model import CalibratedConstants
from stochpension.pension import (
    LifeTable,
    PensionQuestion,
    conditional_death_pdf,
    consumption_survival_table,
    implied_annual_return,
    mfpt_table,
    mortality_table,
    pension_size_table,
    prob_pension_outlives,
    retirement_irr,
    shifted_pearson,
)

from reference_values import LIFE_TABLE_67

C = CalibratedConstants.paper_defaults()
COARSE = Grid1D.coarse()


def test_implied_return_is_zero_for_unit_growth():
    assert implied_annual_return(2.5, 25, 0.1) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("ratio,years,percent", [(3.11, 25, 1.64), (7.5, 40, 2.85)])
def test_implied_return_published_examples(ratio, years, percent):
    assert 100 * implied_annual_return(ratio, years) == pytest.approx(percent, abs=0.01)


def test_implied_return_allows_negative_rates():
    r = implied_annual_return(2.0, 25)
    assert r < 0
    assert 0.1 * sum((1 + r) ** i for i in range(1, 26)) == pytest.approx(2.0, rel=1e-8)


def test_irr_examples():
    assert retirement_irr(10, 10) == pytest.approx(0.0, abs=1e-9)
    assert 100 * retirement_irr(7.5, 8) == pytest.approx(1.45, abs=0.01)
    assert 100 * retirement_irr(15, 20) == pytest.approx(2.91, abs=0.01)
    r = retirement_irr(12, 10)
    assert r < 0 and sum((1 + r) ** -i for i in range(1, 11)) == pytest.approx(12, rel=1e-8)


def test_rate_inputs_rejected():
    for bad in ((0.0, 10), (-1.0, 10), (3.0, 0)):
        with pytest.raises(ValueError):
            implied_annual_return(*bad)
        with pytest.raises(ValueError):
            retirement_irr(*bad)
    with pytest.raises(ValueError, match="no rate"):
        implied_annual_return(1e6, 5)


# ranges keep every root inside the bisection bracket
@given(r1=st.floats(0.5, 20), r2=st.floats(0.5, 20), years=st.integers(10, 60))
def test_implied_return_increases_with_ratio(r1, r2, years):
    lo, hi = sorted((r1, r2))
    if hi - lo > 1e-6:
        assert implied_annual_return(lo, years) < implied_annual_return(hi, years)


@given(ratio=st.floats(2.0, 20), years=st.integers(1, 59))
def test_irr_increases_with_retirement_length(ratio, years):
    assert retirement_irr(ratio, years) < retirement_irr(ratio, years + 1)


def test_question_validation():
    PensionQuestion(25, 3.11)
    with pytest.raises(ValueError):
        PensionQuestion(25, 0.0)
    with pytest.raises(ValueError):
        PensionQuestion(25, 3.0, lambda_contrib=1.0)


def test_life_table_fixture():
    lt = LifeTable.us_2003()
    i = lt.row(67)
    assert (lt.l[i], lt.d[i], lt.e[i]) == (LIFE_TABLE_67["l"], LIFE_TABLE_67["d"], LIFE_TABLE_67["e"])
    assert lt.q[i] == pytest.approx(LIFE_TABLE_67["q"])
    assert lt.terminal_age == 100 and lt.q[-1] == 1.0
    with pytest.raises(ValueError):
        lt.row(101)


def _csv(rows):
    return io.StringIO("age,q,l,d,L,T,e\n" + "\n".join(rows) + "\n")


def test_life_table_validation():
    good = ["0,0.5,100,50,75,100,1.0", "1+,1.0,50,50,25,25,0.5"]
    assert LifeTable.from_csv(_csv(good)).terminal_age == 1
    with pytest.raises(ValueError, match="header"):
        LifeTable.from_csv(io.StringIO("age,q\n0,1\n"))
    with pytest.raises(ValueError, match="open interval"):
        LifeTable.from_csv(_csv(["0,0.5,100,50,75,100,1.0", "1,1.0,50,50,25,25,0.5"]))
    with pytest.raises(ValueError, match="non-increasing"):
        LifeTable.from_csv(_csv(["0,0.5,100,50,75,100,1.0", "1+,1.0,150,150,25,25,0.5"]))
    with pytest.raises(ValueError, match="q = 1"):
        LifeTable.from_csv(_csv(["0,0.5,100,50,75,100,1.0", "1+,0.9,50,50,25,25,0.5"]))
    with pytest.raises(ValueError, match="deaths"):
        LifeTable.from_csv(_csv(["0,0.5,100,40,75,100,1.0", "1+,1.0,50,50,25,25,0.5"]))


def test_conditional_death_distribution_at_67():
    dist = conditional_death_pdf(LifeTable.us_2003(), 67)
    assert dist.pdf.sum() == pytest.approx(1.0, abs=1e-6)
    assert dist.pdf[0] == pytest.approx(0.01770, abs=1e-5)
    assert dist.expectancy() == pytest.approx(16.9, abs=0.3)


def test_expectancy_consistent_with_table_for_older_ages():
    lt = LifeTable.us_2003()
    for age in range(65, 101):
        dist = conditional_death_pdf(lt, age)
        assert dist.pdf.sum() == pytest.approx(1.0, abs=1e-6)
        assert dist.expectancy() == pytest.approx(lt.e[lt.row(age)], abs=0.3)


def test_no_consumption_outlives_every_pensioner():
    still = C.replace(psi=0.0, phi=0.0)
    assert prob_pension_outlives(math.inf, 67, LifeTable.us_2003(), still, COARSE) == pytest.approx(1.0, abs=1e-9)
    # with growth, only mass leaving through the far edge is lost
    from stochpension.pension import consumption_survival

    _, s, _ = consumption_survival(C, math.inf, COARSE, 60.0)
    p = prob_pension_outlives(math.inf, 67, LifeTable.us_2003(), C, COARSE)
    assert s[-1] <= p <= 1.0


def test_outlives_probability_orderings():
    rows = {age: mortality_table(age, [7.5, 10.0, 12.0, 16.25], C, grid=COARSE) for age in (67, 72)}
    for age, table in rows.items():
        probs = [r["probability"] for r in table]
        assert all(0 <= p <= 1 for p in probs)
        assert np.all(np.diff(probs) >= 0)
    assert all(a["probability"] <= b["probability"] for a, b in zip(rows[67], rows[72]))


def test_short_horizon_rejected_for_mortality():
    with pytest.raises(ValueError, match="horizon"):
        prob_pension_outlives(10.0, 67, LifeTable.us_2003(), C, COARSE, horizon=20.0)


def test_survival_table_rows_are_ordered():
    rows = consumption_survival_table(12.0, [13, 14, 15, 16, 17, 18], C, COARSE, horizon=20.0)
    surv = [r["survival"] for r in rows]
    irr = [r["irr"] for r in rows]
    assert all(0 <= s <= 1 for s in surv)
    assert np.all(np.diff(surv) < 0) and np.all(np.diff(irr) > 0)
    assert consumption_survival_table(12.0, [], C, COARSE) == []


def test_deterministic_drain_mfpt_table():
    drain = C.replace(psi=0.0, phi=0.0)
    (row,) = mfpt_table([12.0], drain, COARSE, horizon=20.0)
    assert row["mfpt"] == pytest.approx(12.0, abs=COARSE.dk)
    assert not row["horizon_warning"]


def test_pension_table_near_zero_ratio_is_total_mass():
    from stochpension.fpe import Grid2D

    rows = pension_size_table(10, [0.01, 3.0], C, grid=Grid2D(0.05, 360, 0.1, 50, 0.1))
    assert rows[0]["probability_renormalized"] == pytest.approx(1.0, abs=1e-9)
    assert rows[1]["probability"] < rows[0]["probability"]
    assert pension_size_table(25, [], C) == []


def test_shifted_pearson_examples():
    a = np.sin(np.linspace(0, 6, 40))
    assert shifted_pearson(a, a, 0).rho == pytest.approx(1.0)
    assert shifted_pearson(a, -a, 0).rho == pytest.approx(-1.0)
    assert shifted_pearson(a, a, 0).overlap == 40
    assert shifted_pearson(a, a, 5).overlap == 35
    with pytest.raises(ValueError, match="overlap"):
        shifted_pearson(a[:4], a[:4], 2)
    with pytest.raises(ValueError, match="constant"):
        shifted_pearson(np.ones(10), a[:10], 0)


def test_shifted_pearson_recovers_constructed_lag():
    rng = np.random.default_rng(7)
    a = np.cumsum(rng.normal(size=203))
    b = np.concatenate([rng.normal(size=3), a[:-3]]) + 0.01 * rng.normal(size=203)
    assert shifted_pearson(a, b, 3).rho > 0.99
    assert shifted_pearson(a, b, 3).rho > shifted_pearson(a, b, 0).rho
