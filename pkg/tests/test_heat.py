import time

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from carbonpass.heat import (TABLE1_MARKUP, TABLE1_PASSTHROUGH, Calibration, DhPortfolio,
                             DispatchOrder, PriceEnv, boiler_heat_cost, calibrate_table1,
                             chp_heat_cost, dispatch_order, load_table1_calibration, markup,
                             min_markup, min_passthrough, min_passthrough_general,
                             threshold_surface, threshold_table)

from oracles import chp_total_heat_cost

TABLE_PRICES = PriceEnv(17.27, 5.89, 40.0)


def pf(eta_b=0.9, eta_c=0.75, eta_el=0.4, em=0.201, share=1.0, eps=0.0):
    return DhPortfolio(eta_b, eta_c, eta_el, em, share, eps)


def test_boiler_heat_cost():
    assert boiler_heat_cost(pf(em=0.201), TABLE_PRICES) == pytest.approx(20.504, abs=5e-4)
    assert boiler_heat_cost(pf(), PriceEnv(17.27, 0, 0)) == pytest.approx(17.27 / 0.9)
    assert boiler_heat_cost(pf(eta_b=1, eta_c=1, eta_el=1), PriceEnv(1, 0, 0)) == 1


def test_chp_heat_cost():
    assert chp_heat_cost(pf(), TABLE_PRICES) == pytest.approx(3.272, abs=5e-4)
    p = pf()
    fuel = 17.27 + 5.89 * 0.201
    assert chp_heat_cost(p, PriceEnv(17.27, 5.89, fuel / 0.4)) == pytest.approx(0, abs=1e-12)
    assert chp_heat_cost(p, PriceEnv(17.27, 5.89, 0)) == pytest.approx(fuel / 0.75)


def test_min_markup_values():
    assert min_markup(pf(eta_c=0.9)) == 0
    assert min_markup(pf(eta_c=0.75, eta_el=0.5)) == pytest.approx(0.3333, abs=5e-5)
    assert min_markup(pf(eta_c=0.77, eta_el=0.3)) == pytest.approx(0.4815, abs=5e-5)


def test_dispatch_order_cases():
    p = pf()
    assert dispatch_order(p, TABLE_PRICES) is DispatchOrder.CHP_FIRST
    assert dispatch_order(p, PriceEnv(17.27, 5.89, 0.0)) is DispatchOrder.BOILER_FIRST
    fuel = 17.27 + 5.89 * 0.201
    at = PriceEnv(17.27, 5.89, min_markup(p) * fuel)
    assert markup(p, at) == pytest.approx(min_markup(p))
    assert dispatch_order(p, at) is DispatchOrder.INDIFFERENT


@given(st.floats(0.5, 0.9), st.floats(0.2, 0.6), st.floats(0.01, 50), st.floats(0, 100),
       st.floats(0, 3))
def test_dispatch_order_agrees_with_markup(eta_c, eta_el, p_f, p_e, rel):
    p = pf(eta_c=eta_c, eta_el=eta_el)
    prices = PriceEnv(p_f, p_e, rel * (p_f + p_e * p.emission_factor))
    gap = markup(p, prices) - min_markup(p)
    assume(abs(gap) > 1e-6)
    expected = DispatchOrder.CHP_FIRST if gap > 0 else DispatchOrder.BOILER_FIRST
    assert dispatch_order(p, prices) is expected


def test_min_passthrough_values():
    assert min_passthrough(pf(em=0)) == 0
    assert min_passthrough(pf(eta_el=0.4, em=0.201)) == pytest.approx(0.5025, abs=1e-12)


def test_min_passthrough_table_row_under_calibration():
    cal = load_table1_calibration()
    row = threshold_table([0.4], cal)[0]
    assert row.min_passthrough == pytest.approx(0.556, abs=0.02)


portfolios = st.builds(
    lambda eb, c_frac, el, em, s: DhPortfolio(eb, eb * c_frac, el, em, s),
    st.floats(0.5, 1.0), st.floats(0.3, 1.0), st.floats(0.1, 0.7), st.floats(0, 0.5),
    st.floats(0.05, 1.0))


@given(portfolios, st.floats(0.5, 200), st.floats(0, 100))
def test_threshold_is_stationary_point_of_total_heat_cost(p, p_f, p_e0):
    """At pass-through == threshold, total heat cost has zero slope in the emission price."""
    rho = min_passthrough(p)
    d = dict(em=p.emission_factor, eta_b=p.eta_th_boiler, eta_el=p.eta_el_chp,
             eta_c=p.eta_th_chp, share=p.chp_heat_share)
    h = 1e-3
    scale = 1.0 + abs(chp_total_heat_cost(p_e0, lambda e: 30 + rho * e, d, p_f))

    def slope(r):
        f = lambda e: chp_total_heat_cost(e, lambda x: 30 + r * x, d, p_f)
        return (f(p_e0 + h) - f(p_e0 - h)) / (2 * h)

    assert abs(slope(rho)) <= 1e-7 * scale / h
    if p.emission_factor > 1e-3:
        assert slope(rho + 0.1) < 0 < slope(rho - 0.1)


@given(portfolios)
def test_threshold_decreases_with_share_and_efficiency(p):
    assume(p.emission_factor > 1e-3)
    from dataclasses import replace
    if p.chp_heat_share < 0.99:
        assert min_passthrough(replace(p, chp_heat_share=p.chp_heat_share + 0.01)) < min_passthrough(p)
    if p.eta_el_chp < 0.69:
        assert min_passthrough(replace(p, eta_el_chp=p.eta_el_chp + 0.01)) < min_passthrough(p)


def test_general_reduces_to_simple_form():
    p = pf(share=0.9)
    assert min_passthrough_general(p, TABLE_PRICES, 0.6) == min_passthrough(p)
    # equal heat costs: electricity price at the indifference mark-up
    q = pf(share=0.9, eps=0.5)
    fuel = 17.27 + 5.89 * q.emission_factor
    equal = PriceEnv(17.27, 5.89, min_markup(q) * fuel)
    assert min_passthrough_general(q, equal, 0.6) == pytest.approx(min_passthrough(q), abs=1e-12)


def test_general_below_simple_when_chp_cheaper():
    q = pf(share=0.9, eps=0.5)
    assert boiler_heat_cost(q, TABLE_PRICES) > chp_heat_cost(q, TABLE_PRICES)
    got = min_passthrough_general(q, TABLE_PRICES, 0.6)
    gap = boiler_heat_cost(q, TABLE_PRICES) - chp_heat_cost(q, TABLE_PRICES)
    expected = min_passthrough(q) - gap / 40.0 * 0.5 * (0.75 / 0.4) * 0.6
    assert got == pytest.approx(expected, rel=1e-12)
    assert got < min_passthrough(q)


def test_general_guards():
    q = pf(eps=0.5)
    with pytest.raises(ValueError):
        min_passthrough_general(q, TABLE_PRICES, 2.0)
    with pytest.raises(ValueError):
        min_passthrough_general(q, PriceEnv(17.27, 5.89, 0.0), 0.5)


def test_portfolio_validation():
    with pytest.raises(ValueError):
        pf(eta_c=0.95)
    with pytest.raises(ValueError):
        pf(share=0)
    with pytest.raises(ValueError):
        pf(eta_el=1.2)
    with pytest.raises(ValueError):
        PriceEnv(-1, 0, 0)


def test_surface():
    t = pf()
    s = threshold_surface([0.5], [0.8], t)
    assert s.shape == (1, 1)
    assert s[0, 0] == pytest.approx(min_passthrough(pf(eta_el=0.5, share=0.8)))
    grid = np.linspace(0.3, 0.6, 7)
    row = threshold_surface(grid, [0.8], t)[:, 0]
    assert np.all(np.diff(row) < 0)
    assert np.isclose(grid, 0.5).any()
    with pytest.raises(ValueError):
        threshold_surface([], [0.8], t)


def test_committed_calibration_matches_search():
    start = time.perf_counter()
    found = calibrate_table1()
    assert time.perf_counter() - start < 60
    committed = load_table1_calibration()
    assert found == committed
    assert Calibration.from_json(found.to_json()) == found
    for p, mk, pt in zip(committed.portfolios(), TABLE1_MARKUP, TABLE1_PASSTHROUGH):
        assert abs(min_markup(p) - mk) <= 0.005
        assert abs(min_passthrough(p) - pt) <= 0.02


def test_threshold_table_interpolates():
    cal = load_table1_calibration()
    rows = threshold_table([0.3, 0.35, 0.6], cal)
    assert rows[0].eta_th_chp == cal.eta_th_chp[0]
    assert cal.eta_th_chp[1] <= rows[1].eta_th_chp <= cal.eta_th_chp[0]
    assert [r.min_passthrough for r in rows] == sorted((r.min_passthrough for r in rows), reverse=True)
