import math
import pytest
from hypothesis import given, settings, strategies as st
from stakesim.analysis import (NoSafeWindow, QUOTED_WINDOWS, RaceQuery, SafeWindow, SafetyPolicy, alpha_grid,
                               exhaustive_race, exp_fork_trajectory, lifetime_threshold, min_safe_window,
                               monte_carlo_race, race_log_probability, race_probability, sweep_alpha, unas_rate_bound)
from stakesim.exceptions import DomainError


@pytest.mark.parametrize("alpha,ell,expected", [
    (0.3, 1, 0.3),
    (0.3, 2, 0.216),
    (0.3, 3, 0.16308),
    (0.3, 4, 0.126036),
    (0.4, 2, 0.352),
    (0.4, 3, 0.31744),
    (0.4, 4, 0.289792),
])
def test_known_values(alpha, ell, expected):
    assert race_probability(alpha, ell) == pytest.approx(expected, rel=1e-5)


def test_edges():
    assert race_probability(0.0, 5) == 0.0
    assert race_probability(1.0, 5) == 1.0
    assert race_log_probability(0.0, 3) == -math.inf
    for ell in (1, 10, 1000):
        assert race_probability(0.5, ell) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(1, 6))
def test_closed_form_matches_enumeration(alpha, ell):
    assert race_probability(alpha, ell) == pytest.approx(exhaustive_race(alpha, ell), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(1, 300))
def test_complement(alpha, ell):
    assert race_probability(alpha, ell) + race_probability(1.0 - alpha, ell) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.49), st.integers(1, 200))
def test_monotone(alpha, ell):
    lp = race_log_probability(alpha, ell)
    assert race_log_probability(alpha, ell + 1) < lp
    assert race_log_probability(min(alpha + 0.01, 0.5), ell) > lp


def test_tails_below_double_precision_normals():
    p = race_probability(0.4, 812)
    assert 0.0 < p < 2e-16
    assert race_log_probability(0.1, 5000) < math.log(1e-300)


@pytest.mark.parametrize("alpha,ell", [(-0.1, 3), (1.1, 3), (0.3, 0), (0.3, 2.5)])
def test_domain_errors(alpha, ell):
    with pytest.raises(DomainError):
        race_probability(alpha, ell)
    with pytest.raises(DomainError):
        RaceQuery(alpha, ell)


def test_exhaustive_is_bounded():
    with pytest.raises(DomainError):
        exhaustive_race(0.3, 7)


def test_monte_carlo():
    est = monte_carlo_race(0.3, 3, 40000, seed=1)
    assert abs(est.estimate - race_probability(0.3, 3)) < 4 * math.sqrt(0.16308 * 0.83692 / 40000)
    assert est.trials == 40000
    assert monte_carlo_race(0.3, 3, 40000, seed=1) == est
    exact = monte_carlo_race(0.3, 3, 10, exhaustive=True)
    assert exact.stderr == 0.0
    with pytest.raises(DomainError):
        monte_carlo_race(0.3, 3, 0)


@pytest.mark.parametrize("alpha,T,ell", [
    (0.40, 2e-16, 812),
    (0.40, 1e-3, 118),
    (0.45, 1e-3, 476),
    (0.40, 1e-7, 332),
    (0.10, 2e-16, 33),
    (0.30, 1e-3, 28),
])
def test_min_safe_window(alpha, T, ell):
    w = min_safe_window(alpha, T)
    assert isinstance(w, SafeWindow)
    assert w.ell == ell
    assert w.p < T <= race_probability(alpha, ell - 1)


def test_min_safe_window_edges():
    assert isinstance(min_safe_window(0.5, 1e-3), NoSafeWindow)
    assert isinstance(min_safe_window(0.7, 1e-3), NoSafeWindow)
    assert min_safe_window(0.0, 1e-3).ell == 1
    assert min_safe_window(0.3, 0.9).ell == 1
    with pytest.raises(DomainError):
        min_safe_window(0.3, 0.0)
    with pytest.raises(DomainError):
        min_safe_window(0.3, 1.0)


def test_quoted_windows_differ_from_the_closed_form():
    # the quoted figures are kept for reference; the closed form is the source of truth
    for alpha, T, quoted in QUOTED_WINDOWS:
        assert min_safe_window(alpha, T).ell != quoted


def test_lifetime_threshold():
    assert lifetime_threshold(5 * 10 ** 8, 1e-7) == 2e-16
    assert SafetyPolicy.from_lifetime(5 * 10 ** 8, 1e-7).tolerance == 2e-16
    with pytest.raises(DomainError):
        lifetime_threshold(0, 1e-7)
    with pytest.raises(DomainError):
        lifetime_threshold(10, 2.0)


def test_unas_rate_bound():
    b = unas_rate_bound(10, 101)
    assert b.rate == pytest.approx(2.0 - 20.0 / 102.0)
    assert b.must_defend
    assert not unas_rate_bound(60, 101).must_defend
    assert unas_rate_bound(0, 5).rate == 2.0
    with pytest.raises(DomainError):
        unas_rate_bound(1, 0)


def test_exp_fork_trajectory():
    x, y = exp_fork_trajectory(0.1, 1.0, 0.0, 10)
    assert x == pytest.approx(1.1 ** 10)
    assert y == pytest.approx(9.0)
    assert exp_fork_trajectory(0.3, 2.0, 1.0, 0) == (2.0, 1.0)
    with pytest.raises(DomainError):
        exp_fork_trajectory(0.1, 1.0, 0.0, -1)


def test_sweep_alpha():
    df = sweep_alpha(1e-3, [0.3, 0.4, 0.5])
    assert list(df.columns) == ["alpha", "ell_star", "p_at_ell_star", "status"]
    assert df["ell_star"].tolist()[:2] == [28, 118]
    assert df["status"].tolist() == ["safe", "safe", "unsafe at any window"]
    assert math.isnan(df["p_at_ell_star"].iloc[2])


def test_alpha_grid():
    assert alpha_grid(0.1, 0.3, 0.1) == [0.1, 0.2, 0.3]
    assert len(alpha_grid(0.05, 0.45, 0.05)) == 9
    with pytest.raises(DomainError):
        alpha_grid(0.1, 0.3, 0.0)
    with pytest.raises(DomainError):
        alpha_grid(0.3, 0.1, 0.1)
