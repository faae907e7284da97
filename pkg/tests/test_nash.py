"""Tests for pure NE verification and exhaustive search"""

import itertools

import pytest

from eqkit.games import classic, wireless
from eqkit.model import FiniteGame, discretize
from eqkit.solvers.nash import nash_result, ne_verify, pure_ne_search

from .conftest import brute_force_pure_ne, random_integer_game


def test_prisoners_dilemma_unique_defection():
    """Test mutual defection is the only pure NE"""
    results = pure_ne_search(classic.prisoners_dilemma())
    assert [r.profile.values for r in results] == [(1, 1)]
    assert results[0].per_player_utilities == (1.0, 1.0)
    assert results[0].welfare == 2.0


def test_matching_pennies_has_no_pure_ne():
    """Test matching pennies has an empty pure NE set"""
    assert pure_ne_search(classic.matching_pennies()) == []


def test_results_in_lexicographic_order():
    """Test coordination games list their NE lexicographically"""
    results = pure_ne_search(classic.battle_of_sexes())
    assert [r.profile.values for r in results] == [(0, 0), (1, 1)]


def test_pure_ne_agrees_with_brute_force_oracle(builtin_finite_games):
    """Test exhaustive search matches an independent deviation oracle on small games"""
    games = list(builtin_finite_games)
    shapes = [(2, 2), (3, 3), (4, 4), (2, 3), (8, 8), (2, 2, 2), (2, 3, 2), (4, 4, 4), (2, 2, 2, 2, 2, 2)]
    for seed, shape in itertools.product(range(5), shapes):
        games.append(FiniteGame(random_integer_game(shape, seed), name=f"random-{shape}-{seed}"))

    for fg in games:
        assert fg.cell_count <= 64
        found = [r.profile.values for r in pure_ne_search(fg)]
        assert found == brute_force_pure_ne(fg), fg.name


def test_ne_verify_finite():
    """Test epsilon is the largest unilateral gain"""
    fg = classic.prisoners_dilemma()
    assert ne_verify(fg, (1, 1)) == 0.0
    assert ne_verify(fg, (0, 0)) == 2.0


def test_ne_verify_cournot_analytic():
    """Test the analytic Cournot NE has no profitable grid deviation"""
    cournot = wireless.make_cournot()
    assert ne_verify(cournot.game, cournot.analytic_ne) == pytest.approx(0.0, abs=1e-12)
    assert ne_verify(cournot.game, (1.0, 1.0)) > 1.0


def test_nash_result_packages_payoffs():
    """Test NE results carry verified epsilon and utilities"""
    cournot = wireless.make_cournot()
    result = nash_result(cournot.game, (3.0, 3.0))
    assert result.per_player_utilities == (9.0, 9.0)
    assert result.welfare == 18.0
    assert result.to_dict()["profile"] == [3.0, 3.0]


def test_discretized_cournot_contains_analytic_ne():
    """Test grid search on the discretized Cournot game finds (3, 3)"""
    fg = discretize(wireless.make_cournot().game, 101)
    coordinates = [r.coordinates for r in pure_ne_search(fg)]
    assert any(c == pytest.approx((3.0, 3.0), abs=1e-9) for c in coordinates)


def test_two_band_has_multiple_grid_equilibria():
    """Test the asymmetric two-band preset has at least two pure NE on a 101-point grid"""
    game = wireless.make_two_band_pa(**wireless.TWO_BAND_ASYMMETRIC)
    results = pure_ne_search(discretize(game, 101))
    assert len(results) >= 2
