"""Tests for strategy spaces, games, profiles and lotteries"""

import math

import numpy as np
import pytest

from eqkit.errors import DimensionError, DomainError, EvaluationError, ParameterError
from eqkit.games import classic
from eqkit.model import (
    Finite,
    FiniteGame,
    Game,
    Interval,
    JointDistribution,
    MixedProfile,
    StrategyProfile,
    best_response,
    best_response_grid,
    discretize,
    evaluate_utility,
    expected_utility,
    validate_profile,
)


@pytest.fixture
def peaked_game():
    """u_i = -(s_i - 0.3)^2 with no closed-form best response"""
    space = Interval(-1.0, 1.0)
    return Game(
        name="peaked",
        spaces=(space, space),
        utility=lambda values: [-((values[0] - 0.3) ** 2), -((values[1] - 0.3) ** 2)],
    )


def test_interval_rejects_empty_range():
    """Test intervals need lower < upper"""
    with pytest.raises(ParameterError):
        Interval(1.0, 1.0)
    with pytest.raises(ParameterError):
        Interval(0.0, math.inf)


def test_interval_grid_includes_endpoints():
    """Test grids are uniform and endpoint-inclusive"""
    grid = Interval(0.0, 2.0).grid(5)
    assert grid.tolist() == [0.0, 0.5, 1.0, 1.5, 2.0]
    with pytest.raises(ParameterError):
        Interval(0.0, 1.0).grid(1)


def test_finite_space_contains_only_indices():
    """Test action sets accept integer indices in range"""
    space = Finite(3)
    assert space.contains(2)
    assert not space.contains(3)
    assert not space.contains(1.0)
    assert not space.contains(True)


def test_validate_profile_names_player():
    """Test out-of-space strategies raise DomainError naming the player"""
    game = classic.make_quadratic_game()
    with pytest.raises(DomainError) as excinfo:
        validate_profile(game, (0.0, 1.5))
    assert excinfo.value.player == 1

    with pytest.raises(DimensionError):
        validate_profile(game, (0.0,))


def test_evaluate_utility_returns_oracle_values():
    """Test evaluation returns exactly what the oracle computes"""
    game = classic.make_quadratic_game(own=1.0, linear=0.5, coupling=2.0)
    u = evaluate_utility(game, StrategyProfile((0.5, -0.25)))
    assert u[0] == pytest.approx(-0.25 + 0.25 + 2.0 * 0.5 * -0.25)
    assert u[1] == pytest.approx(-0.0625 - 0.125 + 2.0 * -0.25 * 0.5)


def test_non_finite_utility_raises():
    """Test NaN payoffs raise EvaluationError carrying the profile"""
    game = Game(name="broken", spaces=(Interval(0.0, 1.0),), utility=lambda values: [float("nan")])
    with pytest.raises(EvaluationError) as excinfo:
        evaluate_utility(game, (0.5,))
    assert excinfo.value.profile == (0.5,)


def test_wrong_payoff_shape_raises():
    """Test the oracle must return one payoff per player"""
    game = Game(name="short", spaces=(Interval(0.0, 1.0), Interval(0.0, 1.0)), utility=lambda values: [1.0])
    with pytest.raises(EvaluationError):
        evaluate_utility(game, (0.5, 0.5))


def test_finite_game_rejects_bad_tensor():
    """Test the payoff tensor needs one axis per player plus the payoff axis"""
    with pytest.raises(DimensionError):
        FiniteGame(np.zeros((2, 2, 3)))
    with pytest.raises(EvaluationError):
        FiniteGame(np.full((2, 2, 2), np.inf))


def test_finite_game_tensor_is_read_only():
    """Test games are immutable after construction"""
    fg = classic.prisoners_dilemma()
    with pytest.raises(ValueError):
        fg.payoffs[0, 0, 0] = 10.0


def test_finite_game_as_game_agrees_with_tensor():
    """Test the oracle view of a finite game reads the tensor"""
    fg = classic.battle_of_sexes()
    game = fg.as_game()
    assert game.is_finite
    for joint in fg.joint_actions():
        assert evaluate_utility(game, joint).tolist() == fg.payoff(joint).tolist()


def test_mixed_profile_rejects_unnormalized():
    """Test lotteries must sum to one"""
    with pytest.raises(ParameterError):
        MixedProfile((np.array([0.5, 0.6]),))
    with pytest.raises(ParameterError):
        MixedProfile((np.array([1.5, -0.5]),))


def test_expected_utility_of_uniform_matching_pennies():
    """Test the uniform profile pays zero in matching pennies"""
    fg = classic.matching_pennies()
    u = expected_utility(fg, MixedProfile.uniform(fg.action_counts))
    assert u.tolist() == pytest.approx([0.0, 0.0], abs=1e-15)


def test_expected_utility_checks_dimensions():
    """Test a lottery over the wrong action counts is rejected"""
    with pytest.raises(DimensionError):
        expected_utility(classic.prisoners_dilemma(), MixedProfile.uniform((3, 2)))


def test_joint_distribution_marginals():
    """Test the product distribution has the original marginals"""
    mix = MixedProfile((np.array([0.25, 0.75]), np.array([0.6, 0.4])))
    joint = JointDistribution.from_mixed(mix)
    assert joint.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    assert joint.marginal(0) == pytest.approx([0.25, 0.75])
    assert joint.marginal(1) == pytest.approx([0.6, 0.4])


def test_point_mass_distribution():
    """Test a point mass puts all probability on one joint action"""
    dist = JointDistribution.point_mass((2, 3), (1, 2))
    assert dist.probabilities[1, 2] == 1.0
    assert dist.probabilities.sum() == 1.0


def test_discretize_samples_oracle_on_grid():
    """Test discretization stores grids and oracle values per cell"""
    game = classic.make_quadratic_game()
    fg = discretize(game, (3, 5))
    assert fg.action_counts == (3, 5)
    assert fg.grids[0].tolist() == [-1.0, 0.0, 1.0]
    assert fg.coordinates((2, 1)) == (1.0, -0.5)
    assert fg.payoff((2, 1)).tolist() == evaluate_utility(game, (1.0, -0.5)).tolist()


def test_discretize_rejects_finite_game():
    """Test only interval games can be discretized"""
    with pytest.raises(ParameterError):
        discretize(classic.prisoners_dilemma().as_game(), 5)


def test_best_response_grid_refines_off_grid_optimum(peaked_game):
    """Test the bounded refinement finds an optimum between grid points"""
    value = best_response_grid(peaked_game, 0, (0.0, 0.0), points=11)
    assert value == pytest.approx(0.3, abs=1e-6)


def test_best_response_ties_go_to_smallest_value():
    """Test a flat utility selects the lower bound"""
    space = Interval(-2.0, 3.0)
    game = Game(name="flat", spaces=(space,), utility=lambda values: [1.0])
    assert best_response(game, 0, (0.0,)) == -2.0


def test_best_response_uses_closed_form_clipped():
    """Test closed-form best responses are clipped into the space"""
    game = classic.make_quadratic_game(own=1.0, linear=4.0, coupling=0.0)
    assert best_response(game, 0, (0.0, 0.0)) == 1.0


def test_best_response_on_action_set():
    """Test finite best responses are argmax indices"""
    game = classic.prisoners_dilemma().as_game()
    assert best_response(game, 0, (0, 0)) == 1


def test_expected_utility_of_point_mass_is_the_payoff(builtin_finite_games):
    """Test a pure profile written as a lottery pays exactly the tensor entry, cell by cell"""
    for fg in builtin_finite_games:
        for joint in np.ndindex(*fg.action_counts):
            mix = MixedProfile.pure(fg.action_counts, joint)
            assert expected_utility(fg, mix).tolist() == pytest.approx(fg.payoffs[joint].tolist(), abs=1e-15), (fg.name, joint)


def test_expected_utility_is_affine_in_each_distribution(builtin_finite_games):
    """Test mixing one player's lottery mixes the expected payoffs with the same weight"""
    rng = np.random.default_rng(11)
    for fg in builtin_finite_games:
        for _ in range(10):
            base = [rng.dirichlet(np.ones(n)) for n in fg.action_counts]
            player = int(rng.integers(fg.player_count))
            q, q_prime = rng.dirichlet(np.ones(fg.action_counts[player]), size=2)
            lam = float(rng.uniform())

            def with_own(own):
                distributions = list(base)
                distributions[player] = own
                return expected_utility(fg, MixedProfile(tuple(distributions)))

            mixed = with_own(lam * q + (1.0 - lam) * q_prime)
            expected = lam * with_own(q) + (1.0 - lam) * with_own(q_prime)
            assert mixed.tolist() == pytest.approx(expected.tolist(), abs=1e-9), fg.name


def test_closed_form_best_response_matches_grid_search(ee_model):
    """Test the energy-efficient closed form agrees with the refined grid search on 20 random profiles"""
    rng = np.random.default_rng(2024)
    for _ in range(20):
        profile = tuple(float(p) for p in rng.uniform(0.0, 1.0, size=2))
        closed = ee_model.closed_form_br(profile)
        for player in range(2):
            searched = best_response_grid(ee_model.game, player, profile)
            assert searched == pytest.approx(float(closed[player]), rel=1e-6, abs=1e-9), (profile, player)
