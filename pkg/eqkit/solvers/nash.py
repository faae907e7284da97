"""Pure Nash equilibria: verification by unilateral deviations and exhaustive search."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..model import (
    DEFAULT_BR_POINTS,
    FiniteGame,
    Game,
    Interval,
    ProfileLike,
    StrategyProfile,
    validate_profile,
)

logger = logging.getLogger("eqkit.solvers")


@dataclass(frozen=True)
class NashResult:
    profile: StrategyProfile
    epsilon: float
    per_player_utilities: Tuple[float, ...]
    coordinates: Optional[Tuple[float, ...]] = None

    @property
    def welfare(self) -> float:
        return float(sum(self.per_player_utilities))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "profile": list(self.profile.values),
            "coordinates": list(self.coordinates) if self.coordinates is not None else None,
            "epsilon": self.epsilon,
            "utilities": list(self.per_player_utilities),
            "welfare": self.welfare,
        }


def _finite_gain(fg: FiniteGame, actions: Tuple[int, ...]) -> float:
    gain = 0.0
    for i in range(fg.player_count):
        index = list(actions)
        index[i] = slice(None)
        column = fg.payoffs[tuple(index) + (i,)]
        gain = max(gain, float(column.max() - column[actions[i]]))
    return gain


def ne_verify(
    game: Union[Game, FiniteGame], profile: ProfileLike, deviation_points: int = DEFAULT_BR_POINTS
) -> float:
    """Largest unilateral gain over grid deviations, exhaustive for action sets.

    Closed-form best responses, when the game has them, are tried as extra
    deviations.
    """
    if isinstance(game, FiniteGame):
        actions = validate_profile(game.as_game(), profile)
        return _finite_gain(game, actions)

    values = validate_profile(game, profile)
    current = game.payoffs(values)
    gain = 0.0
    for i, space in enumerate(game.spaces):
        if isinstance(space, Interval):
            candidates = list(space.grid(deviation_points))
            if game.best_response is not None:
                candidates.append(min(max(float(game.best_response(i, values)), space.lower), space.upper))
        else:
            candidates = range(space.action_count)
        for candidate in candidates:
            deviated = values[:i] + (candidate,) + values[i + 1 :]
            gain = max(gain, float(game.payoffs(deviated)[i] - current[i]))
    return gain


def pure_ne_search(fg: FiniteGame) -> List[NashResult]:
    """Every joint action where each player already plays a best reply.

    Exact comparisons against the per-axis maxima; results in lexicographic
    order of joint actions.
    """
    mask = np.ones(fg.action_counts, dtype=bool)
    for i in range(fg.player_count):
        utilities = fg.utilities(i)
        mask &= utilities == utilities.max(axis=i, keepdims=True)

    results = []
    for index in zip(*np.nonzero(mask)):
        actions = tuple(int(a) for a in index)
        results.append(
            NashResult(
                profile=StrategyProfile(actions),
                epsilon=0.0,
                per_player_utilities=tuple(float(u) for u in fg.payoff(actions)),
                coordinates=fg.coordinates(actions) if fg.grids is not None else None,
            )
        )
    logger.debug(f"{fg.name}: {len(results)} pure NE among {fg.cell_count} joint actions")
    return results


def nash_result(game: Union[Game, FiniteGame], profile: ProfileLike, deviation_points: int = DEFAULT_BR_POINTS) -> NashResult:
    """Package a profile with its verified epsilon and payoffs."""
    if isinstance(game, FiniteGame):
        values = validate_profile(game.as_game(), profile)
        payoffs = game.payoff(values)
    else:
        values = validate_profile(game, profile)
        payoffs = game.payoffs(values)
    return NashResult(
        profile=StrategyProfile(values),
        epsilon=ne_verify(game, values, deviation_points),
        per_player_utilities=tuple(float(u) for u in payoffs),
    )
