"""Reference games: textbook 2x2 finite games and quadratic continuous games."""

from typing import Sequence

import numpy as np

from ..errors import ParameterError
from ..model import FiniteGame, Game, Interval, Values

COOPERATE, DEFECT = 0, 1


def prisoners_dilemma() -> FiniteGame:
    """Actions (cooperate, defect); mutual defection is the only NE."""
    row = [[3.0, 0.0], [5.0, 1.0]]
    return FiniteGame.from_bimatrix(row, np.transpose(row), name="prisoners_dilemma")


def matching_pennies() -> FiniteGame:
    row = [[1.0, -1.0], [-1.0, 1.0]]
    return FiniteGame.from_bimatrix(row, np.negative(row), name="matching_pennies")


def battle_of_sexes() -> FiniteGame:
    return FiniteGame.from_bimatrix([[2.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 2.0]], name="battle_of_sexes")


def chicken() -> FiniteGame:
    """Actions (dare, swerve); both daring is the crash outcome."""
    row = [[0.0, 7.0], [2.0, 6.0]]
    return FiniteGame.from_bimatrix(row, np.transpose(row), name="chicken")


def make_quadratic_game(
    own: float = 1.0,
    linear: float = 0.0,
    coupling: float = 1.0,
    lower: float = -1.0,
    upper: float = 1.0,
    players: int = 2,
) -> Game:
    """u_i = -own s_i^2 + linear s_i + coupling s_i sum_{j != i} s_j.

    Every cross-partial equals ``coupling``.
    """
    if int(players) != players or players < 1:
        raise ParameterError(f"players must be a positive integer, got {players}")
    own, linear, coupling = float(own), float(linear), float(coupling)
    space = Interval(lower, upper)

    def utility(values: Values) -> np.ndarray:
        s = np.asarray(values, dtype=float)
        return -own * s**2 + linear * s + coupling * s * (s.sum() - s)

    best_response = None
    if own > 0:

        def best_response(player: int, values: Values) -> float:
            others = sum(v for j, v in enumerate(values) if j != player)
            return min(max((linear + coupling * others) / (2.0 * own), space.lower), space.upper)

    return Game(
        name="quadratic",
        spaces=tuple(space for _ in range(int(players))),
        utility=utility,
        best_response=best_response,
    )


def make_decoupled_concave(centers: Sequence[float] = (0.3, -0.2), lower: float = -1.0, upper: float = 1.0) -> Game:
    """u_i = -(s_i - c_i)^2, each player alone with a peak at c_i."""
    c = np.asarray(centers, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ParameterError(f"centers must be a non-empty list, got {centers}")
    space = Interval(lower, upper)

    def utility(values: Values) -> np.ndarray:
        return -((np.asarray(values, dtype=float) - c) ** 2)

    return Game(
        name="decoupled_concave",
        spaces=tuple(space for _ in range(c.size)),
        utility=utility,
        best_response=lambda player, values: min(max(float(c[player]), space.lower), space.upper),
    )
