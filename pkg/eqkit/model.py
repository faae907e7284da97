"""
Core game representations: strategy spaces, games, profiles, lotteries and
utility evaluation, including discretization of continuous games.

Games and profiles are immutable after construction. Utility oracles must be
deterministic and reentrant; every function here is safe to call from
several threads at once.
"""

import functools
import logging
import math
import numbers
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DimensionError, DomainError, EvaluationError, ParameterError

logger = logging.getLogger("eqkit.model")

PROBABILITY_TOL = 1e-9
UTILITY_TOL = 1e-9
DEFAULT_BR_POINTS = 101

Values = Tuple[Any, ...]
UtilityOracle = Callable[[Values], Sequence[float]]
BestResponseOracle = Callable[[int, Values], float]


@dataclass(frozen=True)
class Interval:
    """Closed real interval [lower, upper] of scalar strategies"""

    lower: float
    upper: float

    def __post_init__(self):
        lower, upper = float(self.lower), float(self.upper)
        if not (math.isfinite(lower) and math.isfinite(upper)):
            raise ParameterError(f"Interval bounds must be finite, got [{lower}, {upper}]")
        if not lower < upper:
            raise ParameterError(f"Interval needs lower < upper, got [{lower}, {upper}]")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: Any) -> bool:
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            return False
        return self.lower <= float(value) <= self.upper

    def grid(self, points: int) -> np.ndarray:
        """Uniform grid including both endpoints."""
        if int(points) != points or points < 2:
            raise ParameterError(f"A grid needs at least 2 points, got {points}")
        return np.linspace(self.lower, self.upper, int(points))

    def __str__(self) -> str:
        return f"[{self.lower}, {self.upper}]"


@dataclass(frozen=True)
class Finite:
    """Action set {0, ..., action_count - 1}"""

    action_count: int

    def __post_init__(self):
        if isinstance(self.action_count, bool) or int(self.action_count) != self.action_count:
            raise ParameterError(f"action_count must be an integer, got {self.action_count}")
        if self.action_count < 1:
            raise ParameterError(f"action_count must be >= 1, got {self.action_count}")
        object.__setattr__(self, "action_count", int(self.action_count))

    def contains(self, value: Any) -> bool:
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            return False
        return 0 <= int(value) < self.action_count

    def __str__(self) -> str:
        return f"{{0..{self.action_count - 1}}}"


StrategySpace = Union[Interval, Finite]


@dataclass(frozen=True)
class StrategyProfile:
    """One strategy per player: reals for intervals, indices for action sets."""

    values: Tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, player: int) -> Any:
        return self.values[player]

    def __iter__(self) -> Iterator[Any]:
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


ProfileLike = Union[StrategyProfile, Sequence[Any]]


def _values(profile: ProfileLike) -> Values:
    if isinstance(profile, StrategyProfile):
        return profile.values
    if isinstance(profile, np.ndarray):
        return tuple(profile.tolist())
    return tuple(profile)


@dataclass(frozen=True)
class Game:
    """A strategic-form game: one strategy space and one utility per player.

    ``utility`` maps a tuple of strategy values to the K payoffs. Built-in
    games may attach a closed-form ``best_response(player, values)``.
    """

    name: str
    spaces: Tuple[StrategySpace, ...]
    utility: UtilityOracle = field(repr=False, compare=False)
    best_response: Optional[BestResponseOracle] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        spaces = tuple(self.spaces)
        if not spaces:
            raise ParameterError("A game needs at least one player")
        for i, space in enumerate(spaces):
            if not isinstance(space, (Interval, Finite)):
                raise ParameterError(f"Player {i} has an unsupported strategy space {space!r}")
        object.__setattr__(self, "spaces", spaces)

    @property
    def player_count(self) -> int:
        return len(self.spaces)

    @property
    def is_continuous(self) -> bool:
        return all(isinstance(space, Interval) for space in self.spaces)

    @property
    def is_finite(self) -> bool:
        return all(isinstance(space, Finite) for space in self.spaces)

    def payoffs(self, values: Values) -> np.ndarray:
        """Call the oracle on already validated values and check its output."""
        try:
            result = np.asarray(self.utility(values), dtype=float)
        except (TypeError, ValueError) as e:
            raise EvaluationError(f"{self.name}: utility oracle failed at {values}: {e}", values)
        if result.shape != (self.player_count,):
            raise EvaluationError(
                f"{self.name}: utility oracle returned shape {result.shape}, "
                f"expected ({self.player_count},)",
                values,
            )
        if not np.all(np.isfinite(result)):
            raise EvaluationError(f"{self.name}: non-finite utility {result.tolist()} at {values}", values)
        return result


def validate_profile(game: Game, profile: ProfileLike) -> Values:
    """Check a profile against the game and return it as a tuple of values."""
    values = _values(profile)
    if len(values) != game.player_count:
        raise DimensionError(
            f"Profile has {len(values)} components, {game.name} has {game.player_count} players"
        )
    normalized = []
    for i, (space, value) in enumerate(zip(game.spaces, values)):
        if not space.contains(value):
            raise DomainError(f"Player {i} strategy {value!r} lies outside {space}", player=i)
        normalized.append(float(value) if isinstance(space, Interval) else int(value))
    return tuple(normalized)


def evaluate_utility(game: Game, profile: ProfileLike) -> np.ndarray:
    """Payoffs u_1(s), ..., u_K(s) exactly as the oracle computes them."""
    return game.payoffs(validate_profile(game, profile))


@dataclass(frozen=True, eq=False)
class FiniteGame:
    """Finite game stored as a payoff tensor of shape (*action_counts, K).

    Discretized continuous games keep their per-player grids so indices map
    back to strategy values.
    """

    payoffs: np.ndarray
    name: str = "finite"
    grids: Optional[Tuple[np.ndarray, ...]] = None

    def __post_init__(self):
        tensor = np.array(self.payoffs, dtype=float)
        if tensor.ndim < 2:
            raise DimensionError(f"Payoff tensor needs at least 2 axes, got shape {tensor.shape}")
        players = tensor.shape[-1]
        if tensor.ndim - 1 != players:
            raise DimensionError(
                f"Payoff tensor of shape {tensor.shape} needs one axis per player "
                f"plus a payoff axis of length {tensor.ndim - 1}"
            )
        if any(count < 1 for count in tensor.shape[:-1]):
            raise DimensionError(f"Every player needs at least one action, got {tensor.shape[:-1]}")
        if not np.all(np.isfinite(tensor)):
            raise EvaluationError(f"{self.name}: payoff tensor has non-finite entries")
        tensor.setflags(write=False)
        object.__setattr__(self, "payoffs", tensor)
        if self.grids is not None:
            grids = tuple(np.array(g, dtype=float) for g in self.grids)
            if tuple(len(g) for g in grids) != tensor.shape[:-1]:
                raise DimensionError("Grid lengths do not match the action counts")
            for g in grids:
                g.setflags(write=False)
            object.__setattr__(self, "grids", grids)

    @classmethod
    def from_bimatrix(cls, row: Any, column: Any, name: str = "bimatrix") -> "FiniteGame":
        row, column = np.asarray(row, dtype=float), np.asarray(column, dtype=float)
        if row.ndim != 2 or row.shape != column.shape:
            raise DimensionError(f"Bimatrix shapes differ: {row.shape} vs {column.shape}")
        return cls(np.stack([row, column], axis=-1), name=name)

    @property
    def player_count(self) -> int:
        return self.payoffs.shape[-1]

    @property
    def action_counts(self) -> Tuple[int, ...]:
        return tuple(self.payoffs.shape[:-1])

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.action_counts))

    def payoff(self, actions: ProfileLike) -> np.ndarray:
        return self.payoffs[tuple(int(a) for a in _values(actions))]

    def utilities(self, player: int) -> np.ndarray:
        return self.payoffs[..., player]

    def joint_actions(self) -> Iterator[Tuple[int, ...]]:
        """All joint actions in lexicographic order."""
        return iter(np.ndindex(*self.action_counts))

    def coordinates(self, actions: ProfileLike) -> Tuple[float, ...]:
        indices = tuple(int(a) for a in _values(actions))
        if self.grids is None:
            return tuple(float(a) for a in indices)
        return tuple(float(g[a]) for g, a in zip(self.grids, indices))

    def as_game(self) -> Game:
        spaces = tuple(Finite(n) for n in self.action_counts)
        return Game(name=self.name, spaces=spaces, utility=lambda values: self.payoffs[tuple(values)])


def _check_distribution(q: Any, label: str) -> np.ndarray:
    vector = np.array(q, dtype=float)
    if vector.ndim != 1 or vector.size == 0:
        raise DimensionError(f"{label} must be a non-empty vector")
    if not np.all(np.isfinite(vector)) or np.any(vector < -PROBABILITY_TOL):
        raise ParameterError(f"{label} has negative or non-finite entries")
    if abs(vector.sum() - 1.0) > PROBABILITY_TOL:
        raise ParameterError(f"{label} sums to {vector.sum()}, not 1")
    vector = np.clip(vector, 0.0, None)
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class MixedProfile:
    """Independent lotteries, one probability vector per player."""

    distributions: Tuple[np.ndarray, ...]

    def __post_init__(self):
        checked = tuple(_check_distribution(q, f"Distribution of player {i}") for i, q in enumerate(self.distributions))
        if not checked:
            raise DimensionError("A mixed profile needs at least one player")
        object.__setattr__(self, "distributions", checked)

    @classmethod
    def pure(cls, action_counts: Sequence[int], actions: Sequence[int]) -> "MixedProfile":
        if len(action_counts) != len(actions):
            raise DimensionError("One action per player is required")
        distributions = []
        for n, a in zip(action_counts, actions):
            q = np.zeros(int(n))
            q[int(a)] = 1.0
            distributions.append(q)
        return cls(tuple(distributions))

    @classmethod
    def uniform(cls, action_counts: Sequence[int]) -> "MixedProfile":
        return cls(tuple(np.full(int(n), 1.0 / n) for n in action_counts))

    @property
    def player_count(self) -> int:
        return len(self.distributions)

    @property
    def action_counts(self) -> Tuple[int, ...]:
        return tuple(q.size for q in self.distributions)

    def joint(self) -> np.ndarray:
        """Product distribution p(s) = prod_j q_j(s_j)."""
        return functools.reduce(np.multiply.outer, self.distributions)

    def allclose(self, other: "MixedProfile", atol: float = PROBABILITY_TOL) -> bool:
        return self.action_counts == other.action_counts and all(
            np.allclose(a, b, rtol=0.0, atol=atol) for a, b in zip(self.distributions, other.distributions)
        )


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Lottery over joint actions, not necessarily a product of marginals."""

    probabilities: np.ndarray

    def __post_init__(self):
        tensor = np.array(self.probabilities, dtype=float)
        if tensor.ndim < 1:
            raise DimensionError("A joint distribution needs at least one axis")
        if not np.all(np.isfinite(tensor)) or np.any(tensor < -PROBABILITY_TOL):
            raise ParameterError("Joint distribution has negative or non-finite entries")
        if abs(tensor.sum() - 1.0) > PROBABILITY_TOL:
            raise ParameterError(f"Joint distribution has mass {tensor.sum()}, not 1")
        tensor = np.clip(tensor, 0.0, None)
        tensor.setflags(write=False)
        object.__setattr__(self, "probabilities", tensor)

    @classmethod
    def from_mixed(cls, mix: MixedProfile) -> "JointDistribution":
        return cls(mix.joint())

    @classmethod
    def point_mass(cls, action_counts: Sequence[int], actions: Sequence[int]) -> "JointDistribution":
        tensor = np.zeros(tuple(int(n) for n in action_counts))
        tensor[tuple(int(a) for a in actions)] = 1.0
        return cls(tensor)

    @property
    def player_count(self) -> int:
        return self.probabilities.ndim

    @property
    def action_counts(self) -> Tuple[int, ...]:
        return tuple(self.probabilities.shape)

    def marginal(self, player: int) -> np.ndarray:
        axes = tuple(j for j in range(self.player_count) if j != player)
        return self.probabilities.sum(axis=axes)


def _check_dimensions(fg: FiniteGame, action_counts: Tuple[int, ...], what: str) -> None:
    if action_counts != fg.action_counts:
        raise DimensionError(f"{what} has action counts {action_counts}, {fg.name} has {fg.action_counts}")


def expected_utility(fg: FiniteGame, mix: MixedProfile) -> np.ndarray:
    """Expected payoff vector under independent lotteries."""
    _check_dimensions(fg, mix.action_counts, "Mixed profile")
    payoff = fg.payoffs
    for q in mix.distributions:
        payoff = np.tensordot(q, payoff, axes=(0, 0))
    return np.asarray(payoff, dtype=float)


def discretize(game: Game, points_per_player: Union[int, Sequence[int]]) -> FiniteGame:
    """Sample a continuous game on endpoint-inclusive uniform grids."""
    if not game.is_continuous:
        raise ParameterError(f"{game.name}: only games with interval strategy spaces can be discretized")
    if isinstance(points_per_player, numbers.Integral):
        points = (int(points_per_player),) * game.player_count
    else:
        points = tuple(int(n) for n in points_per_player)
    if len(points) != game.player_count:
        raise DimensionError("One grid size per player is required")
    grids = tuple(space.grid(n) for space, n in zip(game.spaces, points))

    tensor = np.empty(points + (game.player_count,))
    for index in np.ndindex(*points):
        values = tuple(float(grids[i][a]) for i, a in enumerate(index))
        tensor[index] = game.payoffs(values)

    logger.debug(f"Discretized {game.name} into {int(np.prod(points))} cells")
    return FiniteGame(tensor, name=game.name, grids=grids)


def best_response_grid(game: Game, player: int, others: ProfileLike, points: int = DEFAULT_BR_POINTS) -> float:
    """Grid argmax of u_i(., s_-i) refined by a bounded scalar search on the
    bracketing cell. Ties go to the smallest strategy value.

    ``others`` is a full profile; the player's own component is ignored.
    """
    space = game.spaces[player]
    if not isinstance(space, Interval):
        raise ParameterError(f"Player {player} of {game.name} does not have an interval strategy space")
    values = list(_values(others))
    if len(values) != game.player_count:
        raise DimensionError(f"Profile has {len(values)} components, {game.name} has {game.player_count} players")

    def utility(x: float) -> float:
        values[player] = float(x)
        return float(game.payoffs(tuple(values))[player])

    grid = space.grid(points)
    scores = np.array([utility(x) for x in grid])
    k = int(np.argmax(scores))
    best_x, best_u = float(grid[k]), float(scores[k])

    lo, hi = float(grid[max(k - 1, 0)]), float(grid[min(k + 1, len(grid) - 1)])
    refined = minimize_scalar(
        lambda x: -utility(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * space.width}
    )
    if refined.success and -refined.fun > best_u:
        best_x = float(refined.x)
    return best_x


def best_response(game: Game, player: int, profile: ProfileLike, points: int = DEFAULT_BR_POINTS) -> Any:
    """Closed form when the game provides one, grid search otherwise."""
    space = game.spaces[player]
    if game.best_response is not None:
        value = game.best_response(player, _values(profile))
        if isinstance(space, Interval):
            return float(min(max(float(value), space.lower), space.upper))
        return int(value)
    if isinstance(space, Interval):
        return best_response_grid(game, player, profile, points)

    values = list(_values(profile))
    scores = []
    for action in range(space.action_count):
        values[player] = action
        scores.append(game.payoffs(tuple(values))[player])
    return int(np.argmax(scores))
