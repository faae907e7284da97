"""
Correlated equilibria: verification, internal-regret-matching self-play and a
welfare-optimal linear program.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from ..errors import DimensionError, EqkitError, ParameterError
from ..model import FiniteGame, JointDistribution

logger = logging.getLogger("eqkit.solvers")


@dataclass(frozen=True, eq=False)
class CorrelatedResult:
    """Empirical play of a regret-matching run together with its CE check"""

    distribution: JointDistribution
    max_violation: float
    max_average_regret: float
    iterations: int
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "probabilities": self.distribution.probabilities.tolist(),
            "max_violation": self.max_violation,
            "max_average_regret": self.max_average_regret,
            "iterations": self.iterations,
            "seed": self.seed,
        }


def _deviation_gains(fg: FiniteGame, player: int, probabilities: np.ndarray) -> np.ndarray:
    """gains[a, b] = sum over s_-i of dist(a, s_-i) * (u_i(b, s_-i) - u_i(a, s_-i))."""
    utilities = np.moveaxis(fg.utilities(player), player, 0)
    weights = np.moveaxis(probabilities, player, 0)
    n = utilities.shape[0]
    flat_u = utilities.reshape(n, -1)
    flat_w = weights.reshape(n, -1)
    # row a: recommended action, column b: deviation
    return flat_w @ flat_u.T - np.sum(flat_w * flat_u, axis=1)[:, None]


def ce_verify(fg: FiniteGame, dist: JointDistribution) -> float:
    """Maximum over players and action pairs (a, b) of the expected gain from
    switching a recommended a to b. At most 0 (within tolerance) for a CE."""
    if dist.action_counts != fg.action_counts:
        raise DimensionError(f"Distribution has action counts {dist.action_counts}, {fg.name} has {fg.action_counts}")
    worst = -np.inf
    for i in range(fg.player_count):
        gains = _deviation_gains(fg, i, dist.probabilities)
        np.fill_diagonal(gains, -np.inf)
        if gains.size > 1:
            worst = max(worst, float(gains.max()))
    return 0.0 if worst == -np.inf else worst


def regret_strategy(regrets: np.ndarray) -> np.ndarray:
    """Play distribution from a matrix of cumulative internal regrets.

    The positive parts form the rates of a continuous-time chain over actions;
    the strategy is its stationary distribution. Uniform play when no regret
    is positive.
    """
    n = regrets.shape[0]
    rates = np.maximum(regrets, 0.0)
    np.fill_diagonal(rates, 0.0)
    if rates.sum() <= 0.0:
        return np.full(n, 1.0 / n)
    if n == 2:
        total = rates[0, 1] + rates[1, 0]
        return np.array([rates[1, 0], rates[0, 1]]) / total

    generator = rates - np.diag(rates.sum(axis=1))
    system = generator.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        pi = np.linalg.lstsq(system, rhs, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    if pi.sum() <= 0.0:
        return np.full(n, 1.0 / n)
    return pi / pi.sum()


def regret_matching_ce(fg: FiniteGame, iterations: int, seed: int = 0) -> CorrelatedResult:
    """Self-play with internal regret matching; returns the empirical joint
    distribution of play and its CE violation."""
    if iterations < 1:
        raise ParameterError(f"iterations must be >= 1, got {iterations}")
    rng = np.random.default_rng(seed)
    counts = fg.action_counts
    players = fg.player_count
    regrets = [np.zeros((n, n)) for n in counts]
    play = np.zeros(counts)
    draws = rng.random((iterations, players))

    for t in range(iterations):
        actions = []
        for i, n in enumerate(counts):
            cumulative = np.cumsum(regret_strategy(regrets[i]))
            actions.append(min(int(np.searchsorted(cumulative, draws[t, i], side="right")), n - 1))
        play[tuple(actions)] += 1.0
        for i in range(players):
            index: List[Any] = list(actions)
            index[i] = slice(None)
            alternatives = fg.payoffs[tuple(index) + (i,)]
            regrets[i][actions[i]] += alternatives - alternatives[actions[i]]

    distribution = JointDistribution(play / iterations)
    average_regret = max(max(float(r.max()), 0.0) for r in regrets) / iterations
    violation = ce_verify(fg, distribution)
    logger.info(f"{fg.name}: regret matching {iterations} iterations, CE violation {violation:.3g}")
    return CorrelatedResult(distribution, violation, average_regret, iterations, seed)


def optimal_correlated_equilibrium(fg: FiniteGame, weights: Optional[Sequence[float]] = None) -> JointDistribution:
    """CE maximizing the weighted welfare, by linear programming."""
    alpha = np.ones(fg.player_count) if weights is None else np.asarray(weights, dtype=float)
    if alpha.shape != (fg.player_count,) or np.any(alpha < 0):
        raise ParameterError(f"Welfare weights must be {fg.player_count} nonnegative numbers, got {weights}")
    counts = fg.action_counts
    cells = fg.cell_count

    rows = []
    for i, n in enumerate(counts):
        utilities = np.moveaxis(fg.utilities(i), i, 0)
        for a in range(n):
            for b in range(n):
                if a == b:
                    continue
                row = np.zeros(utilities.shape)
                row[a] = utilities[b] - utilities[a]
                rows.append(np.moveaxis(row, 0, i).reshape(cells))

    welfare = np.tensordot(fg.payoffs, alpha, axes=([-1], [0])).reshape(cells)
    result = linprog(
        -welfare,
        A_ub=np.array(rows) if rows else None,
        b_ub=np.zeros(len(rows)) if rows else None,
        A_eq=np.ones((1, cells)),
        b_eq=np.array([1.0]),
        bounds=[(0.0, None)] * cells,
        method="highs",
    )
    if not result.success:
        raise EqkitError(f"{fg.name}: correlated equilibrium LP failed: {result.message}")
    probabilities = np.clip(result.x, 0.0, None)
    return JointDistribution((probabilities / probabilities.sum()).reshape(counts))
