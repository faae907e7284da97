"""Best-response dynamics and basin-of-attraction maps."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from ..errors import ParameterError
from ..model import DEFAULT_BR_POINTS, Game, Interval, ProfileLike, StrategyProfile, best_response, validate_profile
from .nash import ne_verify

logger = logging.getLogger("eqkit.solvers")

DEFAULT_MAX_ITER = 500
DEFAULT_TOL = 1e-6
DIVERGED = -1


@dataclass(frozen=True)
class BRTrace:
    """Iterates of best-response play.

    In sequential mode iterate k > 0 differs from iterate k - 1 only in the
    component of ``movers[k]``; in simultaneous mode every component may move
    and ``movers`` holds None.
    """

    iterates: Tuple[StrategyProfile, ...]
    movers: Tuple[Optional[int], ...]
    converged: bool
    limit: Optional[StrategyProfile]
    sweep_order: Tuple[int, ...]
    sweeps: int
    epsilon: Optional[float] = None
    simultaneous: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "converged": self.converged,
            "limit": list(self.limit.values) if self.limit is not None else None,
            "epsilon": self.epsilon,
            "sweeps": self.sweeps,
            "sweep_order": list(self.sweep_order),
            "simultaneous": self.simultaneous,
            "iterates": [list(p.values) for p in self.iterates],
            "movers": list(self.movers),
        }


def br_dynamics(
    game: Game,
    start: ProfileLike,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    points: int = DEFAULT_BR_POINTS,
    simultaneous: bool = False,
    deviation_points: int = DEFAULT_BR_POINTS,
    order: Optional[Sequence[int]] = None,
) -> BRTrace:
    """Round-robin best responses until a full sweep moves nothing by more than tol.

    ``max_iter`` counts sweeps. Sequential (ascending index) updates by
    default; ``simultaneous=True`` lets every player respond to the same
    snapshot.
    """
    if max_iter < 1:
        raise ParameterError(f"max_iter must be >= 1, got {max_iter}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    values = list(validate_profile(game, start))
    sweep_order = tuple(order) if order is not None else tuple(range(game.player_count))
    if sorted(sweep_order) != list(range(game.player_count)):
        raise ParameterError(f"Sweep order {sweep_order} is not a permutation of the players")

    iterates = [StrategyProfile(tuple(values))]
    movers: List[Optional[int]] = [None]
    for sweep in range(1, max_iter + 1):
        moved = 0.0
        if simultaneous:
            snapshot = tuple(values)
            for i in sweep_order:
                new = best_response(game, i, snapshot, points)
                moved = max(moved, abs(new - snapshot[i]))
                values[i] = new
            iterates.append(StrategyProfile(tuple(values)))
            movers.append(None)
        else:
            for i in sweep_order:
                new = best_response(game, i, tuple(values), points)
                moved = max(moved, abs(new - values[i]))
                values[i] = new
                iterates.append(StrategyProfile(tuple(values)))
                movers.append(i)
        if moved <= tol:
            limit = StrategyProfile(tuple(values))
            return BRTrace(
                iterates=tuple(iterates),
                movers=tuple(movers),
                converged=True,
                limit=limit,
                sweep_order=sweep_order,
                sweeps=sweep,
                epsilon=ne_verify(game, limit, deviation_points),
                simultaneous=simultaneous,
            )

    logger.warning(f"{game.name}: best-response dynamics did not converge in {max_iter} sweeps from {iterates[0].values}")
    return BRTrace(
        iterates=tuple(iterates),
        movers=tuple(movers),
        converged=False,
        limit=None,
        sweep_order=sweep_order,
        sweeps=max_iter,
        simultaneous=simultaneous,
    )


@dataclass(frozen=True, eq=False)
class BasinMap:
    """Equilibrium reached from every start on a 2-D grid.

    ``labels[a, b]`` indexes ``equilibria`` for the start
    (starts[0][a], starts[1][b]) or is DIVERGED.
    """

    starts: Tuple[np.ndarray, np.ndarray]
    labels: np.ndarray
    equilibria: Tuple[Tuple[float, ...], ...]
    radius: float
    simultaneous: bool = False

    @property
    def resolution(self) -> int:
        return len(self.starts[0])

    @property
    def label_count(self) -> int:
        return len(self.equilibria)

    def component_count(self, label: int) -> int:
        """Number of 4-connected regions of cells carrying the label."""
        _, count = ndimage.label(self.labels == label)
        return int(count)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "resolution": self.resolution,
            "radius": self.radius,
            "simultaneous": self.simultaneous,
            "equilibria": [list(ne) for ne in self.equilibria],
            "label_count": self.label_count,
            "diverged_cells": int(np.sum(self.labels == DIVERGED)),
            "starts": [self.starts[0].tolist(), self.starts[1].tolist()],
            "labels": self.labels.tolist(),
        }


def basin_map(
    game: Game,
    resolution: int = 21,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    points: int = DEFAULT_BR_POINTS,
    simultaneous: bool = False,
    deviation_points: int = 21,
    workers: int = 1,
) -> BasinMap:
    """Run br_dynamics from every cell of a resolution x resolution grid of starts.

    Limits within 10 * tol (max-norm) of an already found equilibrium share
    its label. Traces may run on a thread pool; labeling is sequential in
    row-major order, so the map does not depend on ``workers``.
    """
    if game.player_count != 2 or not game.is_continuous:
        raise ParameterError(f"Basin maps need a 2-player interval game, {game.name} has {game.spaces}")
    if resolution < 2:
        raise ParameterError(f"Basin resolution must be >= 2, got {resolution}")
    spaces: Tuple[Interval, Interval] = game.spaces  # type: ignore[assignment]
    starts = (spaces[0].grid(resolution), spaces[1].grid(resolution))
    cells = [(a, b) for a in range(resolution) for b in range(resolution)]

    def trace(cell: Tuple[int, int]) -> BRTrace:
        a, b = cell
        start = (float(starts[0][a]), float(starts[1][b]))
        return br_dynamics(game, start, max_iter, tol, points, simultaneous, deviation_points)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(trace, cells))
    else:
        traces = [trace(cell) for cell in cells]

    radius = 10.0 * tol
    labels = np.full((resolution, resolution), DIVERGED, dtype=int)
    equilibria: List[np.ndarray] = []
    for (a, b), result in zip(cells, traces):
        if not result.converged:
            continue
        point = result.limit.as_array()  # type: ignore[union-attr]
        for k, ne in enumerate(equilibria):
            if np.max(np.abs(ne - point)) <= radius:
                labels[a, b] = k
                break
        else:
            equilibria.append(point)
            labels[a, b] = len(equilibria) - 1

    diverged = int(np.sum(labels == DIVERGED))
    logger.info(f"{game.name}: basin map {resolution}x{resolution}, {len(equilibria)} NE, {diverged} diverged cells")
    return BasinMap(
        starts=starts,
        labels=labels,
        equilibria=tuple(tuple(float(v) for v in ne) for ne in equilibria),
        radius=radius,
        simultaneous=simultaneous,
    )
