"""Grids, central finite differences and seeded sampling over strategy boxes."""

import itertools
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..model import Interval

logger = logging.getLogger("eqkit.utils")

EPS = float(np.finfo(float).eps)
NOISE_FACTOR = 16.0
MAX_GRID_SAMPLES = 4096

ScalarField = Callable[[Tuple[float, ...]], float]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def step_for(space: Interval, relative_step: float) -> float:
    return relative_step * space.width


def local_step(space: Interval, x: float, h: float) -> Optional[float]:
    """Shrink h so that x - h and x + h stay inside the interval.

    Returns None when x sits on the boundary and no step fits.
    """
    room = min(h, x - space.lower, space.upper - x)
    if room <= 0.0:
        return None
    return room


def _shifted(values: Sequence[float], shifts: Sequence[Tuple[int, float]]) -> Tuple[float, ...]:
    moved = list(values)
    for index, delta in shifts:
        moved[index] = moved[index] + delta
    return tuple(moved)


def partial(fn: ScalarField, values: Sequence[float], i: int, h: float) -> float:
    """Central difference of fn along coordinate i."""
    return (fn(_shifted(values, [(i, h)])) - fn(_shifted(values, [(i, -h)]))) / (2.0 * h)


def cross_partial(fn: ScalarField, values: Sequence[float], i: int, j: int, hi: float, hj: float) -> float:
    """Central mixed difference d2 fn / dx_i dx_j with steps hi, hj."""
    pp = fn(_shifted(values, [(i, hi), (j, hj)]))
    pm = fn(_shifted(values, [(i, hi), (j, -hj)]))
    mp = fn(_shifted(values, [(i, -hi), (j, hj)]))
    mm = fn(_shifted(values, [(i, -hi), (j, -hj)]))
    return (pp - pm - mp + mm) / (4.0 * hi * hj)


def noise_floor(magnitude: float, hi: float, hj: float) -> float:
    """Rounding error level of a mixed difference of values of size magnitude."""
    return NOISE_FACTOR * EPS * max(1.0, abs(magnitude)) / (hi * hj)


def interior_points(space: Interval, resolution: int) -> np.ndarray:
    """The resolution-point grid without its two endpoints."""
    return space.grid(resolution)[1:-1]


def sample_grid_points(
    spaces: Sequence[Interval], axes: Sequence[np.ndarray], limit: int, rng: np.random.Generator
) -> List[Tuple[float, ...]]:
    """Full product of per-player axes, or a seeded random subset of it when it
    would exceed MAX_GRID_SAMPLES points."""
    total = int(np.prod([len(a) for a in axes]))
    if total <= MAX_GRID_SAMPLES:
        return [tuple(float(v) for v in point) for point in itertools.product(*axes)]
    logger.debug(f"Product grid of {total} points, sampling {limit} of them")
    return [tuple(float(rng.choice(a)) for a in axes) for _ in range(limit)]


def sample_box(spaces: Sequence[Interval], rng: np.random.Generator) -> Tuple[float, ...]:
    return tuple(float(rng.uniform(s.lower, s.upper)) for s in spaces)
