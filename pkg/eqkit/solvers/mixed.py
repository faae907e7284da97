"""Mixed Nash equilibria of two-player finite games by support enumeration."""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, ParameterError
from ..model import FiniteGame, MixedProfile

logger = logging.getLogger("eqkit.solvers")

MAX_SUPPORT_ACTIONS = 8
MIXED_NE_TOL = 1e-8
CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class SupportEnumeration:
    """Equilibria found by support enumeration, in discovery order.

    Iterates and indexes like the tuple of equilibria; ``degenerate_supports``
    counts the support pairs whose indifference systems were singular.
    """

    equilibria: Tuple[MixedProfile, ...]
    degenerate_supports: int = 0

    def __len__(self) -> int:
        return len(self.equilibria)

    def __iter__(self) -> Iterator[MixedProfile]:
        return iter(self.equilibria)

    def __getitem__(self, index: int) -> MixedProfile:
        return self.equilibria[index]


def mixed_ne_gain(fg: FiniteGame, mix: MixedProfile) -> float:
    """Largest gain of a pure deviation against the other players' lotteries."""
    if mix.action_counts != fg.action_counts:
        raise DimensionError(f"Mixed profile has action counts {mix.action_counts}, {fg.name} has {fg.action_counts}")
    gain = 0.0
    for i in range(fg.player_count):
        values = fg.utilities(i)
        # contract the highest axes first so lower axis numbers stay valid
        for j in reversed(range(fg.player_count)):
            if j != i:
                values = np.tensordot(values, mix.distributions[j], axes=([j], [0]))
        current = float(values @ mix.distributions[i])
        gain = max(gain, float(values.max()) - current)
    return gain


def _indifference(matrix: np.ndarray) -> Optional[np.ndarray]:
    """Lottery over columns making every row of ``matrix`` pay the same.

    Solves [M, -1; 1, 0] [y; v] = [0; 1]. None when the system is singular
    or too ill-conditioned to trust.
    """
    k = matrix.shape[0]
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = matrix
    system[:k, k] = -1.0
    system[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    if np.linalg.cond(system) > CONDITION_LIMIT:
        return None
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError:
        return None
    return solution[:k]


def _embed(weights: np.ndarray, support: Sequence[int], size: int) -> np.ndarray:
    q = np.zeros(size)
    q[list(support)] = weights
    return q


def support_enumeration_2p(fg: FiniteGame, max_actions: int = MAX_SUPPORT_ACTIONS) -> SupportEnumeration:
    """All equilibria supported on equal-size support pairs, pure ones included.

    Supports are visited by size, then lexicographically. Degenerate supports
    are skipped, logged and counted on the result.
    """
    if fg.player_count != 2:
        raise DimensionError(f"Support enumeration needs 2 players, {fg.name} has {fg.player_count}")
    rows, columns = fg.action_counts
    if max(rows, columns) > max_actions:
        raise ParameterError(
            f"Support enumeration is capped at {max_actions} actions per player, {fg.name} has {fg.action_counts}"
        )
    A, B = fg.utilities(0), fg.utilities(1)

    equilibria: List[MixedProfile] = []
    degenerate = 0
    for k in range(1, min(rows, columns) + 1):
        for I in itertools.combinations(range(rows), k):
            for J in itertools.combinations(range(columns), k):
                y = _indifference(A[np.ix_(I, J)])
                x = _indifference(B[np.ix_(I, J)].T)
                if x is None or y is None:
                    degenerate += 1
                    continue
                if np.any(x < -MIXED_NE_TOL) or np.any(y < -MIXED_NE_TOL):
                    continue
                x, y = np.clip(x, 0.0, None), np.clip(y, 0.0, None)
                mix = MixedProfile((_embed(x / x.sum(), I, rows), _embed(y / y.sum(), J, columns)))
                if mixed_ne_gain(fg, mix) > MIXED_NE_TOL:
                    continue
                if not any(mix.allclose(found) for found in equilibria):
                    equilibria.append(mix)

    if degenerate:
        logger.warning(f"{fg.name}: skipped {degenerate} degenerate support pairs")
    logger.debug(f"{fg.name}: support enumeration found {len(equilibria)} equilibria")
    return SupportEnumeration(tuple(equilibria), degenerate)
