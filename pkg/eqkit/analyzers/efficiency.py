"""
Efficiency and selection metrics: social welfare, Pareto optimality,
weighted-sum Pareto points, price of anarchy and stability, the virtual-MIMO
energy-efficiency metric and normalized equilibria of games with a shared
constraint.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from ..errors import ParameterError, UndefinedMetricError
from ..games.wireless import ChannelParams, EfficiencyFunction, make_energy_efficient_pc, make_pricing_pc
from ..model import (
    DEFAULT_BR_POINTS,
    UTILITY_TOL,
    FiniteGame,
    Game,
    ProfileLike,
    StrategyProfile,
    evaluate_utility,
    validate_profile,
)
from ..solvers.dynamics import br_dynamics
from ..solvers.nash import NashResult, ne_verify
from ..utils.numeric import local_step, partial, step_for
from .structure import FDConfig

logger = logging.getLogger("eqkit.analyzers")

# Worst-case PoA of non-atomic routing with affine latencies; documented only.
NONATOMIC_AFFINE_POA_BOUND = 4.0 / 3.0
MULTIPLIER_RELATIVE_TOL = 1e-3


class EnergyModel(Protocol):
    def goodput(self, values: Sequence[float]) -> np.ndarray: ...

    def powers(self, values: Sequence[float]) -> np.ndarray: ...


def social_welfare(game: Union[Game, FiniteGame], profile: ProfileLike) -> float:
    """Sum of all players' utilities."""
    if isinstance(game, FiniteGame):
        return float(np.sum(game.payoff(validate_profile(game.as_game(), profile))))
    return float(np.sum(evaluate_utility(game, profile)))


def virtual_mimo_metric(model: EnergyModel, profile: ProfileLike) -> float:
    """Total goodput over total transmit power, sum f(SINR_i) / sum p_i."""
    values = profile.values if isinstance(profile, StrategyProfile) else tuple(profile)
    total_power = float(np.sum(model.powers(values)))
    if total_power <= 0.0:
        raise UndefinedMetricError("The virtual-MIMO metric is undefined when every power is zero")
    return float(np.sum(model.goodput(values))) / total_power


@dataclass(frozen=True)
class ParetoResult:
    optimal: bool
    witness: Optional[Tuple[int, ...]] = None

    def __bool__(self) -> bool:
        return self.optimal


def _dominators(fg: FiniteGame, utilities: np.ndarray) -> np.ndarray:
    weakly = np.all(fg.payoffs >= utilities - UTILITY_TOL, axis=-1)
    strictly = np.any(fg.payoffs > utilities + UTILITY_TOL, axis=-1)
    return weakly & strictly


def is_pareto_optimal(fg: FiniteGame, profile: ProfileLike) -> ParetoResult:
    """Exhaustive domination scan; the witness is the first dominating joint action."""
    actions = validate_profile(fg.as_game(), profile)
    dominating = np.argwhere(_dominators(fg, fg.payoff(actions)))
    if len(dominating) == 0:
        return ParetoResult(True)
    return ParetoResult(False, tuple(int(a) for a in dominating[0]))


def weighted_sum_po(fg: FiniteGame, alpha: Sequence[float]) -> StrategyProfile:
    """Maximizer of sum alpha_i u_i, lowest joint action on ties."""
    weights = np.asarray(alpha, dtype=float)
    if weights.shape != (fg.player_count,):
        raise ParameterError(f"Expected {fg.player_count} weights, got {list(alpha)}")
    if not np.all(weights > 0):
        raise ParameterError(f"Weights must be strictly positive, got {list(alpha)}")
    scores = np.tensordot(fg.payoffs, weights, axes=([-1], [0]))
    index = np.unravel_index(int(np.argmax(scores)), scores.shape)
    return StrategyProfile(tuple(int(a) for a in index))


def max_welfare(fg: FiniteGame) -> Tuple[float, StrategyProfile]:
    profile = weighted_sum_po(fg, np.ones(fg.player_count))
    return social_welfare(fg, profile), profile


class PriceOfAnarchy(NamedTuple):
    """PoA and PoS; a ratio is None when the NE welfare is not positive, and
    the additive welfare gap is reported instead."""

    poa: Optional[float]
    pos: Optional[float]
    max_welfare: float
    worst_ne_welfare: float
    best_ne_welfare: float
    flagged: bool
    worst_gap: float
    best_gap: float


def poa_pos(fg: FiniteGame, ne_set: Sequence[NashResult]) -> PriceOfAnarchy:
    """Max welfare over the worst and over the best NE welfare.

    NE found off the grid (e.g. limits of best-response dynamics) count
    towards the maximum welfare too.
    """
    if not ne_set:
        raise ParameterError("The price of anarchy needs a nonempty NE set")
    welfares = [ne.welfare for ne in ne_set]
    worst, best = min(welfares), max(welfares)
    top = max(float(np.max(fg.payoffs.sum(axis=-1))), best)
    flagged = worst <= 0.0
    if flagged:
        logger.warning(f"{fg.name}: NE welfare {worst} is not positive, reporting the welfare gap instead of PoA")
    return PriceOfAnarchy(
        poa=None if worst <= 0.0 else top / worst,
        pos=None if best <= 0.0 else top / best,
        max_welfare=top,
        worst_ne_welfare=worst,
        best_ne_welfare=best,
        flagged=flagged,
        worst_gap=top - worst,
        best_gap=top - best,
    )


def _on_grid(fg: FiniteGame, result: NashResult) -> bool:
    values = result.profile.values
    return len(values) == fg.player_count and all(
        isinstance(v, (int, np.integer)) and 0 <= v < n for v, n in zip(values, fg.action_counts)
    )


def _fairness(utilities: Sequence[float]) -> Dict[str, Optional[float]]:
    positive = all(u > 0 for u in utilities)
    return {
        "min_utility": float(min(utilities)),
        "log_utility_sum": float(sum(math.log(u) for u in utilities)) if positive else None,
    }


@dataclass(frozen=True)
class EfficiencyReport:
    welfare_at_profile: Dict[str, float]
    max_welfare: float
    poa: Optional[float]
    pos: Optional[float]
    pareto_flags: Dict[str, Optional[bool]]
    ne_set_used: List[NashResult]
    flagged: bool = False
    welfare_gap: Optional[float] = None
    grid_resolution: Optional[Tuple[int, ...]] = None
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "welfare_at_profile": dict(self.welfare_at_profile),
            "max_welfare": self.max_welfare,
            "poa": self.poa,
            "pos": self.pos,
            "flagged": self.flagged,
            "welfare_gap": self.welfare_gap,
            "grid_resolution": list(self.grid_resolution) if self.grid_resolution else None,
            "pareto_flags": dict(self.pareto_flags),
            "ne_set_used": [ne.to_dict() for ne in self.ne_set_used],
            "profiles": list(self.rows),
        }


def efficiency_report(
    fg: FiniteGame,
    ne_set: Sequence[NashResult],
    profiles: Optional[Dict[str, ProfileLike]] = None,
    energy_model: Optional[EnergyModel] = None,
) -> EfficiencyReport:
    """Welfare, PoA/PoS and Pareto flags for the NE set, the welfare
    maximizer and any extra joint actions given in ``profiles``."""
    ratios = poa_pos(fg, ne_set)
    top_welfare, top_profile = max_welfare(fg)

    queried: List[Tuple[str, str, Any, Tuple[float, ...], Tuple[float, ...], bool]] = []
    for k, ne in enumerate(ne_set):
        on_grid = _on_grid(fg, ne)
        coordinates = fg.coordinates(ne.profile) if on_grid else tuple(float(v) for v in ne.profile.values)
        queried.append(("ne", f"ne_{k}", ne.profile.values, coordinates, ne.per_player_utilities, on_grid))
    queried.append(
        ("welfare_max", "welfare_max", top_profile.values, fg.coordinates(top_profile), tuple(fg.payoff(top_profile)), True)
    )
    for label, profile in (profiles or {}).items():
        actions = validate_profile(fg.as_game(), profile)
        queried.append(("query", label, actions, fg.coordinates(actions), tuple(fg.payoff(actions)), True))

    welfare, flags, rows = {}, {}, []
    for kind, label, actions, coordinates, utilities, on_grid in queried:
        pareto = is_pareto_optimal(fg, actions).optimal if on_grid else None
        welfare[label] = float(sum(utilities))
        flags[label] = pareto
        row = {
            "kind": kind,
            "label": label,
            "coordinates": [float(c) for c in coordinates],
            "utilities": [float(u) for u in utilities],
            "welfare": welfare[label],
            "pareto_optimal": pareto,
            **_fairness(utilities),
        }
        if energy_model is not None:
            try:
                row["virtual_mimo"] = virtual_mimo_metric(energy_model, coordinates)
            except UndefinedMetricError:
                row["virtual_mimo"] = None
        rows.append(row)

    return EfficiencyReport(
        welfare_at_profile=welfare,
        max_welfare=max(ratios.max_welfare, top_welfare),
        poa=ratios.poa,
        pos=ratios.pos,
        pareto_flags=flags,
        ne_set_used=list(ne_set),
        flagged=ratios.flagged,
        welfare_gap=ratios.worst_gap if ratios.flagged else None,
        grid_resolution=tuple(len(g) for g in fg.grids) if fg.grids is not None else None,
        rows=rows,
    )


@dataclass(frozen=True)
class ConstraintSpec:
    """Shared feasibility constraint h(s) >= 0 with normalization weights r."""

    h: Callable[[Tuple[float, ...]], float]
    r: Tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(v) for v in self.r)
        if not weights or not all(v > 0 for v in weights):
            raise ParameterError(f"Constraint weights r must be strictly positive, got {self.r}")
        object.__setattr__(self, "r", weights)


def linear_constraint(total: float, weights: Sequence[float], coefficients: Optional[Sequence[float]] = None) -> ConstraintSpec:
    """h(s) = total - sum_i c_i s_i with c_i = 1 unless given."""
    c = np.ones(len(weights)) if coefficients is None else np.asarray(coefficients, dtype=float)
    total = float(total)
    return ConstraintSpec(h=lambda values: total - float(np.dot(c, values)), r=tuple(weights))


@dataclass(frozen=True)
class NormalizedEqVerdict:
    holds: bool
    active: bool
    constraint_value: float
    multipliers: Tuple[float, ...]
    common_multiplier: Optional[float]
    epsilon: Optional[float] = None
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "active": self.active,
            "constraint_value": self.constraint_value,
            "multipliers": list(self.multipliers),
            "common_multiplier": self.common_multiplier,
            "epsilon": self.epsilon,
            "reason": self.reason,
        }


def normalized_eq_check(
    game: Game,
    profile: ProfileLike,
    constraint: ConstraintSpec,
    cfg: FDConfig,
    deviation_points: int = DEFAULT_BR_POINTS,
) -> NormalizedEqVerdict:
    """KKT check of a normalized equilibrium: lambda_i = lambda / r_i.

    Stationarity du_i/ds_i + lambda_i dh/ds_i = 0 gives each multiplier by
    central differences when the constraint is active.
    """
    values = validate_profile(game, profile)
    if len(constraint.r) != game.player_count:
        raise ParameterError(f"{len(constraint.r)} constraint weights for {game.player_count} players")
    slack = float(constraint.h(values))
    zeros = tuple(0.0 for _ in values)

    if slack < -cfg.tolerance:
        return NormalizedEqVerdict(False, False, slack, zeros, None, reason="profile violates the constraint")

    if slack > cfg.tolerance:
        epsilon = ne_verify(game, values, deviation_points)
        scale = max(1.0, float(np.max(np.abs(game.payoffs(values)))))
        holds = epsilon <= cfg.tolerance * scale
        return NormalizedEqVerdict(
            holds, False, slack, zeros, 0.0, epsilon, None if holds else "inactive constraint but not an NE"
        )

    multipliers = []
    for i, space in enumerate(game.spaces):
        h = local_step(space, values[i], step_for(space, cfg.step))  # type: ignore[arg-type]
        if h is None:
            return NormalizedEqVerdict(False, True, slack, zeros, None, reason=f"player {i} sits on its strategy bound")
        du = partial(lambda v: game.payoffs(v)[i], values, i, h)
        dh = partial(lambda v: float(constraint.h(v)), values, i, h)
        if abs(dh) <= cfg.tolerance:
            logger.warning(f"{game.name}: multiplier of player {i} is unidentifiable, dh/ds_i = {dh}")
            return NormalizedEqVerdict(
                False, True, slack, zeros, None, reason=f"dh/ds_{i} vanishes, multiplier unidentifiable"
            )
        multipliers.append(-du / dh)

    products = [lam * r for lam, r in zip(multipliers, constraint.r)]
    spread = max(products) - min(products)
    nonnegative = all(lam >= -cfg.tolerance for lam in multipliers)
    equal = spread <= max(MULTIPLIER_RELATIVE_TOL * max(abs(p) for p in products), cfg.tolerance)
    reason = None
    if not nonnegative:
        reason = "negative multiplier"
    elif not equal:
        reason = f"lambda_i * r_i differ by {spread:.3g}"
    return NormalizedEqVerdict(
        nonnegative and equal,
        True,
        slack,
        tuple(multipliers),
        float(np.mean(products)),
        reason=reason,
    )


@dataclass(frozen=True)
class NormalizedEquilibrium:
    profile: StrategyProfile
    common_multiplier: float
    multipliers: Tuple[float, ...]
    active: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "profile": list(self.profile.values),
            "common_multiplier": self.common_multiplier,
            "multipliers": list(self.multipliers),
            "active": self.active,
        }


def normalized_equilibrium(
    game: Game,
    constraint: ConstraintSpec,
    cfg: FDConfig,
    points: int = DEFAULT_BR_POINTS,
    max_iter: int = 500,
    tol: float = 1e-10,
    start: Optional[ProfileLike] = None,
) -> NormalizedEquilibrium:
    """Normalized equilibrium for a common multiplier lambda.

    Each player maximizes u_i + (lambda / r_i) h by best-response dynamics;
    lambda is the root of h at the resulting equilibrium, or 0 when the
    unpenalized equilibrium is already feasible.
    """
    if not game.is_continuous:
        raise ParameterError(f"Normalized equilibria need interval strategy spaces, {game.name} has {game.spaces}")
    if len(constraint.r) != game.player_count:
        raise ParameterError(f"{len(constraint.r)} constraint weights for {game.player_count} players")
    origin = validate_profile(game, start) if start is not None else tuple(s.lower for s in game.spaces)  # type: ignore[union-attr]
    weights = np.asarray(constraint.r)

    def solve(lam: float) -> StrategyProfile:
        def utility(values):
            return game.payoffs(values) + (lam / weights) * float(constraint.h(values))

        penalized = Game(name=f"{game.name}-penalized", spaces=game.spaces, utility=utility)
        trace = br_dynamics(penalized, origin, max_iter=max_iter, tol=tol, points=points)
        if not trace.converged:
            raise ParameterError(f"{game.name}: penalized best-response dynamics did not converge at lambda={lam}")
        return trace.limit  # type: ignore[return-value]

    free = solve(0.0)
    if float(constraint.h(free.values)) >= -cfg.tolerance:
        return NormalizedEquilibrium(free, 0.0, tuple(0.0 for _ in weights), False)

    def slack(lam: float) -> float:
        return float(constraint.h(solve(lam).values))

    upper = 1.0
    for _ in range(60):
        if slack(upper) >= 0.0:
            break
        upper *= 2.0
    else:
        raise ParameterError(f"{game.name}: no multiplier makes the shared constraint feasible")
    lam = float(brentq(slack, 0.0, upper, xtol=1e-12))
    profile = solve(lam)
    logger.info(f"{game.name}: normalized equilibrium {profile.values} with lambda={lam:.6g}")
    return NormalizedEquilibrium(profile, lam, tuple(float(lam / r) for r in weights), True)


@dataclass(frozen=True)
class DecodingOrderResult:
    order: Tuple[int, ...]
    powers: Tuple[float, ...]
    welfare: float
    virtual_mimo: float
    converged: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": list(self.order),
            "powers": list(self.powers),
            "welfare": self.welfare,
            "virtual_mimo": self.virtual_mimo,
            "converged": self.converged,
        }


def best_decoding_order(params: ChannelParams, f: Optional[EfficiencyFunction] = None) -> List[DecodingOrderResult]:
    """Equilibrium welfare of the SIC game for every decoding order, best first."""
    results = []
    for order in itertools.permutations(range(params.player_count)):
        model = make_energy_efficient_pc(params.with_order(order), f, sic=True)
        trace = br_dynamics(model.game, tuple(0.0 for _ in order))
        if not trace.converged:
            logger.warning(f"Decoding order {order}: dynamics did not converge")
            continue
        powers = trace.limit.values  # type: ignore[union-attr]
        results.append(
            DecodingOrderResult(
                order=tuple(order),
                powers=tuple(powers),
                welfare=social_welfare(model.game, powers),
                virtual_mimo=virtual_mimo_metric(model, powers),
                converged=True,
            )
        )
    return sorted(results, key=lambda r: -r.welfare)


@dataclass(frozen=True)
class PricingPoint:
    alpha: float
    powers: Tuple[float, ...]
    welfare: float
    priced_welfare: float
    converged: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "powers": list(self.powers),
            "welfare": self.welfare,
            "priced_welfare": self.priced_welfare,
            "converged": self.converged,
        }


def pricing_sweep(
    params: ChannelParams,
    alphas: Sequence[float],
    f: Optional[EfficiencyFunction] = None,
    sic: bool = False,
    points: int = DEFAULT_BR_POINTS,
) -> List[PricingPoint]:
    """Equilibrium of the pricing game for each pricing factor, reached by
    best-response dynamics from the zero profile.

    ``welfare`` sums the unpriced energy efficiencies, ``priced_welfare`` the
    utilities including the pricing term.
    """
    sweep = []
    for alpha in alphas:
        model = make_pricing_pc(params, f, alpha, sic=sic)
        trace = br_dynamics(model.game, tuple(0.0 for _ in params.gains), points=points)
        if not trace.converged:
            logger.warning(f"Pricing factor {alpha}: dynamics did not converge")
            sweep.append(PricingPoint(float(alpha), (), math.nan, math.nan, False))
            continue
        powers = trace.limit.values  # type: ignore[union-attr]
        sweep.append(
            PricingPoint(
                alpha=float(alpha),
                powers=tuple(powers),
                welfare=social_welfare(model.base.game, powers),
                priced_welfare=social_welfare(model.game, powers),
                converged=True,
            )
        )
    return sweep
