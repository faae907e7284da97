"""
Sampled structural checks behind NE existence and uniqueness.

Every check returns a CheckVerdict. HOLDS_ON_SAMPLES is evidence gathered on
a seeded sample, never a proof; a COUNTEREXAMPLE always carries a witness that
reproduces the violation when replayed.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DomainError, ParameterError
from ..model import Finite, FiniteGame, Game, Interval, Values
from ..utils.numeric import (
    cross_partial,
    interior_points,
    local_step,
    make_rng,
    noise_floor,
    partial,
    sample_box,
    sample_grid_points,
    step_for,
)
from ..utils.serialization import to_jsonable

logger = logging.getLogger("eqkit.analyzers")

DSC_CONVENTIONS = ("rosen", "literal")
MAX_EXHAUSTIVE_DEVIATIONS = 1_000_000

PotentialOracle = Union[Callable[[Values], float], np.ndarray]
BRMap = Callable[[np.ndarray], Sequence[float]]


class VerdictStatus(str, Enum):
    HOLDS_ON_SAMPLES = "HOLDS_ON_SAMPLES"
    COUNTEREXAMPLE = "COUNTEREXAMPLE"


class ExistenceConclusion(str, Enum):
    PURE_NE_GUARANTEED = "PURE_NE_GUARANTEED"
    MIXED_NE_GUARANTEED = "MIXED_NE_GUARANTEED"
    UNKNOWN = "UNKNOWN"


class UniquenessConclusion(str, Enum):
    UNIQUE_NE_GUARANTEED = "UNIQUE_NE_GUARANTEED"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference and sampling settings shared by all checks"""

    step: float = 1e-4
    resolution: int = 9
    pair_count: int = 200
    seed: int = 0
    line_points: int = 101
    tolerance: float = 1e-6
    potential_samples: int = 1000
    standard_samples: int = 100
    alpha_max: float = 4.0
    dsc_convention: str = "rosen"

    def __post_init__(self):
        if not self.step > 0:
            raise ParameterError(f"FD step must be positive, got {self.step}")
        if self.resolution < 3:
            raise ParameterError(f"FD resolution must be >= 3, got {self.resolution}")
        if self.line_points < 3:
            raise ParameterError(f"line_points must be >= 3, got {self.line_points}")
        for name in ("pair_count", "potential_samples", "standard_samples"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")
        if not self.tolerance >= 0:
            raise ParameterError(f"tolerance must be nonnegative, got {self.tolerance}")
        if not self.alpha_max > 1:
            raise ParameterError(f"alpha_max must exceed 1, got {self.alpha_max}")
        if self.dsc_convention not in DSC_CONVENTIONS:
            raise ParameterError(f"dsc_convention must be one of {DSC_CONVENTIONS}, got {self.dsc_convention!r}")


@dataclass(frozen=True)
class CheckVerdict:
    status: VerdictStatus
    witness: Optional[Dict[str, Any]] = None
    samples_used: int = 0
    tolerance: float = 0.0
    violations: int = 0
    worst: Optional[float] = None

    @property
    def holds(self) -> bool:
        return self.status is VerdictStatus.HOLDS_ON_SAMPLES

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable(
            {
                "status": self.status.value,
                "witness": self.witness,
                "samples_used": self.samples_used,
                "tolerance": self.tolerance,
                "violations": self.violations,
                "worst": self.worst,
            }
        )


def _verdict(violations: int, witness: Optional[Dict[str, Any]], samples: int, tol: float, worst=None) -> CheckVerdict:
    status = VerdictStatus.COUNTEREXAMPLE if violations else VerdictStatus.HOLDS_ON_SAMPLES
    return CheckVerdict(status, witness if violations else None, samples, tol, violations, worst)


@dataclass(frozen=True)
class SModularVerdict:
    supermodular: CheckVerdict
    submodular: CheckVerdict

    def to_dict(self) -> Dict[str, Any]:
        return {"supermodular": self.supermodular.to_dict(), "submodular": self.submodular.to_dict()}


@dataclass(frozen=True)
class StandardBRVerdict:
    monotonicity: CheckVerdict
    scalability: CheckVerdict

    @property
    def combined(self) -> CheckVerdict:
        failed = [v for v in (self.monotonicity, self.scalability) if not v.holds]
        return _verdict(
            sum(v.violations for v in failed),
            failed[0].witness if failed else None,
            self.monotonicity.samples_used + self.scalability.samples_used,
            self.monotonicity.tolerance,
        )

    @property
    def holds(self) -> bool:
        return self.monotonicity.holds and self.scalability.holds

    def to_dict(self) -> Dict[str, Any]:
        return {
            "monotonicity": self.monotonicity.to_dict(),
            "scalability": self.scalability.to_dict(),
            "combined": self.combined.to_dict(),
        }


@dataclass(frozen=True)
class ExistenceReport:
    verdicts: Dict[str, CheckVerdict]
    conclusion: ExistenceConclusion
    theorem: Optional[str] = None
    note: str = "sampled evidence, not a proof"

    @property
    def label(self) -> str:
        return f"{self.conclusion.value}({self.theorem})" if self.theorem else self.conclusion.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "conclusion": self.conclusion.value,
            "theorem": self.theorem,
            "label": self.label,
            "verdicts": {name: v.to_dict() for name, v in self.verdicts.items()},
            "note": self.note,
        }


@dataclass(frozen=True)
class UniquenessReport:
    dsc: Optional[CheckVerdict]
    standard_br: Optional[StandardBRVerdict]
    conclusion: UniquenessConclusion
    theorem: Optional[str] = None
    note: str = field(default="sampled evidence, not a proof")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "conclusion": self.conclusion.value,
            "theorem": self.theorem,
            "dsc": self.dsc.to_dict() if self.dsc else None,
            "standard_br": self.standard_br.to_dict() if self.standard_br else None,
            "note": self.note,
        }


def _require_intervals(game: Game, what: str) -> Tuple[Interval, ...]:
    if not game.is_continuous:
        raise ParameterError(f"{what} needs interval strategy spaces; {game.name} has {game.spaces}")
    return game.spaces  # type: ignore[return-value]


def _insert(others: Sequence[float], player: int, value: float) -> Tuple[float, ...]:
    return tuple(others[:player]) + (value,) + tuple(others[player:])


def check_quasiconcavity(game: Game, player: int, cfg: FDConfig) -> CheckVerdict:
    """Single-variable quasi-concavity of u_i(., s_-i) on a line grid.

    A strict interior dip, u(b) < min(u(a), u(c)) - tol for a < b < c, is a
    counterexample. Found with prefix and suffix maxima in one pass per line.
    """
    space = game.spaces[player]
    if not isinstance(space, Interval):
        raise ParameterError(f"Quasi-concavity needs an interval space for player {player}, got {space}")
    rng = make_rng(cfg.seed)
    line = space.grid(cfg.line_points)
    other_spaces = [s for j, s in enumerate(game.spaces) if j != player]
    axes = [s.grid(cfg.resolution) if isinstance(s, Interval) else np.arange(s.action_count) for s in other_spaces]
    contexts = sample_grid_points(other_spaces, axes, cfg.pair_count, rng) if axes else [()]

    violations = 0
    witness = None
    for others in contexts:
        if not game.is_continuous:
            others = tuple(int(v) if isinstance(s, Finite) else v for s, v in zip(other_spaces, others))
        u = np.array([game.payoffs(_insert(others, player, float(x)))[player] for x in line])
        tol = cfg.tolerance * max(1.0, float(np.max(np.abs(u))))
        prefix = np.maximum.accumulate(u)
        suffix = np.maximum.accumulate(u[::-1])[::-1]
        dips = np.minimum(prefix[:-2], suffix[2:]) - u[1:-1]
        b = int(np.argmax(dips)) + 1
        if dips[b - 1] <= tol:
            continue
        violations += 1
        if witness is None:
            a = int(np.argmax(u[:b]))
            c = b + 1 + int(np.argmax(u[b + 1 :]))
            witness = {
                "player": player,
                "profile": list(_insert(others, player, float(line[b]))),
                "a": float(line[a]),
                "b": float(line[b]),
                "c": float(line[c]),
                "u_a": float(u[a]),
                "u_b": float(u[b]),
                "u_c": float(u[c]),
                "dip": float(dips[b - 1]),
                "tolerance": tol,
            }
            logger.debug(f"{game.name}: quasi-concavity dip for player {player}: {witness}")

    return _verdict(violations, witness, len(contexts), cfg.tolerance)


def _mixed_differences(game: Game, point: Tuple[float, ...], i: int, j: int, hi: float, hj: float) -> np.ndarray:
    """Cross-partials d2 u_k / ds_i ds_j for every player k at once."""
    return cross_partial(lambda v: game.payoffs(v), point, i, j, hi, hj)


def _cross_partial_samples(game: Game, cfg: FDConfig) -> List[Dict[str, Any]]:
    spaces = _require_intervals(game, "Cross-partial sampling")
    rng = make_rng(cfg.seed)
    axes = [interior_points(s, cfg.resolution) for s in spaces]
    points = sample_grid_points(spaces, axes, cfg.pair_count, rng)
    steps = [step_for(s, cfg.step) for s in spaces]

    samples = []
    skipped = 0
    for point in points:
        magnitudes = np.abs(game.payoffs(point))
        for i in range(game.player_count):
            for j in range(i + 1, game.player_count):
                hi = local_step(spaces[i], point[i], steps[i])
                hj = local_step(spaces[j], point[j], steps[j])
                if hi is None or hj is None:
                    skipped += 1
                    continue
                samples.append(
                    {
                        "point": point,
                        "i": i,
                        "j": j,
                        "step_i": hi,
                        "step_j": hj,
                        "values": _mixed_differences(game, point, i, j, hi, hj),
                        "noise": noise_floor(float(np.max(magnitudes)), hi, hj),
                    }
                )
    if skipped:
        logger.warning(f"{game.name}: {skipped} sample points too close to the boundary for the FD step")
    return samples


def check_smodular(game: Game, cfg: FDConfig) -> SModularVerdict:
    """Signs of all cross-partials d2 u_i / ds_i ds_j, i != j."""
    samples = _cross_partial_samples(game, cfg)
    entries = []
    for sample in samples:
        i, j = sample["i"], sample["j"]
        # entry k of the vector is the cross-partial of u_k, giving both ordered pairs
        for player, other in ((i, j), (j, i)):
            entries.append((float(sample["values"][player]), player, other, sample))
    scale = max([1.0] + [abs(v) for v, _, _, _ in entries])

    def verdict(sign: float) -> CheckVerdict:
        violations = 0
        worst = None
        for value, player, other, sample in entries:
            threshold = cfg.tolerance * scale + sample["noise"]
            if sign * value < -threshold:
                violations += 1
                if worst is None or sign * value < sign * worst[0]:
                    worst = (value, player, other, sample)
        witness = None
        if worst is not None:
            value, player, other, sample = worst
            witness = {
                "point": list(sample["point"]),
                "player": player,
                "other": other,
                "step_i": sample["step_i"],
                "step_j": sample["step_j"],
                "cross_partial": value,
            }
        return _verdict(violations, witness, len(entries), cfg.tolerance)

    return SModularVerdict(supermodular=verdict(1.0), submodular=verdict(-1.0))


def check_potential_condition(game: Game, cfg: FDConfig) -> CheckVerdict:
    """Cross-partials of u_i - u_j must vanish for every pair of players."""
    samples = _cross_partial_samples(game, cfg)
    scale = max([1.0] + [float(np.max(np.abs(s["values"]))) for s in samples])
    violations = 0
    witness = None
    worst = 0.0
    for sample in samples:
        i, j = sample["i"], sample["j"]
        difference = float(sample["values"][i] - sample["values"][j])
        if abs(difference) > cfg.tolerance * scale + sample["noise"]:
            violations += 1
            if abs(difference) > worst:
                worst = abs(difference)
                witness = {
                    "point": list(sample["point"]),
                    "i": i,
                    "j": j,
                    "step_i": sample["step_i"],
                    "step_j": sample["step_j"],
                    "cross_partial_difference": difference,
                    "scale": scale,
                }
    return _verdict(violations, witness, len(samples), cfg.tolerance)


def _potential_callable(phi: PotentialOracle) -> Callable[[Values], float]:
    if callable(phi):
        return phi
    tensor = np.asarray(phi, dtype=float)
    return lambda values: float(tensor[tuple(int(v) for v in values)])


def _sample_strategy(space, rng: np.random.Generator):
    if isinstance(space, Interval):
        return float(rng.uniform(space.lower, space.upper))
    return int(rng.integers(space.action_count))


def verify_exact_potential(
    game: Union[Game, FiniteGame], phi: PotentialOracle, cfg: FDConfig, mode: str = "exact"
) -> CheckVerdict:
    """Compare unilateral utility differences with potential differences.

    Exact mode requires equality within tolerance, ordinal mode sign
    agreement. Finite games are scanned exhaustively when small enough.
    """
    if mode not in ("exact", "ordinal"):
        raise ParameterError(f"mode must be 'exact' or 'ordinal', got {mode!r}")
    if isinstance(game, FiniteGame):
        game = game.as_game()
    potential = _potential_callable(phi)

    def deviations():
        if game.is_finite:
            counts = [s.action_count for s in game.spaces]
            total = int(np.prod(counts)) * sum(n - 1 for n in counts)
            if total <= MAX_EXHAUSTIVE_DEVIATIONS:
                for joint in np.ndindex(*counts):
                    for i, n in enumerate(counts):
                        for alternative in range(n):
                            if alternative != joint[i]:
                                yield tuple(int(a) for a in joint), i, alternative
                return
        rng = make_rng(cfg.seed)
        for _ in range(cfg.potential_samples):
            profile = tuple(_sample_strategy(s, rng) for s in game.spaces)
            i = int(rng.integers(game.player_count))
            yield profile, i, _sample_strategy(game.spaces[i], rng)

    violations = 0
    samples = 0
    witness = None
    for profile, i, alternative in deviations():
        samples += 1
        deviated = profile[:i] + (alternative,) + profile[i + 1 :]
        du = float(game.payoffs(profile)[i] - game.payoffs(deviated)[i])
        dphi = float(potential(profile)) - float(potential(deviated))
        band = cfg.tolerance * max(1.0, abs(du), abs(dphi))
        if mode == "exact":
            violated = abs(du - dphi) > band
        else:
            violated = (du > band and dphi < -band) or (du < -band and dphi > band)
        if violated:
            violations += 1
            if witness is None:
                witness = {
                    "profile": list(profile),
                    "player": i,
                    "deviation": alternative,
                    "utility_difference": du,
                    "potential_difference": dphi,
                    "mode": mode,
                }

    logger.debug(f"{game.name}: {mode} potential check on {samples} deviations, {violations} violations")
    return _verdict(violations, witness, samples, cfg.tolerance)


def check_dsc(game: Game, r: Sequence[float], cfg: FDConfig) -> CheckVerdict:
    """Diagonal strict concavity via the weighted pseudogradient.

    The sampled quantity is (s - s') . (g(s) - g(s')) with g_k = r_k du_k/ds_k.
    Under the "rosen" convention it must be strictly negative on every pair,
    under "literal" strictly positive. ``worst`` is the sampled value closest
    to violating the condition.
    """
    spaces = _require_intervals(game, "DSC")
    weights = np.asarray(r, dtype=float)
    if weights.shape != (game.player_count,):
        raise ParameterError(f"DSC needs one weight per player, got {list(r)}")
    if not np.all(weights > 0):
        raise ParameterError(f"DSC weights must be strictly positive, got {list(r)}")
    sign = -1.0 if cfg.dsc_convention == "rosen" else 1.0
    rng = make_rng(cfg.seed)
    steps = [step_for(s, cfg.step) for s in spaces]
    min_distance = min(steps)

    def pseudogradient(point: Tuple[float, ...]) -> Optional[np.ndarray]:
        gradient = np.empty(game.player_count)
        for k in range(game.player_count):
            h = local_step(spaces[k], point[k], steps[k])
            if h is None:
                return None
            gradient[k] = weights[k] * partial(lambda v: game.payoffs(v)[k], point, k, h)
        return gradient

    violations = 0
    samples = 0
    skipped = 0
    worst_margin = None
    witness = None
    for _ in range(cfg.pair_count):
        s, t = sample_box(spaces, rng), sample_box(spaces, rng)
        if np.linalg.norm(np.subtract(s, t)) < min_distance:
            skipped += 1
            continue
        gs, gt = pseudogradient(s), pseudogradient(t)
        if gs is None or gt is None:
            skipped += 1
            continue
        samples += 1
        value = float(np.dot(np.subtract(s, t), gs - gt))
        margin = sign * value
        if margin <= 0:
            violations += 1
        if worst_margin is None or margin < worst_margin:
            worst_margin = margin
            witness = {"s": list(s), "s_prime": list(t), "value": value, "convention": cfg.dsc_convention}
    if skipped:
        logger.debug(f"{game.name}: DSC skipped {skipped} degenerate pairs")

    worst = None if worst_margin is None else sign * worst_margin
    return _verdict(violations, witness, samples, 0.0, worst)


def check_standard_br(br: BRMap, cfg: FDConfig, upper: Sequence[float]) -> StandardBRVerdict:
    """Monotonicity and scalability of a best-response map on [0, upper].

    Monotonicity allows a tolerance; scalability g(a x) < a g(x) is strict.
    """
    bound = np.asarray(upper, dtype=float)
    if bound.ndim != 1 or not np.all(bound > 0):
        raise ParameterError(f"Sampling box upper corner must be positive, got {list(upper)}")
    rng = make_rng(cfg.seed)

    def evaluate(x: np.ndarray) -> np.ndarray:
        y = np.asarray(br(x), dtype=float)
        if y.shape != bound.shape:
            raise ParameterError(f"Best-response map returned shape {y.shape}, expected {bound.shape}")
        if np.any(y < 0):
            raise DomainError(f"Best-response map returned a negative component {y.tolist()} at {x.tolist()}")
        return y

    violations = 0
    witness = None
    for _ in range(cfg.standard_samples):
        x = rng.uniform(0.0, bound)
        x_up = x + rng.uniform(0.0, 1.0, bound.size) * (bound - x)
        gx, gx_up = evaluate(x), evaluate(x_up)
        if np.any(gx > gx_up + cfg.tolerance * np.maximum(1.0, np.abs(gx_up))):
            violations += 1
            if witness is None:
                witness = {"x": x, "x_prime": x_up, "g_x": gx, "g_x_prime": gx_up}
    monotonicity = _verdict(violations, to_jsonable(witness), cfg.standard_samples, cfg.tolerance)

    violations = 0
    witness = None
    for _ in range(cfg.standard_samples):
        x = rng.uniform(0.0, bound)
        alpha = 1.0 + (cfg.alpha_max - 1.0) * (1.0 - rng.random())
        scaled, base = evaluate(alpha * x), evaluate(x)
        if np.any(scaled >= alpha * base):
            violations += 1
            if witness is None:
                witness = {"x": x, "alpha": alpha, "g_alpha_x": scaled, "alpha_g_x": alpha * base}
    scalability = _verdict(violations, to_jsonable(witness), cfg.standard_samples, 0.0)

    return StandardBRVerdict(monotonicity, scalability)


def uniqueness_report(
    game: Game,
    cfg: FDConfig,
    r: Optional[Sequence[float]] = None,
    standard_br: Optional[BRMap] = None,
    upper: Optional[Sequence[float]] = None,
) -> UniquenessReport:
    """Yates (standard best responses) first, then Rosen (DSC)."""
    dsc = check_dsc(game, r if r is not None else [1.0] * game.player_count, cfg) if game.is_continuous else None
    standard = None
    if standard_br is not None:
        if upper is None:
            upper = [s.upper for s in game.spaces]  # type: ignore[union-attr]
        standard = check_standard_br(standard_br, cfg, upper)

    if standard is not None and standard.holds:
        return UniquenessReport(dsc, standard, UniquenessConclusion.UNIQUE_NE_GUARANTEED, "Yates")
    if dsc is not None and dsc.holds:
        return UniquenessReport(dsc, standard, UniquenessConclusion.UNIQUE_NE_GUARANTEED, "Rosen")
    return UniquenessReport(dsc, standard, UniquenessConclusion.UNKNOWN)


def _combine(verdicts: Sequence[CheckVerdict]) -> CheckVerdict:
    failed = [v for v in verdicts if not v.holds]
    return _verdict(
        sum(v.violations for v in failed),
        failed[0].witness if failed else None,
        sum(v.samples_used for v in verdicts),
        verdicts[0].tolerance if verdicts else 0.0,
    )


def existence_report(
    game: Union[Game, FiniteGame], cfg: FDConfig, phi: Optional[PotentialOracle] = None
) -> ExistenceReport:
    """Run the existence checks in flowchart order.

    Continuous games: quasi-concavity (Debreu-Fan-Glicksberg), then
    S-modularity (Topkis), then the potential property (Monderer-Shapley).
    Finite games: a verified potential gives a pure NE, otherwise Nash's
    theorem gives a mixed one.
    """
    verdicts: Dict[str, CheckVerdict] = {}

    if isinstance(game, FiniteGame) or game.is_finite:
        cells = game.cell_count if isinstance(game, FiniteGame) else int(np.prod([s.action_count for s in game.spaces]))
        verdicts["finite"] = CheckVerdict(VerdictStatus.HOLDS_ON_SAMPLES, samples_used=cells)
        if phi is not None:
            verdicts["potential"] = verify_exact_potential(game, phi, cfg)
            if verdicts["potential"].holds:
                return ExistenceReport(verdicts, ExistenceConclusion.PURE_NE_GUARANTEED, "Monderer-Shapley")
        return ExistenceReport(verdicts, ExistenceConclusion.MIXED_NE_GUARANTEED, "Nash")

    if not game.is_continuous:
        logger.warning(f"{game.name}: mixed interval and finite spaces, no existence check applies")
        return ExistenceReport(verdicts, ExistenceConclusion.UNKNOWN)

    verdicts["quasi_concavity"] = _combine(
        [check_quasiconcavity(game, i, cfg) for i in range(game.player_count)]
    )
    smodular = check_smodular(game, cfg)
    verdicts["supermodular"] = smodular.supermodular
    verdicts["submodular"] = smodular.submodular
    if phi is not None:
        verdicts["potential"] = verify_exact_potential(game, phi, cfg)
    else:
        verdicts["potential"] = check_potential_condition(game, cfg)

    if verdicts["quasi_concavity"].holds:
        return ExistenceReport(verdicts, ExistenceConclusion.PURE_NE_GUARANTEED, "Debreu-Fan-Glicksberg")
    # submodularity only orders two-player games into a supermodular one
    if smodular.supermodular.holds or (game.player_count == 2 and smodular.submodular.holds):
        return ExistenceReport(verdicts, ExistenceConclusion.PURE_NE_GUARANTEED, "Topkis")
    if verdicts["potential"].holds:
        return ExistenceReport(verdicts, ExistenceConclusion.PURE_NE_GUARANTEED, "Monderer-Shapley")
    return ExistenceReport(verdicts, ExistenceConclusion.UNKNOWN)
