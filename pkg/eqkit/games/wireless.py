"""
Wireless network games: energy-efficient power control (with and without
successive interference cancellation), linear pricing, the log-cost potential
game, the two-user MAC rate game, two-band power allocation, slotted ALOHA
and the Cournot oligopoly used as an affine best-response reference.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from ..errors import ParameterError
from ..model import FiniteGame, Game, Interval, JointDistribution, Values

logger = logging.getLogger("eqkit.games")

DEFAULT_STEEPNESS = 100
DEFAULT_PRICING_ALPHA = -1.0
TRANSMIT, WAIT = 0, 1


@dataclass(frozen=True)
class ChannelParams:
    """Channel of K users towards one receiver.

    ``decoding_order`` lists users in the order the receiver decodes them; a
    user is interfered by the users decoded after it. None lets each game pick
    its own default order.
    """

    gains: Tuple[float, ...]
    noise: float
    max_powers: Tuple[float, ...]
    decoding_order: Optional[Tuple[int, ...]] = None
    spreading_gain: float = 1.0

    def __post_init__(self):
        gains = tuple(float(g) for g in self.gains)
        powers = tuple(float(p) for p in self.max_powers)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "max_powers", powers)
        object.__setattr__(self, "noise", float(self.noise))
        object.__setattr__(self, "spreading_gain", float(self.spreading_gain))
        if not gains:
            raise ParameterError("ChannelParams needs at least one user")
        if len(powers) != len(gains):
            raise ParameterError(f"{len(gains)} gains but {len(powers)} max powers")
        if not all(g > 0 and math.isfinite(g) for g in gains):
            raise ParameterError(f"Channel gains must be positive, got {gains}")
        if not all(p > 0 and math.isfinite(p) for p in powers):
            raise ParameterError(f"Max powers must be positive, got {powers}")
        if not (self.noise > 0 and math.isfinite(self.noise)):
            raise ParameterError(f"Noise variance must be positive, got {self.noise}")
        if not (self.spreading_gain > 0 and math.isfinite(self.spreading_gain)):
            raise ParameterError(f"Spreading gain must be positive, got {self.spreading_gain}")
        if self.decoding_order is not None:
            order = tuple(int(k) for k in self.decoding_order)
            if sorted(order) != list(range(len(gains))):
                raise ParameterError(f"Decoding order {order} is not a permutation of the users")
            object.__setattr__(self, "decoding_order", order)

    @property
    def player_count(self) -> int:
        return len(self.gains)

    def with_order(self, order: Sequence[int]) -> "ChannelParams":
        return replace(self, decoding_order=tuple(order))

    def interference_matrix(self, sic: bool, default_order: Sequence[int]) -> np.ndarray:
        """W[i, j] = gain of user j if j interferes with user i, else 0."""
        K = self.player_count
        gains = np.asarray(self.gains)
        if not sic:
            return np.tile(gains, (K, 1)) * (1.0 - np.eye(K))
        order = self.decoding_order if self.decoding_order is not None else tuple(default_order)
        position = {user: k for k, user in enumerate(order)}
        W = np.zeros((K, K))
        for i in range(K):
            for j in range(K):
                if position[j] > position[i]:
                    W[i, j] = gains[j]
        return W


@dataclass(frozen=True)
class EfficiencyFunction:
    """Sigmoidal efficiency f(x) = (1 - exp(-x))^M"""

    steepness: int = DEFAULT_STEEPNESS

    def __post_init__(self):
        if isinstance(self.steepness, bool) or int(self.steepness) != self.steepness or self.steepness < 1:
            raise ParameterError(f"Steepness M must be a positive integer, got {self.steepness}")
        object.__setattr__(self, "steepness", int(self.steepness))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp(self.steepness * np.log1p(-np.exp(-x)))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        M = self.steepness
        return M * np.exp(-x) * (-np.expm1(-x)) ** (M - 1)

    def beta_star(self) -> float:
        """Positive root of f'(x) x = f(x), i.e. M x e^-x - 1 + e^-x = 0."""
        M = self.steepness

        def h(x: float) -> float:
            return M * x * math.exp(-x) + math.expm1(-x)

        lo, hi = 1e-9, 50.0 + 2.0 * math.log(M)
        try:
            root = bisect(h, lo, hi, xtol=1e-14, maxiter=500)
        except ValueError as e:
            raise ParameterError(f"Cannot bracket the equilibrium SINR for M={M}: {e}")
        return float(root)


@dataclass(frozen=True, eq=False)
class EnergyEfficientPC:
    """Energy-efficient power control, u_i = f(SINR_i) / p_i with u_i(0) = 0."""

    game: Game
    params: ChannelParams
    efficiency: EfficiencyFunction
    sic: bool
    beta_star: float
    interference: np.ndarray

    def sinr(self, values: Sequence[float]) -> np.ndarray:
        p = np.asarray(values, dtype=float)
        gains = np.asarray(self.params.gains)
        return self.params.spreading_gain * gains * p / (self.params.noise + self.interference @ p)

    def goodput(self, values: Sequence[float]) -> np.ndarray:
        return self.efficiency(self.sinr(values))

    def powers(self, values: Sequence[float]) -> np.ndarray:
        return np.asarray(values, dtype=float)

    def closed_form_br(self, values: Sequence[float]) -> np.ndarray:
        """BR_i = min(P_i, beta* (noise + interference_i) / (L h_i)) for every user."""
        p = np.asarray(values, dtype=float)
        gains = np.asarray(self.params.gains)
        target = self.beta_star * (self.params.noise + self.interference @ p) / (self.params.spreading_gain * gains)
        return np.minimum(np.asarray(self.params.max_powers), target)

    def equilibrium(self) -> Optional[np.ndarray]:
        """Fixed point with every SINR equal to beta*, None if it leaves the box."""
        gains = np.asarray(self.params.gains)
        system = np.diag(self.params.spreading_gain * gains) - self.beta_star * self.interference
        try:
            p = np.linalg.solve(system, np.full(len(gains), self.beta_star * self.params.noise))
        except np.linalg.LinAlgError:
            return None
        if np.any(p < 0) or np.any(p > np.asarray(self.params.max_powers)):
            return None
        return p


def make_energy_efficient_pc(
    params: ChannelParams, f: Optional[EfficiencyFunction] = None, sic: bool = True
) -> EnergyEfficientPC:
    """Energy-efficient power control game.

    With SIC and no explicit decoding order, users are decoded from the
    highest index down, so user i is interfered by users 0..i-1.
    """
    f = f or EfficiencyFunction()
    beta_star = f.beta_star()
    K = params.player_count
    W = params.interference_matrix(sic, default_order=tuple(reversed(range(K))))
    gains = np.asarray(params.gains)
    scale = params.spreading_gain * gains

    def utility(values: Values) -> np.ndarray:
        p = np.asarray(values, dtype=float)
        sinr = scale * p / (params.noise + W @ p)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(p > 0, f(sinr) / p, 0.0)

    model = EnergyEfficientPC(
        game=Game(
            name="energy_efficient_sic" if sic else "energy_efficient",
            spaces=tuple(Interval(0.0, pmax) for pmax in params.max_powers),
            utility=utility,
        ),
        params=params,
        efficiency=f,
        sic=sic,
        beta_star=beta_star,
        interference=W,
    )
    game = replace(model.game, best_response=lambda i, values: float(model.closed_form_br(values)[i]))
    logger.debug(f"Energy-efficient game with {K} users, beta*={beta_star:.6f}, sic={sic}")
    return replace(model, game=game)


@dataclass(frozen=True)
class PricingPC:
    """Energy-efficient game with a linear pricing term, u_i + alpha p_i"""

    game: Game
    base: EnergyEfficientPC
    alpha: float

    def goodput(self, values: Sequence[float]) -> np.ndarray:
        return self.base.goodput(values)

    def powers(self, values: Sequence[float]) -> np.ndarray:
        return np.asarray(values, dtype=float)


def make_pricing_pc(
    params: ChannelParams,
    f: Optional[EfficiencyFunction] = None,
    alpha: float = DEFAULT_PRICING_ALPHA,
    sic: bool = False,
) -> PricingPC:
    """Pricing variant; the sign of alpha is free, negative alpha is a cost."""
    alpha = float(alpha)
    if not math.isfinite(alpha):
        raise ParameterError(f"Pricing factor must be finite, got {alpha}")
    base = make_energy_efficient_pc(params, f, sic=sic)

    def utility(values: Values) -> np.ndarray:
        return base.game.utility(values) + alpha * np.asarray(values, dtype=float)

    game = Game(name="pricing", spaces=base.game.spaces, utility=utility)
    return PricingPC(game=game, base=base, alpha=alpha)


@dataclass(frozen=True, eq=False)
class PotentialPC:
    """Log-cost power control game with SINR targets and potential sum(log p_i)."""

    game: Game
    params: ChannelParams
    efficiency: EfficiencyFunction
    gamma_targets: Tuple[float, ...]
    interference: np.ndarray

    @staticmethod
    def phi(values: Values) -> float:
        return float(np.sum(np.log(np.asarray(values, dtype=float))))

    def sinr(self, values: Sequence[float]) -> np.ndarray:
        p = np.asarray(values, dtype=float)
        gains = np.asarray(self.params.gains)
        return self.params.spreading_gain * gains * p / (self.params.noise + self.interference @ p)

    def feasibility(self, values: Sequence[float]) -> Tuple[bool, ...]:
        """Whether f(SINR_i) >= gamma_i for each user."""
        achieved = self.efficiency(self.sinr(values))
        return tuple(bool(a >= g) for a, g in zip(achieved, self.gamma_targets))


def make_potential_pc(
    gamma_targets: Sequence[float],
    params: ChannelParams,
    f: Optional[EfficiencyFunction] = None,
    min_power: Optional[Sequence[float]] = None,
) -> PotentialPC:
    """u_i = log p_i on [min_power_i, P_i]; targets reported, never enforced."""
    f = f or EfficiencyFunction()
    K = params.player_count
    targets = tuple(float(g) for g in gamma_targets)
    if len(targets) != K:
        raise ParameterError(f"{len(targets)} SINR targets for {K} users")
    lower = tuple(1e-3 * pmax for pmax in params.max_powers) if min_power is None else tuple(float(p) for p in min_power)
    if len(lower) != K:
        raise ParameterError(f"{len(lower)} minimum powers for {K} users")
    if not all(lo > 0 for lo in lower):
        raise ParameterError(f"Minimum powers must be positive, got {lower}")
    spaces = tuple(Interval(lo, pmax) for lo, pmax in zip(lower, params.max_powers))

    def utility(values: Values) -> np.ndarray:
        return np.log(np.asarray(values, dtype=float))

    def best_response(player: int, values: Values) -> float:
        return spaces[player].upper

    return PotentialPC(
        game=Game(name="potential_pc", spaces=spaces, utility=utility, best_response=best_response),
        params=params,
        efficiency=f,
        gamma_targets=targets,
        interference=params.interference_matrix(False, default_order=range(K)),
    )


@dataclass(frozen=True)
class MacRateGame:
    game: Game
    params: ChannelParams
    sum_rate: float
    time_sharing: float


def _sic_rates(params: ChannelParams, order: Sequence[int], p: Sequence[float]) -> Tuple[float, float]:
    first, last = order
    g, noise = params.gains, params.noise
    rates = [0.0, 0.0]
    rates[first] = math.log2(1.0 + g[first] * p[first] / (noise + g[last] * p[last]))
    rates[last] = math.log2(1.0 + g[last] * p[last] / noise)
    return rates[0], rates[1]


def make_mac_rate_game(params: Optional[ChannelParams] = None, time_sharing: float = 0.0) -> MacRateGame:
    """Two-user multiple access channel with SIC, u_i = log2(1 + SINR_i).

    The receiver uses the decoding order (default: user 0 first) a fraction
    1 - time_sharing of the time and the reversed order otherwise.
    """
    params = params or ChannelParams(gains=(1.0, 1.0), noise=1.0, max_powers=(1.0, 1.0))
    if params.player_count != 2:
        raise ParameterError(f"The MAC rate game has 2 users, got {params.player_count}")
    tau = float(time_sharing)
    if not 0.0 <= tau <= 1.0:
        raise ParameterError(f"time_sharing must lie in [0, 1], got {time_sharing}")
    order = params.decoding_order or (0, 1)
    reverse = tuple(reversed(order))

    def utility(values: Values) -> Tuple[float, float]:
        if tau == 0.0:
            return _sic_rates(params, order, values)
        direct, swapped = _sic_rates(params, order, values), _sic_rates(params, reverse, values)
        return tuple((1.0 - tau) * a + tau * b for a, b in zip(direct, swapped))  # type: ignore[return-value]

    total = sum(g * p for g, p in zip(params.gains, params.max_powers))
    return MacRateGame(
        game=Game(
            name="mac_rate",
            spaces=tuple(Interval(0.0, pmax) for pmax in params.max_powers),
            utility=utility,
            # rates increase in own power
            best_response=lambda i, values: params.max_powers[i],
        ),
        params=params,
        sum_rate=math.log2(1.0 + total / params.noise),
        time_sharing=tau,
    )


def mac_cooperation_segment(params: Optional[ChannelParams] = None, points: int = 11) -> np.ndarray:
    """Rows (time_sharing, u_1, u_2) at full power along the cooperation segment."""
    if points < 2:
        raise ParameterError(f"points must be >= 2, got {points}")
    rows = []
    for tau in np.linspace(0.0, 1.0, points):
        mac = make_mac_rate_game(params, float(tau))
        u = mac.game.payoffs(tuple(mac.params.max_powers))
        rows.append((float(tau), float(u[0]), float(u[1])))
    return np.array(rows)


TWO_BAND_ASYMMETRIC = {
    "gains": ((1.0, 0.7), (0.8, 1.0)),
    "sigma2": 0.1,
    "cross_gains": ((3.0, 2.5), (2.0, 3.5)),
}
TWO_BAND_SYMMETRIC = {
    "gains": ((1.0, 1.0), (1.0, 1.0)),
    "sigma2": 0.1,
    "cross_gains": ((3.0, 3.0), (3.0, 3.0)),
}


def _band_rate(own: float, other: float, gains: Sequence[float], cross: Sequence[float], sigma2: float) -> float:
    return math.log1p(own * gains[0] / (sigma2 + other * cross[0])) + math.log1p(
        (1.0 - own) * gains[1] / (sigma2 + (1.0 - other) * cross[1])
    )


def make_two_band_pa(
    gains: Sequence[Sequence[float]],
    sigma2: float,
    cross_gains: Optional[Sequence[Sequence[float]]] = None,
    name: str = "two_band",
) -> Game:
    """Two users split power between two bands: theta_i on band 1, 1 - theta_i on band 2.

    ``gains[i][b]`` is user i's direct gain on band b, ``cross_gains[i][b]``
    the gain of the other user's interference at user i on band b (defaults to
    the other user's direct gain).
    """
    g = np.asarray(gains, dtype=float)
    if g.shape != (2, 2) or not np.all(g > 0):
        raise ParameterError(f"Two-band gains must be a positive 2x2 table, got {gains}")
    x = g[::-1].copy() if cross_gains is None else np.asarray(cross_gains, dtype=float)
    if x.shape != (2, 2) or not np.all(x >= 0):
        raise ParameterError(f"Cross gains must be a nonnegative 2x2 table, got {cross_gains}")
    sigma2 = float(sigma2)
    if not sigma2 > 0:
        raise ParameterError(f"Noise variance must be positive, got {sigma2}")
    own = [tuple(float(v) for v in row) for row in g]
    cross = [tuple(float(v) for v in row) for row in x]

    def utility(values: Values) -> Tuple[float, float]:
        a, b = values
        return _band_rate(a, b, own[0], cross[0], sigma2), _band_rate(b, a, own[1], cross[1], sigma2)

    return Game(name=name, spaces=(Interval(0.0, 1.0), Interval(0.0, 1.0)), utility=utility)


def make_aloha(transmit_gain: float = 1.0, collision_cost: float = 1.0, energy_cost: float = 0.1) -> FiniteGame:
    """Two-user slotted ALOHA; action 0 transmits, action 1 waits."""
    success = transmit_gain - energy_cost
    collision = -collision_cost - energy_cost
    payoffs = np.zeros((2, 2, 2))
    payoffs[TRANSMIT, TRANSMIT] = (collision, collision)
    payoffs[TRANSMIT, WAIT] = (success, 0.0)
    payoffs[WAIT, TRANSMIT] = (0.0, success)
    return FiniteGame(payoffs, name="aloha")


def aloha_collision_frequency(dist: JointDistribution) -> float:
    return float(dist.probabilities[TRANSMIT, TRANSMIT])


def aloha_public_signal() -> JointDistribution:
    """A fair public coin picks who transmits; nobody ever collides."""
    probabilities = np.zeros((2, 2))
    probabilities[TRANSMIT, WAIT] = 0.5
    probabilities[WAIT, TRANSMIT] = 0.5
    return JointDistribution(probabilities)


@dataclass(frozen=True)
class CournotGame:
    game: Game
    analytic_ne: Tuple[float, ...]


def make_cournot(a: float = 10.0, b: float = 1.0, c: float = 1.0, firms: int = 2) -> CournotGame:
    """Cournot oligopoly with inverse demand a - b Q and unit cost c."""
    a, b, c = float(a), float(b), float(c)
    if not (a > c >= 0):
        raise ParameterError(f"Cournot needs a > c >= 0, got a={a}, c={c}")
    if not b > 0:
        raise ParameterError(f"Cournot needs b > 0, got {b}")
    if int(firms) != firms or firms < 1:
        raise ParameterError(f"firms must be a positive integer, got {firms}")
    firms = int(firms)

    def utility(values: Values) -> np.ndarray:
        q = np.asarray(values, dtype=float)
        return (a - b * q.sum() - c) * q

    def best_response(player: int, values: Values) -> float:
        others = sum(v for j, v in enumerate(values) if j != player)
        return min(max(0.0, (a - c - b * others) / (2.0 * b)), a / b)

    game = Game(
        name="cournot",
        spaces=tuple(Interval(0.0, a / b) for _ in range(firms)),
        utility=utility,
        best_response=best_response,
    )
    return CournotGame(game=game, analytic_ne=tuple((a - c) / ((firms + 1) * b) for _ in range(firms)))
