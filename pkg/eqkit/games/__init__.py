"""Registry of built-in games, addressable by name from run configurations."""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigError, EqkitError
from ..model import FiniteGame, Game
from . import classic, wireless
from .wireless import ChannelParams, EfficiencyFunction

logger = logging.getLogger("eqkit.games")


@dataclass(frozen=True, eq=False)
class GameInstance:
    """A built game together with the extras some analyses need."""

    name: str
    game: Game
    finite: Optional[FiniteGame] = None
    phi: Optional[Callable[[Tuple[Any, ...]], float]] = None
    standard_br: Optional[Callable[[np.ndarray], Sequence[float]]] = None
    efficiency_model: Any = None
    analytic_ne: Optional[Tuple[float, ...]] = None
    extras: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class GameEntry:
    name: str
    description: str
    builder: Callable[[Dict[str, Any]], GameInstance]
    defaults: Mapping[str, Any]


def _channel(params: Dict[str, Any]) -> ChannelParams:
    order = params.get("decoding_order")
    return ChannelParams(
        gains=tuple(params["gains"]),
        noise=params["noise"],
        max_powers=tuple(params["max_powers"]),
        decoding_order=tuple(order) if order is not None else None,
        spreading_gain=params.get("spreading_gain", 1.0),
    )


def _energy_efficient(params: Dict[str, Any]) -> GameInstance:
    model = wireless.make_energy_efficient_pc(_channel(params), EfficiencyFunction(params["steepness"]), params["sic"])
    equilibrium = model.equilibrium()
    return GameInstance(
        name="energy_efficient",
        game=model.game,
        standard_br=model.closed_form_br,
        efficiency_model=model,
        analytic_ne=tuple(float(p) for p in equilibrium) if equilibrium is not None else None,
        extras={"beta_star": model.beta_star},
    )


def _pricing(params: Dict[str, Any]) -> GameInstance:
    model = wireless.make_pricing_pc(
        _channel(params), EfficiencyFunction(params["steepness"]), params["alpha"], sic=params["sic"]
    )
    return GameInstance(name="pricing", game=model.game, efficiency_model=model, extras={"alpha": model.alpha})


def _potential_pc(params: Dict[str, Any]) -> GameInstance:
    model = wireless.make_potential_pc(
        params["gamma_targets"], _channel(params), EfficiencyFunction(params["steepness"]), params["min_power"]
    )
    top = tuple(s.upper for s in model.game.spaces)  # type: ignore[union-attr]
    return GameInstance(
        name="potential_pc",
        game=model.game,
        phi=model.phi,
        analytic_ne=top,
        extras={"feasibility_at_ne": list(model.feasibility(top))},
    )


def _mac_rate(params: Dict[str, Any]) -> GameInstance:
    model = wireless.make_mac_rate_game(_channel(params), params["time_sharing"])
    return GameInstance(
        name="mac_rate",
        game=model.game,
        analytic_ne=model.params.max_powers,
        extras={"sum_rate": model.sum_rate},
    )


def _two_band(params: Dict[str, Any]) -> GameInstance:
    presets = {"asymmetric": wireless.TWO_BAND_ASYMMETRIC, "symmetric": wireless.TWO_BAND_SYMMETRIC}
    if params["preset"] not in presets:
        raise ConfigError(f"Unknown two-band preset {params['preset']!r}", field="game.params.preset")
    preset = presets[params["preset"]]
    gains = params["gains"] if params["gains"] is not None else preset["gains"]
    sigma2 = params["sigma2"] if params["sigma2"] is not None else preset["sigma2"]
    cross = params["cross_gains"] if params["cross_gains"] is not None else preset["cross_gains"]
    return GameInstance(name="two_band", game=wireless.make_two_band_pa(gains, sigma2, cross))


def _aloha(params: Dict[str, Any]) -> GameInstance:
    fg = wireless.make_aloha(params["transmit_gain"], params["collision_cost"], params["energy_cost"])
    return GameInstance(name="aloha", game=fg.as_game(), finite=fg)


def _cournot(params: Dict[str, Any]) -> GameInstance:
    model = wireless.make_cournot(params["a"], params["b"], params["c"], params["firms"])
    return GameInstance(name="cournot", game=model.game, analytic_ne=model.analytic_ne)


def _finite(builder: Callable[[], FiniteGame]) -> Callable[[Dict[str, Any]], GameInstance]:
    def build(params: Dict[str, Any]) -> GameInstance:
        fg = builder()
        return GameInstance(name=fg.name, game=fg.as_game(), finite=fg)

    return build


def _quadratic(params: Dict[str, Any]) -> GameInstance:
    return GameInstance(name="quadratic", game=classic.make_quadratic_game(**params))


def _decoupled(params: Dict[str, Any]) -> GameInstance:
    return GameInstance(name="decoupled_concave", game=classic.make_decoupled_concave(**params))


_CHANNEL = {"noise": 0.01, "decoding_order": None, "steepness": wireless.DEFAULT_STEEPNESS}

REGISTRY: Dict[str, GameEntry] = {
    entry.name: entry
    for entry in [
        GameEntry(
            "energy_efficient",
            "Energy-efficient power control, u_i = f(SINR_i)/p_i, optional SIC",
            _energy_efficient,
            {**_CHANNEL, "gains": [1.0, 0.8], "max_powers": [1.0, 1.0], "spreading_gain": 1.0, "sic": True},
        ),
        GameEntry(
            "pricing",
            "Energy-efficient power control with linear pricing u_i + alpha p_i",
            _pricing,
            {
                **_CHANNEL,
                "gains": [1.0, 1.0],
                "max_powers": [1.0, 1.0],
                "spreading_gain": 100.0,
                "sic": False,
                "alpha": wireless.DEFAULT_PRICING_ALPHA,
            },
        ),
        GameEntry(
            "potential_pc",
            "Log-cost power control with SINR targets, potential sum(log p_i)",
            _potential_pc,
            {
                **_CHANNEL,
                "gains": [1.0, 1.0],
                "max_powers": [1.0, 1.0],
                "spreading_gain": 100.0,
                "gamma_targets": [0.5, 0.5],
                "min_power": None,
            },
        ),
        GameEntry(
            "mac_rate",
            "Two-user MAC with SIC, u_i = log2(1 + SINR_i)",
            _mac_rate,
            {
                "gains": [1.0, 1.0],
                "noise": 1.0,
                "max_powers": [1.0, 1.0],
                "decoding_order": [0, 1],
                "time_sharing": 0.0,
            },
        ),
        GameEntry(
            "two_band",
            "Two-band power allocation, theta_i = fraction of power on band 1",
            _two_band,
            {"preset": "asymmetric", "gains": None, "sigma2": None, "cross_gains": None},
        ),
        GameEntry(
            "aloha",
            "Two-user slotted ALOHA, actions (transmit, wait)",
            _aloha,
            {"transmit_gain": 1.0, "collision_cost": 1.0, "energy_cost": 0.1},
        ),
        GameEntry(
            "cournot",
            "Cournot oligopoly with affine demand a - b Q and unit cost c",
            _cournot,
            {"a": 10.0, "b": 1.0, "c": 1.0, "firms": 2},
        ),
        GameEntry("prisoners_dilemma", "Prisoner's dilemma, actions (cooperate, defect)", _finite(classic.prisoners_dilemma), {}),
        GameEntry("matching_pennies", "Matching pennies, zero-sum", _finite(classic.matching_pennies), {}),
        GameEntry("battle_of_sexes", "Battle of the sexes", _finite(classic.battle_of_sexes), {}),
        GameEntry("chicken", "Game of chicken, actions (dare, swerve)", _finite(classic.chicken), {}),
        GameEntry(
            "quadratic",
            "Quadratic game u_i = -own s_i^2 + linear s_i + coupling s_i sum_j s_j",
            _quadratic,
            {"own": 1.0, "linear": 0.0, "coupling": 1.0, "lower": -1.0, "upper": 1.0, "players": 2},
        ),
        GameEntry(
            "decoupled_concave",
            "Decoupled concave game u_i = -(s_i - c_i)^2",
            _decoupled,
            {"centers": [0.3, -0.2], "lower": -1.0, "upper": 1.0},
        ),
    ]
}


def list_games() -> List[GameEntry]:
    return list(REGISTRY.values())


def game_entry(name: str) -> GameEntry:
    if name not in REGISTRY:
        raise ConfigError(f"Unknown game {name!r}; available: {', '.join(REGISTRY)}", field="game.name")
    return REGISTRY[name]


def merge_params(name: str, params: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Registered defaults overridden by the given parameters."""
    entry = game_entry(name)
    params = dict(params or {})
    unknown = sorted(set(params) - set(entry.defaults))
    if unknown:
        raise ConfigError(
            f"Unknown parameter(s) {unknown} for game {name!r}; accepted: {sorted(entry.defaults)}",
            field=f"game.params.{unknown[0]}",
        )
    return {**entry.defaults, **params}


def build_game(name: str, params: Optional[Mapping[str, Any]] = None) -> GameInstance:
    merged = merge_params(name, params)
    try:
        instance = game_entry(name).builder(merged)
    except ConfigError:
        raise
    except (EqkitError, TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"Cannot build game {name!r}: {e}", field="game.params")
    logger.debug(f"Built game {name} with {merged}")
    return instance


def describe_game(name: str) -> str:
    entry = game_entry(name)
    lines = [f"{entry.name}: {entry.description}", "", "Parameters (defaults):"]
    if not entry.defaults:
        lines.append("  (none)")
    for key, value in entry.defaults.items():
        lines.append(f"  {key} = {value!r}")
    return "\n".join(lines)


__all__ = ["GameEntry", "GameInstance", "REGISTRY", "build_game", "describe_game", "game_entry", "list_games", "merge_params"]
