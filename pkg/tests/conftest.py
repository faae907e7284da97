"""Shared fixtures for the eqkit test suite"""

import itertools
from pathlib import Path

import numpy as np
import pytest

from eqkit.analyzers.structure import FDConfig
from eqkit.games import classic, wireless
from eqkit.games.wireless import ChannelParams

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def fd_config():
    """Default finite-difference settings"""
    return FDConfig()


@pytest.fixture
def ee_model():
    """Two-user energy-efficient game with SIC, registry defaults"""
    params = ChannelParams(gains=(1.0, 0.8), noise=0.01, max_powers=(1.0, 1.0))
    return wireless.make_energy_efficient_pc(params)


@pytest.fixture
def pricing_model():
    """Pricing variant with a processing gain of 100, registry defaults"""
    params = ChannelParams(gains=(1.0, 1.0), noise=0.01, max_powers=(1.0, 1.0), spreading_gain=100.0)
    return wireless.make_pricing_pc(params)


@pytest.fixture
def builtin_finite_games():
    """Every built-in finite game"""
    return [
        classic.prisoners_dilemma(),
        classic.matching_pennies(),
        classic.battle_of_sexes(),
        classic.chicken(),
        wireless.make_aloha(),
    ]


def brute_force_pure_ne(fg):
    """Independent oracle: try every unilateral deviation of every joint action."""
    found = []
    for joint in itertools.product(*(range(n) for n in fg.action_counts)):
        stable = True
        for i, n in enumerate(fg.action_counts):
            for alternative in range(n):
                deviated = joint[:i] + (alternative,) + joint[i + 1 :]
                if fg.payoffs[deviated][i] > fg.payoffs[joint][i]:
                    stable = False
        if stable:
            found.append(joint)
    return found


def random_integer_game(shape, seed, high=4):
    """Small integer payoffs so ties are common."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, high, size=tuple(shape) + (len(shape),)).astype(float)


def brute_force_pareto_optimal(fg, joint):
    """Independent oracle: no other cell is at least as good for all and better for one."""
    own = fg.payoffs[tuple(joint)]
    for other in itertools.product(*(range(n) for n in fg.action_counts)):
        candidate = fg.payoffs[other]
        if all(candidate >= own) and any(candidate > own):
            return False
    return True
