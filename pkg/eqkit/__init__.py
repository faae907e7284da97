"""eqkit: existence, uniqueness, computation and efficiency of game equilibria"""

__version__ = "1.0.0"

from .model import FiniteGame, Game, Interval, JointDistribution, MixedProfile, StrategyProfile
from .runner import AnalysisRunner, run

__all__ = [
    "AnalysisRunner",
    "FiniteGame",
    "Game",
    "Interval",
    "JointDistribution",
    "MixedProfile",
    "StrategyProfile",
    "run",
]
