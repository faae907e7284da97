"""
Analysis runner: builds the configured game, runs the requested analyses in
order and collects their results into a RunReport.

A failing analysis is logged and recorded as an error; analyses that depend
on it are skipped with a reason. The run itself never raises for analysis
failures.
"""

import asyncio
import logging
import platform
import time
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import psutil

from . import __version__
from .analyzers.efficiency import efficiency_report, linear_constraint, normalized_eq_check, normalized_equilibrium
from .analyzers.structure import existence_report, uniqueness_report
from .config import RunConfig
from .errors import ParameterError
from .games import GameInstance, build_game
from .games.wireless import aloha_collision_frequency, aloha_public_signal
from .model import FiniteGame, JointDistribution, discretize
from .report import RunReport
from .solvers.correlated import ce_verify, optimal_correlated_equilibrium, regret_matching_ce
from .solvers.dynamics import basin_map, br_dynamics
from .solvers.mixed import mixed_ne_gain, support_enumeration_2p
from .solvers.nash import NashResult, nash_result, pure_ne_search
from .utils.serialization import to_jsonable

logger = logging.getLogger("eqkit.runner")

# analysis -> analyses whose results it consumes
DEPENDENCIES = {"efficiency": ("solve",)}


@dataclass
class HostInfo:
    """Machine a report was produced on"""

    os_type: str
    os_version: str
    architecture: str
    python_version: str
    physical_cores: int
    logical_cores: int
    total_ram_gb: float


def get_host_info() -> HostInfo:
    return HostInfo(
        os_type=platform.system(),
        os_version=platform.release(),
        architecture=platform.machine(),
        python_version=platform.python_version(),
        physical_cores=psutil.cpu_count(logical=False) or 0,
        logical_cores=psutil.cpu_count(logical=True) or 0,
        total_ram_gb=round(psutil.virtual_memory().total / (1024**3), 2),
    )


def basin_worker_count(requested: int) -> int:
    """0 means one worker per physical core."""
    if requested > 0:
        return requested
    return psutil.cpu_count(logical=False) or 1


class AnalysisRunner:
    """Runs the analyses of one configuration against one game instance"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.settings = config.settings
        self.fd = config.fd_config()
        self.instance: GameInstance = build_game(config.game.name, config.game.params)
        self.report = RunReport(config=config.echo(), toolkit_version=__version__)
        self.ne_set: Optional[List[NashResult]] = None
        self.grid_game: Optional[FiniteGame] = None
        self.setup_handlers()

    def setup_handlers(self) -> None:
        self.handlers: Dict[str, Callable[[], Dict[str, Any]]] = {
            "existence": self.run_existence,
            "uniqueness_evidence": self.run_uniqueness_evidence,
            "solve": self.run_solve,
            "basins": self.run_basins,
            "mixed": self.run_mixed,
            "correlated": self.run_correlated,
            "efficiency": self.run_efficiency,
            "normalized_eq": self.run_normalized_eq,
        }

    def list_analyses(self) -> List[str]:
        return list(self.handlers)

    async def run(self) -> RunReport:
        """Run every configured analysis in order"""
        logger.info(f"Running {list(self.config.analyses)} on {self.instance.name} (seed {self.config.seed})")
        self.report.host = asdict(get_host_info())
        for name in self.config.analyses:
            missing = self._missing_dependency(name)
            if missing is not None:
                logger.warning(f"Skipping {name}: {missing}")
                self.report.skipped[name] = missing
                continue
            await self.call_analysis(name)
        return self.report

    def _missing_dependency(self, name: str) -> Optional[str]:
        for dependency in DEPENDENCIES.get(name, ()):
            if dependency in self.report.errors:
                return f"requires {dependency!r}, which failed"
            if dependency in self.report.skipped:
                return f"requires {dependency!r}, which was skipped"
            if dependency not in self.report.results:
                return f"requires {dependency!r} earlier in the analyses list"
        return None

    async def call_analysis(self, name: str) -> Optional[Dict[str, Any]]:
        """Run one analysis and record its result or error"""
        if name not in self.handlers:
            raise ValueError(f"Unknown analysis: {name}")
        started = time.perf_counter()
        logger.info(f"Starting {name}")
        try:
            result = to_jsonable(await asyncio.to_thread(self.handlers[name]))
            self.report.results[name] = result
            return result
        except Exception as e:
            logger.error(f"Error running {name}: {e}")
            self.report.errors[name] = f"Error: {e}"
            return None
        finally:
            self.report.timings[name] = time.perf_counter() - started
            logger.info(f"Finished {name} in {self.report.timings[name]:.3f}s")

    # analyses

    def _finite(self, analysis: str) -> FiniteGame:
        if self.instance.finite is None:
            raise ParameterError(f"{analysis} needs a finite game, {self.instance.name} has interval strategies")
        return self.instance.finite

    def _discretized(self) -> FiniteGame:
        if self.grid_game is None:
            game = self.instance.game
            cells = self.settings.grid_points**game.player_count
            if cells > self.settings.max_grid_cells:
                raise ParameterError(
                    f"A {self.settings.grid_points}-point grid gives {cells} cells, above max_grid_cells="
                    f"{self.settings.max_grid_cells}"
                )
            self.grid_game = discretize(game, self.settings.grid_points)
        return self.grid_game

    def run_existence(self) -> Dict[str, Any]:
        game = self.instance.finite if self.instance.finite is not None else self.instance.game
        return existence_report(game, self.fd, phi=self.instance.phi).to_dict()

    def run_uniqueness_evidence(self) -> Dict[str, Any]:
        upper = None
        if self.instance.standard_br is not None and self.instance.game.is_continuous:
            upper = [s.upper for s in self.instance.game.spaces]  # type: ignore[union-attr]
        return uniqueness_report(
            self.instance.game,
            self.fd,
            r=self.settings.dsc_weights,
            standard_br=self.instance.standard_br,
            upper=upper,
        ).to_dict()

    def run_solve(self) -> Dict[str, Any]:
        if self.instance.finite is not None:
            self.ne_set = pure_ne_search(self.instance.finite)
            return {"method": "exhaustive", "ne_set": self.ne_set, "ne_count": len(self.ne_set)}

        game, s = self.instance.game, self.settings
        start = s.start if s.start is not None else tuple(space.lower for space in game.spaces)  # type: ignore[union-attr]
        trace = br_dynamics(
            game,
            start,
            max_iter=s.br_max_iter,
            tol=s.br_tol,
            points=s.br_points,
            simultaneous=s.simultaneous,
            deviation_points=s.deviation_points,
        )
        result: Dict[str, Any] = {"method": "best_response_dynamics", "trace": trace}

        grid_ne: List[NashResult] = []
        if s.grid_points**game.player_count <= s.max_grid_cells:
            grid_ne = pure_ne_search(self._discretized())
            result["grid_ne"] = grid_ne
            result["grid_points"] = s.grid_points
        else:
            logger.warning(f"{game.name}: grid search skipped, {s.grid_points}^{game.player_count} cells is too many")

        if grid_ne:
            self.ne_set = grid_ne
        elif trace.converged:
            self.ne_set = [nash_result(game, trace.limit, s.deviation_points)]  # type: ignore[arg-type]
        else:
            self.ne_set = []
        if self.instance.analytic_ne is not None:
            result["analytic_ne"] = nash_result(game, self.instance.analytic_ne, s.deviation_points)
        result["ne_set"] = self.ne_set
        result["ne_count"] = len(self.ne_set)
        return result

    def run_basins(self) -> Dict[str, Any]:
        s = self.settings
        basins = basin_map(
            self.instance.game,
            resolution=s.basin_resolution,
            max_iter=s.br_max_iter,
            tol=s.br_tol,
            points=s.br_points,
            simultaneous=s.simultaneous,
            deviation_points=s.basin_deviation_points,
            workers=basin_worker_count(s.basin_workers),
        )
        result = basins.to_dict()
        result["components"] = [basins.component_count(label) for label in range(basins.label_count)]
        return result

    def run_mixed(self) -> Dict[str, Any]:
        fg = self._finite("mixed")
        equilibria = support_enumeration_2p(fg)
        return {
            "equilibria": [[q.tolist() for q in mix.distributions] for mix in equilibria],
            "gains": [mixed_ne_gain(fg, mix) for mix in equilibria],
            "count": len(equilibria),
            "degenerate_supports": equilibria.degenerate_supports,
        }

    def run_correlated(self) -> Dict[str, Any]:
        fg = self._finite("correlated")
        empirical = regret_matching_ce(fg, self.settings.ce_iterations, self.config.seed)
        optimal = optimal_correlated_equilibrium(fg)
        result: Dict[str, Any] = {
            "regret_matching": empirical,
            "optimal": {
                "probabilities": optimal.probabilities.tolist(),
                "welfare": float(np.sum(optimal.probabilities * fg.payoffs.sum(axis=-1))),
                "max_violation": ce_verify(fg, optimal),
            },
        }
        if self.instance.name == "aloha":
            mixed = [
                mix for mix in support_enumeration_2p(fg) if all(np.all(q > 0) for q in mix.distributions)
            ]
            result["collision_frequency"] = {
                "regret_matching": aloha_collision_frequency(empirical.distribution),
                "optimal": aloha_collision_frequency(optimal),
                "public_signal": aloha_collision_frequency(aloha_public_signal()),
                "mixed_ne": (
                    aloha_collision_frequency(JointDistribution.from_mixed(mixed[0])) if mixed else None
                ),
            }
        return result

    def run_efficiency(self) -> Dict[str, Any]:
        if not self.ne_set:
            raise ParameterError("solve found no equilibrium, efficiency needs a nonempty NE set")
        fg = self.instance.finite if self.instance.finite is not None else self._discretized()
        return efficiency_report(fg, self.ne_set, energy_model=self.instance.efficiency_model).to_dict()

    def run_normalized_eq(self) -> Dict[str, Any]:
        spec = self.settings.constraint
        if spec is None:
            raise ParameterError("normalized_eq needs settings.constraint")
        game, s = self.instance.game, self.settings
        weights = spec.weights if spec.weights is not None else (1.0,) * game.player_count
        constraint = linear_constraint(spec.total, weights, spec.coefficients)
        solution = normalized_equilibrium(game, constraint, self.fd, points=s.br_points, start=s.start)
        verdict = normalized_eq_check(game, solution.profile, constraint, self.fd, s.deviation_points)
        return {"equilibrium": solution, "check": verdict}


async def run_async(config: RunConfig) -> RunReport:
    return await AnalysisRunner(config).run()


def run(config: RunConfig) -> RunReport:
    """Synchronous entry point: one run, one report."""
    return asyncio.run(run_async(config))
