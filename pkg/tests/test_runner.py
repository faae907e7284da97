"""Tests for the analysis runner"""

import json
from unittest.mock import patch

import pytest

from eqkit.config import load_config, parse_config
from eqkit.runner import AnalysisRunner, basin_worker_count, get_host_info

from .conftest import CONFIG_DIR


def make_runner(document):
    return AnalysisRunner(parse_config(json.dumps(document)))


@pytest.fixture
def cournot_runner():
    """Cournot solve and efficiency on a coarse grid"""
    return make_runner({"game": "cournot", "analyses": ["solve", "efficiency"], "settings": {"grid_points": 21}})


@pytest.mark.asyncio
async def test_runner_initialization(cournot_runner):
    """Test the runner builds the game and registers every analysis"""
    assert cournot_runner.instance.name == "cournot"
    assert cournot_runner.list_analyses() == [
        "existence",
        "uniqueness_evidence",
        "solve",
        "basins",
        "mixed",
        "correlated",
        "efficiency",
        "normalized_eq",
    ]
    assert cournot_runner.report.config["game"]["name"] == "cournot"


@pytest.mark.asyncio
async def test_cournot_solve_and_efficiency(cournot_runner):
    """Test the NE set contains (3, 3) and efficiency is computed on it"""
    report = await cournot_runner.run()
    assert report.completed
    assert report.errors == {}

    solve = report.results["solve"]
    assert solve["method"] == "best_response_dynamics"
    assert solve["trace"]["converged"]
    assert solve["trace"]["limit"] == pytest.approx([3.0, 3.0], abs=1e-6)
    assert solve["analytic_ne"]["utilities"] == [9.0, 9.0]
    assert any(ne["coordinates"] == pytest.approx([3.0, 3.0], abs=1e-9) for ne in solve["ne_set"])

    efficiency = report.results["efficiency"]
    assert efficiency["grid_resolution"] == [21, 21]
    assert efficiency["poa"] >= 1.0
    assert efficiency["max_welfare"] == pytest.approx(20.25)
    assert set(report.timings) == {"solve", "efficiency"}


@pytest.mark.asyncio
async def test_energy_efficient_existence():
    """Test the existence analysis concludes a pure NE for the energy-efficient game"""
    runner = make_runner({"game": "energy_efficient", "analyses": ["existence", "solve"], "settings": {"grid_points": 11}})
    report = await runner.run()
    assert report.completed
    assert report.results["existence"]["conclusion"] == "PURE_NE_GUARANTEED"
    assert report.results["existence"]["theorem"] == "Debreu-Fan-Glicksberg"
    assert report.results["solve"]["analytic_ne"]["epsilon"] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.asyncio
async def test_finite_game_analyses():
    """Test the exhaustive solver, mixed and correlated analyses on ALOHA"""
    runner = make_runner(
        {"game": "aloha", "analyses": ["solve", "mixed", "correlated", "efficiency"], "settings": {"ce_iterations": 2000}}
    )
    report = await runner.run()
    assert report.completed
    assert report.results["solve"]["method"] == "exhaustive"
    assert report.results["solve"]["ne_count"] == 2
    assert report.results["mixed"]["count"] == 3
    assert report.results["mixed"]["degenerate_supports"] == 0
    collisions = report.results["correlated"]["collision_frequency"]
    assert collisions["public_signal"] == 0.0
    assert collisions["mixed_ne"] == pytest.approx(0.2025)


@pytest.mark.asyncio
async def test_two_band_basins():
    """Test the basin analysis reports labels for every start"""
    runner = make_runner(
        {
            "game": "two_band",
            "analyses": ["basins"],
            "settings": {"basin_resolution": 5, "basin_deviation_points": 5, "br_max_iter": 50},
        }
    )
    report = await runner.run()
    basins = report.results["basins"]
    assert len(basins["labels"]) == 5
    assert len(basins["components"]) == basins["label_count"]


@pytest.mark.asyncio
async def test_normalized_eq_analysis():
    """Test the shared-constraint analysis finds lambda = 0.1"""
    runner = make_runner(
        {
            "game": "decoupled_concave",
            "analyses": ["normalized_eq"],
            "settings": {"constraint": {"total": 0.0}},
        }
    )
    report = await runner.run()
    result = report.results["normalized_eq"]
    assert result["equilibrium"]["common_multiplier"] == pytest.approx(0.1, abs=1e-6)
    assert result["check"]["holds"]


@pytest.mark.asyncio
async def test_failing_solve_skips_efficiency(cournot_runner):
    """Test a solver error is recorded and its dependents are skipped"""
    with patch("eqkit.runner.br_dynamics", side_effect=RuntimeError("boom")):
        report = await cournot_runner.run()
    assert report.errors["solve"] == "Error: boom"
    assert report.skipped["efficiency"] == "requires 'solve', which failed"
    assert "solve" in report.timings
    assert not report.completed


@pytest.mark.asyncio
async def test_efficiency_needs_solve_first():
    """Test efficiency before solve is skipped with a reason"""
    runner = make_runner({"game": "prisoners_dilemma", "analyses": ["efficiency", "solve"]})
    report = await runner.run()
    assert report.skipped["efficiency"] == "requires 'solve' earlier in the analyses list"
    assert "solve" in report.results


@pytest.mark.asyncio
async def test_analysis_errors_do_not_abort_the_run():
    """Test inapplicable analyses fail individually"""
    runner = make_runner({"game": "cournot", "analyses": ["mixed", "normalized_eq", "solve"], "settings": {"grid_points": 11}})
    report = await runner.run()
    assert report.errors["mixed"].startswith("Error: mixed needs a finite game")
    assert report.errors["normalized_eq"] == "Error: normalized_eq needs settings.constraint"
    assert "solve" in report.results


@pytest.mark.asyncio
async def test_unknown_analysis(cournot_runner):
    """Test calling an unknown analysis raises"""
    with pytest.raises(ValueError, match="Unknown analysis"):
        await cournot_runner.call_analysis("bogus")


@pytest.mark.asyncio
async def test_runs_are_deterministic():
    """Test two runs of every shipped configuration agree outside timings and host"""
    for path in sorted(CONFIG_DIR.glob("*.json")):
        config = load_config(path)
        first = await AnalysisRunner(config).run()
        second = await AnalysisRunner(config).run()
        assert first.deterministic_view() == second.deterministic_view(), path.name


def test_host_info():
    """Test host information is collected"""
    host = get_host_info()
    assert host.logical_cores >= 1
    assert host.total_ram_gb > 0


def test_basin_worker_count():
    """Test zero workers means one per physical core"""
    assert basin_worker_count(3) == 3
    assert basin_worker_count(0) >= 1
