"""Tests for the sampled structural checks and the existence flowchart"""

import numpy as np
import pytest

from eqkit.analyzers.structure import (
    ExistenceConclusion,
    FDConfig,
    UniquenessConclusion,
    VerdictStatus,
    check_dsc,
    check_potential_condition,
    check_quasiconcavity,
    check_smodular,
    check_standard_br,
    existence_report,
    uniqueness_report,
    verify_exact_potential,
)
from eqkit.errors import DomainError, ParameterError
from eqkit.games import build_game, classic, wireless
from eqkit.model import evaluate_utility
from eqkit.utils.numeric import cross_partial


def test_fd_config_validation():
    """Test invalid finite-difference settings are rejected"""
    with pytest.raises(ParameterError):
        FDConfig(step=0.0)
    with pytest.raises(ParameterError):
        FDConfig(dsc_convention="upside-down")
    with pytest.raises(ParameterError):
        FDConfig(alpha_max=1.0)


def test_energy_efficient_existence_is_debreu_fan_glicksberg(ee_model, fd_config):
    """Test the energy-efficient game concludes a pure NE by quasi-concavity"""
    report = existence_report(ee_model.game, fd_config)
    assert report.verdicts["quasi_concavity"].status is VerdictStatus.HOLDS_ON_SAMPLES
    assert report.conclusion is ExistenceConclusion.PURE_NE_GUARANTEED
    assert report.theorem == "Debreu-Fan-Glicksberg"
    assert report.label == "PURE_NE_GUARANTEED(Debreu-Fan-Glicksberg)"


def test_pricing_quasiconcavity_counterexample_replays(pricing_model, fd_config):
    """Test the pricing witness reproduces the dip when re-evaluated"""
    verdict = check_quasiconcavity(pricing_model.game, 0, fd_config)
    assert verdict.status is VerdictStatus.COUNTEREXAMPLE
    witness = verdict.witness
    profile = list(witness["profile"])
    player = witness["player"]

    def u(x):
        profile[player] = x
        return float(evaluate_utility(pricing_model.game, tuple(profile))[player])

    assert witness["a"] < witness["b"] < witness["c"]
    assert u(witness["b"]) == witness["u_b"]
    assert u(witness["b"]) < min(u(witness["a"]), u(witness["c"])) - witness["tolerance"]


def test_pricing_existence_is_topkis(pricing_model, fd_config):
    """Test the pricing game falls through to supermodularity"""
    report = existence_report(pricing_model.game, fd_config)
    assert report.verdicts["quasi_concavity"].status is VerdictStatus.COUNTEREXAMPLE
    assert report.verdicts["supermodular"].holds
    assert report.label == "PURE_NE_GUARANTEED(Topkis)"


def test_potential_pc_exact_potential_verified(fd_config):
    """Test sum(log p_i) is an exact potential on 1000 sampled deviations"""
    instance = build_game("potential_pc")
    verdict = verify_exact_potential(instance.game, instance.phi, fd_config)
    assert verdict.holds
    assert verdict.samples_used == 1000
    assert verdict.tolerance == 1e-6


def test_wrong_potential_is_rejected_with_witness(fd_config):
    """Test a wrong candidate potential yields a replayable counterexample"""
    instance = build_game("potential_pc")
    verdict = verify_exact_potential(instance.game, lambda values: float(np.sum(values)), fd_config)
    assert verdict.status is VerdictStatus.COUNTEREXAMPLE
    witness = verdict.witness
    assert witness["utility_difference"] != pytest.approx(witness["potential_difference"])


def test_finite_potential_exhaustive():
    """Test a finite potential game is checked on every deviation"""
    fg = classic.prisoners_dilemma()
    # PD is a potential game: phi(C,C)=0, phi(D,C)=phi(C,D)=2, phi(D,D)=3
    phi = np.array([[0.0, 2.0], [2.0, 3.0]])
    verdict = verify_exact_potential(fg, phi, FDConfig())
    assert verdict.holds
    assert verdict.samples_used == 8

    report = existence_report(fg, FDConfig(), phi=phi)
    assert report.label == "PURE_NE_GUARANTEED(Monderer-Shapley)"


def test_ordinal_potential_mode():
    """Test ordinal mode accepts a monotone transform of an exact potential"""
    fg = classic.prisoners_dilemma()
    phi = np.array([[0.0, 2.0], [2.0, 3.0]])
    assert not verify_exact_potential(fg, phi**3, FDConfig()).holds
    assert verify_exact_potential(fg, phi**3, FDConfig(), mode="ordinal").holds
    with pytest.raises(ParameterError):
        verify_exact_potential(fg, phi, FDConfig(), mode="cardinal")


def test_finite_game_without_potential_is_nash():
    """Test finite games conclude a mixed NE by Nash's theorem"""
    report = existence_report(classic.matching_pennies(), FDConfig())
    assert report.conclusion is ExistenceConclusion.MIXED_NE_GUARANTEED
    assert report.theorem == "Nash"


def test_smodular_signs_on_quadratic(fd_config):
    """Test positive coupling is supermodular and negative coupling submodular"""
    verdict = check_smodular(classic.make_quadratic_game(coupling=1.0), fd_config)
    assert verdict.supermodular.holds
    assert verdict.submodular.status is VerdictStatus.COUNTEREXAMPLE
    assert verdict.submodular.witness["cross_partial"] == pytest.approx(1.0, abs=1e-6)

    verdict = check_smodular(classic.make_quadratic_game(coupling=-1.0), fd_config)
    assert verdict.submodular.holds
    assert not verdict.supermodular.holds


def test_cross_partial_exact_on_quadratic():
    """Test central mixed differences reproduce the quadratic coupling"""
    game = classic.make_quadratic_game(own=2.0, coupling=0.75)
    value = cross_partial(lambda v: game.payoffs(v)[0], (0.2, -0.4), 0, 1, 1e-3, 1e-3)
    assert value == pytest.approx(0.75, abs=1e-6)


def test_cross_partial_error_quarters_with_half_step():
    """Test the FD error shrinks about fourfold when the step is halved"""
    game = wireless.make_two_band_pa(**wireless.TWO_BAND_ASYMMETRIC)
    gains, cross, sigma2 = (1.0, 0.7), (3.0, 2.5), 0.1
    theta = (0.5, 0.5)
    d1 = sigma2 + cross[0] * theta[1] + gains[0] * theta[0]
    d2 = sigma2 + cross[1] * (1 - theta[1]) + gains[1] * (1 - theta[0])
    exact = -gains[0] * cross[0] / d1**2 - gains[1] * cross[1] / d2**2

    def error(h):
        return abs(cross_partial(lambda v: game.payoffs(v)[0], theta, 0, 1, h, h) - exact)

    ratio = error(0.02) / error(0.01)
    assert 3.0 <= ratio <= 5.0


def test_potential_condition(fd_config):
    """Test equal cross-partials hold for a symmetric quadratic game"""
    assert check_potential_condition(classic.make_quadratic_game(coupling=0.5), fd_config).holds


def test_energy_efficient_potential_condition_fails(ee_model, fd_config):
    """Test the SIC game has unequal cross-partials"""
    verdict = check_potential_condition(ee_model.game, fd_config)
    assert verdict.status is VerdictStatus.COUNTEREXAMPLE
    assert "cross_partial_difference" in verdict.witness


def test_dsc_holds_on_decoupled_concave(fd_config):
    """Test DSC holds for 200 seeded pairs with zero violations"""
    verdict = check_dsc(classic.make_decoupled_concave(), [1.0, 1.0], fd_config)
    assert verdict.holds
    assert verdict.violations == 0
    assert verdict.samples_used == 200
    assert verdict.worst < 0


def test_dsc_literal_convention_flips_sign():
    """Test the literal reading reports the concave game as a counterexample"""
    verdict = check_dsc(classic.make_decoupled_concave(), [1.0, 1.0], FDConfig(dsc_convention="literal"))
    assert verdict.status is VerdictStatus.COUNTEREXAMPLE
    assert verdict.witness["convention"] == "literal"


def test_dsc_rejects_bad_weights(fd_config):
    """Test DSC weights must be positive, one per player"""
    with pytest.raises(ParameterError):
        check_dsc(classic.make_decoupled_concave(), [1.0, 0.0], fd_config)
    with pytest.raises(ParameterError):
        check_dsc(classic.make_decoupled_concave(), [1.0], fd_config)


def test_dsc_fails_on_convex_game(fd_config):
    """Test a game with convex own payoffs is not DSC"""
    game = classic.make_quadratic_game(own=-1.0, coupling=0.0)
    verdict = check_dsc(game, [1.0, 1.0], fd_config)
    assert verdict.status is VerdictStatus.COUNTEREXAMPLE
    assert verdict.violations == verdict.samples_used


def test_energy_efficient_standard_best_response(ee_model, fd_config):
    """Test the closed-form best response is monotone and scalable on 100 samples each"""
    verdict = check_standard_br(ee_model.closed_form_br, fd_config, ee_model.params.max_powers)
    assert verdict.monotonicity.holds
    assert verdict.scalability.holds
    assert verdict.monotonicity.samples_used == 100
    assert verdict.scalability.samples_used == 100
    assert verdict.combined.violations == 0


def test_scalability_detects_superlinear_map(fd_config):
    """Test affine maps are scalable and a quadratic map is not"""
    verdict = check_standard_br(lambda x: 2.0 * x + 1.0, fd_config, [1.0, 1.0])
    assert verdict.monotonicity.holds
    assert verdict.scalability.holds

    verdict = check_standard_br(lambda x: x**2 + 0.1, fd_config, [1.0, 1.0])
    assert verdict.scalability.status is VerdictStatus.COUNTEREXAMPLE
    witness = verdict.scalability.witness
    assert any(a >= b for a, b in zip(witness["g_alpha_x"], witness["alpha_g_x"]))


def test_negative_best_response_is_a_domain_error(fd_config):
    """Test best-response maps must stay nonnegative"""
    with pytest.raises(DomainError):
        check_standard_br(lambda x: x - 10.0, fd_config, [1.0])


def test_uniqueness_report_prefers_yates(ee_model, fd_config):
    """Test a passing standard-BR check concludes uniqueness by Yates"""
    report = uniqueness_report(ee_model.game, fd_config, standard_br=ee_model.closed_form_br)
    assert report.conclusion is UniquenessConclusion.UNIQUE_NE_GUARANTEED
    assert report.theorem == "Yates"


def test_uniqueness_report_rosen():
    """Test DSC alone concludes uniqueness by Rosen"""
    report = uniqueness_report(classic.make_decoupled_concave(), FDConfig())
    assert report.theorem == "Rosen"
    assert report.standard_br is None


def test_checks_are_deterministic(pricing_model):
    """Test equal seeds give identical verdicts"""
    first = check_smodular(pricing_model.game, FDConfig(seed=7)).to_dict()
    second = check_smodular(pricing_model.game, FDConfig(seed=7)).to_dict()
    assert first == second


def test_potential_verdict_ignores_constant_shift(fd_config):
    """Test phi and phi + c give the same potential and existence verdicts"""
    instance = build_game("potential_pc")
    base = verify_exact_potential(instance.game, instance.phi, fd_config)
    shifted = verify_exact_potential(instance.game, lambda values: instance.phi(values) + 7.5, fd_config)
    assert (shifted.status, shifted.violations, shifted.samples_used) == (base.status, base.violations, base.samples_used)
    base_report = existence_report(instance.game, fd_config, phi=instance.phi)
    shifted_report = existence_report(instance.game, fd_config, phi=lambda values: instance.phi(values) + 7.5)
    assert shifted_report.label == base_report.label
    assert shifted_report.verdicts["potential"].holds == base_report.verdicts["potential"].holds

    fg = classic.prisoners_dilemma()
    phi = np.array([[0.0, 2.0], [2.0, 3.0]])
    for c in (-4.0, 0.5, 100.0):
        assert verify_exact_potential(fg, phi + c, fd_config).to_dict() == verify_exact_potential(fg, phi, fd_config).to_dict()
        assert existence_report(fg, fd_config, phi=phi + c).label == existence_report(fg, fd_config, phi=phi).label


def test_dsc_verdict_ignores_common_weight_scale(fd_config):
    """Test multiplying every DSC weight by the same positive factor keeps the verdict"""
    games = [
        classic.make_decoupled_concave(),
        classic.make_quadratic_game(own=-1.0, coupling=0.0),
        classic.make_quadratic_game(own=0.25, coupling=1.0),
    ]
    for game in games:
        for r in ([1.0, 1.0], [1.0, 2.0]):
            base = check_dsc(game, r, fd_config)
            for factor in (0.01, 3.0, 250.0):
                scaled = check_dsc(game, [factor * w for w in r], fd_config)
                assert scaled.status is base.status
                assert scaled.violations == base.violations
                assert scaled.samples_used == base.samples_used
                assert scaled.worst == pytest.approx(factor * base.worst, rel=1e-9)


def test_cournot_is_submodular(fd_config):
    """Test the Cournot cross-partial -b makes the game submodular, not supermodular"""
    verdict = check_smodular(wireless.make_cournot().game, fd_config)
    assert verdict.submodular.holds
    assert verdict.supermodular.status is VerdictStatus.COUNTEREXAMPLE
    assert verdict.supermodular.witness["cross_partial"] == pytest.approx(-1.0, abs=1e-4)


def test_matching_pennies_has_no_potential(fd_config):
    """Test every candidate potential of matching pennies fails on some unilateral deviation"""
    fg = classic.matching_pennies()
    rng = np.random.default_rng(5)
    candidates = [np.zeros((2, 2)), np.array([[1.0, 0.0], [0.0, 1.0]]), fg.payoffs[..., 0]]
    candidates += [rng.normal(size=(2, 2)) for _ in range(20)]
    for phi in candidates:
        verdict = verify_exact_potential(fg, phi, fd_config)
        assert verdict.status is VerdictStatus.COUNTEREXAMPLE
        assert verdict.samples_used == 8

        # replay the witness and recount violations by a direct deviation scan
        witness = verdict.witness
        profile, i, b = tuple(witness["profile"]), witness["player"], witness["deviation"]
        deviated = profile[:i] + (b,) + profile[i + 1 :]
        assert fg.payoffs[profile][i] - fg.payoffs[deviated][i] != pytest.approx(phi[profile] - phi[deviated])
        mismatches = 0
        for joint in np.ndindex(2, 2):
            for player in range(2):
                other = joint[:player] + (1 - joint[player],) + joint[player + 1 :]
                du = fg.payoffs[joint][player] - fg.payoffs[other][player]
                if abs(du - (phi[joint] - phi[other])) > 1e-6 * max(1.0, abs(du), abs(phi[joint] - phi[other])):
                    mismatches += 1
        assert mismatches == verdict.violations
