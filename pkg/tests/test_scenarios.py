import math

import numpy as np
import pytest

from qmeter import (
    BosonicSpace,
    CompletenessUnachievable,
    IncompleteKrausSet,
    KrausSet,
    NonUnitState,
    ScenarioConfig,
    TruncationError,
    classical_teleportation_preset,
    cloning_error,
    coherent_grid_completeness,
    eavesdrop_simulation,
    eigendecompose,
    named_observable,
    optimal_estimate,
    averaged_disturbance,
    photon_detector_preset,
    qnd_preset,
    resolution_disturbance_check,
    run_scenario,
    validate_completeness,
)
from qmeter.serialization import report_json_bytes
from qmeter.verify import random_complete_kraus_set

SZ = named_observable("sz")
SX = named_observable("sx")
SY = named_observable("sy")


def qnd_oracle_distribution(m, sigma, grid, levels):
    """Oracle: retrodicted photon-number distribution from scalar sums only."""
    per_level = [sum(math.exp(-((g - n) ** 2) / (2 * sigma ** 2)) for g in grid)
                 for n in range(levels)]
    weights = [math.exp(-((m - n) ** 2) / (2 * sigma ** 2)) / per_level[n]
               for n in range(levels)]
    total = sum(weights)
    return [w / total for w in weights]


class TestPhotonPreset:
    def test_characterization_values(self):
        space = BosonicSpace(40)
        kraus = photon_detector_preset(space)
        assert not kraus.complete
        n_obs = named_observable("n", 40)
        op = kraus.operator("n=1")
        est = optimal_estimate(op, n_obs)
        dist = averaged_disturbance(op, n_obs)
        assert est.estimate == pytest.approx(1.0, abs=1e-12)
        assert est.error == pytest.approx(0.0, abs=1e-12)
        assert dist.value == pytest.approx(1.0, abs=1e-12)

    def test_uncertainty_vs_quadrature(self):
        space = BosonicSpace(40)
        op = photon_detector_preset(space).operator("n=1")
        check = resolution_disturbance_check(op, named_observable("n", 40),
                                             named_observable("x", 40))
        assert check.satisfied
        assert check.chain_ok

    def test_minimal_space(self):
        op = photon_detector_preset(BosonicSpace(2)).operator("n=1")
        n_obs = named_observable("n", 2)
        assert optimal_estimate(op, n_obs).estimate == pytest.approx(1.0, abs=1e-15)
        assert averaged_disturbance(op, n_obs).value == pytest.approx(1.0, abs=1e-15)


class TestQndPreset:
    def test_complete_and_nondemolition(self):
        space = BosonicSpace(30)
        kraus = qnd_preset(space, 5.0, list(range(-10, 41)))
        report = validate_completeness(kraus)
        assert report.max_deviation <= 1e-12
        n_obs = named_observable("n", 30)
        for label, op in kraus.items():
            assert averaged_disturbance(op, n_obs).value <= 1e-12

    def test_resolution_matches_direct_sum_oracle(self):
        space = BosonicSpace(30)
        grid = list(range(-10, 41))
        kraus = qnd_preset(space, 5.0, grid)
        n_obs = named_observable("n", 30)
        dist = qnd_oracle_distribution(10.0, 5.0, grid, 30)
        mean = sum(n * p for n, p in enumerate(dist))
        var = sum(n * n * p for n, p in enumerate(dist)) - mean ** 2
        est = optimal_estimate(kraus.operator("m=10"), n_obs)
        assert est.estimate == pytest.approx(mean, abs=1e-10)
        assert est.error == pytest.approx(var, abs=1e-10)

    def test_wide_pointer_approaches_uniform(self):
        levels = 12
        grid = list(range(-5, 18))
        kraus = qnd_preset(BosonicSpace(levels), 1e8, grid)
        n_obs = named_observable("n", levels)
        est = optimal_estimate(kraus.operator("m=5"), n_obs)
        uniform_var = (levels ** 2 - 1) / 12.0
        assert est.error == pytest.approx(uniform_var, abs=1e-6)

    def test_unreachable_level_rejected(self):
        with pytest.raises(CompletenessUnachievable):
            qnd_preset(BosonicSpace(40), 0.05, [0.0])

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            qnd_preset(BosonicSpace(4), -1.0, [0.0])
        with pytest.raises(ValueError):
            qnd_preset(BosonicSpace(4), 1.0, [])


class TestClassicalTeleportation:
    @pytest.mark.parametrize("alpha", [0j, 0.5 + 0.3j, 1 + 1j])
    def test_quadrature_report(self, alpha):
        report = classical_teleportation_preset(alpha, BosonicSpace(60))
        assert abs(report.estimate - alpha) < 1e-6
        assert report.resolution_x == pytest.approx(0.25, abs=1e-6)
        assert report.resolution_y == pytest.approx(0.25, abs=1e-6)
        assert report.disturbance_x == pytest.approx(0.5, abs=1e-4)
        assert report.disturbance_y == pytest.approx(0.5, abs=1e-4)

    def test_prefactor_invariance(self):
        # the 1/sqrt(pi) density prefactor cancels in every reported quantity
        space = BosonicSpace(40)
        from qmeter import coherent_state
        vec = coherent_state(0.7 + 0.2j, space).vector
        n_obs = named_observable("x", 40)
        for scale in (1.0, 1 / math.sqrt(math.pi), 3.7):
            op = scale * np.outer(vec, vec.conj())
            est = optimal_estimate(op, n_obs)
            assert est.estimate == pytest.approx(0.7, abs=1e-9)
            assert est.error == pytest.approx(0.25, abs=1e-9)

    def test_truncation_guard(self):
        with pytest.raises(TruncationError):
            classical_teleportation_preset(4.0, BosonicSpace(8))

    def test_grid_completeness_improves_with_density(self):
        space = BosonicSpace(12)
        coarse = coherent_grid_completeness(space, 4.0, 1.0, check_levels=3)
        fine = coherent_grid_completeness(space, 4.0, 0.25, check_levels=3)
        assert fine["max_deviation"] < coarse["max_deviation"]
        assert fine["max_deviation"] < 0.01


def projective_set(observable):
    ops = tuple(np.outer(observable.eigenvectors[:, k], observable.eigenvectors[:, k].conj())
                for k in range(observable.dim))
    return KrausSet(operators=ops, labels=tuple(f"p{k}" for k in range(observable.dim)),
                    complete=True)


class TestEavesdrop:
    def config(self, kraus, trials=100_000, seed=2024, forwarding="resend"):
        return ScenarioConfig(scenario="eavesdrop", dim=2, trials=trials, seed=seed,
                              observable_a=SZ, observable_b=SX, kraus=kraus,
                              forwarding=forwarding)

    def test_identity_eve_no_disturbance(self):
        kraus = KrausSet(operators=(np.eye(2, dtype=complex),), complete=True)
        report = eavesdrop_simulation(self.config(kraus, trials=20_000))
        assert report.bases[0].empirical.mean == 0.0
        assert report.bases[1].empirical.mean == 0.0
        assert report.passed

    def test_sz_projective_eve(self):
        report = eavesdrop_simulation(self.config(projective_set(SZ)))
        basis_a, basis_b = report.bases
        assert basis_a.empirical.mean == 0.0           # sent basis commutes
        assert basis_a.analytic == pytest.approx(0.0, abs=1e-12)
        assert basis_b.analytic == pytest.approx(2.0, abs=1e-12)
        assert abs(basis_b.empirical.mean - 2.0) <= 3 * basis_b.empirical.std_error
        assert report.passed

    def test_noisy_eve_matches_analytic(self):
        ops = (np.eye(2, dtype=complex) / math.sqrt(2), SZ.matrix / math.sqrt(2))
        kraus = KrausSet(operators=ops, labels=("keep", "flip"), complete=True)
        report = eavesdrop_simulation(self.config(kraus))
        basis_b = report.bases[1]
        # the phase-flip branch swaps the sx eigenstates: squared change 4,
        # taken with probability 1/2 -> overall 2
        assert basis_b.analytic == pytest.approx(2.0, abs=1e-12)
        for stat in basis_b.outcomes:
            if stat.outcome == "flip":
                assert stat.analytic == pytest.approx(4.0, abs=1e-12)
            else:
                assert stat.analytic == pytest.approx(0.0, abs=1e-12)
        assert report.passed

    def test_seed_reproducibility(self):
        config = self.config(projective_set(SZ), trials=30_000, seed=99)
        first = eavesdrop_simulation(config)
        second = eavesdrop_simulation(config)
        assert report_json_bytes(first) == report_json_bytes(second)
        third = eavesdrop_simulation(self.config(projective_set(SZ), trials=30_000, seed=100))
        assert report_json_bytes(first) != report_json_bytes(third)

    def test_reprepare_forwarding(self):
        report = eavesdrop_simulation(
            self.config(projective_set(SZ), trials=50_000, forwarding="reprepare"))
        # re-prepared sz eigenstates are still maximally uncertain in sx
        basis_b = report.bases[1]
        assert abs(basis_b.empirical.mean - 2.0) <= 3 * basis_b.empirical.std_error + 1e-12

    def test_reprepare_analytics_track_empirical(self):
        rng = np.random.Generator(np.random.Philox(key=89))
        from qmeter.verify import random_hermitian
        kraus = random_complete_kraus_set(3, 3, rng)
        obs_a = eigendecompose(random_hermitian(3, rng), name="A")
        obs_b = eigendecompose(random_hermitian(3, rng), name="B")
        config = ScenarioConfig(scenario="eavesdrop", dim=3, trials=150_000, seed=17,
                                observable_a=obs_a, observable_b=obs_b,
                                kraus=kraus, forwarding="reprepare")
        report = eavesdrop_simulation(config)
        assert report.passed
        for block in report.bases:
            assert block.within_three_se

    def test_incomplete_set_rejected(self):
        partial = KrausSet(operators=(np.outer([1, 0], [0, 1]),), complete=False)
        with pytest.raises(IncompleteKrausSet):
            eavesdrop_simulation(self.config(partial))

    def test_random_configurations_agree_with_analytic(self):
        rng = np.random.Generator(np.random.Philox(key=83))
        agree = 0
        total = 0
        for case in range(12):
            dim = int(rng.integers(2, 4))
            kraus = random_complete_kraus_set(dim, int(rng.integers(2, 4)), rng)
            from qmeter.verify import random_hermitian
            obs_a = eigendecompose(random_hermitian(dim, rng), name="A")
            obs_b = eigendecompose(random_hermitian(dim, rng), name="B")
            config = ScenarioConfig(scenario="eavesdrop", dim=dim, trials=100_000,
                                    seed=1000 + case, observable_a=obs_a,
                                    observable_b=obs_b, kraus=kraus)
            report = eavesdrop_simulation(config)
            for block in report.bases:
                total += 1
                agree += block.within_three_se
        assert agree / total >= 0.95


class TestCloning:
    def test_eigenbasis_clones_perfectly(self):
        states = [SZ.eigenvectors[:, k] for k in range(2)]
        report = cloning_error(states, SZ, check_completeness=True)
        assert report.completeness_deviation <= 1e-12
        for row in report.rows:
            assert row.resolution == pytest.approx(0.0, abs=1e-12)
            assert row.disturbance == pytest.approx(0.0, abs=1e-12)

    def test_sz_basis_disturbs_sx(self):
        states = [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)]
        report = cloning_error(states, SX)
        for row in report.rows:
            assert row.disturbance == pytest.approx(2.0, abs=1e-12)

    def test_sy_basis_symmetric_errors(self):
        states = [SY.eigenvectors[:, k] for k in range(2)]
        for observable, expected_res, expected_dist in ((SZ, 1.0, 2.0), (SX, 1.0, 2.0)):
            report = cloning_error(states, observable)
            for row in report.rows:
                assert row.resolution == pytest.approx(expected_res, abs=1e-12)
                assert row.disturbance == pytest.approx(expected_dist, abs=1e-12)
        for k in range(2):
            op = np.outer(SY.eigenvectors[:, k], SY.eigenvectors[:, k].conj())
            check = resolution_disturbance_check(op, SZ, SX)
            assert check.bound == pytest.approx(1.0, abs=1e-12)
            assert check.satisfied

    def test_non_unit_state_rejected(self):
        with pytest.raises(NonUnitState):
            cloning_error([np.array([1.0, 1.0])], SZ)


class TestRunScenario:
    def test_photon_dispatch(self):
        config = ScenarioConfig(scenario="photon", dim=3)
        report = run_scenario(config)
        assert report.passed
        row = report.body.outcomes[0].rows[0]
        assert row.estimate == pytest.approx(1.0, abs=1e-12)
        assert row.disturbance == pytest.approx(1.0, abs=1e-12)

    def test_qnd_dispatch(self):
        config = ScenarioConfig(scenario="qnd", dim=20, pointer_sigma=5.0,
                                outcome_grid=tuple(float(g) for g in range(-10, 31)))
        report = run_scenario(config)
        assert report.passed
        for outcome in report.body.outcomes:
            assert outcome.rows[0].disturbance <= 1e-12

    def test_unknown_scenario(self):
        with pytest.raises(ValueError):
            run_scenario(ScenarioConfig(scenario="nope", dim=2))

    def test_trials_validated(self):
        with pytest.raises(ValueError):
            ScenarioConfig(scenario="photon", dim=2, trials=0)
