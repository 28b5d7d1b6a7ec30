import numpy as np
import pytest

from bosonsim import (OnePhotonData, TransferMatrixEstimator, TwoPhotonData,
                      VisibilityRecord, assemble_transfer_matrix,
                      distribution, enumerate_outcomes, recover_magnitudes,
                      recover_phases, resample_lambda, simulate_one_photon,
                      simulate_two_photon, simulate_two_photon_data)
from bosonsim.exceptions import (DimensionError, UndefinedVisibilityError,
                                 UnderdeterminedPhaseSystemError)

from conftest import haar_unitary

BEAMSPLITTER = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def test_one_photon_exact_identity():
    data = simulate_one_photon(np.eye(3))
    np.testing.assert_array_equal(data.freq, np.eye(3))


def test_one_photon_exact_beamsplitter():
    data = simulate_one_photon(BEAMSPLITTER)
    np.testing.assert_allclose(data.freq, 0.5)


def test_one_photon_shot_noise_within_five_sigma():
    lam = haar_unitary(6, seed=30)
    exact = np.abs(lam) ** 2
    data = simulate_one_photon(lam, shots=1_000_000, seed=1)
    sigma = np.sqrt(data.variance)
    assert np.all(np.abs(data.freq - exact) <= 5 * sigma)


def test_two_photon_hom_dip():
    p_ind, p_dist, v = simulate_two_photon(BEAMSPLITTER, 0, 1, 0, 1)
    assert p_ind == pytest.approx(0.0, abs=1e-12)
    assert p_dist == pytest.approx(0.5, abs=1e-12)
    assert v == pytest.approx(1.0, abs=1e-12)


def test_two_photon_real_matrix_visibility_formula(rng):
    lam = np.abs(haar_unitary(4, seed=31))  # all phases zero
    for i1, i2, j1, j2 in [(0, 1, 0, 1), (0, 2, 1, 3), (1, 3, 0, 2)]:
        a = lam[i1, j1] * lam[i2, j2]
        b = lam[i1, j2] * lam[i2, j1]
        _, _, v = simulate_two_photon(lam, i1, i2, j1, j2)
        assert v == pytest.approx(-2 * a * b / (a * a + b * b), abs=1e-12)


def test_two_photon_consistency_with_distribution(rng):
    lam = haar_unitary(6, seed=32)
    for i1, i2, j1, j2 in [(0, 1, 0, 1), (1, 4, 2, 5), (0, 3, 1, 4)]:
        t = tuple(1 if k in (i1, i2) else 0 for k in range(6))
        s = tuple(1 if k in (j1, j2) else 0 for k in range(6))
        p_ind, _, _ = simulate_two_photon(lam, i1, i2, j1, j2)
        direct = distribution(lam, t, renormalize=False).prob_of(s)
        assert p_ind == pytest.approx(direct, abs=1e-12)


def test_two_photon_rejects_degenerate_modes():
    with pytest.raises(DimensionError):
        simulate_two_photon(BEAMSPLITTER, 0, 0, 0, 1)


def test_visibility_undefined_when_coincidence_vanishes():
    with pytest.raises(UndefinedVisibilityError):
        simulate_two_photon(np.eye(3), 0, 1, 0, 2)


def test_recover_magnitudes_row_rescaling():
    data = OnePhotonData(np.array([[0.25, 0.25, 0.5]]))
    np.testing.assert_allclose(
        recover_magnitudes(data), [[np.sqrt(0.5), np.sqrt(0.5), 1.0]]
    )


def test_recover_magnitudes_proportional_to_true(rng):
    lam = haar_unitary(5, seed=33)
    tau = recover_magnitudes(simulate_one_photon(lam))
    assert np.allclose(tau.max(axis=1), 1.0)
    ratio = tau / np.abs(lam)
    np.testing.assert_allclose(ratio - ratio[:, :1], 0.0, atol=1e-12)


@pytest.mark.parametrize("seed", [40, 41, 42])
def test_phase_recovery_round_trip(seed):
    lam = haar_unitary(6, seed=seed)
    tau = recover_magnitudes(simulate_one_photon(lam))
    fit = recover_phases(tau, simulate_two_photon_data(lam))
    assert fit.residual <= 1e-12
    lam_hat = assemble_transfer_matrix(tau, fit.phases)
    for t in [(0, 1, 1, 0, 1, 0), (1, 1, 0, 0, 1, 0)]:
        expected = distribution(lam, t, collision_free=True)
        got = distribution(lam_hat, t, collision_free=True)
        np.testing.assert_allclose(got.probs, expected.probs, atol=1e-6)


def test_real_matrix_phases_recovered_in_zero_pi():
    lam = haar_unitary(4, seed=44).real
    lam = lam / np.abs(lam).max()
    tau = recover_magnitudes(OnePhotonData(lam**2))
    fit = recover_phases(tau, simulate_two_photon_data(lam))
    assert fit.residual <= 1e-10
    wrapped = np.minimum(np.abs(fit.phases), np.abs(np.abs(fit.phases) - np.pi))
    assert np.all(wrapped <= 1e-6)


def test_underdetermined_system_reports_deficiency():
    lam = haar_unitary(3, seed=45)
    tau = recover_magnitudes(simulate_one_photon(lam))
    single = TwoPhotonData((VisibilityRecord(0, 1, 0, 1, 0.3),))
    with pytest.raises(UnderdeterminedPhaseSystemError) as excinfo:
        recover_phases(tau, single)
    assert excinfo.value.deficiency > 0


def test_phase_mask_forces_entries_to_zero():
    lam = haar_unitary(4, seed=46)
    tau = recover_magnitudes(simulate_one_photon(lam))
    mask = np.ones((4, 4), bool)
    mask[2, 3] = False
    fit = recover_phases(tau, simulate_two_photon_data(lam), mask=mask)
    assert fit.phases[2, 3] == 0.0


def test_resample_zero_variance_is_deterministic():
    lam = haar_unitary(3, seed=47)
    tau, phases = np.abs(lam), np.angle(lam)
    draws = resample_lambda(tau, phases, n_draws=5, seed=0)
    for k in range(5):
        np.testing.assert_allclose(draws[k], lam, atol=1e-12)


def test_resample_single_draw_perturbs():
    lam = haar_unitary(3, seed=48)
    tau, phases = np.abs(lam), np.angle(lam)
    draws = resample_lambda(tau, phases, tau_variance=1e-4 * np.ones((3, 3)),
                            n_draws=1, seed=1)
    assert draws.shape == (1, 3, 3)
    assert not np.allclose(draws[0], lam)


def test_resample_rejects_negative_variance():
    with pytest.raises(DimensionError):
        resample_lambda(np.ones((2, 2)), np.zeros((2, 2)),
                        tau_variance=-np.ones((2, 2)), n_draws=2)


def test_error_bars_shrink_with_shot_count():
    lam = haar_unitary(4, seed=49)
    t = (1, 1, 0, 0)
    spreads = []
    for shots in (10_000, 1_000_000):
        data = simulate_one_photon(lam, shots=shots, seed=7)
        tau = recover_magnitudes(data)
        fit = recover_phases(tau, simulate_two_photon_data(lam))
        # propagate one-photon variance through the row rescaling
        tau_var = data.variance / data.freq.max(axis=1, keepdims=True)
        draws = resample_lambda(tau, fit.phases, tau_variance=tau_var,
                                n_draws=60, seed=8)
        probs = np.array([
            distribution(d, t, collision_free=True).probs for d in draws
        ])
        spreads.append(probs.std(axis=0).mean())
    ratio = spreads[0] / spreads[1]
    assert 3.0 < ratio < 30.0  # expect ~10x shrink for 100x the shots


def test_estimator_follows_sklearn_protocol():
    est = TransferMatrixEstimator(n_starts=4, seed=3)
    params = est.get_params()
    assert params["n_starts"] == 4
    est.set_params(seed=5)
    assert est.seed == 5


def test_estimator_fit_and_predict():
    lam = haar_unitary(5, seed=50)
    est = TransferMatrixEstimator().fit(
        simulate_one_photon(lam), simulate_two_photon_data(lam)
    )
    assert est.residual_ <= 1e-10
    t = (1, 0, 1, 0, 1)
    expected = distribution(lam, t, collision_free=True)
    got = est.predict_distribution(t, collision_free=True)
    np.testing.assert_allclose(got.probs, expected.probs, atol=1e-6)
