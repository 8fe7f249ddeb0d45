"""End-to-end checks of the python surface against hand-worked values.

The heavy numerical guarantees live in the C++ suites; here we verify the
bindings round-trip numpy correctly and the headline behaviors survive
the language boundary.
"""

import math

import numpy as np
import pytest

import uabayes as ub


def test_fuse_matches_bayes_rule():
    post = ub.fuse(np.array([0.3, 0.7]), np.array([0.6, 0.4]))
    np.testing.assert_allclose(post, [9 / 23, 14 / 23], rtol=1e-12)


def test_fuse_exponents_reweight_the_sources():
    prior = np.array([0.3, 0.7])
    lik = np.array([0.6, 0.4])
    # beta -> 0 leaves the likelihood distribution alone
    np.testing.assert_allclose(ub.fuse(prior, lik, alpha=1.0, beta=0.0), lik, rtol=1e-12)
    np.testing.assert_allclose(ub.fuse(prior, lik, alpha=0.0, beta=1.0), prior, rtol=1e-12)


def test_weights_to_temper_ratios():
    alpha, beta = ub.weights_to_temper(2.0, 1.0, 1.0)
    assert alpha == pytest.approx(0.5, abs=1e-15)
    assert beta == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        ub.weights_to_temper(1.0, 1.0, 2.0)  # collapses onto the MAP set


def test_gaussian_fuse_closed_form():
    mean, cov = ub.fuse_gaussian(
        np.array([1.0]), np.eye(1), np.array([0.1]), np.eye(1), alpha=1.0, beta=0.5
    )
    assert mean[0] == pytest.approx((0.1 + 0.5) / 1.5, abs=1e-14)
    assert cov[0, 0] == pytest.approx(1 / 1.5, abs=1e-14)


def test_brute_force_posterior_agrees_with_fuse():
    prior = np.array([0.2, 0.3, 0.5])
    lik = np.array([0.5, 0.25, 0.25])
    alpha, beta = ub.weights_to_temper(1.2, 0.8, 0.4)
    direct = ub.fuse(prior, lik, alpha=alpha, beta=beta)
    oracle = ub.brute_force_posterior(prior, lik, 1.2, 0.8, 0.4, tol=1e-13)
    np.testing.assert_allclose(oracle, direct, atol=1e-4)


def test_alpha_scale_limits_and_entropy_ordering():
    h = np.array([0.1, 0.2, 0.7])
    np.testing.assert_allclose(ub.alpha_scale(h, 0.0), np.full(3, 1 / 3), rtol=1e-12)
    ents = [ub.entropy(ub.alpha_scale(h, a)) for a in (0.5, 1.0, 2.0)]
    assert ents[0] > ents[1] > ents[2]
    assert ub.entropy(ub.alpha_scale(h, 1.0)) == ub.entropy(h)


def test_gaussian_scaling_matches_the_closed_forms():
    mean, cov = ub.alpha_scale_gaussian(np.zeros(1), 2.0 * np.eye(1), 4.0)
    assert cov[0, 0] == pytest.approx(0.5, abs=1e-15)
    ent = ub.gaussian_entropy(np.zeros(1), 0.5 * np.eye(1))
    assert ent == pytest.approx(0.5 * math.log(2 * math.pi * 0.5) + 0.5, abs=1e-12)
    kl = ub.gaussian_kl(np.zeros(1), 2.0 * np.eye(1), np.zeros(1), 0.5 * np.eye(1))
    assert kl == pytest.approx(-0.5 * math.log(4.0) + 2.0 - 0.5, abs=1e-12)
    with pytest.raises(ValueError):
        ub.alpha_scale_gaussian(np.zeros(1), np.eye(1), 0.0)


def test_best_scale_improves_the_two_atom_instance():
    h0 = np.array([0.2, 0.8])
    h = np.array([0.4, 0.6])
    assert abs(ub.scaling_gain(h0, h)) > 0.01
    alpha_star, kl_star = ub.best_scale(h0, h)
    assert kl_star < ub.kl_divergence(h0, h)
    assert alpha_star > 1.0  # h needs sharpening toward the more peaked target
    scaled = ub.alpha_scale(h, 2.0)
    assert ub.kl_divergence(h0, scaled) < ub.kl_divergence(h0, h)


def test_kalman_step_hand_case_and_beta_inflation():
    args = (
        np.array([0.0]),
        np.eye(1),
        np.eye(1),
        np.eye(1),
        np.eye(1),
        np.zeros((1, 1)),
        np.eye(1),
        np.array([2.0]),
    )
    mean, cov = ub.ua_kalman_step(*args)
    assert mean[0] == pytest.approx(1.0, abs=1e-13)
    assert cov[0, 0] == pytest.approx(0.5, abs=1e-13)
    _, half = ub.ua_kalman_step(*args, alpha=1.0, beta=0.5)
    assert half[0, 0] > cov[0, 0]


def test_particle_step_through_python_callables():
    states = np.array([1.0, 2.0, 3.0, 4.0])
    weights = np.full(4, 0.25)
    new_states, new_weights = ub.ua_pf_step(
        states,
        weights,
        lambda x, k: x,  # identity dynamics
        lambda x: x,
        process_var=1.0,
        meas_var=1.0,
        y=2.0,
        k=1,
        noise=np.zeros(4),
        u=0.0,
        ess_threshold=0.5,  # ESS is at least 1, so never resample
    )
    np.testing.assert_allclose(new_states, states)
    expected = weights * np.exp(-0.5 * (2.0 - states) ** 2)
    np.testing.assert_allclose(new_weights, expected / expected.sum(), rtol=1e-12)

    assert ub.effective_sample_size(np.full(4, 0.25)) == pytest.approx(4.0)
    resampled, uniform = ub.systematic_resample(
        np.array([10.0, 20.0]), np.array([0.25, 0.75]), 0.1
    )
    np.testing.assert_allclose(sorted(resampled), [10.0, 20.0])
    np.testing.assert_allclose(uniform, [0.5, 0.5])


def test_rtamse_pools_components():
    est = np.array([[1.0, 0.0], [1.0, 0.0]])
    truth = np.zeros((2, 2))
    assert ub.rtamse(est, truth) == pytest.approx(1.0, abs=1e-15)


def test_classifier_ratio_invariance():
    rng = np.random.default_rng(7)
    features = np.vstack([rng.normal(0, 1, (30, 3)), rng.normal(2, 1, (30, 3))])
    labels = np.array([0] * 30 + [1] * 30, dtype=np.int32)
    model = ub.train_gaussian_nb(features, labels)
    assert model.error_rate(features, labels, 0.5) < 0.2
    for _ in range(50):
        x = rng.normal(1, 2, 3)
        alpha, beta = rng.uniform(0.1, 3.0, 2)
        assert model.predict_ab(x, alpha, beta) == model.predict_lambda(
            x, alpha / (alpha + beta)
        )


def test_tuning_guarantees():
    loss = lambda w: float((w[0] - 0.3) ** 2 + (w[1] - 2.0) ** 2)
    grid = ub.grid_search(loss, np.zeros(2), np.full(2, 3.0), 0.1)
    assert grid["best_value"] == pytest.approx(0.0, abs=1e-12)
    start = np.ones(2)
    sur = ub.surrogate_minimize(loss, np.zeros(2), np.full(2, 3.0), 40, 11, start)
    assert sur["best_value"] <= loss(start)
    assert sur["evaluations"] == 40
    repeat = ub.surrogate_minimize(loss, np.zeros(2), np.full(2, 3.0), 40, 11, start)
    assert repeat["best_value"] == sur["best_value"]


def test_experiment_one_shots_stay_consistent():
    assert ub.check_scaling_properties(404, 25)

    table = ub.pf_error_table(3, episodes=3, horizon=20, particle_counts=[50], alphas=[0.25, 1.0])
    assert len(table) == 2
    assert all(row["completed"] == 3 and row["rtamse"] > 0 for row in table)
    again = ub.pf_error_table(3, episodes=3, horizon=20, particle_counts=[50], alphas=[0.25, 1.0])
    assert [row["rtamse"] for row in again] == [row["rtamse"] for row in table]

    res = ub.imm_tuning(5, episodes=2, horizon=15, incomplete=True, tau=2.0, grid_step=0.5)
    assert res["tuned_rtamse"] <= res["baseline_rtamse"]

    cls = ub.classifier_tuning(3, prior_corruption=True, lambda_step=0.05, budget=20)
    assert cls["accuracy_star"] >= cls["accuracy_at_half"]
