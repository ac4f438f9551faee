"""Synthetic-cohort generator and the analyses that run blind to its truth."""

import math

import numpy as np
import pytest

from riskcounts import (
    CausalSpec,
    CovariateRule,
    DomainError,
    ProxyRule,
    banana_swap,
    false_cause_rate,
    generate,
    proxy_study,
    replication_study,
)

NULL_SPEC = CausalSpec(
    n_per_group=1_000, true_cause="none", baseline_p=0.01, effect_p=0.01
)

EFFECT_SPEC = CausalSpec(
    n_per_group=1_000,
    true_cause="exposure-label",
    baseline_p=0.005,
    effect_p=0.015,
)


def banana_spec(noise_sd=0.0):
    return CausalSpec(
        n_per_group=1_000,
        true_cause="exposure-label",
        baseline_p=0.005,
        effect_p=0.015,
        covariate_rules=(
            CovariateRule("banana_servings", intercept=1.0, slope=1.0, noise_sd=noise_sd),
        ),
    )


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------


def test_generation_is_bit_identical_across_calls():
    a = generate(EFFECT_SPEC, seed=42)
    b = generate(EFFECT_SPEC, seed=42)
    assert np.array_equal(a.outcome, b.outcome)
    assert np.array_equal(a.group, b.group)


def test_different_seeds_differ():
    a = generate(NULL_SPEC, seed=1)
    b = generate(NULL_SPEC, seed=2)
    assert not np.array_equal(a.outcome, b.outcome)


def test_tuple_seeds_are_accepted_and_distinct():
    a = generate(NULL_SPEC, seed=(9, 0))
    b = generate(NULL_SPEC, seed=(9, 1))
    assert not np.array_equal(a.outcome, b.outcome)


def test_replication_report_is_deterministic():
    r1 = replication_study(EFFECT_SPEC, replications=200, seed=3)
    r2 = replication_study(EFFECT_SPEC, replications=200, seed=3)
    assert r1 == r2


def test_cohort_arrays_are_read_only():
    c = generate(EFFECT_SPEC, seed=0)
    with pytest.raises(ValueError):
        c.outcome[0] = True


# ---------------------------------------------------------------------------
# the declared truth shows up in the margins
# ---------------------------------------------------------------------------


def test_null_cohort_outcome_rate():
    spec = CausalSpec(n_per_group=50_000, true_cause="none", baseline_p=0.01, effect_p=0.9)
    c = generate(spec, seed=11)
    rate = float(c.outcome.mean())
    se = math.sqrt(0.01 * 0.99 / 100_000)
    assert abs(rate - 0.01) <= 4 * se  # effect_p must be ignored under "none"


def test_exposure_label_effect_lands_on_the_exposed_arm():
    spec = CausalSpec(
        n_per_group=100_000, true_cause="exposure-label", baseline_p=0.005, effect_p=0.015
    )
    c = generate(spec, seed=5)
    rate_unexposed = float(c.outcome[~c.true_exposure].mean())
    rate_exposed = float(c.outcome[c.true_exposure].mean())
    assert abs(rate_unexposed - 0.005) <= 4 * math.sqrt(0.005 * 0.995 / 100_000)
    assert abs(rate_exposed - 0.015) <= 4 * math.sqrt(0.015 * 0.985 / 100_000)


def test_latent_factor_full_confounding_mirrors_group():
    spec = CausalSpec(
        n_per_group=10_000,
        true_cause="latent-factor",
        baseline_p=0.005,
        effect_p=0.015,
        latent_group_correlation=1.0,
    )
    c = generate(spec, seed=8)
    assert np.array_equal(c.latent, c.true_exposure)


def test_latent_factor_independent_when_correlation_zero():
    spec = CausalSpec(
        n_per_group=100_000,
        true_cause="latent-factor",
        baseline_p=0.005,
        effect_p=0.015,
        latent_group_correlation=0.0,
    )
    c = generate(spec, seed=8)
    # latent rate near one half in BOTH groups: no group information leaks
    for grp in (0, 1):
        rate = float(c.latent[c.group == grp].mean())
        assert abs(rate - 0.5) <= 4 * math.sqrt(0.25 / 100_000)
    # and the latent factor, not the label, drives outcomes
    rate_latent = float(c.outcome[c.latent].mean())
    rate_not = float(c.outcome[~c.latent].mean())
    assert rate_latent - rate_not > 0.008


def test_covariates_follow_their_rules_exactly_when_noiseless():
    c = generate(banana_spec(noise_sd=0.0), seed=2)
    servings = c.covariates["banana_servings"]
    np.testing.assert_array_equal(servings, 1.0 + c.group.astype(float))


def test_proxy_accuracy_one_is_the_truth():
    spec = CausalSpec(
        n_per_group=5_000, true_cause="exposure-label", baseline_p=0.005,
        effect_p=0.015, proxy_rule=ProxyRule(accuracy=1.0),
    )
    c = generate(spec, seed=4)
    assert np.array_equal(c.proxy_exposure, c.true_exposure)


def test_proxy_accuracy_rate_is_respected():
    spec = CausalSpec(
        n_per_group=100_000, true_cause="exposure-label", baseline_p=0.005,
        effect_p=0.015, proxy_rule=ProxyRule(accuracy=0.7),
    )
    c = generate(spec, seed=4)
    agree = float((c.proxy_exposure == c.true_exposure).mean())
    assert abs(agree - 0.7) <= 4 * math.sqrt(0.7 * 0.3 / 200_000)


# ---------------------------------------------------------------------------
# the label-swap argument
# ---------------------------------------------------------------------------


def test_banana_swap_identical_for_separating_covariate():
    c = generate(banana_spec(noise_sd=0.0), seed=1889)
    by_label, by_covariate = banana_swap(c, "banana_servings")
    assert by_label == by_covariate  # every field, exactly


def test_banana_swap_with_noise_usually_differs():
    c = generate(banana_spec(noise_sd=3.0), seed=1889)
    by_label, by_covariate = banana_swap(c, "banana_servings")
    assert by_label.p_value != by_covariate.p_value


def test_banana_swap_rejects_non_separating_covariates():
    flat = CausalSpec(
        n_per_group=100, true_cause="none", baseline_p=0.01, effect_p=0.01,
        covariate_rules=(CovariateRule("flat", intercept=2.0, slope=0.0),),
    )
    c = generate(flat, seed=0)
    with pytest.raises(DomainError):
        banana_swap(c, "flat")
    with pytest.raises(DomainError):
        banana_swap(c, "no_such_covariate")


def test_replication_rows_identical_for_noiseless_covariate():
    report = replication_study(banana_spec(noise_sd=0.0), replications=100, seed=7)
    by_label = report.row("true_exposure")
    by_banana = report.row("covariate_banana_servings")
    assert by_label.rejection_rate == by_banana.rejection_rate
    assert by_label.mean_p_value == by_banana.mean_p_value


# ---------------------------------------------------------------------------
# replication studies
# ---------------------------------------------------------------------------


def test_null_spec_rejection_rate_is_calibrated():
    report = replication_study(NULL_SPEC, replications=10_000, seed=20260819)
    assert report.rows[0].rejection_rate <= 0.06


def test_effect_spec_has_power():
    report = replication_study(EFFECT_SPEC, replications=500, seed=12)
    assert report.rows[0].rejection_rate > 0.3


def test_proxy_study_attenuates_power():
    spec = CausalSpec(
        n_per_group=1_000, true_cause="exposure-label", baseline_p=0.005,
        effect_p=0.015, proxy_rule=ProxyRule(accuracy=0.7),
    )
    report = proxy_study(spec, replications=400, seed=7)
    truth = report.row("true_exposure")
    proxy = report.row("proxy_exposure")
    assert truth.rejection_rate - proxy.rejection_rate > 0.15
    assert proxy.mean_p_value > truth.mean_p_value


def test_perfect_proxy_reproduces_the_true_analysis():
    spec = CausalSpec(
        n_per_group=1_000, true_cause="exposure-label", baseline_p=0.005,
        effect_p=0.015, proxy_rule=ProxyRule(accuracy=1.0),
    )
    report = proxy_study(spec, replications=300, seed=7)
    truth = report.row("true_exposure")
    proxy = report.row("proxy_exposure")
    assert truth.rejection_rate == proxy.rejection_rate
    assert truth.mean_p_value == proxy.mean_p_value


def test_false_cause_rate_null_is_small_but_confounded_is_large():
    null_rate = false_cause_rate(NULL_SPEC, replications=2_000, seed=6)
    assert null_rate <= 0.06
    confounded = CausalSpec(
        n_per_group=1_000, true_cause="latent-factor", baseline_p=0.005,
        effect_p=0.015, latent_group_correlation=1.0,
    )
    confounded_rate = false_cause_rate(confounded, replications=500, seed=6)
    assert confounded_rate > 0.3  # test happily blames the label


def test_false_cause_rate_grows_with_cohort_size():
    rates = []
    for n in (100, 1_000, 10_000):
        spec = CausalSpec(
            n_per_group=n, true_cause="latent-factor", baseline_p=0.005,
            effect_p=0.015, latent_group_correlation=1.0,
        )
        rates.append(false_cause_rate(spec, replications=300, seed=13))
    assert rates[0] < rates[1] < rates[2]
    assert rates[2] > 0.99


def test_false_cause_rate_refuses_true_effect_specs():
    with pytest.raises(DomainError):
        false_cause_rate(EFFECT_SPEC, replications=10)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def test_spec_validation():
    with pytest.raises(DomainError):
        CausalSpec(n_per_group=0, true_cause="none", baseline_p=0.1, effect_p=0.1)
    with pytest.raises(DomainError):
        CausalSpec(n_per_group=10, true_cause="fate", baseline_p=0.1, effect_p=0.1)
    with pytest.raises(DomainError):
        CausalSpec(n_per_group=10, true_cause="none", baseline_p=1.5, effect_p=0.1)
    with pytest.raises(DomainError):
        CausalSpec(
            n_per_group=10, true_cause="none", baseline_p=0.1, effect_p=0.1,
            covariate_rules=(CovariateRule("x", 0.0, 1.0), CovariateRule("x", 1.0, 1.0)),
        )
    with pytest.raises(DomainError):
        CausalSpec(n_per_group=6_000_000, true_cause="none", baseline_p=0.1, effect_p=0.1)


def test_replication_study_validates_replications():
    with pytest.raises(DomainError):
        replication_study(NULL_SPEC, replications=0)


def test_proxy_study_requires_a_proxy_rule():
    with pytest.raises(DomainError):
        proxy_study(NULL_SPEC, replications=10)
