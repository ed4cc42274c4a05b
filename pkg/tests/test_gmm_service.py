import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import EmptyGroup, InvalidParameters
from app.models.models import MeanEstimatorKind, TradeoffCell
from app.schemas.gmm_schemas import GmmParams, McConfig, ScalarSample
from app.services.gmm_service import (
    MonteCarloVerifier,
    analytic_tradeoffs,
    estimate_mean,
    sample_dataset,
    sweep_tradeoffs,
    with_delta_mu,
)

BIAS_CELLS = (TradeoffCell.BIAS_ON_PRIV, TradeoffCell.BIAS_ON_DIS)
VARIANCE_CELLS = (TradeoffCell.VARIANCE_ON_PRIV, TradeoffCell.VARIANCE_ON_DIS)


def _params(**overrides) -> GmmParams:
    base = dict(mu_priv=0.0, mu_dis=1.0, sigma2_priv=1.0, sigma2_dis=1.0, n_priv=80, n_dis=20)
    base.update(overrides)
    return GmmParams(**base)


def _samples(pairs):
    return [ScalarSample(float(v), flag) for v, flag in pairs]


# ---------------------------------------------------------------------------
# SAMPLING
# ---------------------------------------------------------------------------

def test_zero_variance_sample_is_exact():
    params = _params(mu_priv=1.0, mu_dis=3.0, sigma2_priv=0.0, sigma2_dis=0.0, n_priv=2, n_dis=1)
    samples = sample_dataset(params, seed=11)
    assert [s.value for s in samples] == [1.0, 1.0, 3.0]
    assert [s.is_priv for s in samples] == [True, True, False]


@pytest.mark.parametrize("n_priv,n_dis", [(1, 1), (80, 20), (3, 97)])
def test_sample_counts_are_fixed(n_priv, n_dis):
    samples = sample_dataset(_params(n_priv=n_priv, n_dis=n_dis), seed=3)
    assert len(samples) == n_priv + n_dis
    assert sum(s.is_priv for s in samples) == n_priv


def test_sample_is_deterministic_per_seed():
    params = _params()
    assert sample_dataset(params, 5) == sample_dataset(params, 5)
    assert sample_dataset(params, 5) != sample_dataset(params, 6)


def test_grand_mean_converges():
    params = _params(mu_dis=0.0, n_priv=100_000, n_dis=100_000)
    values = np.array([s.value for s in sample_dataset(params, seed=2024)])
    assert abs(values.mean()) <= 4 / math.sqrt(200_000)


def test_negative_variance_rejected():
    with pytest.raises(ValidationError):
        _params(sigma2_priv=-1.0)


# ---------------------------------------------------------------------------
# ESTIMATORS
# ---------------------------------------------------------------------------

def test_overall_is_arithmetic_mean():
    est = estimate_mean(MeanEstimatorKind.OVERALL, _samples([(1, True), (3, True), (2, False)]))
    assert (est.value_for_priv, est.value_for_dis) == (2.0, 2.0)


@pytest.mark.parametrize(
    "kind", [MeanEstimatorKind.CIID, MeanEstimatorKind.ENSEMBLE, MeanEstimatorKind.DIS_ONLY]
)
def test_equal_group_means_collapse(kind):
    est = estimate_mean(kind, _samples([(1, True), (3, True), (2, False)]))
    assert (est.value_for_priv, est.value_for_dis) == (2.0, 2.0)


def test_hand_arithmetic_estimates():
    samples = _samples([(0, True), (4, True), (1, False)])
    ciid = estimate_mean(MeanEstimatorKind.CIID, samples)
    ensemble = estimate_mean(MeanEstimatorKind.ENSEMBLE, samples)
    overall = estimate_mean(MeanEstimatorKind.OVERALL, samples)

    assert (ciid.value_for_priv, ciid.value_for_dis) == (2.0, 1.0)
    assert (ensemble.value_for_priv, ensemble.value_for_dis) == (1.5, 1.5)
    assert overall.value_for_priv == pytest.approx(5 / 3, abs=1e-15)
    assert overall.value_for_priv == pytest.approx((2 / 3) * 2 + (1 / 3) * 1, abs=1e-15)


def test_priv_only_uses_privileged_mean():
    est = estimate_mean(MeanEstimatorKind.PRIV_ONLY, _samples([(0, True), (4, True), (1, False)]))
    assert (est.value_for_priv, est.value_for_dis) == (2.0, 2.0)


def test_empty_input_raises():
    with pytest.raises(EmptyGroup):
        estimate_mean(MeanEstimatorKind.OVERALL, [])


@pytest.mark.parametrize(
    "kind,pairs",
    [
        (MeanEstimatorKind.DIS_ONLY, [(1, True), (2, True)]),
        (MeanEstimatorKind.PRIV_ONLY, [(1, False)]),
        (MeanEstimatorKind.CIID, [(1, True)]),
        (MeanEstimatorKind.ENSEMBLE, [(1, False)]),
    ],
)
def test_missing_group_raises(kind, pairs):
    with pytest.raises(EmptyGroup):
        estimate_mean(kind, _samples(pairs))


def test_overall_tolerates_single_group():
    est = estimate_mean(MeanEstimatorKind.OVERALL, _samples([(1, True), (2, True)]))
    assert est.value_for_priv == 1.5


def test_reweighting_and_ensemble_identities_hold_on_random_datasets():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        n_priv, n_dis = rng.integers(1, 40, size=2)
        values = rng.normal(rng.uniform(-5, 5), rng.uniform(0.1, 3), size=n_priv + n_dis)
        samples = [ScalarSample(float(v), i < n_priv) for i, v in enumerate(values)]
        n = n_priv + n_dis

        overall = estimate_mean(MeanEstimatorKind.OVERALL, samples).value_for_priv
        priv = estimate_mean(MeanEstimatorKind.PRIV_ONLY, samples).value_for_priv
        dis = estimate_mean(MeanEstimatorKind.DIS_ONLY, samples).value_for_dis
        assert abs(overall - (n_priv / n * priv + n_dis / n * dis)) <= 1e-12

        ciid = estimate_mean(MeanEstimatorKind.CIID, samples)
        ensemble = estimate_mean(MeanEstimatorKind.ENSEMBLE, samples)
        expected = (ciid.value_for_priv + ciid.value_for_dis) / 2
        assert abs(ensemble.value_for_priv - expected) <= 1e-12
        assert ensemble.value_for_priv == ensemble.value_for_dis


@pytest.mark.parametrize("kind", list(MeanEstimatorKind))
def test_permutation_never_changes_estimates(kind):
    rng = np.random.default_rng(8)
    samples = sample_dataset(_params(n_priv=30, n_dis=12), seed=8)
    shuffled = [samples[i] for i in rng.permutation(len(samples))]

    a = estimate_mean(kind, samples)
    b = estimate_mean(kind, shuffled)
    assert a.value_for_priv == pytest.approx(b.value_for_priv, abs=1e-12)
    assert a.value_for_dis == pytest.approx(b.value_for_dis, abs=1e-12)


# ---------------------------------------------------------------------------
# ANALYTIC TABLE
# ---------------------------------------------------------------------------

def test_overall_bias_substitution():
    table = analytic_tradeoffs(_params(mu_dis=2.0))
    assert table[MeanEstimatorKind.OVERALL].bias_on_priv == pytest.approx(0.4)
    assert table[MeanEstimatorKind.OVERALL].bias_on_dis == pytest.approx(1.6)


def test_ciid_variance_on_dis():
    table = analytic_tradeoffs(_params(sigma2_priv=4.0, sigma2_dis=4.0, n_dis=100))
    assert table[MeanEstimatorKind.CIID].variance_on_dis == pytest.approx(0.04)


def test_identical_components_have_no_bias():
    table = analytic_tradeoffs(_params(mu_dis=0.0))
    for entry in table.values():
        assert entry.bias_on_priv == 0.0
        assert entry.bias_on_dis == 0.0


@pytest.mark.parametrize("n_priv,n_dis", [(80, 20), (50, 50), (7, 93)])
def test_equal_variances_collapse_overall_variance(n_priv, n_dis):
    table = analytic_tradeoffs(_params(sigma2_priv=2.5, sigma2_dis=2.5, n_priv=n_priv, n_dis=n_dis))
    expected = 2.5 / (n_priv + n_dis)
    assert table[MeanEstimatorKind.OVERALL].variance_on_priv == pytest.approx(expected)


def test_table_invariants():
    table = analytic_tradeoffs(_params(mu_dis=1.7, sigma2_priv=0.5, sigma2_dis=3.0))
    ciid = table[MeanEstimatorKind.CIID]
    assert ciid.bias_on_priv == 0.0 and ciid.bias_on_dis == 0.0
    for kind in (
        MeanEstimatorKind.OVERALL,
        MeanEstimatorKind.ENSEMBLE,
        MeanEstimatorKind.DIS_ONLY,
        MeanEstimatorKind.PRIV_ONLY,
    ):
        assert table[kind].variance_on_priv == table[kind].variance_on_dis


def test_signed_table_follows_direction_of_difference():
    signed = analytic_tradeoffs(_params(mu_priv=1.0, mu_dis=0.0), signed=True)
    assert signed[MeanEstimatorKind.OVERALL].bias_on_priv == pytest.approx(-0.2)
    assert signed[MeanEstimatorKind.OVERALL].bias_on_dis == pytest.approx(0.8)
    assert signed[MeanEstimatorKind.DIS_ONLY].bias_on_priv == pytest.approx(-1.0)


def test_mse_combines_bias_and_variance():
    entry = analytic_tradeoffs(_params(mu_dis=2.0))[MeanEstimatorKind.OVERALL]
    assert entry.mse_on_dis == pytest.approx(entry.bias_on_dis**2 + entry.variance_on_dis)


@pytest.mark.parametrize("n_priv", [1, 10, 49, 50, 51, 90, 99])
@pytest.mark.parametrize("delta", [0.3, 1.0, 4.0])
def test_overall_beats_ensemble_bias_on_dis_iff_majority_privileged(n_priv, delta):
    params = _params(mu_dis=delta, n_priv=n_priv, n_dis=100 - n_priv)
    table = analytic_tradeoffs(params)
    overall_dis = table[MeanEstimatorKind.OVERALL].bias_on_dis
    ensemble = table[MeanEstimatorKind.ENSEMBLE].bias_on_dis
    assert ensemble > 0
    assert (overall_dis > ensemble) == (params.p_priv > 0.5)


def test_sweep_shifts_disadvantaged_mean():
    sweep = sweep_tradeoffs(_params(mu_priv=0.5), [0.0, 2.0])
    assert [d for d, _ in sweep] == [0.0, 2.0]
    assert sweep[1][1][MeanEstimatorKind.DIS_ONLY].bias_on_priv == pytest.approx(2.0)
    assert with_delta_mu(_params(mu_priv=0.5), 2.0).mu_dis == 2.5


# ---------------------------------------------------------------------------
# MONTE CARLO
# ---------------------------------------------------------------------------

def test_unbiased_overall_when_components_coincide():
    params = _params(mu_dis=0.0, n_priv=50, n_dis=50)
    result = MonteCarloVerifier(workers=2).monte_carlo_tradeoffs(
        params, MeanEstimatorKind.OVERALL, McConfig(replicates=100_000, seed=1)
    )
    assert abs(result.entry.bias_on_priv) <= 4 * result.standard_errors.bias_on_priv


def test_overall_bias_matches_closed_form():
    params = _params()
    result = MonteCarloVerifier().monte_carlo_tradeoffs(
        params, MeanEstimatorKind.OVERALL, McConfig(replicates=200_000, seed=2)
    )
    assert abs(result.entry.bias_on_priv - 0.2) <= 4 * result.standard_errors.bias_on_priv


def test_ciid_variance_on_dis_matches_closed_form():
    params = _params()
    result = MonteCarloVerifier().monte_carlo_tradeoffs(
        params, MeanEstimatorKind.CIID, McConfig(replicates=200_000, seed=3)
    )
    assert result.entry.variance_on_dis == pytest.approx(0.05, rel=0.05)


def test_ciid_bias_cells_pass():
    report = MonteCarloVerifier().verify_table(
        _params(mu_dis=2.0, sigma2_dis=3.0), McConfig(replicates=200_000, seed=4), 1e-3, 4.0
    )
    ciid = [c for c in report.cells if c.estimator == MeanEstimatorKind.CIID]
    assert all(c.passed for c in ciid if c.cell in BIAS_CELLS)


def test_report_covers_every_estimator_and_cell():
    report = MonteCarloVerifier().verify_table(_params(), McConfig(replicates=500), 1e-3, 4.0)
    assert len(report.cells) == len(MeanEstimatorKind) * len(TradeoffCell)
    assert {(c.estimator, c.cell) for c in report.cells} == {
        (k, c) for k in MeanEstimatorKind for c in TradeoffCell
    }
    assert list(report.rows()[0]) == ["estimator", "cell", "analytic", "empirical", "se", "pass"]


def test_zero_variance_cells_are_exact():
    params = _params(mu_priv=1.0, mu_dis=3.0, sigma2_priv=0.0, sigma2_dis=0.0, n_priv=2, n_dis=1)
    report = MonteCarloVerifier().verify_table(params, McConfig(replicates=100, seed=0), 0.0, 4.0)
    variance = [c for c in report.cells if c.cell in VARIANCE_CELLS]
    assert all(c.empirical == 0.0 and c.passed for c in variance)


def test_results_do_not_depend_on_worker_count():
    params = _params()
    mc = McConfig(replicates=10_000, seed=9)
    one = MonteCarloVerifier(workers=1, block_size=1000).simulate(params, mc)
    many = MonteCarloVerifier(workers=6, block_size=1000).simulate(params, mc)
    for a, b in zip(one, many):
        np.testing.assert_array_equal(a, b)
    assert one[0].shape == (10_000,)


def test_non_positive_se_mult_rejected():
    with pytest.raises(InvalidParameters):
        MonteCarloVerifier().verify_table(_params(), McConfig(replicates=10), 1e-3, 0.0)


def test_single_replicate_rejected():
    with pytest.raises(ValidationError):
        McConfig(replicates=1)


@pytest.mark.slow
@pytest.mark.parametrize("delta", [0.0, 0.5, 1.0, 2.0])
def test_sweep_passes_every_cell(delta):
    params = with_delta_mu(_params(), delta)
    mc = McConfig(replicates=200_000, seed=0)
    report = MonteCarloVerifier().verify_table(params, mc, 1e-3, 4.0)
    assert report.all_passed, report.failures()


@pytest.mark.slow
@pytest.mark.parametrize("n_priv,n_dis", [(80, 20), (50, 50), (10, 90)])
@pytest.mark.parametrize("sigma2_priv,sigma2_dis", [(1.0, 1.0), (0.25, 4.0), (4.0, 0.5)])
@pytest.mark.parametrize("delta", [-1.5, 3.0])
def test_parameter_grid_passes(n_priv, n_dis, sigma2_priv, sigma2_dis, delta):
    params = _params(
        mu_dis=delta, n_priv=n_priv, n_dis=n_dis, sigma2_priv=sigma2_priv, sigma2_dis=sigma2_dis
    )
    mc = McConfig(replicates=200_000, seed=1)
    report = MonteCarloVerifier().verify_table(params, mc, 1e-3, 4.0)
    assert report.all_passed, report.failures()


@pytest.mark.slow
@pytest.mark.parametrize("variance_ratio", [1.0, 4.0])
@pytest.mark.parametrize("p_dis", [0.1, 0.3, 0.5])
@pytest.mark.parametrize("delta", [0.0, 1.0, 3.0])
def test_two_hundred_sample_grid_passes(delta, p_dis, variance_ratio):
    n_dis = round(200 * p_dis)
    params = _params(
        mu_dis=delta, n_priv=200 - n_dis, n_dis=n_dis, sigma2_priv=1.0, sigma2_dis=variance_ratio
    )
    assert params.n == 200 and params.p_dis == pytest.approx(p_dis)

    mc = McConfig(replicates=200_000, seed=0)
    report = MonteCarloVerifier().verify_table(params, mc, 1e-3, 4.0)
    assert report.all_passed, report.failures()
    assert len(report.cells) == 5 * 4
