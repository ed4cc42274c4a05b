"""
GMM Service - data-generating process, mean estimators, analytic bias/variance
table and the Monte Carlo engine that verifies it.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import EmptyGroup, InvalidParameters
from app.core.logging_config import banner, logger
from app.models.models import MeanEstimatorKind, TradeoffCell
from app.schemas.gmm_schemas import (
    GmmParams,
    McConfig,
    MeanEstimate,
    MonteCarloResult,
    ScalarSample,
    TradeoffEntry,
    TradeoffStandardErrors,
    VerificationCell,
    VerificationReport,
)

SINGLE_VALUE_KINDS = (
    MeanEstimatorKind.OVERALL,
    MeanEstimatorKind.ENSEMBLE,
    MeanEstimatorKind.DIS_ONLY,
    MeanEstimatorKind.PRIV_ONLY,
)


# ---------------------------------------------------------------------------
# SAMPLING
# ---------------------------------------------------------------------------

def _draw_groups(
    params: GmmParams, rng: np.random.Generator, size: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw `size` datasets at once: (size, n_priv) and (size, n_dis) matrices."""
    priv = rng.normal(params.mu_priv, math.sqrt(params.sigma2_priv), size=(size, params.n_priv))
    dis = rng.normal(params.mu_dis, math.sqrt(params.sigma2_dis), size=(size, params.n_dis))
    return priv, dis


def sample_dataset(params: GmmParams, seed: int) -> List[ScalarSample]:
    """Draw n_priv privileged then n_dis disadvantaged samples; counts are fixed."""
    priv, dis = _draw_groups(params, np.random.default_rng(seed), size=1)
    return [ScalarSample(float(v), True) for v in priv[0]] + [
        ScalarSample(float(v), False) for v in dis[0]
    ]


# ---------------------------------------------------------------------------
# ESTIMATORS
# ---------------------------------------------------------------------------

def _group_means(samples: Sequence[ScalarSample]) -> Tuple[np.ndarray, np.ndarray]:
    if not samples:
        raise EmptyGroup("estimate_mean needs at least one sample")
    values = np.fromiter((s.value for s in samples), dtype=float, count=len(samples))
    flags = np.fromiter((s.is_priv for s in samples), dtype=bool, count=len(samples))
    return values[flags], values[~flags]


def _mean_or_raise(values: np.ndarray, group: str, kind: MeanEstimatorKind) -> float:
    if values.size == 0:
        raise EmptyGroup(f"Estimator {kind.value} needs {group} samples but the group is empty")
    return float(np.mean(values))


def estimate_mean(kind: MeanEstimatorKind, samples: Sequence[ScalarSample]) -> MeanEstimate:
    priv, dis = _group_means(samples)

    if kind == MeanEstimatorKind.OVERALL:
        overall = float(np.mean(np.concatenate([priv, dis])))
        return MeanEstimate(value_for_priv=overall, value_for_dis=overall)

    if kind == MeanEstimatorKind.PRIV_ONLY:
        mu = _mean_or_raise(priv, "privileged", kind)
        return MeanEstimate(value_for_priv=mu, value_for_dis=mu)

    if kind == MeanEstimatorKind.DIS_ONLY:
        mu = _mean_or_raise(dis, "disadvantaged", kind)
        return MeanEstimate(value_for_priv=mu, value_for_dis=mu)

    mu_priv = _mean_or_raise(priv, "privileged", kind)
    mu_dis = _mean_or_raise(dis, "disadvantaged", kind)
    if kind == MeanEstimatorKind.CIID:
        return MeanEstimate(value_for_priv=mu_priv, value_for_dis=mu_dis)

    ensemble = (mu_priv + mu_dis) / 2
    return MeanEstimate(value_for_priv=ensemble, value_for_dis=ensemble)


def _estimator_values(
    kind: MeanEstimatorKind,
    priv_means: np.ndarray,
    dis_means: np.ndarray,
    overall: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised estimate_mean over replicates: (value_for_priv, value_for_dis)."""
    if kind == MeanEstimatorKind.OVERALL:
        return overall, overall
    if kind == MeanEstimatorKind.PRIV_ONLY:
        return priv_means, priv_means
    if kind == MeanEstimatorKind.DIS_ONLY:
        return dis_means, dis_means
    if kind == MeanEstimatorKind.CIID:
        return priv_means, dis_means
    ensemble = (priv_means + dis_means) / 2
    return ensemble, ensemble


# ---------------------------------------------------------------------------
# ANALYTIC TABLE
# ---------------------------------------------------------------------------

def analytic_tradeoffs(
    params: GmmParams, signed: bool = False
) -> Dict[MeanEstimatorKind, TradeoffEntry]:
    """
    Closed-form bias and variance of every estimator on each group.

    With signed=True biases are E[estimate] - mu_group, so the difference
    mu_dis - mu_priv keeps its sign; the default returns magnitudes.
    """
    d = params.signed_delta_mu
    var_priv = params.sigma2_priv / params.n_priv
    var_dis = params.sigma2_dis / params.n_dis
    var_overall = (params.p_priv * params.sigma2_priv + params.p_dis * params.sigma2_dis) / params.n
    var_ensemble = 0.25 * (var_priv + var_dis)

    raw = {
        MeanEstimatorKind.OVERALL: (params.p_dis * d, -params.p_priv * d, var_overall, var_overall),
        MeanEstimatorKind.CIID: (0.0, 0.0, var_priv, var_dis),
        MeanEstimatorKind.ENSEMBLE: (d / 2, -d / 2, var_ensemble, var_ensemble),
        MeanEstimatorKind.DIS_ONLY: (d, 0.0, var_dis, var_dis),
        MeanEstimatorKind.PRIV_ONLY: (0.0, -d, var_priv, var_priv),
    }

    table = {}
    for kind, (b_priv, b_dis, v_priv, v_dis) in raw.items():
        if not signed:
            b_priv, b_dis = abs(b_priv), abs(b_dis)
        table[kind] = TradeoffEntry(
            bias_on_priv=b_priv,
            bias_on_dis=b_dis,
            variance_on_priv=v_priv,
            variance_on_dis=v_dis,
        )
    return table


def sweep_tradeoffs(
    params: GmmParams, delta_mus: Iterable[float]
) -> List[Tuple[float, Dict[MeanEstimatorKind, TradeoffEntry]]]:
    """Analytic table for mu_dis = mu_priv + delta, for each delta."""
    return [
        (delta, analytic_tradeoffs(with_delta_mu(params, delta)))
        for delta in delta_mus
    ]


def with_delta_mu(params: GmmParams, delta: float) -> GmmParams:
    return params.model_copy(update={"mu_dis": params.mu_priv + delta})


# ---------------------------------------------------------------------------
# MOMENTS
# ---------------------------------------------------------------------------

def _mean_and_se(values: np.ndarray, target: float) -> Tuple[float, float]:
    r = values.size
    bias = float(np.mean(values - target))
    se = float(np.std(values, ddof=1) / math.sqrt(r))
    return bias, se


def _variance_and_se(values: np.ndarray) -> Tuple[float, float]:
    """Sample variance and its standard error, computed on shifted data."""
    r = values.size
    shifted = values - values[0]
    centred = shifted - np.mean(shifted)
    var = float(np.sum(centred**2) / (r - 1))
    m4 = float(np.mean(centred**4))
    se2 = (m4 - var**2 * (r - 3) / (r - 1)) / r
    return var, math.sqrt(max(se2, 0.0))


# ---------------------------------------------------------------------------
# MONTE CARLO ENGINE
# ---------------------------------------------------------------------------

class MonteCarloVerifier:
    """
    Monte Carlo verification of the analytic table.

    Replicates are drawn in fixed-size blocks; block b draws from
    SeedSequence(seed, spawn_key=(b,)), so results depend only on the seed and
    the block size, never on how blocks are scheduled across workers.
    """

    def __init__(self, workers: Optional[int] = None, block_size: Optional[int] = None):
        self.workers = workers or settings.WORKERS
        self.block_size = block_size or settings.MC_BLOCK_SIZE

    # ------------------------------------------------------------------
    # SIMULATION
    # ------------------------------------------------------------------
    def _simulate_block(
        self, params: GmmParams, mc: McConfig, block: int
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        start = block * self.block_size
        size = min(self.block_size, mc.replicates - start)
        rng = np.random.default_rng(np.random.SeedSequence(mc.seed, spawn_key=(block,)))
        priv, dis = _draw_groups(params, rng, size)
        priv_sum = priv.sum(axis=1)
        dis_sum = dis.sum(axis=1)
        overall = (priv_sum + dis_sum) / params.n
        return priv_sum / params.n_priv, dis_sum / params.n_dis, overall

    def simulate(
        self, params: GmmParams, mc: McConfig
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-replicate (priv mean, dis mean, overall mean), in replicate order."""
        n_blocks = math.ceil(mc.replicates / self.block_size)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            blocks = list(pool.map(lambda b: self._simulate_block(params, mc, b), range(n_blocks)))
        priv_means = np.concatenate([b[0] for b in blocks])
        dis_means = np.concatenate([b[1] for b in blocks])
        overall = np.concatenate([b[2] for b in blocks])
        return priv_means, dis_means, overall

    # ------------------------------------------------------------------
    # EMPIRICAL TABLE
    # ------------------------------------------------------------------
    @staticmethod
    def _empirical(
        params: GmmParams,
        kind: MeanEstimatorKind,
        simulated: Tuple[np.ndarray, np.ndarray, np.ndarray],
        replicates: int,
    ) -> MonteCarloResult:
        est_priv, est_dis = _estimator_values(kind, *simulated)
        bias_priv, se_bias_priv = _mean_and_se(est_priv, params.mu_priv)
        bias_dis, se_bias_dis = _mean_and_se(est_dis, params.mu_dis)
        var_priv, se_var_priv = _variance_and_se(est_priv)
        if est_dis is est_priv:
            var_dis, se_var_dis = var_priv, se_var_priv
        else:
            var_dis, se_var_dis = _variance_and_se(est_dis)

        return MonteCarloResult(
            kind=kind,
            replicates=replicates,
            entry=TradeoffEntry(
                bias_on_priv=bias_priv,
                bias_on_dis=bias_dis,
                variance_on_priv=var_priv,
                variance_on_dis=var_dis,
            ),
            standard_errors=TradeoffStandardErrors(
                bias_on_priv=se_bias_priv,
                bias_on_dis=se_bias_dis,
                variance_on_priv=se_var_priv,
                variance_on_dis=se_var_dis,
            ),
        )

    def monte_carlo_tradeoffs(
        self, params: GmmParams, kind: MeanEstimatorKind, mc: McConfig
    ) -> MonteCarloResult:
        logger.info(
            f"Monte Carlo tradeoffs : kind={kind.value} , "
            f"replicates={mc.replicates} , seed={mc.seed}"
        )
        return self._empirical(params, kind, self.simulate(params, mc), mc.replicates)

    # ------------------------------------------------------------------
    # VERIFY
    # ------------------------------------------------------------------
    def verify_table(
        self, params: GmmParams, mc: McConfig, abs_tol: float, se_mult: float
    ) -> VerificationReport:
        if se_mult <= 0:
            raise InvalidParameters(f"se_mult must be > 0, got {se_mult}")
        if abs_tol < 0:
            raise InvalidParameters(f"abs_tol must be >= 0, got {abs_tol}")

        logger.info(banner("gmm verify"))
        logger.info(
            f"Verifying table : mu_priv={params.mu_priv} , mu_dis={params.mu_dis} , "
            f"sigma2_priv={params.sigma2_priv} , sigma2_dis={params.sigma2_dis} , "
            f"n_priv={params.n_priv} , n_dis={params.n_dis} , replicates={mc.replicates}"
        )

        simulated = self.simulate(params, mc)
        analytic = analytic_tradeoffs(params, signed=True)

        cells: List[VerificationCell] = []
        for kind in MeanEstimatorKind:
            result = self._empirical(params, kind, simulated, mc.replicates)
            for cell in TradeoffCell:
                expected = analytic[kind].cell(cell)
                observed = result.entry.cell(cell)
                se = result.standard_errors.cell(cell)
                passed = abs(observed - expected) <= max(abs_tol, se_mult * se)
                cells.append(
                    VerificationCell(
                        estimator=kind,
                        cell=cell,
                        analytic=expected,
                        empirical=observed,
                        se=se,
                        passed=passed,
                    )
                )

        report = VerificationReport(
            params=params, mc=mc, abs_tol=abs_tol, se_mult=se_mult, cells=cells
        )
        failures = report.failures()
        if failures:
            for c in failures:
                logger.warning(
                    f"Cell failed : estimator={c.estimator.value} , cell={c.cell.value} , "
                    f"analytic={c.analytic:.6g} , empirical={c.empirical:.6g} , se={c.se:.3g}"
                )
        logger.info(f"Verification finished : cells={len(cells)} , failed={len(failures)}")
        return report
